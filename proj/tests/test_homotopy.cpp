#include <catch2/catch_amalgamated.hpp>

#include "wardrop/homotopy.hpp"
#include "wardrop/instances.hpp"
#include "wardrop/oracle.hpp"

using namespace wardrop;

namespace {

RegionVector region(std::initializer_list<int> one_based) {
  RegionVector r;
  for (int v : one_based) r.t.push_back(v - 1);
  return r;
}

}  // namespace

TEST_CASE("initialization of the worked examples") {
  {
    auto built = paper_example("ex_simple_undirected").build();
    Solver solver(built.net, built.costs);
    InitialPoint init = initial_point(built.net, solver.inverse_costs(), built.costs);
    CHECK(init.pi == VecR{0, 0, 0});
    CHECK(init.t == region({1, 1, 1}));
    CHECK(init.tight.empty());
  }
  {
    auto built = build_network(2, {{0, 1}}, 0, 1, {PiecewiseLinearCost::affine(1, 0)});
    Solver solver(built.net, built.costs);
    InitialPoint init = initial_point(built.net, solver.inverse_costs(), built.costs);
    CHECK(init.pi == VecR{0, 0});
    CHECK(init.t == region({1}));
  }
  {
    // two parallel directed paths with free-flow costs x+1: shortest-path labels
    InstanceBundle b;
    b.directed = true;
    b.vertex_names = {"s", "a", "b", "t"};
    b.source = 0;
    b.sink = 3;
    b.edges = {{0, 1}, {1, 3}, {0, 2}, {2, 3}};
    b.edge_ids = {"e1", "e2", "e3", "e4"};
    PiecewiseLinearCost c({ExtRat(0), ExtRat::pos_inf()}, {1}, {1});
    b.costs = {c, c, c, c};
    auto built = b.build();
    Solver solver(built.net, built.costs);
    InitialPoint init = initial_point(built.net, solver.inverse_costs(), built.costs);
    // labels are min-cost distances under l(0+) = 1
    CHECK(init.pi[static_cast<std::size_t>(built.net.sink())] == 2);
  }
}

TEST_CASE("golden run of the basic undirected example") {
  auto built = paper_example("ex_simple_undirected").build();
  SolveOptions opt;
  opt.record_trace = true;
  Solver solver(built.net, built.costs, opt);
  SolutionCurve curve = solver.run();

  REQUIRE(curve.segments.size() == 4);
  // lambda breakpoints 0, 2, 11/3, 5
  CHECK(curve.segments[0].lambda_lo == 0);
  CHECK(curve.segments[0].lambda_hi == ExtRat(2));
  CHECK(curve.segments[1].lambda_hi == ExtRat(Rat(11, 3)));
  CHECK(curve.segments[2].lambda_hi == ExtRat(5));
  CHECK(curve.segments[3].lambda_hi.is_pos_inf());

  // flows at the breakpoints
  CHECK(curve.segments[0].x0 == VecR{0, 0, 0});
  CHECK(curve.segments[1].x0 == VecR{1, 1, 1});
  CHECK(curve.segments[2].x0 == VecR{Rat(5, 3), Rat(5, 3), 2});
  CHECK(curve.segments[3].x0 == VecR{2, 2, 3});

  // flow slopes per region
  CHECK(curve.segments[0].dx == VecR{Rat(1, 2), Rat(1, 2), Rat(1, 2)});
  CHECK(curve.segments[1].dx == VecR{Rat(2, 5), Rat(2, 5), Rat(3, 5)});
  CHECK(curve.segments[2].dx == VecR{Rat(1, 4), Rat(1, 4), Rat(3, 4)});
  CHECK(curve.segments[3].dx == VecR{Rat(1, 5), Rat(1, 5), Rat(4, 5)});

  // regions and potentials
  CHECK(curve.segments[0].region == region({1, 1, 1}));
  CHECK(curve.segments[1].region == region({2, 1, 1}));
  CHECK(curve.segments[2].region == region({2, 1, 2}));
  CHECK(curve.segments[3].region == region({2, 2, 2}));
  CHECK(curve.segments[1].pi0 == VecR{0, 1, 2});
  CHECK(curve.segments[2].pi0 == VecR{0, Rat(7, 3), 4});
  CHECK(curve.segments[3].pi0 == VecR{0, 3, 5});

  // reduced Laplacian inverses along the run
  const auto& piv = solver.trace().pivots;
  REQUIRE(piv.size() == 4);
  CHECK(piv[0].H == Mat(2, 2, {Rat(3, 4), Rat(1, 2), Rat(1, 2), 1}));
  CHECK(piv[1].H == Mat(2, 2, {Rat(6, 5), Rat(4, 5), Rat(4, 5), Rat(6, 5)}));
  CHECK(piv[2].H == Mat(2, 2, {1, Rat(1, 2), Rat(1, 2), Rat(3, 4)}));
  CHECK(piv[3].H == Mat(2, 2, {Rat(6, 5), Rat(2, 5), Rat(2, 5), Rat(4, 5)}));

  // step lengths and boundary choices
  CHECK(piv[0].eps == ExtRat(2));
  CHECK(piv[0].argmin == std::vector<int>{0});
  CHECK(piv[0].dpi == VecR{0, Rat(1, 2), 1});
  CHECK(piv[1].eps == ExtRat(Rat(5, 3)));
  CHECK(piv[1].argmin == std::vector<int>{2});
  CHECK(piv[1].dpi == VecR{0, Rat(4, 5), Rat(6, 5)});
  CHECK(piv[2].eps == ExtRat(Rat(4, 3)));
  CHECK(piv[3].eps.is_pos_inf());

  CHECK(curve.stats.pivots == 3);
  CHECK(curve.stats.degenerate_points == 0);
  CHECK(curve.stats.jumps == 0);
}

TEST_CASE("single edge yields one unbounded segment") {
  auto built = build_network(2, {{0, 1}}, 0, 1, {PiecewiseLinearCost::affine(1, 0)});
  SolutionCurve curve = solve_parametric(built.net, built.costs);
  REQUIRE(curve.segments.size() == 1);
  CHECK(curve.segments[0].lambda_hi.is_pos_inf());
  CHECK(curve.segments[0].dx == VecR{1});
  auto [x, pi] = curve.sample(Rat(42));
  CHECK(x == VecR{42});
}

TEST_CASE("sampling the golden curve") {
  auto built = paper_example("ex_simple_undirected").build();
  SolutionCurve curve = solve_parametric(built.net, built.costs);
  {
    auto [x, pi] = curve.sample(Rat(2));
    CHECK(x == VecR{1, 1, 1});
    CHECK(pi == VecR{0, 1, 2});
  }
  {
    auto [x, pi] = curve.sample(Rat(0));
    CHECK(x == VecR{0, 0, 0});
  }
  {
    auto [x, pi] = curve.sample(Rat(3));
    CHECK(x == VecR{Rat(7, 5), Rat(7, 5), Rat(8, 5)});
  }
  {
    auto [x, pi] = curve.sample(Rat(5));
    CHECK(x == VecR{2, 2, 3});
  }
}

TEST_CASE("lambda_max cuts the curve") {
  auto built = paper_example("ex_simple_undirected").build();
  SolveOptions opt;
  opt.lambda_max = ExtRat(3);
  SolutionCurve curve = solve_parametric(built.net, built.costs, opt);
  REQUIRE(curve.segments.size() == 2);
  CHECK(curve.segments.back().lambda_hi == ExtRat(3));
  CHECK_THROWS_AS(curve.sample(Rat(4)), ValidationError);
}

TEST_CASE("curve continuity and equilibrium along random instances") {
  for (std::uint64_t seed = 100; seed < 112; ++seed) {
    InstanceBundle b = random_instance(seed);
    auto built = b.build();
    SolveOptions opt;
    opt.lambda_max = ExtRat(20);
    SolutionCurve curve = solve_parametric(built.net, built.costs, opt);
    REQUIRE(!curve.segments.empty());
    for (std::size_t i = 0; i + 1 < curve.segments.size(); ++i) {
      const CurveSegment& a = curve.segments[i];
      const CurveSegment& bb = curve.segments[i + 1];
      if (a.jump) continue;
      REQUIRE(a.lambda_hi.finite());
      Rat d = a.lambda_hi.value() - a.lambda_lo;
      for (std::size_t e = 0; e < a.x0.size(); ++e)
        CHECK(a.x0[e] + d * a.dx[e] == bb.x0[e]);
    }
    // equilibrium at sampled demands, exactly
    for (const CurveSegment& s : curve.segments) {
      if (s.jump) continue;
      Rat hi = s.lambda_hi.finite() ? s.lambda_hi.value() : s.lambda_lo + 3;
      for (int k = 1; k <= 3; ++k) {
        Rat lam = s.lambda_lo + Rat(k, 4) * (hi - s.lambda_lo);
        auto [x, pi] = curve.sample(lam);
        CHECK(sandwich_gap(built.net, built.costs, x, pi) == 0);
        CHECK(verify_equilibrium(built.net, built.costs, x).gap == 0);
      }
    }
  }
}

TEST_CASE("direction is independent of lambda inside a region") {
  auto built = paper_example("ex_simple_undirected").build();
  SolutionCurve curve = solve_parametric(built.net, built.costs);
  for (const CurveSegment& s : curve.segments) {
    if (!s.lambda_hi.finite()) continue;
    // linear interpolation between the segment ends reproduces sample()
    Rat mid = (s.lambda_lo + s.lambda_hi.value()) / 2;
    auto [x, pi] = curve.sample(mid);
    for (std::size_t e = 0; e < x.size(); ++e)
      CHECK(x[e] == s.x0[e] + (mid - s.lambda_lo) * s.dx[e]);
  }
}
