#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "wardrop/homotopy.hpp"
#include "wardrop/instances.hpp"
#include "wardrop/oracle.hpp"

using namespace wardrop;

TEST_CASE("nested Braess family sizes and coefficients") {
  {
    auto b = nested_braess(1);
    CHECK(b.vertex_names.size() == 4);
    CHECK(b.edges.size() == 5);
    CHECK(b.constant_costs);
    // the inner edge is the last one and has constant cost zero
    const auto& inner = b.costs.back();
    CHECK(inner.slope(0) == 0);
    CHECK(inner.offset(0) == 0);
  }
  {
    auto b = nested_braess(3);
    CHECK(b.vertex_names.size() == 8);
    CHECK(b.edges.size() == 13);
    // outer shortcut offsets are 100 (both families, per the figure)
    bool found_e2 = false, found_e3 = false;
    for (std::size_t i = 0; i < b.edges.size(); ++i) {
      if (b.edges[i].tail == 0 && b.edges[i].head == 6) {
        CHECK(b.costs[i].offset(0) == 100);
        found_e2 = true;
      }
      if (b.edges[i].tail == 1 && b.edges[i].head == 7) {
        CHECK(b.costs[i].offset(0) == 100);
        found_e3 = true;
      }
    }
    CHECK(found_e2);
    CHECK(found_e3);
  }
  CHECK(nested_braess(2).edges.size() == 9);
  CHECK(nested_braess(4).edges.size() == 17);
  CHECK(nested_braess(4).vertex_names.size() == 10);
  CHECK_THROWS_AS(nested_braess(0), ValidationError);
}

TEST_CASE("epsilon variant replaces constant slopes") {
  auto b = nested_braess(2, Rat(1, 1000000));
  CHECK_FALSE(b.constant_costs);
  for (const auto& c : b.costs) CHECK(c.slope(0) > 0);
  CHECK_NOTHROW(b.build());
}

TEST_CASE("paper examples validate and build") {
  for (const char* name :
       {"ex_simple_undirected", "ex_lexicographic", "ex_ambiguous", "fig1_regions"}) {
    auto b = paper_example(name);
    CHECK_NOTHROW(b.build());
    CHECK(b.edges.size() == 3);
  }
  auto deg = paper_example("fig_degenerate_region");
  CHECK(deg.constant_costs);
  CHECK_NOTHROW(deg.build());
  auto deg2 = paper_example("fig_degenerate_region", ExtRat(2));
  CHECK_FALSE(deg2.constant_costs);
  // alpha = 2 middle piece: x/2 + 1/2
  CHECK(deg2.costs[1].slope(1) == Rat(1, 2));
  CHECK(deg2.costs[1].offset(1) == Rat(1, 2));
  CHECK_THROWS_AS(paper_example("nope"), ValidationError);
}

TEST_CASE("fig1 instance has the figure's breakpoints") {
  auto b = paper_example("fig1_regions");
  CHECK(b.costs[0].tau()[1] == ExtRat(2));
  CHECK(b.costs[1].tau()[1] == ExtRat(1));
  CHECK(b.costs[2].tau()[1] == ExtRat(1));
  CHECK(b.costs[1].slope(1) == Rat(1, 2));
  CHECK(b.costs[2].slope(1) == Rat(1, 4));
}

TEST_CASE("random instances build and are deterministic per seed") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    InstanceBundle a = random_instance(seed);
    InstanceBundle b = random_instance(seed);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      CHECK(a.edges[i].tail == b.edges[i].tail);
      CHECK(a.edges[i].head == b.edges[i].head);
    }
    CHECK(a.vertex_names.size() <= 6);
    CHECK(a.edges.size() <= 12);
    CHECK_NOTHROW(a.build());
  }
}

TEST_CASE("braess support sets lower bound for small j") {
  for (int j = 1; j <= 2; ++j) {
    auto b = nested_braess(j, Rat(1, 1000000));
    auto built = b.build();
    Rat horizon = 3;
    for (int k = 1; k < j; ++k) horizon *= 10;
    SolveOptions opt;
    opt.lambda_max = ExtRat(horizon);
    SolutionCurve curve = solve_parametric(built.net, built.costs, opt);
    std::set<std::vector<int>> supports;
    for (const CurveSegment& s : curve.segments) {
      if (s.jump) continue;
      ExtRat hi = s.lambda_hi;
      Rat hiv = hi.finite() ? hi.value() : s.lambda_lo + 1;
      Rat mid = (s.lambda_lo + hiv) / 2;
      if (ExtRat(mid) >= ExtRat(horizon)) continue;
      auto [x, pi] = curve.sample(mid);
      supports.insert(support_set(x));
    }
    // also count the zero-demand support
    auto [x0, pi0] = curve.sample(Rat(0));
    supports.insert(support_set(x0));
    CHECK(supports.size() >= static_cast<std::size_t>(1 << (j + 1)));
  }
}

TEST_CASE("high demand routes over the outer edges only") {
  auto b = nested_braess(2, Rat(1, 1000000));
  auto built = b.build();
  SolveOptions opt;
  Rat q = 50;  // >= 2 * 10^(j-1) = 20
  opt.lambda_max = ExtRat(q + 1);
  SolutionCurve curve = solve_parametric(built.net, built.costs, opt);
  auto [x, pi] = curve.sample(q);
  // outer edges (s,v1), (s,v4), (v1,t), (v4,t) carry about q/2 each
  int outer_count = 0;
  for (std::size_t i = 0; i < b.edges.size(); ++i) {
    bool outer = (b.edges[i].tail == 0 && b.edges[i].head == 1) ||
                 (b.edges[i].tail == 0 && b.edges[i].head == 4) ||
                 (b.edges[i].tail == 1 && b.edges[i].head == 5) ||
                 (b.edges[i].tail == 4 && b.edges[i].head == 5);
    Rat flow = x[static_cast<std::size_t>(built.rep_edge[i])];
    if (outer) {
      ++outer_count;
      CHECK(flow * 2 - q <= Rat(1, 100));
      CHECK(q - flow * 2 <= Rat(1, 100));
    } else {
      CHECK(flow <= Rat(1, 100));
    }
  }
  CHECK(outer_count == 4);
}
