#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "wardrop/costs.hpp"
#include "wardrop/instances.hpp"

using namespace wardrop;

namespace {

// ex_ambiguous e2: directed, unit slope, jump at flow 1, capacity 2
PiecewiseLinearCost ambiguous_e2() {
  return PiecewiseLinearCost({ExtRat(0), ExtRat(1), ExtRat(2)}, {1, 1}, {0, 2});
}

// ex_simple_undirected e1: x for x < 1, 2x - 1 for x >= 1
PiecewiseLinearCost simple_e1() {
  return fixtures::two_piece(1, 0, 1, 2, -1);
}

}  // namespace

TEST_CASE("inverting the directed capacitated cost of the ambiguous example") {
  InverseCost inv = invert_cost(ambiguous_e2());
  // pieces: 0 below 0; v on [0,1); 1 on [1,3); v-2 on [3,4); 2 above 4
  REQUIRE(inv.size() == 5);
  CHECK(inv.seg(0).kind == SegKind::Flat);
  CHECK(inv.seg(0).sig_lo.is_neg_inf());
  CHECK(inv.seg(0).sig_hi == ExtRat(0));
  CHECK(inv.seg(0).tau_lo == ExtRat(0));
  CHECK(inv.seg(1).kind == SegKind::Sloped);
  CHECK(inv.seg(1).c == Rat(1));
  CHECK(inv.seg(1).d == Rat(0));
  CHECK(inv.seg(2).kind == SegKind::Flat);
  CHECK(inv.seg(2).sig_lo == ExtRat(1));
  CHECK(inv.seg(2).sig_hi == ExtRat(3));
  CHECK(inv.seg(2).tau_lo == ExtRat(1));
  CHECK(inv.seg(3).kind == SegKind::Sloped);
  CHECK(inv.seg(3).c == Rat(1));
  CHECK(inv.seg(3).d == Rat(2));
  CHECK(inv.seg(4).kind == SegKind::Flat);
  CHECK(inv.seg(4).sig_lo == ExtRat(4));
  CHECK(inv.seg(4).sig_hi.is_pos_inf());
  CHECK(inv.seg(4).tau_lo == ExtRat(2));
  CHECK(inv.evaluate(ExtRat(2)) == ExtRat(1));  // flat piece
}

TEST_CASE("identity cost inverts to identity") {
  InverseCost inv = invert_cost(PiecewiseLinearCost::affine(1, 0));
  REQUIRE(inv.size() == 1);
  CHECK(inv.seg(0).kind == SegKind::Sloped);
  CHECK(inv.seg(0).c == Rat(1));
  CHECK(inv.seg(0).d == Rat(0));
  CHECK(inv.evaluate(ExtRat(0)) == ExtRat(0));
}

TEST_CASE("two-piece cost of the basic example inverts piecewise") {
  PiecewiseLinearCost c = simple_e1();
  InverseCost inv = invert_cost(c);
  REQUIRE(inv.size() == 2);
  CHECK(inv.seg(0).c == Rat(1));
  CHECK(inv.seg(0).d == Rat(0));
  CHECK(inv.seg(0).sig_hi == ExtRat(1));
  CHECK(inv.seg(1).c == Rat(1, 2));
  CHECK(inv.seg(1).d == Rat(-1, 2));
  for (const Rat& v : {Rat(0), Rat(1, 2), Rat(1), Rat(3)}) {
    ExtRat x = inv.evaluate(ExtRat(v));
    auto [lo, hi] = c.evaluate(x.value());
    CHECK(lo == ExtRat(v));
    CHECK(hi == ExtRat(v));
  }
}

TEST_CASE("one-sided evaluation at breakpoints") {
  // the lexicographic example e3: x for x < 2, 12x - 22 for x >= 2
  PiecewiseLinearCost c = fixtures::two_piece(1, 0, 2, 12, -22);
  auto [lo, hi] = c.evaluate(Rat(2));
  CHECK(lo == ExtRat(2));
  CHECK(hi == ExtRat(2));  // continuous here
  // simple example e3 at its breakpoint
  PiecewiseLinearCost c2 = fixtures::two_piece(2, 0, 2, 1, 2);
  auto [lo2, hi2] = c2.evaluate(Rat(2));
  CHECK(lo2 == ExtRat(4));
  CHECK(hi2 == ExtRat(4));
  CHECK(c2.evaluate(Rat(0)).first == ExtRat(0));
}

TEST_CASE("directify keeps the nonnegative part and adds the -inf jump") {
  PiecewiseLinearCost base = PiecewiseLinearCost::affine(1, 0);
  PiecewiseLinearCost d = directify(base);
  InverseCost inv = invert_cost(d);
  REQUIRE(inv.size() == 2);
  CHECK(inv.seg(0).kind == SegKind::Flat);
  CHECK(inv.seg(0).sig_hi == ExtRat(0));
  CHECK(inv.seg(1).kind == SegKind::Sloped);

  PiecewiseLinearCost offset = directify(PiecewiseLinearCost::affine(1, 1));
  InverseCost inv2 = invert_cost(offset);
  REQUIRE(inv2.size() == 2);
  CHECK(inv2.seg(0).kind == SegKind::Flat);
  CHECK(inv2.seg(0).sig_hi == ExtRat(1));  // sigma+ = l(0) = 1
  CHECK(inv2.seg(1).c == Rat(1));
  CHECK(inv2.seg(1).d == Rat(1));

  // the ambiguous example edge before directification: x on [0,1), x+2 on
  // [1,2), capacity 2 -> the table of l2^{-1} above
  InverseCost inv3 = invert_cost(ambiguous_e2());
  CHECK(inv3.evaluate(ExtRat(Rat(1, 2))) == ExtRat(Rat(1, 2)));
  CHECK(inv3.evaluate(ExtRat(2)) == ExtRat(1));
  CHECK(inv3.evaluate(ExtRat(Rat(7, 2))) == ExtRat(Rat(3, 2)));
  CHECK(inv3.evaluate(ExtRat(5)) == ExtRat(2));
}

TEST_CASE("validation rejects malformed costs") {
  // decreasing jump
  CHECK_THROWS_AS(fixtures::two_piece(1, 0, 1, 1, -5).validate(false), ValidationError);
  // negative slope
  CHECK_THROWS_AS(PiecewiseLinearCost::affine(-1, 0).validate(false), ValidationError);
  // constant segment without the extension
  PiecewiseLinearCost constant({ExtRat(0), ExtRat::pos_inf()}, {0}, {1});
  CHECK_THROWS_AS(constant.validate(false), ValidationError);
  CHECK_NOTHROW(constant.validate(true));
  // sign condition at zero
  CHECK_THROWS_AS(PiecewiseLinearCost::affine(1, 5).validate(false), ValidationError);
}

TEST_CASE("constant segments become vertical inverse pieces") {
  PiecewiseLinearCost c({ExtRat::neg_inf(), ExtRat(1), ExtRat(3), ExtRat::pos_inf()},
                        {1, 0, 1}, {0, 1, -2});
  c.validate(true);
  InverseCost inv = invert_cost(c);
  REQUIRE(inv.size() == 3);
  CHECK(inv.seg(1).kind == SegKind::Vertical);
  CHECK(inv.seg(1).sig_lo == ExtRat(1));
  CHECK(inv.seg(1).sig_hi == ExtRat(1));
  CHECK(inv.seg(1).tau_lo == ExtRat(1));
  CHECK(inv.seg(1).tau_hi == ExtRat(3));
}

TEST_CASE("inverse is monotone and sandwiched on random costs") {
  std::mt19937_64 rng(20240811);
  RandomOptions o;
  o.allow_constant = false;
  for (int trial = 0; trial < 40; ++trial) {
    PiecewiseLinearCost c = trial % 2 == 0 ? detail::random_directed_cost(rng, o)
                                           : detail::random_undirected_cost(rng, o);
    c.validate(false);
    InverseCost inv = invert_cost(c);
    ExtRat prev = ExtRat::neg_inf();
    for (int i = -8; i <= 8; ++i) {
      ExtRat v(Rat(i, 2));
      ExtRat x = inv.evaluate(v);
      CHECK(prev <= x);  // monotone
      prev = x;
      if (x.finite()) {
        auto [lo, hi] = c.evaluate(x.value());
        CHECK(lo <= v);
        CHECK(v <= hi);  // sandwich
      }
    }
  }
}
