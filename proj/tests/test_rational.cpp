#include <catch2/catch_amalgamated.hpp>

#include "wardrop/rational.hpp"

using namespace wardrop;

TEST_CASE("rational parsing is exact") {
  CHECK(parse_rational("7/3") == Rat(7, 3));
  CHECK(parse_rational("-4/6") == Rat(-2, 3));
  CHECK(parse_rational("42") == Rat(42));
  CHECK(parse_rational("0.5") == Rat(1, 2));
  CHECK(parse_rational("-0.125") == Rat(-1, 8));
  CHECK(parse_rational("1e-6") == Rat(1, 1000000));
  CHECK(parse_rational("2.5e2") == Rat(250));
  CHECK(parse_rational("-3e-4") == Rat(-3, 10000));
  CHECK_THROWS_AS(parse_rational(""), ValidationError);
  CHECK_THROWS_AS(parse_rational("1/0"), ValidationError);
  CHECK_THROWS_AS(parse_rational("abc"), ValidationError);
}

TEST_CASE("extended rationals order and arithmetic") {
  ExtRat inf = ExtRat::pos_inf();
  ExtRat ninf = ExtRat::neg_inf();
  CHECK(ninf < ExtRat(Rat(-1000)));
  CHECK(ExtRat(Rat(1000)) < inf);
  CHECK(parse_ext_rational("inf") == inf);
  CHECK(parse_ext_rational("-inf") == ninf);
  CHECK(to_string(inf) == "inf");
  CHECK(to_string(ExtRat(Rat(3, 4))) == "3/4");
  CHECK((inf + ExtRat(Rat(5))).is_pos_inf());
  CHECK((inf - ExtRat(Rat(5))).is_pos_inf());
  CHECK_THROWS_AS(inf - inf, InvariantError);
  CHECK((inf / Rat(-2)).is_neg_inf());
  CHECK((ExtRat(Rat(3)) / Rat(2)) == ExtRat(Rat(3, 2)));
}

TEST_CASE("round trip to_string/parse") {
  Rat r(-355, 113);
  CHECK(parse_rational(to_string(r)) == r);
  CHECK(to_string(Rat(6, 3)) == "2");
}

TEST_CASE("bit length tracks coefficient growth") {
  CHECK(bit_length(Rat(0)) == 1);
  CHECK(bit_length(Rat(1)) == 1);
  CHECK(bit_length(Rat(255, 2)) == 8);
}
