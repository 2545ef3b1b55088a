#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace wardrop {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int sgn(const Rat& r) {
  if (r > 0) return 1;
  if (r < 0) return -1;
  return 0;
}

inline std::size_t bit_length(const BigInt& z) {
  if (z == 0) return 1;
  return static_cast<std::size_t>(boost::multiprecision::msb(boost::multiprecision::abs(z))) + 1;
}

inline std::size_t bit_length(const Rat& r) {
  std::size_t n = bit_length(boost::multiprecision::numerator(r));
  std::size_t d = bit_length(boost::multiprecision::denominator(r));
  return n > d ? n : d;
}

// Rational extended with +/- infinity. Arithmetic is restricted to the
// combinations the solver actually needs; indeterminate forms throw.
class ExtRat {
 public:
  ExtRat() : inf_(0) {}
  ExtRat(const Rat& v) : inf_(0), v_(v) {}          // NOLINT(runtime/explicit)
  ExtRat(long v) : inf_(0), v_(v) {}                // NOLINT(runtime/explicit)
  ExtRat(int v) : inf_(0), v_(v) {}                 // NOLINT(runtime/explicit)

  static ExtRat pos_inf() { ExtRat e; e.inf_ = 1; return e; }
  static ExtRat neg_inf() { ExtRat e; e.inf_ = -1; return e; }

  bool finite() const { return inf_ == 0; }
  bool is_pos_inf() const { return inf_ == 1; }
  bool is_neg_inf() const { return inf_ == -1; }

  const Rat& value() const {
    if (!finite()) throw InvariantError("ExtRat: value() on infinity");
    return v_;
  }

  friend bool operator==(const ExtRat& a, const ExtRat& b) {
    if (a.inf_ != b.inf_) return false;
    return a.inf_ != 0 || a.v_ == b.v_;
  }
  friend bool operator!=(const ExtRat& a, const ExtRat& b) { return !(a == b); }
  friend bool operator<(const ExtRat& a, const ExtRat& b) {
    if (a.inf_ != b.inf_) return a.inf_ < b.inf_;
    return a.inf_ == 0 && a.v_ < b.v_;
  }
  friend bool operator>(const ExtRat& a, const ExtRat& b) { return b < a; }
  friend bool operator<=(const ExtRat& a, const ExtRat& b) { return !(b < a); }
  friend bool operator>=(const ExtRat& a, const ExtRat& b) { return !(a < b); }

  ExtRat operator-() const {
    ExtRat r = *this;
    r.inf_ = -r.inf_;
    if (r.inf_ == 0) r.v_ = -r.v_;
    return r;
  }

  friend ExtRat operator+(const ExtRat& a, const ExtRat& b) {
    if (a.finite() && b.finite()) return ExtRat(a.v_ + b.v_);
    if (a.inf_ != 0 && b.inf_ != 0 && a.inf_ != b.inf_)
      throw InvariantError("ExtRat: inf - inf");
    ExtRat r;
    r.inf_ = a.inf_ != 0 ? a.inf_ : b.inf_;
    return r;
  }
  friend ExtRat operator-(const ExtRat& a, const ExtRat& b) { return a + (-b); }

  friend ExtRat operator*(const ExtRat& a, const ExtRat& b) {
    if (a.finite() && b.finite()) return ExtRat(a.v_ * b.v_);
    int sa = a.inf_ != 0 ? a.inf_ : sgn(a.v_);
    int sb = b.inf_ != 0 ? b.inf_ : sgn(b.v_);
    if (sa == 0 || sb == 0) throw InvariantError("ExtRat: 0 * inf");
    return sa * sb > 0 ? pos_inf() : neg_inf();
  }

  // a / b with b finite nonzero.
  friend ExtRat operator/(const ExtRat& a, const Rat& b) {
    if (b == 0) throw InvariantError("ExtRat: division by zero");
    if (a.finite()) return ExtRat(a.v_ / b);
    return (a.inf_ > 0) == (b > 0) ? pos_inf() : neg_inf();
  }

  int infinity_sign() const { return inf_; }

 private:
  int8_t inf_;
  Rat v_;
};

inline std::string to_string(const Rat& r) {
  const BigInt& num = boost::multiprecision::numerator(r);
  const BigInt& den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline std::string to_string(const ExtRat& e) {
  if (e.is_pos_inf()) return "inf";
  if (e.is_neg_inf()) return "-inf";
  return to_string(e.value());
}

inline double to_double(const Rat& r) { return r.template convert_to<double>(); }

// Accepts "p/q", integers, plain decimals and scientific notation
// ("1.25", "-3e-4", "2.5e2"), all converted exactly.
inline Rat parse_rational(const std::string& s) {
  if (s.empty()) throw ValidationError("empty rational literal");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    if (num.empty() || den.empty()) throw ValidationError("bad rational: " + s);
    try {
      BigInt n(num), d(den);
      if (d == 0) throw ValidationError("zero denominator: " + s);
      return Rat(n, d);
    } catch (const std::exception&) {
      throw ValidationError("bad rational: " + s);
    }
  }
  // decimal / scientific form
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  BigInt mantissa = 0;
  long frac_digits = 0;
  long exponent = 0;
  bool any_digit = false, in_frac = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      if (in_frac) ++frac_digits;
      any_digit = true;
    } else if (c == '.' && !in_frac) {
      in_frac = true;
    } else if ((c == 'e' || c == 'E') && any_digit) {
      try {
        exponent = std::stol(s.substr(i + 1));
      } catch (const std::exception&) {
        throw ValidationError("bad rational: " + s);
      }
      break;
    } else {
      throw ValidationError("bad rational: " + s);
    }
  }
  if (!any_digit) throw ValidationError("bad rational: " + s);
  long e = exponent - frac_digits;
  BigInt num = neg ? -mantissa : mantissa;
  BigInt den = 1;
  if (e >= 0)
    num *= boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(e));
  else
    den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(-e));
  return Rat(num, den);
}

inline ExtRat parse_ext_rational(const std::string& s) {
  if (s == "inf" || s == "+inf") return ExtRat::pos_inf();
  if (s == "-inf") return ExtRat::neg_inf();
  return ExtRat(parse_rational(s));
}

}  // namespace wardrop
