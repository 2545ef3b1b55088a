#pragma once

#include <utility>
#include <vector>

#include "wardrop/rational.hpp"

namespace wardrop {

// Piecewise linear edge cost l(x) = a[k] x + b[k] on the open interval
// (tau[k], tau[k+1]). tau has size()+... one more entry than a/b:
//   tau.front() == -inf  -> cost defined on all of R (undirected edge)
//   tau.front() finite   -> cost is -inf below it (models a directed edge;
//                           the paper only uses threshold 0)
//   tau.back()  == +inf  -> cost grows without bound
//   tau.back()  finite   -> hard capacity, cost +inf above it
// Discontinuities are implied wherever adjacent segment limits disagree.
class PiecewiseLinearCost {
 public:
  PiecewiseLinearCost() = default;
  PiecewiseLinearCost(std::vector<ExtRat> tau, std::vector<Rat> a, std::vector<Rat> b)
      : tau_(std::move(tau)), a_(std::move(a)), b_(std::move(b)) {}

  // Simple affine cost a x + b on all of R.
  static PiecewiseLinearCost affine(const Rat& a, const Rat& b) {
    return PiecewiseLinearCost({ExtRat::neg_inf(), ExtRat::pos_inf()}, {a}, {b});
  }

  std::size_t segments() const { return a_.size(); }
  const std::vector<ExtRat>& tau() const { return tau_; }
  const Rat& slope(std::size_t k) const { return a_[k]; }
  const Rat& offset(std::size_t k) const { return b_[k]; }
  bool directed() const { return tau_.front().finite(); }
  bool capped() const { return tau_.back().finite(); }

  void validate(bool allow_constant_segments) const {
    if (a_.size() == 0) throw ValidationError("cost: no segments");
    if (tau_.size() != a_.size() + 1 || b_.size() != a_.size())
      throw ValidationError("cost: breakpoint/segment count mismatch");
    for (std::size_t k = 0; k + 1 < tau_.size(); ++k)
      if (!(tau_[k] < tau_[k + 1])) throw ValidationError("cost: breakpoints not increasing");
    if (tau_.front().finite() && tau_.front().value() != 0)
      throw ValidationError("cost: a finite lower domain end must be 0 (directed edge)");
    for (std::size_t k = 0; k < a_.size(); ++k) {
      if (a_[k] < 0) throw ValidationError("cost: negative slope");
      if (a_[k] == 0 && !allow_constant_segments)
        throw ValidationError("cost: constant segment requires the constant-cost extension");
    }
    // nondecreasing across breakpoints (jumps may only go up)
    for (std::size_t k = 1; k < a_.size(); ++k) {
      const Rat& t = tau_[k].value();
      Rat lo = a_[k - 1] * t + b_[k - 1];
      Rat hi = a_[k] * t + b_[k];
      if (lo > hi) throw ValidationError("cost: downward jump at breakpoint");
      if (lo == hi && a_[k - 1] == 0 && a_[k] == 0)
        throw ValidationError("cost: adjacent constant segments must be merged");
    }
    // sign condition: l(z) >= 0 for z > 0 and l(z) <= 0 for z < 0
    if (limit_below(Rat(0)) > ExtRat(0) || limit_above(Rat(0)) < ExtRat(0))
      throw ValidationError("cost: sign condition at zero flow violated");
  }

  // Index of the segment whose closed interval contains x; for x exactly at a
  // breakpoint this returns the segment above.
  std::size_t segment_of(const Rat& x) const {
    std::size_t k = 0;
    while (k + 1 < a_.size() && tau_[k + 1] <= ExtRat(x)) ++k;
    return k;
  }

  // lim_{z -> x-} l(z); -inf below the domain of a directed edge.
  ExtRat limit_below(const Rat& x) const {
    if (tau_.front().finite() && ExtRat(x) <= tau_.front()) return ExtRat::neg_inf();
    if (tau_.back().finite() && ExtRat(x) > tau_.back()) return ExtRat::pos_inf();
    std::size_t k = 0;
    while (k + 1 < a_.size() && tau_[k + 1] < ExtRat(x)) ++k;
    return ExtRat(a_[k] * x + b_[k]);
  }

  // lim_{z -> x+} l(z); +inf above a capacity.
  ExtRat limit_above(const Rat& x) const {
    if (tau_.front().finite() && ExtRat(x) < tau_.front()) return ExtRat::neg_inf();
    if (tau_.back().finite() && ExtRat(x) >= tau_.back()) return ExtRat::pos_inf();
    std::size_t k = segment_of(x);
    return ExtRat(a_[k] * x + b_[k]);
  }

  // Both one-sided limits at x (equal when l is continuous there).
  std::pair<ExtRat, ExtRat> evaluate(const Rat& x) const {
    return {limit_below(x), limit_above(x)};
  }

  // Cost with both slopes and offsets scaled; two copies in series with
  // factor 1/2 reproduce the original (used by parallel-edge splitting).
  PiecewiseLinearCost scaled(const Rat& f) const {
    std::vector<Rat> a = a_, b = b_;
    for (auto& v : a) v *= f;
    for (auto& v : b) v *= f;
    return PiecewiseLinearCost(tau_, std::move(a), std::move(b));
  }

 private:
  std::vector<ExtRat> tau_;
  std::vector<Rat> a_, b_;
};

enum class SegKind { Sloped, Flat, Vertical };

// One segment of an inverse cost in the merged sigma order: sloped pieces
// x = c v - d, flat pieces (from jumps of l) pinning the flow at a
// breakpoint, and vertical pieces (from constant-cost segments) pinning the
// potential difference while the flow ranges over (tau_lo, tau_hi).
struct InvSegment {
  SegKind kind;
  ExtRat sig_lo, sig_hi;  // potential-difference interval; equal for Vertical
  ExtRat tau_lo, tau_hi;  // flow interval; equal for Flat
  Rat c, d;               // conductivity and offset, Sloped only
};

class InverseCost {
 public:
  InverseCost() = default;
  explicit InverseCost(std::vector<InvSegment> segs) : segs_(std::move(segs)) {}

  std::size_t size() const { return segs_.size(); }
  const InvSegment& seg(std::size_t t) const { return segs_[t]; }
  const std::vector<InvSegment>& segments() const { return segs_; }

  bool has_vertical() const {
    for (const auto& s : segs_)
      if (s.kind == SegKind::Vertical) return true;
    return false;
  }

  // Segment whose closed sigma interval contains v, preferring the lowest.
  std::size_t segment_of_sigma(const ExtRat& v) const {
    for (std::size_t t = 0; t < segs_.size(); ++t)
      if (v <= segs_[t].sig_hi) return t;
    return segs_.size() - 1;
  }

  // The flow value sandwiched by v (Lemma-style condition). On a vertical
  // segment the flow is not unique; the lower end of the range is returned.
  ExtRat evaluate(const ExtRat& v) const {
    std::size_t t = segment_of_sigma(v);
    const InvSegment& s = segs_[t];
    switch (s.kind) {
      case SegKind::Flat:
        return s.tau_lo;
      case SegKind::Vertical:
        return s.tau_lo;
      case SegKind::Sloped:
      default:
        if (!v.finite()) return v.is_pos_inf() ? s.tau_hi : s.tau_lo;
        return ExtRat(s.c * v.value() - s.d);
    }
  }

 private:
  std::vector<InvSegment> segs_;
};

// Builds the inverse in the merged sigma order: every discontinuity of l
// becomes a flat segment, every constant-cost piece a vertical one.
inline InverseCost invert_cost(const PiecewiseLinearCost& cost) {
  std::vector<InvSegment> segs;
  const auto& tau = cost.tau();
  const std::size_t S = cost.segments();

  auto sloped_lo = [&](std::size_t k) -> ExtRat {
    if (!tau[k].finite()) return ExtRat::neg_inf();
    return ExtRat(cost.slope(k) * tau[k].value() + cost.offset(k));
  };
  auto sloped_hi = [&](std::size_t k) -> ExtRat {
    if (!tau[k + 1].finite()) return ExtRat::pos_inf();
    return ExtRat(cost.slope(k) * tau[k + 1].value() + cost.offset(k));
  };

  if (tau.front().finite()) {
    // directed edge: flat piece at flow tau[0] for all v below sigma+(tau[0])
    segs.push_back({SegKind::Flat, ExtRat::neg_inf(), sloped_lo(0), tau.front(), tau.front(),
                    Rat(0), Rat(0)});
  }
  for (std::size_t k = 0; k < S; ++k) {
    if (k > 0) {
      ExtRat lo = sloped_hi(k - 1);  // left limit at tau[k]
      ExtRat hi = sloped_lo(k);      // right limit at tau[k]
      if (cost.slope(k - 1) == 0) lo = ExtRat(cost.offset(k - 1));
      if (cost.slope(k) == 0) hi = ExtRat(cost.offset(k));
      if (lo < hi)
        segs.push_back({SegKind::Flat, lo, hi, tau[k], tau[k], Rat(0), Rat(0)});
      else if (lo > hi)
        throw ValidationError("invert_cost: decreasing cost");
    }
    if (cost.slope(k) == 0) {
      ExtRat v(cost.offset(k));
      segs.push_back({SegKind::Vertical, v, v, tau[k], tau[k + 1], Rat(0), Rat(0)});
    } else {
      Rat c = Rat(1) / cost.slope(k);
      Rat d = cost.offset(k) / cost.slope(k);
      segs.push_back({SegKind::Sloped, sloped_lo(k), sloped_hi(k), tau[k], tau[k + 1], c, d});
    }
  }
  if (tau.back().finite()) {
    ExtRat lo = cost.slope(S - 1) == 0 ? ExtRat(cost.offset(S - 1)) : sloped_hi(S - 1);
    segs.push_back({SegKind::Flat, lo, ExtRat::pos_inf(), tau.back(), tau.back(), Rat(0), Rat(0)});
  }
  return InverseCost(std::move(segs));
}

// Restricts a cost to x >= 0 and attaches the -inf jump below zero that a
// directed edge carries.
inline PiecewiseLinearCost directify(const PiecewiseLinearCost& cost) {
  const auto& tau = cost.tau();
  if (tau.front().finite()) return cost;  // already directed
  std::vector<ExtRat> nt;
  std::vector<Rat> na, nb;
  nt.push_back(ExtRat(Rat(0)));
  for (std::size_t k = 0; k < cost.segments(); ++k) {
    if (tau[k + 1] <= ExtRat(0)) continue;  // entirely below the new domain
    if (cost.slope(k) * Rat(0) + cost.offset(k) < 0 && tau[k] < ExtRat(0))
      throw ValidationError("directify: negative cost on the nonnegative domain");
    na.push_back(cost.slope(k));
    nb.push_back(cost.offset(k));
    nt.push_back(tau[k + 1]);
  }
  for (std::size_t k = 0; k < na.size(); ++k) {
    Rat at0 = na[k] * (nt[k].finite() ? nt[k].value() : Rat(0)) + nb[k];
    if (at0 < 0) throw ValidationError("directify: negative cost on the nonnegative domain");
  }
  return PiecewiseLinearCost(std::move(nt), std::move(na), std::move(nb));
}

}  // namespace wardrop
