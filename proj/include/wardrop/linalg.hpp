#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "wardrop/costs.hpp"
#include "wardrop/dense.hpp"
#include "wardrop/network.hpp"
#include "wardrop/rational.hpp"

namespace wardrop {

// Per-edge segment index into the merged inverse-cost segment list (0-based
// internally; serialized 1-based to match the usual region notation).
struct RegionVector {
  std::vector<int> t;

  int& operator[](std::size_t e) { return t[e]; }
  int operator[](std::size_t e) const { return t[e]; }
  std::size_t size() const { return t.size(); }

  friend bool operator==(const RegionVector& a, const RegionVector& b) { return a.t == b.t; }
  friend bool operator<(const RegionVector& a, const RegionVector& b) { return a.t < b.t; }

  std::string str() const {
    std::string s = "R(";
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(t[i] + 1);
    }
    return s + ")";
  }
};

struct RegionVectorHash {
  std::size_t operator()(const RegionVector& r) const {
    std::size_t h = 1469598103934665603ull;
    for (int v : r.t) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

struct Conductances {
  VecR c;                      // conductivity per edge; 0 on flat segments
  VecR d;                      // inverse-cost offset per edge (sloped only)
  std::vector<char> vertical;  // constant-cost segments (conductivity "infinite")
};

// Diagonal conductivities and offsets of a region. Vertical segments are
// flagged rather than given a finite conductivity.
inline Conductances conductance_matrix(const std::vector<InverseCost>& inv,
                                       const RegionVector& t) {
  const std::size_t m = inv.size();
  if (t.size() != m) throw ValidationError("conductance_matrix: region size mismatch");
  Conductances r;
  r.c.assign(m, Rat(0));
  r.d.assign(m, Rat(0));
  r.vertical.assign(m, 0);
  for (std::size_t e = 0; e < m; ++e) {
    const InvSegment& s = inv[e].seg(static_cast<std::size_t>(t[e]));
    if (s.kind == SegKind::Sloped) {
      r.c[e] = s.c;
      r.d[e] = s.d;
    } else if (s.kind == SegKind::Vertical) {
      r.vertical[e] = 1;
    }
  }
  return r;
}

// Reduced weighted Laplacian: Gamma C Gamma^T with the source row/column
// removed. Vertices 1..n-1 map to indices 0..n-2.
inline Mat reduced_laplacian(const Network& net, const VecR& c) {
  const int n = net.n();
  Mat L(static_cast<std::size_t>(n - 1), static_cast<std::size_t>(n - 1));
  for (int e = 0; e < net.m(); ++e) {
    const Rat& w = c[static_cast<std::size_t>(e)];
    if (w == 0) continue;
    int a = net.edge(e).tail - 1;
    int b = net.edge(e).head - 1;
    if (a >= 0) L(static_cast<std::size_t>(a), static_cast<std::size_t>(a)) += w;
    if (b >= 0) L(static_cast<std::size_t>(b), static_cast<std::size_t>(b)) += w;
    if (a >= 0 && b >= 0) {
      L(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) -= w;
      L(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) -= w;
    }
  }
  return L;
}

// Exact inverse of a reduced Laplacian; nullopt signals an ambiguous or
// degenerate region (caller routes to the jump / limit machinery).
inline std::optional<Mat> invert_spd(const Mat& L) { return inverse(L); }

// Rank-one Sherman-Morrison update: (L + dc g g^T)^{-1} from H = L^{-1}.
// nullopt when the pivot denominator vanishes (the new region is ambiguous).
inline std::optional<Mat> sherman_morrison_update(const Mat& H, const VecR& g, const Rat& dc) {
  if (dc == 0) return H;
  VecR Hg = H * g;
  Rat denom = 1 + dc * dot(g, Hg);
  if (denom == 0) return std::nullopt;
  Mat r = H;
  r.sub_outer(dc / denom, Hg, Hg);  // H symmetric: g^T H = (H g)^T
  return r;
}

// alpha -> infinity limit of the Sherman-Morrison operator; the result
// annihilates g on both sides.
inline std::optional<Mat> sherman_morrison_limit(const Mat& H, const VecR& g) {
  VecR Hg = H * g;
  Rat denom = dot(g, Hg);
  if (denom == 0) return std::nullopt;
  Mat r = H;
  r.sub_outer(Rat(1) / denom, Hg, Hg);
  return r;
}

// General two-vector form, used by the operator algebra tests.
inline std::optional<Mat> sherman_morrison_limit(const Mat& A, const VecR& v, const VecR& w) {
  VecR Aw = A * w;
  VecR vA(A.cols(), Rat(0));
  for (std::size_t j = 0; j < A.cols(); ++j) {
    Rat s = 0;
    for (std::size_t i = 0; i < A.rows(); ++i) s += v[i] * A(i, j);
    vA[j] = s;
  }
  Rat denom = dot(v, Aw);
  if (denom == 0) return std::nullopt;
  Mat r = A;
  r.sub_outer(Rat(1) / denom, Aw, vA);
  return r;
}

// Vertices considered connected when joined by an edge of positive
// conductivity; vertical segments count as active.
inline std::pair<std::vector<int>, int> active_components(const Network& net,
                                                          const Conductances& cond) {
  std::vector<char> active(static_cast<std::size_t>(net.m()), 0);
  for (int e = 0; e < net.m(); ++e)
    active[static_cast<std::size_t>(e)] =
        cond.vertical[static_cast<std::size_t>(e)] || cond.c[static_cast<std::size_t>(e)] > 0;
  return components(net, active);
}

// Effective travel time between the endpoints of e under inverse H.
inline Rat effective_resistance(const Network& net, const Mat& H, int e) {
  VecR g = net.reduced_incidence(e);
  return dot(g, H * g);
}

}  // namespace wardrop
