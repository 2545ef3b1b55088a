#pragma once

#include <vector>

#include "wardrop/dense.hpp"
#include "wardrop/linalg.hpp"
#include "wardrop/rational.hpp"

namespace wardrop {

using ExtVec = std::vector<ExtRat>;

inline ExtVec inf_vector(std::size_t n) { return ExtVec(n, ExtRat::pos_inf()); }

inline bool is_inf_vector(const ExtVec& v) {
  for (const auto& x : v)
    if (!x.is_pos_inf()) return false;
  return !v.empty();
}

// Lexicographic order reading from the LAST component toward the first,
// matching the perturbation vector (0, d^{n-1}, ..., d^2, d) whose last
// component dominates. Infinite vectors compare greater than finite ones.
// Returns -1, 0, +1.
inline int lex_compare(const ExtVec& v, const ExtVec& w) {
  if (v.size() != w.size()) throw InvariantError("lex_compare: length mismatch");
  bool vi = is_inf_vector(v), wi = is_inf_vector(w);
  if (vi || wi) return vi == wi ? 0 : (vi ? 1 : -1);
  for (std::size_t j = v.size(); j-- > 0;) {
    if (v[j] < w[j]) return -1;
    if (w[j] < v[j]) return 1;
  }
  return 0;
}

inline bool lex_positive(const ExtVec& v) {
  if (is_inf_vector(v)) return false;
  for (std::size_t j = v.size(); j-- > 0;) {
    if (v[j] > ExtRat(0)) return true;
    if (v[j] < ExtRat(0)) return false;
  }
  return false;
}

// One step of a lexicographic resolution, kept for inspection.
struct LexStep {
  int l = 0;
  bool flow_space = false;
  std::vector<std::pair<int, ExtVec>> m_vectors;  // edge id -> m_{l,e}
  int chosen = -1;                                // -1 when the rule stopped here
  RegionVector region_after;
};

// State of a running perturbation recursion (Lemma "there are matrices"):
// potential rule keeps an n x n matrix, flow rule an m x m matrix plus the
// induced n x m potential displacement for flat-segment candidates.
struct LexState {
  int l = 0;
  bool flow_space = false;
  Mat M;  // perturbation propagation
  Mat P;  // potential displacement (flow rule only)
  std::vector<LexStep> steps;
};

struct ResolutionRecord {
  Rat lambda;
  bool flow_space = false;
  std::vector<LexStep> steps;
  RegionVector resumed;
};

struct JumpRecord {
  Rat lambda;
  VecR pi_from, pi_to;
  int crossed_edge = -1;
};

}  // namespace wardrop
