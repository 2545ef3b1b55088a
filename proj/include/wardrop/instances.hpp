#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wardrop/costs.hpp"
#include "wardrop/network.hpp"
#include "wardrop/rational.hpp"

namespace wardrop {

// User-level instance description: vertex names, edges with cost functions,
// and the mode flags. build() validates and produces the internal network
// (with parallel edges split).
struct InstanceBundle {
  std::string provenance;
  bool directed = false;        // all edges restricted to nonnegative flow
  bool constant_costs = false;  // zero-slope segments permitted
  std::vector<std::string> vertex_names;
  std::vector<std::string> edge_ids;
  std::vector<Edge> edges;  // user vertex indices
  std::vector<PiecewiseLinearCost> costs;
  int source = 0, sink = 0;

  void validate() const {
    if (vertex_names.size() < 2) throw ValidationError("instance: need two vertices");
    if (edge_ids.size() != edges.size() || costs.size() != edges.size())
      throw ValidationError("instance: edge array mismatch");
    for (std::size_t i = 0; i < costs.size(); ++i) {
      costs[i].validate(constant_costs);
      if (directed && !costs[i].tau().front().finite())
        throw ValidationError("instance: directed mode requires costs on x >= 0 (edge " +
                              edge_ids[i] + ")");
    }
  }

  BuiltInstance build() const {
    validate();
    return build_network(static_cast<int>(vertex_names.size()), edges, source, sink, costs,
                         vertex_names);
  }
};

namespace fixtures {

inline PiecewiseLinearCost two_piece(const Rat& a1, const Rat& b1, const Rat& bp, const Rat& a2,
                                     const Rat& b2) {
  return PiecewiseLinearCost({ExtRat::neg_inf(), ExtRat(bp), ExtRat::pos_inf()}, {a1, a2},
                             {b1, b2});
}

}  // namespace fixtures

// The worked examples: the three-vertex triangle with different cost sets,
// and the small instance whose middle edge interpolates toward constant cost.
inline InstanceBundle paper_example(const std::string& name,
                                    const ExtRat& alpha = ExtRat::pos_inf()) {
  InstanceBundle b;
  b.provenance = name;
  b.vertex_names = {"s", "v", "t"};
  b.source = 0;
  b.sink = 2;
  b.edges = {{0, 1}, {1, 2}, {0, 2}};
  b.edge_ids = {"e1", "e2", "e3"};
  using fixtures::two_piece;
  if (name == "ex_simple_undirected") {
    b.costs = {two_piece(1, 0, 1, 2, -1), two_piece(1, 0, 2, 2, -2), two_piece(2, 0, 2, 1, 2)};
  } else if (name == "ex_lexicographic") {
    b.costs = {two_piece(1, 0, 1, 5, -4), two_piece(1, 0, 1, 7, -6), two_piece(1, 0, 2, 12, -22)};
  } else if (name == "fig1_regions") {
    b.costs = {two_piece(1, 0, 2, 4, -6), two_piece(1, 0, 1, Rat(1, 2), Rat(1, 2)),
               two_piece(1, 0, 1, Rat(1, 4), Rat(3, 4))};
  } else if (name == "ex_ambiguous") {
    b.costs = {PiecewiseLinearCost::affine(1, 0),
               // directed with capacity 2, jump at flow 1
               PiecewiseLinearCost({ExtRat(0), ExtRat(1), ExtRat(2)}, {1, 1}, {0, 2}),
               two_piece(2, 0, Rat(3, 2), 2, 2)};
  } else if (name == "fig_degenerate_region") {
    Rat a2, b2, b3;
    bool constant = !alpha.finite();
    if (constant) {
      a2 = 0;
      b2 = 1;
      b3 = -2;
    } else {
      const Rat& al = alpha.value();
      if (al <= 1) throw ValidationError("fig_degenerate_region: alpha must exceed 1");
      a2 = Rat(1) / al;
      b2 = (al - 1) / al;
      b3 = (Rat(2) - 2 * al) / al;
    }
    b.costs = {PiecewiseLinearCost::affine(1, 0),
               PiecewiseLinearCost({ExtRat::neg_inf(), ExtRat(1), ExtRat(3), ExtRat::pos_inf()},
                                   {1, a2, 1}, {0, b2, b3}),
               PiecewiseLinearCost::affine(1, 0)};
    b.constant_costs = constant;
  } else {
    throw ValidationError("unknown example: " + name);
  }
  return b;
}

// The j-th nested Braess network: 2j+2 vertices and 4j+1 directed edges whose
// equilibria run through at least 2^{j+1} support sets. Constant costs are
// replaced by slope eps when given.
inline InstanceBundle nested_braess(int j, const std::optional<Rat>& eps = std::nullopt) {
  if (j < 1) throw ValidationError("nested_braess: j must be at least 1");
  InstanceBundle b;
  b.provenance = "nested_braess(" + std::to_string(j) + ")";
  b.directed = true;
  b.constant_costs = !eps.has_value();
  const int n = 2 * j + 2;
  b.vertex_names.resize(static_cast<std::size_t>(n));
  b.vertex_names[0] = "s";
  b.vertex_names[static_cast<std::size_t>(n - 1)] = "t";
  for (int i = 1; i <= 2 * j; ++i) b.vertex_names[static_cast<std::size_t>(i)] = "v" + std::to_string(i);
  b.source = 0;
  b.sink = n - 1;

  auto pow10 = [](int k) {
    Rat r = 1;
    for (int i = 0; i < k; ++i) r *= 10;
    return r;
  };
  auto linear = [&](const Rat& a, const Rat& bb) {
    return PiecewiseLinearCost({ExtRat(0), ExtRat::pos_inf()}, {a}, {bb});
  };
  auto add = [&](int u, int v, const Rat& a, const Rat& bb) {
    b.edges.push_back({u, v});
    b.edge_ids.push_back(b.vertex_names[static_cast<std::size_t>(u)] + "-" +
                         b.vertex_names[static_cast<std::size_t>(v)]);
    b.costs.push_back(linear(a, bb));
  };
  Rat slope0 = eps ? *eps : Rat(0);
  for (int i = 0; i <= 2 * j; ++i)
    if (i != j) add(i, i + 1, 1, 0);
  for (int i = 0; i <= j - 1; ++i) add(i, 2 * j - i, slope0, pow10(j - 1 - i));
  for (int i = 0; i <= j - 1; ++i) add(i + 1, 2 * j + 1 - i, slope0, pow10(j - 1 - i));
  add(j, j + 1, slope0, 0);
  return b;
}

struct RandomOptions {
  int max_vertices = 6;
  int max_edges = 10;
  int max_breakpoints = 3;  // interior breakpoints per edge
  bool allow_directed_mode = true;
  bool force_directed_mode = false;
  bool allow_jumps = true;
  bool allow_caps = true;
  bool allow_constant = false;
  bool positive_slopes_only = false;
  bool allow_parallel = true;
};

namespace detail {

inline Rat pick(std::mt19937_64& rng, const std::vector<Rat>& pool) {
  return pool[static_cast<std::size_t>(rng() % pool.size())];
}

inline PiecewiseLinearCost random_directed_cost(std::mt19937_64& rng, const RandomOptions& o) {
  static const std::vector<Rat> slopes{1, 2, 3, Rat(1, 2), Rat(3, 2), 5};
  static const std::vector<Rat> vals{0, 0, 1, 2, Rat(1, 2)};
  static const std::vector<Rat> gaps{Rat(1, 2), 1, Rat(3, 2), 2};
  int nb = static_cast<int>(rng() % static_cast<unsigned>(o.max_breakpoints + 1));
  std::vector<ExtRat> tau{ExtRat(0)};
  Rat at = 0;
  for (int k = 0; k < nb; ++k) {
    at += pick(rng, gaps);
    tau.push_back(ExtRat(at));
  }
  bool cap = o.allow_caps && rng() % 5 == 0;
  if (cap) {
    at += pick(rng, gaps);
    tau.push_back(ExtRat(at));  // finite upper domain end = hard capacity
  } else {
    tau.push_back(ExtRat::pos_inf());
  }
  std::size_t segs = tau.size() - 1;
  std::vector<Rat> a(segs), b(segs);
  Rat value = pick(rng, vals);  // sigma+(0)
  for (std::size_t k = 0; k < segs; ++k) {
    a[k] = (o.allow_constant && rng() % 6 == 0) ? Rat(0) : pick(rng, slopes);
    Rat start = tau[k].value();
    b[k] = value - a[k] * start;
    if (tau[k + 1].finite()) {
      value = a[k] * tau[k + 1].value() + b[k];
      if (o.allow_jumps && rng() % 3 == 0) value += pick(rng, gaps);
    }
  }
  return PiecewiseLinearCost(tau, a, b);
}

inline PiecewiseLinearCost random_undirected_cost(std::mt19937_64& rng, const RandomOptions& o) {
  static const std::vector<Rat> slopes{1, 2, 3, Rat(1, 2), Rat(3, 2)};
  static const std::vector<Rat> gaps{Rat(1, 2), 1, 2};
  int npos = static_cast<int>(rng() % static_cast<unsigned>(o.max_breakpoints / 2 + 1));
  int nneg = static_cast<int>(rng() % static_cast<unsigned>(o.max_breakpoints - npos + 1));
  std::vector<Rat> bps;
  Rat at = 0;
  for (int k = 0; k < nneg; ++k) {
    at -= pick(rng, gaps);
    bps.insert(bps.begin(), at);
  }
  at = 0;
  for (int k = 0; k < npos; ++k) {
    at += pick(rng, gaps);
    bps.push_back(at);
  }
  std::size_t segs = bps.size() + 1;
  std::vector<ExtRat> tau;
  tau.push_back(ExtRat::neg_inf());
  for (const Rat& t : bps) tau.push_back(ExtRat(t));
  tau.push_back(ExtRat::pos_inf());
  std::vector<Rat> a(segs), b(segs);
  for (std::size_t k = 0; k < segs; ++k)
    a[k] = (o.allow_constant && rng() % 8 == 0) ? Rat(0) : pick(rng, slopes);
  // anchor l(0) = 0 on the segment containing zero flow, then walk outward;
  // jumps go up to the right and down to the left, keeping the sign condition
  std::size_t k0 = 0;
  while (k0 + 1 < segs && bps[k0] <= 0) ++k0;
  b[k0] = 0;
  for (std::size_t k = k0 + 1; k < segs; ++k) {
    Rat t = bps[k - 1];
    Rat value = a[k - 1] * t + b[k - 1];
    if (o.allow_jumps && rng() % 3 == 0) value += pick(rng, gaps);
    b[k] = value - a[k] * t;
  }
  for (std::size_t k = k0; k-- > 0;) {
    Rat t = bps[k];
    Rat val = a[k + 1] * t + b[k + 1];
    if (o.allow_jumps && rng() % 3 == 0) val -= pick(rng, gaps);
    b[k] = val - a[k] * t;
  }
  return PiecewiseLinearCost(tau, a, b);
}

}  // namespace detail

// Deterministic small random instance for property tests.
inline InstanceBundle random_instance(std::uint64_t seed, const RandomOptions& o = {}) {
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    InstanceBundle b;
    b.provenance = "random(" + std::to_string(seed) + ")";
    b.directed = o.force_directed_mode || (o.allow_directed_mode && rng() % 2 == 0);
    int n = 2 + static_cast<int>(rng() % static_cast<unsigned>(o.max_vertices - 1));
    b.vertex_names.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) b.vertex_names[static_cast<std::size_t>(v)] = "n" + std::to_string(v);
    b.source = 0;
    b.sink = n - 1;
    // backbone: a random s-t path, then attach stragglers
    std::vector<int> mid;
    for (int v = 1; v + 1 < n; ++v)
      if (rng() % 2 == 0) mid.push_back(v);
    std::shuffle(mid.begin(), mid.end(), rng);
    std::vector<char> on_path(static_cast<std::size_t>(n), 0);
    on_path[0] = on_path[static_cast<std::size_t>(n - 1)] = 1;
    int prev = 0;
    std::vector<std::pair<int, int>> raw;
    for (int v : mid) {
      raw.push_back({prev, v});
      on_path[static_cast<std::size_t>(v)] = 1;
      prev = v;
    }
    raw.push_back({prev, n - 1});
    for (int v = 1; v + 1 < n; ++v) {
      if (on_path[static_cast<std::size_t>(v)]) continue;
      int other;
      do {
        other = static_cast<int>(rng() % static_cast<unsigned>(n));
      } while (other == v);
      if (rng() % 2 == 0)
        raw.push_back({other, v});
      else
        raw.push_back({v, other});
    }
    int extra =
        static_cast<int>(rng() % static_cast<unsigned>(
                             std::max(1, o.max_edges - static_cast<int>(raw.size()) + 1)));
    for (int k = 0; k < extra; ++k) {
      int u = static_cast<int>(rng() % static_cast<unsigned>(n));
      int v = static_cast<int>(rng() % static_cast<unsigned>(n));
      if (u == v) continue;
      bool dup = false;
      for (auto& p : raw)
        if ((p.first == u && p.second == v) || (p.first == v && p.second == u)) dup = true;
      if (dup && !o.allow_parallel) continue;
      if (dup && rng() % 3 != 0) continue;
      raw.push_back({u, v});
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
      b.edges.push_back({raw[i].first, raw[i].second});
      b.edge_ids.push_back("e" + std::to_string(i + 1));
      RandomOptions oe = o;
      if (o.positive_slopes_only) oe.allow_constant = false;
      b.costs.push_back(b.directed ? detail::random_directed_cost(rng, oe)
                                   : detail::random_undirected_cost(rng, oe));
    }
    b.constant_costs = o.allow_constant;
    try {
      b.build();
      return b;
    } catch (const ValidationError&) {
      continue;  // resample
    }
  }
  throw InvariantError("random_instance: no valid sample after 64 attempts");
}

}  // namespace wardrop
