#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wardrop/costs.hpp"
#include "wardrop/dense.hpp"
#include "wardrop/rational.hpp"

namespace wardrop {

struct Edge {
  int tail, head;
};

// Vertex/edge structure with oriented incidence columns. Vertices are
// renumbered internally so that source = 0 and sink = n-1 (the reduced
// Laplacian drops the source row/column). Immutable after construction.
class Network {
 public:
  Network() = default;
  Network(int n, std::vector<Edge> edges, std::vector<std::string> names)
      : n_(n), edges_(std::move(edges)), names_(std::move(names)) {}

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  int source() const { return 0; }
  int sink() const { return n_ - 1; }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::string& vertex_name(int v) const { return names_[static_cast<std::size_t>(v)]; }
  const std::vector<std::string>& vertex_names() const { return names_; }

  // Signed unit-pair column of the incidence matrix: +1 at head, -1 at tail.
  VecR incidence_column(int e) const {
    if (e < 0 || e >= m()) throw ValidationError("incidence_column: invalid edge id");
    VecR g(static_cast<std::size_t>(n_), Rat(0));
    g[static_cast<std::size_t>(edges_[e].head)] = 1;
    g[static_cast<std::size_t>(edges_[e].tail)] = -1;
    return g;
  }

  // Incidence column with the source component dropped.
  VecR reduced_incidence(int e) const {
    VecR g = incidence_column(e);
    return VecR(g.begin() + 1, g.end());
  }

  Rat potential_difference(int e, const VecR& pi) const {
    return pi[static_cast<std::size_t>(edges_[e].head)] - pi[static_cast<std::size_t>(edges_[e].tail)];
  }

  // y = Gamma x, the net inflow at each vertex.
  VecR excess_of(const VecR& x) const {
    if (x.size() != static_cast<std::size_t>(m()))
      throw ValidationError("excess_of: flow length mismatch");
    VecR y(static_cast<std::size_t>(n_), Rat(0));
    for (int e = 0; e < m(); ++e) {
      y[static_cast<std::size_t>(edges_[e].head)] += x[static_cast<std::size_t>(e)];
      y[static_cast<std::size_t>(edges_[e].tail)] -= x[static_cast<std::size_t>(e)];
    }
    return y;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::string> names_;
};

namespace detail {
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) parent_[static_cast<std::size_t>(i)] = i;
  }
  int find(int a) {
    while (parent_[static_cast<std::size_t>(a)] != a) {
      parent_[static_cast<std::size_t>(a)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(a)])];
      a = parent_[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) { parent_[static_cast<std::size_t>(find(a))] = find(b); }

 private:
  std::vector<int> parent_;
};
}  // namespace detail

// Connected components of the subgraph of edges marked active; returns
// component labels (0-based, in order of first appearance) and their count.
inline std::pair<std::vector<int>, int> components(const Network& net,
                                                   const std::vector<char>& active) {
  detail::UnionFind uf(net.n());
  for (int e = 0; e < net.m(); ++e)
    if (active[static_cast<std::size_t>(e)]) uf.unite(net.edge(e).tail, net.edge(e).head);
  std::vector<int> label(static_cast<std::size_t>(net.n()), -1);
  int count = 0;
  for (int v = 0; v < net.n(); ++v) {
    int r = uf.find(v);
    if (label[static_cast<std::size_t>(r)] == -1) label[static_cast<std::size_t>(r)] = count++;
    label[static_cast<std::size_t>(v)] = label[static_cast<std::size_t>(r)];
  }
  return {label, count};
}

struct Arc {
  int from, to;
  ExtRat weight;  // +inf arcs are treated as absent
};

struct ShortestPathResult {
  std::vector<ExtRat> dist;
  bool negative_cycle = false;
};

// Bellman-Ford over exact extended rationals. Relaxations are capped after
// n-1 rounds; any further improvement flags a negative cycle.
inline ShortestPathResult bellman_ford(int n, const std::vector<Arc>& arcs, int src) {
  ShortestPathResult r;
  r.dist.assign(static_cast<std::size_t>(n), ExtRat::pos_inf());
  r.dist[static_cast<std::size_t>(src)] = ExtRat(0);
  for (int round = 0; round < n; ++round) {
    bool changed = false;
    for (const Arc& a : arcs) {
      if (a.weight.is_pos_inf()) continue;
      const ExtRat& du = r.dist[static_cast<std::size_t>(a.from)];
      if (du.is_pos_inf()) continue;
      ExtRat cand = du + a.weight;
      if (cand < r.dist[static_cast<std::size_t>(a.to)]) {
        r.dist[static_cast<std::size_t>(a.to)] = cand;
        changed = true;
        if (round == n - 1) r.negative_cycle = true;
      }
    }
    if (!changed) break;
  }
  return r;
}

struct BuiltInstance {
  Network net;
  std::vector<PiecewiseLinearCost> costs;  // per internal edge
  // user edge -> representative internal edge (carries the user-visible flow)
  std::vector<int> rep_edge;
  std::vector<char> is_split;  // per user edge: true when a dummy vertex was inserted

  // Lifts user-level edge flows to internal edges (split halves share the flow).
  VecR internal_flow(const VecR& user_x) const {
    VecR x(static_cast<std::size_t>(net.m()), Rat(0));
    for (std::size_t i = 0; i < rep_edge.size(); ++i) {
      x[static_cast<std::size_t>(rep_edge[i])] = user_x[i];
      if (is_split[i]) x[static_cast<std::size_t>(rep_edge[i] + 1)] = user_x[i];
    }
    return x;
  }

  // Lifts user-level potentials; a dummy vertex sits halfway between its
  // endpoints, which preserves the sandwich condition of both halves exactly.
  VecR internal_potential(const VecR& user_pi, const std::vector<int>& user_vertex_internal) const {
    VecR pi(static_cast<std::size_t>(net.n()), Rat(0));
    for (std::size_t i = 0; i < user_vertex_internal.size(); ++i)
      pi[static_cast<std::size_t>(user_vertex_internal[i])] = user_pi[i];
    for (std::size_t i = 0; i < rep_edge.size(); ++i) {
      if (!is_split[i]) continue;
      int first = rep_edge[i];
      int d = net.edge(first).head;
      Rat a = pi[static_cast<std::size_t>(net.edge(first).tail)];
      Rat b = pi[static_cast<std::size_t>(net.edge(first + 1).head)];
      pi[static_cast<std::size_t>(d)] = (a + b) / 2;
    }
    return pi;
  }
};

// Validates the graph and splits parallel edges by inserting a dummy vertex
// on one of them; both halves carry the original cost scaled by 1/2 so the
// series composition reproduces it exactly.
inline BuiltInstance build_network(int vertex_count, const std::vector<Edge>& edge_list,
                                   int source, int sink,
                                   const std::vector<PiecewiseLinearCost>& costs,
                                   const std::vector<std::string>& user_names = {}) {
  if (vertex_count < 2) throw ValidationError("build_network: need at least two vertices");
  if (source == sink) throw ValidationError("build_network: source equals sink");
  if (source < 0 || source >= vertex_count || sink < 0 || sink >= vertex_count)
    throw ValidationError("build_network: terminal out of range");
  if (costs.size() != edge_list.size())
    throw ValidationError("build_network: cost count mismatch");
  for (const Edge& e : edge_list) {
    if (e.tail < 0 || e.tail >= vertex_count || e.head < 0 || e.head >= vertex_count)
      throw ValidationError("build_network: endpoint out of range");
    if (e.tail == e.head) throw ValidationError("build_network: self-loop");
  }

  // renumber: source -> 0, sink -> last, others keep relative order
  std::vector<int> internal_of(static_cast<std::size_t>(vertex_count), -1);
  std::vector<std::string> names;
  auto name_of = [&](int u) {
    return u < static_cast<int>(user_names.size()) ? user_names[static_cast<std::size_t>(u)]
                                                   : "v" + std::to_string(u);
  };
  internal_of[static_cast<std::size_t>(source)] = 0;
  names.push_back(name_of(source));
  for (int u = 0; u < vertex_count; ++u) {
    if (u == source || u == sink) continue;
    internal_of[static_cast<std::size_t>(u)] = static_cast<int>(names.size());
    names.push_back(name_of(u));
  }

  std::vector<Edge> edges;
  std::vector<PiecewiseLinearCost> ecosts;
  std::vector<int> rep;
  std::vector<char> split_flags;
  auto key = [](int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); };
  std::vector<std::pair<int, int>> seen;
  int next_vertex = static_cast<int>(names.size()) + 1;  // slot 0..names-1 + sink

  std::vector<Edge> pending;
  for (std::size_t i = 0; i < edge_list.size(); ++i) {
    int t = internal_of[static_cast<std::size_t>(edge_list[i].tail)];
    int h = internal_of[static_cast<std::size_t>(edge_list[i].head)];
    // sink handled after dummies are counted; use a placeholder
    pending.push_back({edge_list[i].tail == sink ? -2 : t, edge_list[i].head == sink ? -2 : h});
  }
  // first pass: count dummies needed
  int dummies = 0;
  {
    std::vector<std::pair<int, int>> tmp;
    for (std::size_t i = 0; i < edge_list.size(); ++i) {
      auto k = key(edge_list[i].tail, edge_list[i].head);
      bool dup = false;
      for (const auto& s : tmp)
        if (s == k) dup = true;
      if (dup)
        ++dummies;
      else
        tmp.push_back(k);
    }
  }
  int n_internal = static_cast<int>(names.size()) + dummies + 1;
  int sink_internal = n_internal - 1;
  int next_dummy = static_cast<int>(names.size());
  (void)next_vertex;

  for (std::size_t i = 0; i < edge_list.size(); ++i) {
    int t = pending[i].tail == -2 ? sink_internal : pending[i].tail;
    int h = pending[i].head == -2 ? sink_internal : pending[i].head;
    auto k = key(t, h);
    bool dup = false;
    for (const auto& s : seen)
      if (s == k) dup = true;
    if (!dup) {
      seen.push_back(k);
      rep.push_back(static_cast<int>(edges.size()));
      split_flags.push_back(0);
      edges.push_back({t, h});
      ecosts.push_back(costs[i]);
    } else {
      int d = next_dummy++;
      names.push_back("_split" + std::to_string(d));
      PiecewiseLinearCost half = costs[i].scaled(Rat(1, 2));
      rep.push_back(static_cast<int>(edges.size()));
      split_flags.push_back(1);
      edges.push_back({t, d});
      ecosts.push_back(half);
      edges.push_back({d, h});
      ecosts.push_back(half);
      seen.push_back(key(t, d));
      seen.push_back(key(d, h));
    }
  }
  names.push_back(name_of(sink));

  Network net(n_internal, std::move(edges), std::move(names));

  // weak connectivity
  std::vector<char> all(static_cast<std::size_t>(net.m()), 1);
  auto [labels, count] = components(net, all);
  (void)labels;
  if (count != 1) throw ValidationError("build_network: graph is not connected");

  return {std::move(net), std::move(ecosts), std::move(rep), std::move(split_flags)};
}

}  // namespace wardrop
