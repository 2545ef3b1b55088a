#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "wardrop/costs.hpp"
#include "wardrop/dense.hpp"
#include "wardrop/homotopy.hpp"
#include "wardrop/linalg.hpp"
#include "wardrop/network.hpp"
#include "wardrop/rational.hpp"

namespace wardrop {

struct EquilibriumCertificate {
  VecR pi;
  Rat gap;        // max edgewise sandwich violation; 0 iff user equilibrium
  Rat lambda;
};

inline std::vector<int> support_set(const VecR& x) {
  std::vector<int> s;
  for (std::size_t e = 0; e < x.size(); ++e)
    if (x[e] != 0) s.push_back(static_cast<int>(e));
  return s;
}

// Max violation of  lim- l_e <= pi_w - pi_v <= lim+ l_e  for a given pair.
inline Rat sandwich_gap(const Network& net, const std::vector<PiecewiseLinearCost>& costs,
                        const VecR& x, const VecR& pi) {
  Rat gap = 0;
  for (int e = 0; e < net.m(); ++e) {
    Rat pd = net.potential_difference(e, pi);
    ExtRat lo = costs[static_cast<std::size_t>(e)].limit_below(x[static_cast<std::size_t>(e)]);
    ExtRat hi = costs[static_cast<std::size_t>(e)].limit_above(x[static_cast<std::size_t>(e)]);
    if (lo.finite() && lo.value() - pd > gap) gap = lo.value() - pd;
    if (hi.finite() && pd - hi.value() > gap) gap = pd - hi.value();
  }
  return gap;
}

inline Rat flow_value(const Network& net, const VecR& x) {
  VecR y = net.excess_of(x);
  Rat lambda = y[static_cast<std::size_t>(net.sink())];
  for (int v = 0; v < net.n(); ++v) {
    Rat want = v == net.source() ? -lambda : (v == net.sink() ? lambda : Rat(0));
    if (y[static_cast<std::size_t>(v)] != want)
      throw ValidationError("flow is not a single-commodity s-t flow");
  }
  if (lambda < 0) throw ValidationError("flow has negative value");
  return lambda;
}

// Builds a potential by shortest paths on the auxiliary graph with forward
// weights lim+ l_e and backward weights -lim- l_e, then reports the largest
// sandwich violation. Gap zero certifies a user equilibrium.
inline EquilibriumCertificate verify_equilibrium(const Network& net,
                                                 const std::vector<PiecewiseLinearCost>& costs,
                                                 const VecR& x) {
  EquilibriumCertificate cert;
  cert.lambda = flow_value(net, x);
  const int n = net.n();
  std::vector<Arc> arcs;
  for (int e = 0; e < net.m(); ++e) {
    const Rat& xe = x[static_cast<std::size_t>(e)];
    const auto& c = costs[static_cast<std::size_t>(e)];
    if (c.tau().front().finite() && ExtRat(xe) < c.tau().front())
      throw ValidationError("verify: negative flow on a directed edge");
    if (c.tau().back().finite() && ExtRat(xe) > c.tau().back())
      throw ValidationError("verify: flow above capacity");
    ExtRat up = c.limit_above(xe);
    ExtRat lo = c.limit_below(xe);
    arcs.push_back({net.edge(e).tail, net.edge(e).head, up});
    arcs.push_back({net.edge(e).head, net.edge(e).tail, lo.finite() ? ExtRat(-lo.value()) : ExtRat::pos_inf()});
  }
  const int super = n;
  for (int v = 0; v < n; ++v) arcs.push_back({super, v, ExtRat(0)});
  auto sp = bellman_ford(n + 1, arcs, super);
  Rat base = sp.dist[0].value();
  cert.pi.assign(static_cast<std::size_t>(n), Rat(0));
  for (int v = 0; v < n; ++v)
    cert.pi[static_cast<std::size_t>(v)] = sp.dist[static_cast<std::size_t>(v)].value() - base;
  cert.gap = sandwich_gap(net, costs, x, cert.pi);
  return cert;
}

// ---------------------------------------------------------------------------
// Fixed-demand Frank-Wolfe oracle over the Beckmann objective, independent of
// the homotopy path. Undirected edges are split into two opposite arcs with
// nonnegative costs; capacities become steep linear extensions.
// ---------------------------------------------------------------------------

struct OracleOptions {
  double tol = 1e-8;        // relative duality gap target
  long max_iters = 100000;  // pairwise FW iterations
  double cap_slope = 1e12;  // slope standing in for a hard capacity
};

struct OracleResult {
  std::vector<double> x;  // signed edge flows
  double gap = 0;
  long iters = 0;
  bool converged = false;
};

namespace detail {

struct OArc {
  int edge;
  int sign;  // +1 forward, -1 backward
  int from, to;
  double cap = std::numeric_limits<double>::infinity();
  std::vector<double> bp, a, b;  // cost a[k] y + b[k] on [bp[k], bp[k+1])
  double cost(double y) const {
    std::size_t k = 0;
    while (k + 1 < a.size() && y >= bp[k + 1]) ++k;
    return a[k] * y + b[k];
  }
  double cost_left(double y) const {
    std::size_t k = 0;
    while (k + 1 < a.size() && y > bp[k + 1]) ++k;
    return a[k] * y + b[k];
  }
  double slope(double y) const {
    std::size_t k = 0;
    while (k + 1 < a.size() && y >= bp[k + 1]) ++k;
    return a[k];
  }
};

inline std::vector<OArc> build_arcs(const Network& net,
                                    const std::vector<PiecewiseLinearCost>& costs,
                                    double cap_slope) {
  std::vector<OArc> arcs;
  for (int e = 0; e < net.m(); ++e) {
    const auto& c = costs[static_cast<std::size_t>(e)];
    const auto& tau = c.tau();
    // forward arc over x >= 0
    OArc f{e, 1, net.edge(e).tail, net.edge(e).head};
    std::size_t k0 = c.segment_of(Rat(0));
    f.bp.push_back(0.0);
    for (std::size_t k = k0; k < c.segments(); ++k) {
      f.a.push_back(to_double(c.slope(k)));
      f.b.push_back(to_double(c.offset(k)));
      if (k + 1 < c.segments()) f.bp.push_back(to_double(tau[k + 1].value()));
    }
    if (tau.back().finite()) {
      // hard capacity: a steep extension steers the descent phase, while the
      // certificate treats the upper limit as unbounded at the cap itself
      double cap = to_double(tau.back().value());
      double val = f.a.back() * cap + f.b.back();
      f.cap = cap;
      f.bp.push_back(cap);
      f.a.push_back(cap_slope);
      f.b.push_back(val - cap_slope * cap);
    }
    arcs.push_back(std::move(f));
    if (!tau.front().finite()) {
      // backward arc over y = -x >= 0 with cost -l(-y)
      OArc g{e, -1, net.edge(e).head, net.edge(e).tail};
      g.bp.push_back(0.0);
      std::size_t k = c.segment_of(Rat(0));
      // x = 0 sits at the closed lower end of segment k; walk downward
      for (std::size_t kk = k + 1; kk-- > 0;) {
        g.a.push_back(to_double(c.slope(kk)));
        g.b.push_back(-to_double(c.offset(kk)));
        if (kk > 0) g.bp.push_back(-to_double(tau[kk].value()));
      }
      arcs.push_back(std::move(g));
    }
  }
  return arcs;
}

inline std::vector<int> dijkstra_path(int n, const std::vector<OArc>& arcs,
                                      const std::vector<double>& w, int s, int t) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(n), inf);
  std::vector<int> via(static_cast<std::size_t>(n), -1);
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  dist[static_cast<std::size_t>(s)] = 0;
  for (int it = 0; it < n; ++it) {
    int u = -1;
    for (int v = 0; v < n; ++v)
      if (!done[static_cast<std::size_t>(v)] &&
          (u < 0 || dist[static_cast<std::size_t>(v)] < dist[static_cast<std::size_t>(u)]))
        u = v;
    if (u < 0 || dist[static_cast<std::size_t>(u)] == inf) break;
    done[static_cast<std::size_t>(u)] = 1;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (arcs[k].from != u) continue;
      double nd = dist[static_cast<std::size_t>(u)] + w[k];
      if (nd < dist[static_cast<std::size_t>(arcs[k].to)]) {
        dist[static_cast<std::size_t>(arcs[k].to)] = nd;
        via[static_cast<std::size_t>(arcs[k].to)] = static_cast<int>(k);
      }
    }
  }
  if (dist[static_cast<std::size_t>(t)] == inf)
    throw ValidationError("oracle: sink unreachable");
  std::vector<int> path;
  for (int v = t; v != s;) {
    int k = via[static_cast<std::size_t>(v)];
    path.push_back(k);
    v = arcs[static_cast<std::size_t>(k)].from;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace detail

inline OracleResult equilibrium_at(const Network& net,
                                   const std::vector<PiecewiseLinearCost>& costs,
                                   const Rat& lambda, const OracleOptions& opt = {}) {
  OracleResult res;
  res.x.assign(static_cast<std::size_t>(net.m()), 0.0);
  double lam = to_double(lambda);
  if (lam == 0) {
    res.converged = true;
    return res;
  }
  auto arcs = detail::build_arcs(net, costs, opt.cap_slope);
  const std::size_t A = arcs.size();
  const int n = net.n();
  std::vector<double> y(A, 0.0), w(A, 0.0);
  std::map<std::vector<int>, double> paths;

  auto arc_flows = [&]() {
    std::fill(y.begin(), y.end(), 0.0);
    for (const auto& [p, th] : paths)
      for (int k : p) y[static_cast<std::size_t>(k)] += th;
  };
  auto weigh = [&]() {
    for (std::size_t k = 0; k < A; ++k) w[k] = arcs[k].cost(y[k]);
  };
  auto path_cost = [&](const std::vector<int>& p) {
    double c = 0;
    for (int k : p) c += w[static_cast<std::size_t>(k)];
    return c;
  };

  // Exact minimization of the convex piecewise-quadratic objective along
  // direction d over [0, smax]: the derivative is linear between the arc
  // breakpoints, so evaluate at interval midpoints (which dodges the
  // one-sided values at the breakpoints themselves).
  auto exact_step = [&](const std::vector<double>& d, double smax) {
    std::vector<double> stops{0.0, smax};
    for (std::size_t k = 0; k < A; ++k) {
      if (d[k] == 0) continue;
      for (double bp : arcs[k].bp) {
        double s = (bp - y[k]) / d[k];
        if (s > 0 && s < smax) stops.push_back(s);
      }
    }
    std::sort(stops.begin(), stops.end());
    for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
      if (stops[i + 1] <= stops[i]) continue;
      double mid = 0.5 * (stops[i] + stops[i + 1]);
      double gm = 0, sl = 0;
      for (std::size_t k = 0; k < A; ++k) {
        if (d[k] == 0) continue;
        double yk = y[k] + mid * d[k];
        gm += d[k] * arcs[k].cost(yk);
        sl += d[k] * d[k] * arcs[k].slope(yk);
      }
      if (gm >= 0) return sl > 0 ? std::max(stops[i], mid - gm / sl) : stops[i];
      if (sl > 0) {
        double root = mid - gm / sl;
        if (root <= stops[i + 1]) return root;
      }
    }
    return smax;
  };

  // The user-equilibrium certificate on the current flows: forward
  // constraints use the upper cost limits, backward constraints on loaded
  // arcs the lower ones. Feasibility of the difference constraints is the
  // stopping criterion (the plain Frank-Wolfe gap does not vanish at a user
  // equilibrium of a discontinuous cost). A violated negative cycle doubles
  // as an exact improving reroute.
  struct CArc {
    int from, to;
    double w;
    int arc;   // underlying split arc
    int sign;  // +1 push, -1 reduce
  };
  // land exactly on breakpoints so the certificate and the line search agree
  // about which segment a flow sits in
  auto snap_flows = [&]() {
    for (std::size_t k = 0; k < A; ++k) {
      for (double bp : arcs[k].bp)
        if (std::fabs(y[k] - bp) < 1e-9) y[k] = bp;
      if (y[k] < 1e-15) y[k] = 0;
    }
  };
  std::vector<CArc> cons;
  double scale = 1.0;
  auto build_cons = [&]() {
    cons.clear();
    scale = 1.0;
    for (std::size_t k = 0; k < A; ++k) {
      // snap float dust onto arc breakpoints so the one-sided limits are
      // taken on the intended side
      double yy = y[k];
      for (double bp : arcs[k].bp)
        if (std::fabs(yy - bp) < 1e-9) yy = bp;
      if (yy < arcs[k].cap) {
        double up = arcs[k].cost(yy);
        cons.push_back({arcs[k].from, arcs[k].to, up, static_cast<int>(k), 1});
        scale = std::max(scale, std::fabs(up));
      }
      // above the cap the steep extension keeps the reduction mandatory
      if (yy > 1e-15)
        cons.push_back({arcs[k].to, arcs[k].from, -arcs[k].cost_left(yy), static_cast<int>(k), -1});
    }
  };
  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
  std::vector<int> pred(static_cast<std::size_t>(n), -1);
  int last_improved = -1;
  // Relaxations below theta are ignored so that float dust cannot assemble
  // zero-weight predecessor cycles; the measured violation absorbs at most
  // a few theta of slack, well inside the convergence tolerance.
  auto certify = [&]() {
    build_cons();
    double theta = std::max(1e-15, 0.03125 * opt.tol * scale / std::max(1, n));
    std::fill(dist.begin(), dist.end(), 0.0);
    std::fill(pred.begin(), pred.end(), -1);
    last_improved = -1;
    for (int round = 0; round < 2 * n + 6; ++round) {
      bool changed = false;
      for (std::size_t c = 0; c < cons.size(); ++c) {
        double nd = dist[static_cast<std::size_t>(cons[c].from)] + cons[c].w;
        if (nd < dist[static_cast<std::size_t>(cons[c].to)] - theta) {
          dist[static_cast<std::size_t>(cons[c].to)] = nd;
          pred[static_cast<std::size_t>(cons[c].to)] = static_cast<int>(c);
          changed = true;
          if (round > n) last_improved = cons[c].to;
        }
      }
      if (!changed) break;
    }
    double viol = 0;
    for (const CArc& a : cons)
      viol = std::max(viol, dist[static_cast<std::size_t>(a.to)] -
                                dist[static_cast<std::size_t>(a.from)] - a.w);
    return viol / scale;
  };

  // phase 1: pairwise Frank-Wolfe over path flows (bounded warm start; the
  // cycle canceling below is the convergent finisher)
  long warm_iters = std::min<long>(opt.max_iters, 500);
  weigh();
  paths[detail::dijkstra_path(n, arcs, w, net.source(), net.sink())] = lam;
  for (res.iters = 0; res.iters < warm_iters; ++res.iters) {
    arc_flows();
    weigh();
    res.gap = certify();
    if (res.gap <= opt.tol) {
      res.converged = true;
      break;
    }
    auto best = detail::dijkstra_path(n, arcs, w, net.source(), net.sink());
    if (paths.find(best) == paths.end()) paths[best] = 0.0;
    auto away = paths.end();
    double away_cost = -1;
    for (auto it = paths.begin(); it != paths.end(); ++it) {
      if (it->second <= 0) continue;
      double c = path_cost(it->first);
      if (c > away_cost) {
        away = it;
        away_cost = c;
      }
    }
    if (away == paths.end() || away->first == best) break;
    std::vector<double> d(A, 0.0);
    for (int k : best) d[static_cast<std::size_t>(k)] += 1;
    for (int k : away->first) d[static_cast<std::size_t>(k)] -= 1;
    double step = exact_step(d, away->second);
    if (step <= 1e-18) break;
    paths[best] += step;
    away->second -= step;
    if (away->second <= 1e-15) paths.erase(away);
  }
  arc_flows();
  snap_flows();

  // phase 2: cancel violated certificate cycles exactly. A path swap cannot
  // express a segment reroute across a pinned discontinuity; the negative
  // cycle from the certificate graph can.
  for (long round = 0; round < opt.max_iters && !res.converged; ++round) {
    res.gap = certify();
    if (res.gap <= opt.tol) {
      res.converged = true;
      break;
    }
    // a relaxation persisting past n rounds witnesses a negative cycle in
    // the predecessor graph: walk n steps back to land on it
    if (last_improved < 0) break;
    int v = last_improved;
    bool broken = false;
    for (int i = 0; i < n && !broken; ++i) {
      int c = pred[static_cast<std::size_t>(v)];
      if (c < 0)
        broken = true;
      else
        v = cons[static_cast<std::size_t>(c)].from;
    }
    std::vector<int> cycle;
    int u = v;
    if (!broken) do {
        int c = pred[static_cast<std::size_t>(u)];
        if (c < 0) {
          broken = true;
          break;
        }
        cycle.push_back(c);
        u = cons[static_cast<std::size_t>(c)].from;
      } while (u != v && cycle.size() <= cons.size());
    if (broken || u != v || cycle.empty()) break;
    double cycw = 0;
    for (int c : cycle) cycw += cons[static_cast<std::size_t>(c)].w;
    if (!(cycw < 0)) break;
    std::vector<double> d(A, 0.0);
    for (int c : cycle) d[static_cast<std::size_t>(cons[static_cast<std::size_t>(c)].arc)] +=
        cons[static_cast<std::size_t>(c)].sign;
    double smax = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < A; ++k) {
      if (d[k] < 0) smax = std::min(smax, y[k] / -d[k]);
      if (d[k] > 0 && arcs[k].cap < std::numeric_limits<double>::infinity())
        smax = std::min(smax, (arcs[k].cap - y[k]) / d[k]);
    }
#ifdef WARDROP_ORACLE_DEBUG
    double cycw = 0;
    for (int c : cycle) cycw += cons[static_cast<std::size_t>(c)].w;
    double g0 = 0;
    for (std::size_t k = 0; k < A; ++k)
      if (d[k] != 0) g0 += d[k] * arcs[k].cost(y[k] + 1e-13 * d[k]);
    std::cerr << "  smax " << smax << " step " << exact_step(d, smax) << " cycw " << cycw
              << " g0 " << g0 << " cycle arcs:";
    for (int c : cycle)
      std::cerr << " (" << cons[static_cast<std::size_t>(c)].arc << ","
                << cons[static_cast<std::size_t>(c)].sign << ")";
    std::cerr << "\n";
#endif
    if (!(smax > 0) || smax == std::numeric_limits<double>::infinity()) break;
    double step = exact_step(d, smax);
    if (step <= 1e-18) break;
    for (std::size_t k = 0; k < A; ++k) y[k] += step * d[k];
    snap_flows();
    ++res.iters;
  }
  if (!res.converged) res.gap = certify();
  res.converged = res.gap <= opt.tol;

  for (std::size_t k = 0; k < A; ++k)
    res.x[static_cast<std::size_t>(arcs[k].edge)] += arcs[k].sign * y[k];
  return res;
}

// Snaps a float oracle solution onto exact segments and confirms it by
// solving the induced linear system in rationals; nullopt when the snapped
// system is inconsistent with an exact equilibrium.
inline std::optional<std::pair<VecR, VecR>> equilibrium_at_exact(
    const Network& net, const std::vector<PiecewiseLinearCost>& costs, const Rat& lambda,
    const OracleOptions& opt = {}) {
  OracleResult fw = equilibrium_at(net, costs, lambda, opt);
  if (!fw.converged) return std::nullopt;
  const int m = net.m(), n = net.n();
  const double snap = 1e-6;
  // row per edge + conservation; unknowns x (m) then reduced pi (n-1)
  Mat A(static_cast<std::size_t>(m + n - 1), static_cast<std::size_t>(m + n - 1));
  VecR rhs(static_cast<std::size_t>(m + n - 1), Rat(0));
  for (int e = 0; e < m; ++e) {
    const auto& c = costs[static_cast<std::size_t>(e)];
    const auto& tau = c.tau();
    double xe = fw.x[static_cast<std::size_t>(e)];
    std::optional<Rat> pinned;
    for (const ExtRat& t : tau)
      if (t.finite() && std::fabs(xe - to_double(t.value())) <= snap) pinned = t.value();
    std::size_t row = static_cast<std::size_t>(e);
    if (pinned) {
      A(row, static_cast<std::size_t>(e)) = 1;
      rhs[row] = *pinned;
    } else {
      std::size_t k = 0;
      while (k + 1 < c.segments() && c.tau()[k + 1].finite() &&
             to_double(c.tau()[k + 1].value()) <= xe)
        ++k;
      if (c.slope(k) == 0) {
        // constant segment: potential difference pinned instead
        int h = net.edge(e).head, t = net.edge(e).tail;
        if (h > 0) A(row, static_cast<std::size_t>(m + h - 1)) = 1;
        if (t > 0) A(row, static_cast<std::size_t>(m + t - 1)) -= 1;
        rhs[row] = c.offset(k);
      } else {
        A(row, static_cast<std::size_t>(e)) = c.slope(k);
        int h = net.edge(e).head, t = net.edge(e).tail;
        if (h > 0) A(row, static_cast<std::size_t>(m + h - 1)) -= 1;
        if (t > 0) A(row, static_cast<std::size_t>(m + t - 1)) += 1;
        rhs[row] = -c.offset(k);
      }
    }
  }
  for (int v = 1; v < n; ++v) {
    std::size_t row = static_cast<std::size_t>(m + v - 1);
    for (int e = 0; e < m; ++e) {
      if (net.edge(e).head == v) A(row, static_cast<std::size_t>(e)) += 1;
      if (net.edge(e).tail == v) A(row, static_cast<std::size_t>(e)) -= 1;
    }
    rhs[row] = v == net.sink() ? lambda : Rat(0);
  }
  auto sol = solve(A, rhs);
  if (!sol) return std::nullopt;
  VecR x(sol->begin(), sol->begin() + m);
  VecR pi(static_cast<std::size_t>(n), Rat(0));
  for (int v = 1; v < n; ++v) pi[static_cast<std::size_t>(v)] = (*sol)[static_cast<std::size_t>(m + v - 1)];
  try {
    if (flow_value(net, x) != lambda) return std::nullopt;
  } catch (const ValidationError&) {
    return std::nullopt;
  }
  for (int e = 0; e < m; ++e) {
    const auto& c = costs[static_cast<std::size_t>(e)];
    if (c.tau().front().finite() && ExtRat(x[static_cast<std::size_t>(e)]) < c.tau().front()) return std::nullopt;
    if (c.tau().back().finite() && ExtRat(x[static_cast<std::size_t>(e)]) > c.tau().back()) return std::nullopt;
  }
  if (sandwich_gap(net, costs, x, pi) != 0) return std::nullopt;
  return std::make_pair(x, pi);
}

// ---------------------------------------------------------------------------
// Single-commodity direction program: the quadratic program over augmenting
// flows whose optimum (with its dual potential) extends a known equilibrium
// to nearby demands. Solved by an exact active-set iteration over the edge
// sign pattern.
// ---------------------------------------------------------------------------

struct DirectionQP {
  VecR dx;   // augmenting flow for unit extra demand
  VecR dpi;  // dual potentials
};

inline DirectionQP direction_qp(const Network& net, const std::vector<PiecewiseLinearCost>& costs,
                                const VecR& x_eq) {
  EquilibriumCertificate cert = verify_equilibrium(net, costs, x_eq);
  if (cert.gap != 0) throw ValidationError("direction_qp: input flow is not an equilibrium");
  const int m = net.m(), n = net.n();

  enum Mode : char { POS, NEG, PIN };
  struct EdgeInfo {
    std::optional<Rat> aplus, aminus;  // slopes above/below; nullopt = forbidden side
    Mode mode;
    bool forced_zero;
  };
  std::vector<EdgeInfo> info(static_cast<std::size_t>(m));
  for (int e = 0; e < m; ++e) {
    const auto& c = costs[static_cast<std::size_t>(e)];
    const Rat& xe = x_eq[static_cast<std::size_t>(e)];
    EdgeInfo& ei = info[static_cast<std::size_t>(e)];
    ei.forced_zero = false;
    // slope above
    if (c.tau().back().finite() && ExtRat(xe) == c.tau().back()) {
      ei.aplus = std::nullopt;  // at capacity
    } else {
      ei.aplus = c.slope(c.segment_of(xe));
    }
    // slope below
    if (c.tau().front().finite() && ExtRat(xe) == c.tau().front()) {
      ei.aminus = std::nullopt;  // directed edge at zero flow
    } else {
      std::size_t k = c.segment_of(xe);
      if (k > 0 && c.tau()[k].finite() && c.tau()[k].value() == xe) --k;
      ei.aminus = c.slope(k);
    }
    ExtRat lo = c.limit_below(xe), hi = c.limit_above(xe);
    Rat pd = net.potential_difference(e, cert.pi);
    if (lo != hi) {
      // at a jump: the flow is pinned unless the potential sits at an end
      if (ExtRat(pd) == hi && ei.aplus) {
        ei.aminus = std::nullopt;
      } else if (ExtRat(pd) == lo && ei.aminus) {
        ei.aplus = std::nullopt;
      } else {
        ei.forced_zero = true;
      }
    }
    for (auto* s : {&ei.aplus, &ei.aminus})
      if (*s && **s == 0)
        throw ValidationError("direction_qp: zero cost slope at the evaluation point");
    if (ei.forced_zero || (!ei.aplus && !ei.aminus))
      ei.mode = PIN;
    else
      ei.mode = ei.aplus ? POS : NEG;
  }

  VecR dyh(static_cast<std::size_t>(n - 1), Rat(0));
  dyh.back() = 1;
  VecR dx(static_cast<std::size_t>(m), Rat(0));
  VecR mu_hat;
  for (int round = 0;; ++round) {
    if (round > 4 * m + 16) throw InvariantError("direction_qp: active set did not settle");
    VecR g(static_cast<std::size_t>(m), Rat(0));
    Conductances cond;
    cond.c.assign(static_cast<std::size_t>(m), Rat(0));
    cond.d.assign(static_cast<std::size_t>(m), Rat(0));
    cond.vertical.assign(static_cast<std::size_t>(m), 0);
    for (int e = 0; e < m; ++e) {
      const EdgeInfo& ei = info[static_cast<std::size_t>(e)];
      if (ei.mode == PIN) continue;
      g[static_cast<std::size_t>(e)] = Rat(1) / (ei.mode == POS ? *ei.aplus : *ei.aminus);
      cond.c[static_cast<std::size_t>(e)] = g[static_cast<std::size_t>(e)];
    }
    auto [comp, ncomp] = active_components(net, cond);
    if (comp[static_cast<std::size_t>(net.source())] != comp[static_cast<std::size_t>(net.sink())])
      throw ValidationError("direction_qp: active edges do not connect source and sink");
    Mat L = reduced_laplacian(net, g);
    int cs = comp[static_cast<std::size_t>(net.source())];
    std::vector<char> seen(static_cast<std::size_t>(ncomp), 0);
    for (int v = 1; v < n; ++v) {
      int c = comp[static_cast<std::size_t>(v)];
      if (c != cs && !seen[static_cast<std::size_t>(c)]) {
        seen[static_cast<std::size_t>(c)] = 1;
        L(static_cast<std::size_t>(v - 1), static_cast<std::size_t>(v - 1)) += 1;
      }
    }
    auto Hi = invert_spd(L);
    if (!Hi) throw InvariantError("direction_qp: singular system");
    mu_hat = (*Hi) * dyh;
    VecR mu(static_cast<std::size_t>(n), Rat(0));
    for (int v = 1; v < n; ++v) mu[static_cast<std::size_t>(v)] = mu_hat[static_cast<std::size_t>(v - 1)];
    bool changed = false;
    for (int e = 0; e < m; ++e) {
      EdgeInfo& ei = info[static_cast<std::size_t>(e)];
      Rat pd = net.potential_difference(e, mu);
      dx[static_cast<std::size_t>(e)] =
          ei.mode == PIN ? Rat(0) : g[static_cast<std::size_t>(e)] * pd;
      if (ei.forced_zero) continue;
      if (ei.mode == POS && dx[static_cast<std::size_t>(e)] < 0) {
        ei.mode = ei.aminus ? NEG : PIN;
        changed = true;
      } else if (ei.mode == NEG && dx[static_cast<std::size_t>(e)] > 0) {
        ei.mode = ei.aplus ? POS : PIN;
        changed = true;
      } else if (ei.mode == PIN) {
        if (ei.aplus && !ei.aminus && pd > 0) {
          ei.mode = POS;
          changed = true;
        } else if (ei.aminus && !ei.aplus && pd < 0) {
          ei.mode = NEG;
          changed = true;
        }
      }
    }
    if (!changed) {
      DirectionQP out;
      out.dx = dx;
      out.dpi.assign(static_cast<std::size_t>(n), Rat(0));
      for (int v = 1; v < n; ++v)
        out.dpi[static_cast<std::size_t>(v)] = mu_hat[static_cast<std::size_t>(v - 1)];
      VecR y = net.excess_of(out.dx);
      for (int v = 0; v < n; ++v) {
        Rat want = v == net.source() ? Rat(-1) : (v == net.sink() ? Rat(1) : Rat(0));
        if (y[static_cast<std::size_t>(v)] != want)
          throw InvariantError("direction_qp: optimum is not a unit s-t flow");
      }
      return out;
    }
  }
}

}  // namespace wardrop
