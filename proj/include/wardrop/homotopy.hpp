#pragma once

#include <algorithm>
#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "wardrop/costs.hpp"
#include "wardrop/degeneracy.hpp"
#include "wardrop/dense.hpp"
#include "wardrop/linalg.hpp"
#include "wardrop/network.hpp"
#include "wardrop/rational.hpp"

namespace wardrop {

struct SolveOptions {
  ExtRat lambda_max = ExtRat::pos_inf();
  long max_pivots = 100000;
  int reinvert_every = 64;
  bool record_trace = false;
  bool check_invariants = true;
  bool allow_constant_costs = false;
};

// One maximal linear piece of the solution curve. Jump records have
// lambda_lo == lambda_hi and dpi holding the full potential displacement.
struct CurveSegment {
  Rat lambda_lo;
  ExtRat lambda_hi;
  RegionVector region;
  VecR x0, dx;
  VecR pi0, dpi;
  bool jump = false;
};

struct SolveStats {
  long pivots = 0;
  long degenerate_points = 0;
  long jumps = 0;
  std::size_t max_coeff_bits = 1;
};

struct SolutionCurve {
  std::vector<CurveSegment> segments;
  SolveStats stats;
  bool saturated = false;  // no equilibrium exists beyond the final lambda

  ExtRat lambda_end() const {
    if (segments.empty()) return ExtRat(0);
    return segments.back().lambda_hi;
  }

  // Affine evaluation inside the containing segment; breakpoints belong to
  // the segment they open (jump records are skipped, their potential is not
  // unique at that lambda).
  std::pair<VecR, VecR> sample(const Rat& lambda) const {
    if (lambda < 0) throw ValidationError("sample: negative demand");
    const CurveSegment* last = nullptr;
    for (const CurveSegment& s : segments) {
      if (s.jump) continue;
      last = &s;
      if (ExtRat(lambda) < s.lambda_hi && lambda >= s.lambda_lo) return eval(s, lambda);
    }
    if (last && ExtRat(lambda) == last->lambda_hi) return eval(*last, lambda);
    throw ValidationError("sample: demand beyond the bounded curve");
  }

 private:
  static std::pair<VecR, VecR> eval(const CurveSegment& s, const Rat& lambda) {
    Rat d = lambda - s.lambda_lo;
    VecR x = s.x0, pi = s.pi0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += d * s.dx[i];
    for (std::size_t i = 0; i < pi.size(); ++i) pi[i] += d * s.dpi[i];
    return {x, pi};
  }
};

struct PivotRecord {
  Rat lambda;
  RegionVector region;
  VecR pi, x, dpi, dx;
  Mat H;
  ExtRat eps;
  std::vector<int> argmin;
};

struct RunTrace {
  std::vector<PivotRecord> pivots;
  std::vector<ResolutionRecord> resolutions;
  std::vector<JumpRecord> jumps;
};

struct InitialPoint {
  VecR pi;
  RegionVector t;
  std::vector<int> tight;  // edges whose boundary passes through pi
};

// Potentials for the zero flow: shortest-path labels from the source under
// the free-flow bounds (forward weight sigma+(0), backward weight -sigma-(0)).
// Vertices the constraint graph cannot reach from the source get feasible
// labels from an auxiliary all-sources pass, shifted up so the one-sided
// constraints into the reachable part hold. With continuous costs vanishing
// at zero everything is identically zero.
inline InitialPoint initial_point(const Network& net, const std::vector<InverseCost>& inv,
                                  const std::vector<PiecewiseLinearCost>& costs) {
  const int n = net.n();
  std::vector<Arc> arcs;
  for (int e = 0; e < net.m(); ++e) {
    ExtRat up = costs[static_cast<std::size_t>(e)].limit_above(Rat(0));
    ExtRat lo = costs[static_cast<std::size_t>(e)].limit_below(Rat(0));
    arcs.push_back({net.edge(e).tail, net.edge(e).head, up});
    arcs.push_back({net.edge(e).head, net.edge(e).tail, lo.is_neg_inf() ? ExtRat::pos_inf() : -lo});
  }
  auto sp = bellman_ford(n, arcs, net.source());
  if (sp.negative_cycle)
    throw ValidationError("initial_point: negative cycle under free-flow costs");
  InitialPoint init;
  init.pi.assign(static_cast<std::size_t>(n), Rat(0));
  bool any_unreachable = false;
  for (int v = 0; v < n; ++v) {
    if (sp.dist[static_cast<std::size_t>(v)].finite())
      init.pi[static_cast<std::size_t>(v)] = sp.dist[static_cast<std::size_t>(v)].value();
    else
      any_unreachable = true;
  }
  if (any_unreachable) {
    std::vector<Arc> aux = arcs;
    const int super = n;
    for (int v = 0; v < n; ++v) aux.push_back({super, v, ExtRat(0)});
    auto sup = bellman_ford(n + 1, aux, super);
    // no constraint arc enters the unreachable set, so one common upward
    // shift keeps all of its one-sided constraints satisfied
    Rat shift = 0;
    for (const Arc& a : arcs) {
      if (a.weight.is_pos_inf()) continue;
      bool from_un = !sp.dist[static_cast<std::size_t>(a.from)].finite();
      bool to_re = sp.dist[static_cast<std::size_t>(a.to)].finite();
      if (from_un && to_re) {
        Rat need = init.pi[static_cast<std::size_t>(a.to)] - a.weight.value() -
                   sup.dist[static_cast<std::size_t>(a.from)].value();
        if (need > shift) shift = need;
      }
    }
    for (int v = 0; v < n; ++v)
      if (!sp.dist[static_cast<std::size_t>(v)].finite())
        init.pi[static_cast<std::size_t>(v)] = sup.dist[static_cast<std::size_t>(v)].value() + shift;
  }

  init.t.t.assign(static_cast<std::size_t>(net.m()), 0);
  for (int e = 0; e < net.m(); ++e) {
    const InverseCost& ic = inv[static_cast<std::size_t>(e)];
    ExtRat v(net.potential_difference(e, init.pi));
    int zone = -1;
    for (std::size_t k = 0; k < ic.size(); ++k) {
      const InvSegment& s = ic.seg(k);
      if (s.sig_lo <= v && v <= s.sig_hi && s.tau_lo <= ExtRat(0) && ExtRat(0) <= s.tau_hi) {
        zone = static_cast<int>(k);
        break;
      }
    }
    if (zone < 0) throw InvariantError("initial_point: potentials violate the sandwich at zero flow");
    // When zero flow sits at the zone's upper end and the potential at the
    // shared boundary, the tentative segment is the one above, matching the
    // all-positive flow perturbation used to disentangle the start. (A
    // vertical zone holding zero strictly inside stays put.)
    int pick = zone;
    const InvSegment& zs = ic.seg(static_cast<std::size_t>(zone));
    if (v == zs.sig_hi && zs.tau_hi == ExtRat(0) && zone + 1 < static_cast<int>(ic.size())) {
      pick = zone + 1;
      init.tight.push_back(e);
    }
    init.t[static_cast<std::size_t>(e)] = pick;
  }
  return init;
}

class Solver {
 public:
  Solver(Network net, std::vector<PiecewiseLinearCost> costs, SolveOptions opt = {})
      : net_(std::move(net)), costs_(std::move(costs)), opt_(opt) {
    m_ = net_.m();
    n_ = net_.n();
    if (static_cast<int>(costs_.size()) != m_) throw ValidationError("Solver: cost count mismatch");
    for (const auto& c : costs_) c.validate(opt_.allow_constant_costs);
    inv_.reserve(costs_.size());
    for (const auto& c : costs_) inv_.push_back(invert_cost(c));
    dy_hat_.assign(static_cast<std::size_t>(n_ - 1), Rat(0));
    dy_hat_.back() = 1;
  }

  const RunTrace& trace() const { return trace_; }
  const std::vector<InverseCost>& inverse_costs() const { return inv_; }
  const Network& network() const { return net_; }

  SolutionCurve run() {
    init_state();
    note_visited();
    bool start_phase = true;
    while (true) {
      if (ambiguous_) {
        jump_ambiguous();
        if (saturated_) break;
        continue;
      }
      ensure_base();
      compute_direction();
      // boundaries the direction exits at distance zero
      std::vector<ExtRat> eps(static_cast<std::size_t>(m_));
      std::vector<int> tight;
      ExtRat emin = ExtRat::pos_inf();
      for (int e = 0; e < m_; ++e) {
        eps[static_cast<std::size_t>(e)] = eps_edge(e);
        if (eps[static_cast<std::size_t>(e)] == ExtRat(0)) tight.push_back(e);
        if (eps[static_cast<std::size_t>(e)] < emin) emin = eps[static_cast<std::size_t>(e)];
      }
      if (!tight.empty()) {
        if (tight.size() == 1) {
          cross_real(tight[0]);
        } else {
          RegionVector before = t_;
          try {
            resolve_lex(tight, /*arrival=*/false, /*force_flow=*/start_phase);
            if (!(t_ == before)) note_visited();
          } catch (const AmbiguousEntered&) {
          }
        }
        continue;
      }
      start_phase = false;

      std::vector<int> argmin;
      for (int e = 0; e < m_; ++e)
        if (eps[static_cast<std::size_t>(e)] == emin) argmin.push_back(e);
      if (opt_.record_trace)
        trace_.pivots.push_back({lambda_, t_, pi_, x_, dpi_, dx_, H_, emin, argmin});

      ExtRat room = opt_.lambda_max - ExtRat(lambda_);
      if (emin.is_pos_inf()) {
        emit_segment(ExtRat::pos_inf());
        break;
      }
      if (ExtRat(emin) >= room) {
        if (room > ExtRat(0)) {
          emit_segment(opt_.lambda_max);
          advance(room.value());
        }
        break;
      }
      Rat step = emin.value();
      emit_segment(ExtRat(lambda_ + step));
      advance(step);
      if (argmin.size() == 1) {
        cross_real(argmin[0]);
      } else {
        RegionVector before = t_;
        try {
          resolve_lex(argmin, /*arrival=*/true, /*force_flow=*/false);
          if (!(t_ == before)) note_visited();
        } catch (const AmbiguousEntered&) {
        }
      }
    }
    curve_.stats = stats_;
    curve_.saturated = saturated_;
    return curve_;
  }

 private:
  struct AmbiguousEntered {};

  // --- state -------------------------------------------------------------
  Network net_;
  std::vector<PiecewiseLinearCost> costs_;
  std::vector<InverseCost> inv_;
  SolveOptions opt_;
  int m_ = 0, n_ = 0;
  VecR dy_hat_;

  Rat lambda_;
  VecR pi_, x_;
  RegionVector t_;

  Conductances cond_;
  std::vector<int> comp_;
  int ncomp_ = 1;
  bool ambiguous_ = false;
  std::vector<int> grounds_;  // reduced indices of grounded component reps
  VecR c_base_;
  Mat Hb_;
  bool hb_valid_ = false;
  int updates_since_invert_ = 0;

  Mat H_;
  std::vector<char> collapsed_;
  VecR dpi_, dx_;

  struct Pending {
    int edge = -1;
    int dir = 0;
    bool flow_space = false;
    bool strict = false;
  } pend_;

  std::unordered_set<RegionVector, RegionVectorHash> visited_;
  SolveStats stats_;
  RunTrace trace_;
  SolutionCurve curve_;
  bool saturated_ = false;

  // --- helpers -----------------------------------------------------------
  const InvSegment& seg(int e) const {
    return inv_[static_cast<std::size_t>(e)].seg(static_cast<std::size_t>(t_[static_cast<std::size_t>(e)]));
  }

  Rat gdot(int e, const VecR& v) const {
    return v[static_cast<std::size_t>(net_.edge(e).head)] - v[static_cast<std::size_t>(net_.edge(e).tail)];
  }

  void bump_pivot() {
    if (++stats_.pivots > opt_.max_pivots) throw BudgetError("pivot budget exceeded");
  }

  void note_visited() {
    if (!visited_.insert(t_).second)
      throw InvariantError("region revisited: " + t_.str());
  }

  void init_state() {
    lambda_ = 0;
    x_.assign(static_cast<std::size_t>(m_), Rat(0));
    InitialPoint init = initial_point(net_, inv_, costs_);
    pi_ = init.pi;
    t_ = init.t;
    refresh_region();
  }

  void refresh_region() {
    cond_ = conductance_matrix(inv_, t_);
    for (std::size_t e = 0; e < cond_.vertical.size(); ++e)
      if (cond_.vertical[e] && !opt_.allow_constant_costs)
        throw ValidationError("constant-cost segment reached with the extension disabled");
    auto [comp, ncomp] = active_components(net_, cond_);
    comp_ = comp;
    ncomp_ = ncomp;
    ambiguous_ = comp_[static_cast<std::size_t>(net_.source())] !=
                 comp_[static_cast<std::size_t>(net_.sink())];
    grounds_.clear();
    if (!ambiguous_) {
      int cs = comp_[static_cast<std::size_t>(net_.source())];
      std::vector<char> seen(static_cast<std::size_t>(ncomp_), 0);
      for (int v = 1; v < n_; ++v) {
        int c = comp_[static_cast<std::size_t>(v)];
        if (c != cs && !seen[static_cast<std::size_t>(c)]) {
          seen[static_cast<std::size_t>(c)] = 1;
          grounds_.push_back(v - 1);
        }
      }
    }
    c_base_.assign(static_cast<std::size_t>(m_), Rat(0));
    for (int e = 0; e < m_; ++e)
      c_base_[static_cast<std::size_t>(e)] =
          cond_.vertical[static_cast<std::size_t>(e)] ? Rat(1) : cond_.c[static_cast<std::size_t>(e)];
  }

  void ensure_base() {
    if (hb_valid_) return;
    Mat L = reduced_laplacian(net_, c_base_);
    for (int g : grounds_) L(static_cast<std::size_t>(g), static_cast<std::size_t>(g)) += 1;
    auto inv = invert_spd(L);
    if (!inv) throw InvariantError("reduced Laplacian singular in a non-ambiguous region");
    Hb_ = *inv;
    hb_valid_ = true;
    updates_since_invert_ = 0;
    track_bits();
  }

  void track_bits() {
    std::size_t b = Hb_.max_bits();
    if (b > stats_.max_coeff_bits) stats_.max_coeff_bits = b;
  }

  // Applies the alpha -> infinity limit for every vertical edge. Verticals
  // whose pivot already vanished (a contracted cycle) are skipped: their
  // potential difference is constant anyway and their flow direction is 0.
  void build_limited() {
    H_ = Hb_;
    collapsed_.assign(static_cast<std::size_t>(m_), 0);
    for (int e = 0; e < m_; ++e) {
      if (!cond_.vertical[static_cast<std::size_t>(e)]) continue;
      auto lim = sherman_morrison_limit(H_, net_.reduced_incidence(e));
      if (lim) {
        H_ = *lim;
        collapsed_[static_cast<std::size_t>(e)] = 1;
      }
    }
  }

  Mat limited_without(int skip) const {
    Mat h = Hb_;
    for (int e = 0; e < m_; ++e) {
      if (e == skip || !collapsed_[static_cast<std::size_t>(e)]) continue;
      auto lim = sherman_morrison_limit(h, net_.reduced_incidence(e));
      if (lim) h = *lim;
    }
    return h;
  }

  void compute_direction() {
    build_limited();
    VecR dpi_hat = H_ * dy_hat_;
    dpi_.assign(static_cast<std::size_t>(n_), Rat(0));
    for (int v = 1; v < n_; ++v) dpi_[static_cast<std::size_t>(v)] = dpi_hat[static_cast<std::size_t>(v - 1)];
    dx_.assign(static_cast<std::size_t>(m_), Rat(0));
    for (int e = 0; e < m_; ++e) {
      const InvSegment& s = seg(e);
      if (s.kind == SegKind::Sloped) {
        dx_[static_cast<std::size_t>(e)] = cond_.c[static_cast<std::size_t>(e)] * gdot(e, dpi_);
      } else if (s.kind == SegKind::Vertical && collapsed_[static_cast<std::size_t>(e)]) {
        Mat hm = limited_without(e);
        VecR g = net_.reduced_incidence(e);
        VecR dpm_hat = hm * dy_hat_;
        Rat denom = dot(g, hm * g);
        if (denom == 0) throw InvariantError("degenerate flow: vanishing effective resistance");
        dx_[static_cast<std::size_t>(e)] = dot(g, dpm_hat) / denom;
      }
    }
    check_pending();
    if (opt_.check_invariants) check_state();
  }

  void check_pending() {
    if (pend_.edge < 0) return;
    Rat v = pend_.flow_space ? dx_[static_cast<std::size_t>(pend_.edge)] : gdot(pend_.edge, dpi_);
    int s = sgn(v) * pend_.dir;
    if (s < 0 || (pend_.strict && s == 0))
      throw InvariantError("direction sign flip across boundary of edge " + std::to_string(pend_.edge));
    pend_.edge = -1;
  }

  void check_state() {
    // feasibility
    VecR y = net_.excess_of(x_);
    for (int v = 0; v < n_; ++v) {
      Rat want = v == net_.source() ? -lambda_ : (v == net_.sink() ? lambda_ : Rat(0));
      if (y[static_cast<std::size_t>(v)] != want) throw InvariantError("flow infeasible for current demand");
    }
    VecR ydir = net_.excess_of(dx_);
    for (int v = 0; v < n_; ++v) {
      Rat want = v == net_.source() ? Rat(-1) : (v == net_.sink() ? Rat(1) : Rat(0));
      if (ydir[static_cast<std::size_t>(v)] != want) throw InvariantError("direction not a unit s-t flow");
    }
    // region membership and the per-segment closed forms
    for (int e = 0; e < m_; ++e) {
      const InvSegment& s = seg(e);
      Rat pd = net_.potential_difference(e, pi_);
      const Rat& xe = x_[static_cast<std::size_t>(e)];
      auto detail = [&](const char* what) {
        return std::string(what) + ": edge " + std::to_string(e) + " seg " +
               std::to_string(t_[static_cast<std::size_t>(e)]) + " pd " + to_string(pd) +
               " x " + to_string(xe) + " sigma [" + to_string(s.sig_lo) + "," +
               to_string(s.sig_hi) + "] tau [" + to_string(s.tau_lo) + "," +
               to_string(s.tau_hi) + "] at lambda " + to_string(lambda_);
      };
      if (ExtRat(pd) < s.sig_lo || ExtRat(pd) > s.sig_hi)
        throw InvariantError(detail("potential outside region segment"));
      if (s.kind == SegKind::Sloped && xe != s.c * pd - s.d)
        throw InvariantError(detail("flow inconsistent with sloped segment"));
      if (s.kind == SegKind::Flat && ExtRat(xe) != s.tau_lo)
        throw InvariantError(detail("flow inconsistent with flat segment"));
      if (s.kind == SegKind::Vertical && (ExtRat(xe) < s.tau_lo || ExtRat(xe) > s.tau_hi))
        throw InvariantError(detail("flow outside vertical segment range"));
    }
  }

  ExtRat eps_edge(int e) const {
    const InvSegment& s = seg(e);
    if (s.kind == SegKind::Vertical) {
      const Rat& d = dx_[static_cast<std::size_t>(e)];
      if (d == 0) return ExtRat::pos_inf();
      ExtRat bound = d > 0 ? s.tau_hi : s.tau_lo;
      if (!bound.finite()) return ExtRat::pos_inf();
      return (bound - ExtRat(x_[static_cast<std::size_t>(e)])) / d;
    }
    Rat d = gdot(e, dpi_);
    if (d == 0) return ExtRat::pos_inf();
    ExtRat bound = d > 0 ? s.sig_hi : s.sig_lo;
    if (!bound.finite()) return ExtRat::pos_inf();
    return (bound - ExtRat(net_.potential_difference(e, pi_))) / d;
  }

  void advance(const Rat& step) {
    lambda_ += step;
    for (int v = 0; v < n_; ++v) pi_[static_cast<std::size_t>(v)] += step * dpi_[static_cast<std::size_t>(v)];
    for (int e = 0; e < m_; ++e) x_[static_cast<std::size_t>(e)] += step * dx_[static_cast<std::size_t>(e)];
  }

  void emit_segment(const ExtRat& hi) {
    curve_.segments.push_back({lambda_, hi, t_, x_, dx_, pi_, dpi_, false});
  }

  // Moves t across the boundary of e and keeps the base inverse current.
  void apply_crossing(int e, int dir) {
    int nt = t_[static_cast<std::size_t>(e)] + dir;
    if (nt < 0 || nt >= static_cast<int>(inv_[static_cast<std::size_t>(e)].size()))
      throw InvariantError("crossing out of segment range");
    const InvSegment& from = seg(e);
    Rat cb_old = c_base_[static_cast<std::size_t>(e)];
    std::vector<int> grounds_old = grounds_;
    bool was_ambiguous = ambiguous_;
    t_[static_cast<std::size_t>(e)] = nt;
    refresh_region();
    const InvSegment& to = seg(e);

    pend_.edge = e;
    pend_.dir = dir;
    pend_.flow_space = from.kind == SegKind::Vertical || to.kind == SegKind::Vertical;
    // the strict sign-preservation theorems need truly invertible reduced
    // Laplacians on both sides; grounded floating components void that
    pend_.strict = to.kind != SegKind::Flat && grounds_old.empty() && grounds_.empty();

    if (ambiguous_) {
      hb_valid_ = false;
      return;
    }
    if (hb_valid_ && !was_ambiguous && grounds_ == grounds_old) {
      Rat dc = c_base_[static_cast<std::size_t>(e)] - cb_old;
      if (dc != 0) {
        auto upd = sherman_morrison_update(Hb_, net_.reduced_incidence(e), dc);
        if (!upd) throw InvariantError("rank-one update pivot vanished in a non-ambiguous region");
        Hb_ = *upd;
        track_bits();
        if (++updates_since_invert_ >= opt_.reinvert_every) hb_valid_ = false;
      }
    } else {
      hb_valid_ = false;
    }
  }

  void cross_real(int e) {
    const InvSegment& s = seg(e);
    Rat v = s.kind == SegKind::Vertical ? dx_[static_cast<std::size_t>(e)] : gdot(e, dpi_);
    int dir = sgn(v);
    if (dir == 0) throw InvariantError("crossing with zero approach speed");
    bump_pivot();
    apply_crossing(e, dir);
    note_visited();
  }

  // --- degenerate points ---------------------------------------------------
  //
  // Unified lexicographic rule. With only positive-slope segments around the
  // point it is the potential-space rule; as soon as a constant-cost segment
  // is involved (or at the highly degenerate start) the flow-space rule is
  // used, with flat-segment candidates tracked through the induced potential
  // displacement.
  void resolve_lex(const std::vector<int>& estar, bool arrival, bool force_flow) {
    stats_.degenerate_points++;
    bool flow_space = force_flow || has_vertical_context(estar);
    if (flow_space)
      resolve_degenerate_flow(estar, arrival);
    else
      resolve_degenerate_potential(estar, arrival);
  }

  bool has_vertical_context(const std::vector<int>& estar) const {
    for (int e = 0; e < m_; ++e)
      if (cond_.vertical[static_cast<std::size_t>(e)]) return true;
    for (int e : estar) {
      const InvSegment& s = seg(e);
      Rat v = s.kind == SegKind::Vertical ? dx_[static_cast<std::size_t>(e)] : gdot(e, dpi_);
      int nt = t_[static_cast<std::size_t>(e)] + (sgn(v) >= 0 ? 1 : -1);
      if (nt >= 0 && nt < static_cast<int>(inv_[static_cast<std::size_t>(e)].size()) &&
          inv_[static_cast<std::size_t>(e)].seg(static_cast<std::size_t>(nt)).kind == SegKind::Vertical)
        return true;
    }
    return false;
  }

  void resolve_degenerate_potential(const std::vector<int>& estar, bool arrival) {
    resolve_core(estar, arrival, false);
  }
  void resolve_degenerate_flow(const std::vector<int>& estar, bool arrival) {
    resolve_core(estar, arrival, true);
  }

  void resolve_core(const std::vector<int>& estar, bool arrival, bool flow_space) {
    const std::size_t dim = flow_space ? static_cast<std::size_t>(m_) : static_cast<std::size_t>(n_);
    Mat M = Mat::identity(dim);
    ResolutionRecord rec;
    rec.lambda = lambda_;
    rec.flow_space = flow_space;
    std::unordered_set<RegionVector, RegionVectorHash> fan;
    fan.insert(t_);

    for (int l = 0;; ++l) {
      LexStep step;
      step.l = l;
      step.flow_space = flow_space;
      struct Cand {
        int e;
        Rat denom;
        VecR row;  // the unscaled row vector used in the recursion
        ExtVec m;
        bool flat;
      };
      std::vector<Cand> cands;
      for (int e : estar) {
        const InvSegment& s = seg(e);
        Cand c;
        c.e = e;
        c.flat = s.kind == SegKind::Flat;
        bool take = false;
        c.row.assign(dim, Rat(0));
        if (flow_space && c.flat) {
          // The flow perturbation does not displace a flat-segment boundary.
          // At a standing start an exiting flat boundary is crossed right
          // away (zero perturbed distance); otherwise it is out of the
          // rule's reach and any leftover tightness resurfaces as a
          // zero-length event in the main loop.
          c.denom = gdot(e, dpi_);
          if (l == 0 && !arrival && c.denom != 0) {
            c.m.assign(dim, ExtRat(0));
            take = true;
          } else {
            c.m = inf_vector(dim);
          }
        } else {
          if (!flow_space) {
            c.denom = gdot(e, dpi_);
            if (c.denom != 0) {
              int h = net_.edge(e).head, ta = net_.edge(e).tail;
              for (std::size_t j = 0; j < dim; ++j)
                c.row[j] = M(static_cast<std::size_t>(h), j) - M(static_cast<std::size_t>(ta), j);
            }
          } else {
            c.denom = dx_[static_cast<std::size_t>(e)];
            if (c.denom != 0)
              for (std::size_t j = 0; j < dim; ++j) c.row[j] = M(static_cast<std::size_t>(e), j);
          }
          if (c.denom == 0) {
            c.m = inf_vector(dim);
          } else {
            c.m.clear();
            for (std::size_t j = 0; j < dim; ++j) c.m.push_back(ExtRat(-c.row[j] / c.denom));
            // every boundary at the point is in play at the first step (for
            // a standing start the set holds exits only, all to be crossed);
            // from step 1 on the perturbed curve keeps only what lies ahead
            take = l == 0 || lex_positive(c.m);
          }
        }
        step.m_vectors.push_back({e, c.m});
        if (take) cands.push_back(std::move(c));
      }
      if (cands.empty()) {
        step.chosen = -1;
        step.region_after = t_;
        rec.steps.push_back(std::move(step));
        break;
      }
      std::vector<const Cand*> mins{&cands[0]};
      for (std::size_t i = 1; i < cands.size(); ++i) {
        int cmp = lex_compare(cands[i].m, mins[0]->m);
        if (cmp < 0)
          mins = {&cands[i]};
        else if (cmp == 0)
          mins.push_back(&cands[i]);
      }
      if (mins.size() > 1) {
        for (const Cand* c : mins)
          if (!c->flat || !flow_space)
            throw InvariantError("non-unique lexicographic minimum at a degenerate point");
        // identical flat candidates: the perturbed curve crosses the corner
        // diagonally, so take all of them in one move
      }
      VecR dpi_old = dpi_, dx_old = dx_;
      Rat denom = mins[0]->denom;
      VecR row = mins[0]->row;
      step.chosen = mins[0]->e;
      for (const Cand* c : mins) {
        bump_pivot();
        apply_crossing(c->e, sgn(c->denom));
        if (!fan.insert(t_).second)
          throw InvariantError("cycle among regions around a degenerate point");
      }
      if (ambiguous_) {
        step.region_after = t_;
        rec.steps.push_back(std::move(step));
        rec.resumed = t_;
        if (opt_.record_trace) trace_.resolutions.push_back(std::move(rec));
        throw AmbiguousEntered{};
      }
      ensure_base();
      compute_direction();
      // perturbation recursion with the pre-crossing direction
      Rat k = Rat(1) / denom;
      if (flow_space)
        M.sub_outer(k, dx_old, row);
      else
        M.sub_outer(k, dpi_old, row);
      step.region_after = t_;
      rec.steps.push_back(std::move(step));
    }
    rec.resumed = t_;
    if (opt_.record_trace) trace_.resolutions.push_back(std::move(rec));
  }

  // --- ambiguous regions ---------------------------------------------------
  //
  // The active edges no longer connect source and sink: raise the potential
  // of the sink-side component until a boundary is reached. The flow is
  // unchanged along the way.
  void jump_ambiguous() {
    VecR dj(static_cast<std::size_t>(n_), Rat(0));
    int ct = comp_[static_cast<std::size_t>(net_.sink())];
    for (int v = 0; v < n_; ++v)
      if (comp_[static_cast<std::size_t>(v)] == ct) dj[static_cast<std::size_t>(v)] = 1;
    for (int e = 0; e < m_; ++e) {
      bool active = cond_.vertical[static_cast<std::size_t>(e)] || cond_.c[static_cast<std::size_t>(e)] > 0;
      if (active && gdot(e, dj) != 0)
        throw InvariantError("jump: active edge across the cut");
    }
    ExtRat mu = ExtRat::pos_inf();
    int cross = -1;
    for (int e = 0; e < m_; ++e) {
      Rat d = gdot(e, dj);
      if (d == 0) continue;
      const InvSegment& s = seg(e);
      ExtRat bound = d > 0 ? s.sig_hi : s.sig_lo;
      if (!bound.finite()) continue;
      ExtRat dist = (bound - ExtRat(net_.potential_difference(e, pi_))) / d;
      if (dist < mu) {
        mu = dist;
        cross = e;
      }
    }
    if (cross < 0) {
      saturated_ = true;
      return;
    }
    if (mu > ExtRat(0)) {
      const Rat& step = mu.value();
      VecR disp(static_cast<std::size_t>(n_), Rat(0));
      for (int v = 0; v < n_; ++v) disp[static_cast<std::size_t>(v)] = step * dj[static_cast<std::size_t>(v)];
      curve_.segments.push_back(
          {lambda_, ExtRat(lambda_), t_, x_, VecR(static_cast<std::size_t>(m_), Rat(0)), pi_, disp, true});
      VecR from = pi_;
      for (int v = 0; v < n_; ++v) pi_[static_cast<std::size_t>(v)] += disp[static_cast<std::size_t>(v)];
      stats_.jumps++;
      if (opt_.record_trace) trace_.jumps.push_back({lambda_, from, pi_, cross});
    }
    int dir = sgn(gdot(cross, dj));
    bump_pivot();
    apply_crossing(cross, dir);
    note_visited();
  }
};

inline SolutionCurve solve_parametric(const Network& net,
                                      const std::vector<PiecewiseLinearCost>& costs,
                                      const SolveOptions& opt = {}) {
  Solver s(net, costs, opt);
  return s.run();
}

}  // namespace wardrop
