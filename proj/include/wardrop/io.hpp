#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wardrop/costs.hpp"
#include "wardrop/homotopy.hpp"
#include "wardrop/instances.hpp"
#include "wardrop/network.hpp"
#include "wardrop/rational.hpp"

namespace wardrop {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Instance files. All rationals travel as strings ("7/3", "0.5", "-inf").
// A finite first breakpoint means the edge is directed (cost -inf below it);
// a trailing entry with slope "inf" marks a hard capacity at that breakpoint.
// ---------------------------------------------------------------------------

inline Json cost_to_json(const PiecewiseLinearCost& c) {
  Json bp = Json::array(), a = Json::array(), b = Json::array();
  const auto& tau = c.tau();
  for (std::size_t k = 0; k < c.segments(); ++k) {
    bp.push_back(to_string(tau[k]));
    a.push_back(to_string(c.slope(k)));
    b.push_back(to_string(c.offset(k)));
  }
  if (tau.back().finite()) {
    bp.push_back(to_string(tau.back()));
    a.push_back("inf");
    b.push_back("0");
  }
  return Json{{"breakpoints", bp}, {"slopes", a}, {"offsets", b}};
}

inline PiecewiseLinearCost cost_from_json(const Json& j) {
  if (!j.contains("breakpoints") || !j.contains("slopes") || !j.contains("offsets"))
    throw ValidationError("edge: missing breakpoints/slopes/offsets");
  auto bp = j.at("breakpoints");
  auto sl = j.at("slopes");
  auto of = j.at("offsets");
  if (!bp.is_array() || bp.size() == 0 || bp.size() != sl.size() || bp.size() != of.size())
    throw ValidationError("edge: breakpoints/slopes/offsets must be equal-length arrays");
  std::size_t n = bp.size();
  bool capped = sl.back().get<std::string>() == "inf";
  std::size_t segs = capped ? n - 1 : n;
  if (segs == 0) throw ValidationError("edge: no finite cost segment");
  std::vector<ExtRat> tau;
  std::vector<Rat> a, b;
  for (std::size_t k = 0; k < segs; ++k) {
    tau.push_back(parse_ext_rational(bp[k].get<std::string>()));
    a.push_back(parse_rational(sl[k].get<std::string>()));
    b.push_back(parse_rational(of[k].get<std::string>()));
  }
  tau.push_back(capped ? parse_ext_rational(bp[n - 1].get<std::string>()) : ExtRat::pos_inf());
  return PiecewiseLinearCost(std::move(tau), std::move(a), std::move(b));
}

inline Json instance_to_json(const InstanceBundle& b) {
  Json j;
  j["mode"] = b.directed ? "directed" : "undirected";
  j["constant_costs"] = b.constant_costs;
  j["vertices"] = b.vertex_names;
  j["source"] = b.vertex_names[static_cast<std::size_t>(b.source)];
  j["sink"] = b.vertex_names[static_cast<std::size_t>(b.sink)];
  Json edges = Json::array();
  for (std::size_t i = 0; i < b.edges.size(); ++i) {
    Json e = cost_to_json(b.costs[i]);
    e["id"] = b.edge_ids[i];
    e["tail"] = b.vertex_names[static_cast<std::size_t>(b.edges[i].tail)];
    e["head"] = b.vertex_names[static_cast<std::size_t>(b.edges[i].head)];
    edges.push_back(e);
  }
  j["edges"] = edges;
  return j;
}

inline InstanceBundle instance_from_json(const Json& j) {
  InstanceBundle b;
  if (!j.contains("mode") || !j.contains("vertices") || !j.contains("edges") ||
      !j.contains("source") || !j.contains("sink"))
    throw ValidationError("instance: missing required field");
  std::string mode = j.at("mode").get<std::string>();
  if (mode != "directed" && mode != "undirected")
    throw ValidationError("instance: mode must be directed or undirected");
  b.directed = mode == "directed";
  b.constant_costs = j.value("constant_costs", false);
  b.vertex_names = j.at("vertices").get<std::vector<std::string>>();
  std::map<std::string, int> vid;
  for (std::size_t i = 0; i < b.vertex_names.size(); ++i) {
    if (!vid.emplace(b.vertex_names[i], static_cast<int>(i)).second)
      throw ValidationError("instance: duplicate vertex name " + b.vertex_names[i]);
  }
  auto vertex = [&](const std::string& name) {
    auto it = vid.find(name);
    if (it == vid.end()) throw ValidationError("instance: unknown vertex " + name);
    return it->second;
  };
  b.source = vertex(j.at("source").get<std::string>());
  b.sink = vertex(j.at("sink").get<std::string>());
  for (const Json& e : j.at("edges")) {
    b.edge_ids.push_back(e.at("id").get<std::string>());
    b.edges.push_back({vertex(e.at("tail").get<std::string>()), vertex(e.at("head").get<std::string>())});
    b.costs.push_back(cost_from_json(e));
  }
  b.validate();
  return b;
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw ValidationError(std::string("json parse error: ") + ex.what());
  }
  return j;
}

inline void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Curve files. Flows and regions are reported per user edge, potentials per
// user vertex; split halves and dummy vertices stay internal. The instance is
// embedded so a curve file is self-contained.
// ---------------------------------------------------------------------------

// internal index of each user vertex in the built network
inline std::vector<int> user_vertex_map(const InstanceBundle& b, const BuiltInstance& built) {
  std::map<std::string, int> pos;
  for (int v = 0; v < built.net.n(); ++v) pos[built.net.vertex_name(v)] = v;
  std::vector<int> out;
  for (const std::string& name : b.vertex_names) out.push_back(pos.at(name));
  return out;
}

inline Json curve_to_json(const InstanceBundle& b, const BuiltInstance& built,
                          const SolutionCurve& curve) {
  std::vector<int> vmap = user_vertex_map(b, built);
  Json segs = Json::array();
  std::vector<std::string> bps;
  auto push_unique = [&](const std::string& s) {
    if (bps.empty() || bps.back() != s) bps.push_back(s);
  };
  for (const CurveSegment& s : curve.segments) {
    Json seg;
    seg["kind"] = s.jump ? "jump" : "segment";
    seg["lambda_lo"] = to_string(s.lambda_lo);
    seg["lambda_hi"] = to_string(s.lambda_hi);
    Json region = Json::array(), x0 = Json::array(), dx = Json::array();
    for (std::size_t i = 0; i < built.rep_edge.size(); ++i) {
      int e = built.rep_edge[i];
      region.push_back(s.region[static_cast<std::size_t>(e)] + 1);
      x0.push_back(to_string(s.x0[static_cast<std::size_t>(e)]));
      dx.push_back(to_string(s.dx[static_cast<std::size_t>(e)]));
    }
    Json p0 = Json::array(), dp = Json::array();
    for (int v : vmap) {
      p0.push_back(to_string(s.pi0[static_cast<std::size_t>(v)]));
      dp.push_back(to_string(s.dpi[static_cast<std::size_t>(v)]));
    }
    seg["region"] = region;
    seg["flow_offset"] = x0;
    seg["flow_slope"] = dx;
    seg["potential_offset"] = p0;
    seg["potential_slope"] = dp;
    segs.push_back(seg);
    push_unique(to_string(s.lambda_lo));
  }
  if (!curve.segments.empty() && curve.segments.back().lambda_hi.finite())
    push_unique(to_string(curve.segments.back().lambda_hi));
  Json j;
  j["instance"] = instance_to_json(b);
  j["breakpoints"] = bps;
  j["segments"] = segs;
  j["stats"] = Json{{"pivots", curve.stats.pivots},
                    {"degenerate_points", curve.stats.degenerate_points},
                    {"jumps", curve.stats.jumps},
                    {"max_coeff_bits", curve.stats.max_coeff_bits},
                    {"saturated", curve.saturated}};
  return j;
}

struct UserCurve {
  InstanceBundle instance;
  SolutionCurve curve;  // vectors are user-level here
};

inline UserCurve curve_from_json(const Json& j) {
  UserCurve uc;
  if (!j.contains("instance") || !j.contains("segments"))
    throw ValidationError("curve: missing instance or segments");
  uc.instance = instance_from_json(j.at("instance"));
  for (const Json& sj : j.at("segments")) {
    CurveSegment s;
    s.jump = sj.at("kind").get<std::string>() == "jump";
    s.lambda_lo = parse_rational(sj.at("lambda_lo").get<std::string>());
    s.lambda_hi = parse_ext_rational(sj.at("lambda_hi").get<std::string>());
    for (const Json& r : sj.at("region")) s.region.t.push_back(r.get<int>() - 1);
    for (const Json& v : sj.at("flow_offset")) s.x0.push_back(parse_rational(v.get<std::string>()));
    for (const Json& v : sj.at("flow_slope")) s.dx.push_back(parse_rational(v.get<std::string>()));
    for (const Json& v : sj.at("potential_offset")) s.pi0.push_back(parse_rational(v.get<std::string>()));
    for (const Json& v : sj.at("potential_slope")) s.dpi.push_back(parse_rational(v.get<std::string>()));
    if (s.x0.size() != uc.instance.edges.size() || s.pi0.size() != uc.instance.vertex_names.size())
      throw ValidationError("curve: segment arrays do not match the instance");
    uc.curve.segments.push_back(std::move(s));
  }
  if (j.contains("stats")) {
    const Json& st = j.at("stats");
    uc.curve.stats.pivots = st.value("pivots", 0L);
    uc.curve.stats.degenerate_points = st.value("degenerate_points", 0L);
    uc.curve.stats.jumps = st.value("jumps", 0L);
    uc.curve.saturated = st.value("saturated", false);
  }
  return uc;
}

// ---------------------------------------------------------------------------
// CSV output (RFC 4180 framing: CRLF line ends, plain unquoted fields).
// ---------------------------------------------------------------------------

inline std::string decimal15(const Rat& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", to_double(r));
  return buf;
}

// The cost a flow particle experiences: the lower limit for positive flow,
// the upper limit for negative flow, the free-flow value at zero.
inline Rat experienced_cost(const PiecewiseLinearCost& c, const Rat& x) {
  ExtRat v = x > 0 ? c.limit_below(x) : c.limit_above(x);
  if (!v.finite()) throw InvariantError("experienced_cost: infinite cost at sampled flow");
  return v.value();
}

inline std::string sample_csv(const InstanceBundle& inst, const SolutionCurve& user_curve,
                              const std::vector<Rat>& lambdas) {
  std::ostringstream out;
  out << "lambda";
  for (const auto& id : inst.edge_ids) out << ",x_" << id;
  for (const auto& v : inst.vertex_names) out << ",pi_" << v;
  for (const auto& id : inst.edge_ids) out << ",cost_" << id;
  out << ",lambda_dec";
  for (const auto& id : inst.edge_ids) out << ",x_" << id << "_dec";
  for (const auto& v : inst.vertex_names) out << ",pi_" << v << "_dec";
  for (const auto& id : inst.edge_ids) out << ",cost_" << id << "_dec";
  out << "\r\n";
  for (const Rat& lam : lambdas) {
    auto [x, pi] = user_curve.sample(lam);
    VecR cost(x.size());
    for (std::size_t e = 0; e < x.size(); ++e) cost[e] = experienced_cost(inst.costs[e], x[e]);
    out << to_string(lam);
    for (const Rat& v : x) out << "," << to_string(v);
    for (const Rat& v : pi) out << "," << to_string(v);
    for (const Rat& v : cost) out << "," << to_string(v);
    out << "," << decimal15(lam);
    for (const Rat& v : x) out << "," << decimal15(v);
    for (const Rat& v : pi) out << "," << decimal15(v);
    for (const Rat& v : cost) out << "," << decimal15(v);
    out << "\r\n";
  }
  return out.str();
}

// One row per breakpoint per selected series ("flow:<edge-id>" or
// "potential:<vertex-name>"); a jump contributes both of its endpoint values.
inline std::string plotdata_csv(const InstanceBundle& inst, const SolutionCurve& user_curve,
                                const std::vector<std::string>& selectors) {
  struct Series {
    bool flow;
    std::size_t idx;
    std::string name;
  };
  std::vector<Series> series;
  for (const std::string& sel : selectors) {
    auto colon = sel.find(':');
    if (colon == std::string::npos) throw ValidationError("bad selector: " + sel);
    std::string kind = sel.substr(0, colon), name = sel.substr(colon + 1);
    if (kind == "flow") {
      auto it = std::find(inst.edge_ids.begin(), inst.edge_ids.end(), name);
      if (it == inst.edge_ids.end()) throw ValidationError("unknown edge: " + name);
      series.push_back({true, static_cast<std::size_t>(it - inst.edge_ids.begin()), sel});
    } else if (kind == "potential") {
      auto it = std::find(inst.vertex_names.begin(), inst.vertex_names.end(), name);
      if (it == inst.vertex_names.end()) throw ValidationError("unknown vertex: " + name);
      series.push_back({false, static_cast<std::size_t>(it - inst.vertex_names.begin()), sel});
    } else {
      throw ValidationError("bad selector kind: " + kind);
    }
  }
  std::ostringstream out;
  out << "series,lambda,value,lambda_dec,value_dec\r\n";
  for (const Series& s : series) {
    std::string prev_lam, prev_val;
    auto emit = [&](const Rat& lam, const Rat& val) {
      std::string ls = to_string(lam), vs = to_string(val);
      if (ls == prev_lam && vs == prev_val) return;
      prev_lam = ls;
      prev_val = vs;
      out << s.name << "," << ls << "," << vs << "," << decimal15(lam) << "," << decimal15(val)
          << "\r\n";
    };
    for (const CurveSegment& seg : user_curve.segments) {
      const VecR& base = s.flow ? seg.x0 : seg.pi0;
      const VecR& slope = s.flow ? seg.dx : seg.dpi;
      emit(seg.lambda_lo, base[s.idx]);
      if (seg.jump) emit(seg.lambda_lo, base[s.idx] + slope[s.idx]);
    }
    if (!user_curve.segments.empty() && user_curve.segments.back().lambda_hi.finite()) {
      const CurveSegment& seg = user_curve.segments.back();
      Rat d = seg.lambda_hi.value() - seg.lambda_lo;
      const VecR& base = s.flow ? seg.x0 : seg.pi0;
      const VecR& slope = s.flow ? seg.dx : seg.dpi;
      emit(seg.lambda_hi.value(), base[s.idx] + d * slope[s.idx]);
    }
  }
  return out.str();
}

inline std::string curve_csv(const InstanceBundle& inst, const SolutionCurve& user_curve) {
  std::ostringstream out;
  out << "lambda_lo,lambda_hi,kind";
  for (const auto& id : inst.edge_ids) out << ",region_" << id;
  for (const auto& id : inst.edge_ids) out << ",x0_" << id << ",dx_" << id;
  for (const auto& v : inst.vertex_names) out << ",pi0_" << v << ",dpi_" << v;
  out << "\r\n";
  for (const CurveSegment& s : user_curve.segments) {
    out << to_string(s.lambda_lo) << "," << to_string(s.lambda_hi) << ","
        << (s.jump ? "jump" : "segment");
    for (std::size_t i = 0; i < inst.edge_ids.size(); ++i) out << "," << (s.region[i] + 1);
    for (std::size_t i = 0; i < inst.edge_ids.size(); ++i)
      out << "," << to_string(s.x0[i]) << "," << to_string(s.dx[i]);
    for (std::size_t i = 0; i < inst.vertex_names.size(); ++i)
      out << "," << to_string(s.pi0[i]) << "," << to_string(s.dpi[i]);
    out << "\r\n";
  }
  return out.str();
}

// Projects an internal solve result onto the user view (used by tests that
// bypass the JSON round trip).
inline SolutionCurve project_curve(const InstanceBundle& b, const BuiltInstance& built,
                                   const SolutionCurve& curve) {
  std::vector<int> vmap = user_vertex_map(b, built);
  SolutionCurve out;
  out.stats = curve.stats;
  out.saturated = curve.saturated;
  for (const CurveSegment& s : curve.segments) {
    CurveSegment u;
    u.lambda_lo = s.lambda_lo;
    u.lambda_hi = s.lambda_hi;
    u.jump = s.jump;
    for (std::size_t i = 0; i < built.rep_edge.size(); ++i) {
      int e = built.rep_edge[i];
      u.region.t.push_back(s.region[static_cast<std::size_t>(e)]);
      u.x0.push_back(s.x0[static_cast<std::size_t>(e)]);
      u.dx.push_back(s.dx[static_cast<std::size_t>(e)]);
    }
    for (int v : vmap) {
      u.pi0.push_back(s.pi0[static_cast<std::size_t>(v)]);
      u.dpi.push_back(s.dpi[static_cast<std::size_t>(v)]);
    }
    out.segments.push_back(std::move(u));
  }
  return out;
}

}  // namespace wardrop
