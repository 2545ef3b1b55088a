// Command line front end: generate instances, solve for the full demand
// curve, sample it, verify equilibria, and export plot data.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "wardrop/wardrop.hpp"

using namespace wardrop;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitBudget = 4;

long env_pivot_budget() {
  const char* s = std::getenv("WARDROP_PIVOT_BUDGET");
  return s ? std::atol(s) : 100000;
}

double env_oracle_tol() {
  const char* s = std::getenv("WARDROP_ORACLE_TOL");
  return s ? std::atof(s) : 1e-8;
}

bool env_stats() {
  const char* s = std::getenv("WARDROP_STATS");
  return s && std::string(s) != "0";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

std::vector<Rat> parse_lambda_list(const std::string& s) {
  std::vector<Rat> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(parse_rational(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (out.empty()) throw ValidationError("empty demand list");
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    if (comma > pos) out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

void print_stats(const SolutionCurve& curve) {
  std::cerr << "pivots=" << curve.stats.pivots
            << " degenerate_points=" << curve.stats.degenerate_points
            << " jumps=" << curve.stats.jumps
            << " max_coeff_bits=" << curve.stats.max_coeff_bits
            << (curve.saturated ? " saturated" : "") << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"parametric Wardrop equilibrium solver"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "write a benchmark or example instance");
  std::string gen_family, gen_example, gen_out, gen_eps = "1e-6", gen_alpha = "inf";
  int gen_j = 1;
  bool gen_constant = false;
  gen->add_option("--family", gen_family, "instance family (braess)");
  gen->add_option("--j", gen_j, "nested Braess index");
  gen->add_option("--eps", gen_eps, "slope replacing constant costs");
  gen->add_flag("--constant", gen_constant, "keep genuinely constant costs");
  gen->add_option("--example", gen_example,
                  "one of ex_simple_undirected, ex_lexicographic, ex_ambiguous, "
                  "fig1_regions, fig_degenerate_region");
  gen->add_option("--alpha", gen_alpha, "slope parameter for fig_degenerate_region");
  gen->add_option("--out", gen_out, "output path (default stdout)");

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "compute the full solution curve");
  std::string solve_instance, solve_out, solve_lmax = "inf", solve_format = "json";
  solve->add_option("instance", solve_instance, "instance file")->required();
  solve->add_option("--lambda-max", solve_lmax, "demand horizon (default inf)");
  solve->add_option("--out", solve_out, "output path (default stdout)");
  solve->add_option("--format", solve_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  // ---- sample ----
  auto* sample = app.add_subcommand("sample", "evaluate a curve at given demands");
  std::string sample_curve, sample_lambdas, sample_out;
  sample->add_option("curve", sample_curve, "curve file")->required();
  sample->add_option("--lambda", sample_lambdas, "comma separated demands")->required();
  sample->add_option("--out", sample_out, "output path (default stdout)");

  // ---- verify ----
  auto* verify = app.add_subcommand("verify", "check a curve against the instance");
  std::string verify_instance, verify_curve;
  int verify_samples = 3;
  bool verify_oracle = false;
  verify->add_option("--instance", verify_instance, "instance file")->required();
  verify->add_option("--curve", verify_curve, "curve file")->required();
  verify->add_option("--samples-per-segment", verify_samples, "demands sampled per segment");
  verify->add_flag("--oracle", verify_oracle, "also cross-check against the fixed-demand oracle");

  // ---- plotdata ----
  auto* plot = app.add_subcommand("plotdata", "breakpoint series for plotting");
  std::string plot_curve, plot_series, plot_out;
  plot->add_option("curve", plot_curve, "curve file")->required();
  plot->add_option("--series", plot_series,
                   "comma separated selectors, e.g. flow:e1,potential:t");
  plot->add_option("--out", plot_out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    InstanceBundle b;
    if (!gen_example.empty()) {
      b = paper_example(gen_example, parse_ext_rational(gen_alpha));
    } else if (gen_family == "braess") {
      b = gen_constant ? nested_braess(gen_j)
                       : nested_braess(gen_j, parse_rational(gen_eps));
    } else {
      throw ValidationError("generate: need --family braess or --example NAME");
    }
    b.build();  // validate before writing
    write_text(gen_out, instance_to_json(b).dump(2) + "\n");
    return 0;
  }

  if (solve->parsed()) {
    InstanceBundle b = instance_from_json(load_json(solve_instance));
    BuiltInstance built = b.build();
    SolveOptions opt;
    opt.lambda_max = parse_ext_rational(solve_lmax);
    opt.max_pivots = env_pivot_budget();
    opt.allow_constant_costs = b.constant_costs;
    SolutionCurve curve = solve_parametric(built.net, built.costs, opt);
    if (env_stats()) print_stats(curve);
    if (solve_format == "csv")
      write_text(solve_out, curve_csv(b, project_curve(b, built, curve)));
    else
      write_text(solve_out, curve_to_json(b, built, curve).dump(2) + "\n");
    return 0;
  }

  if (sample->parsed()) {
    UserCurve uc = curve_from_json(load_json(sample_curve));
    write_text(sample_out, sample_csv(uc.instance, uc.curve, parse_lambda_list(sample_lambdas)));
    return 0;
  }

  if (verify->parsed()) {
    InstanceBundle b = instance_from_json(load_json(verify_instance));
    UserCurve uc = curve_from_json(load_json(verify_curve));
    if (instance_to_json(b) != instance_to_json(uc.instance))
      throw ValidationError("verify: curve was computed for a different instance");
    BuiltInstance built = b.build();
    std::vector<int> vmap = user_vertex_map(b, built);
    Rat max_gap = 0;
    long checked = 0;
    double oracle_worst = 0;
    for (const CurveSegment& s : uc.curve.segments) {
      Rat hi = s.lambda_hi.finite() ? s.lambda_hi.value() : s.lambda_lo + verify_samples;
      for (int k = 0; k <= verify_samples; ++k) {
        Rat lam = s.lambda_lo + Rat(k, verify_samples + 1) * (hi - s.lambda_lo);
        VecR ux = s.x0, upi = s.pi0;
        Rat d = lam - s.lambda_lo;
        for (std::size_t i = 0; i < ux.size(); ++i) ux[i] += d * s.dx[i];
        for (std::size_t i = 0; i < upi.size(); ++i) upi[i] += d * s.dpi[i];
        VecR x = built.internal_flow(ux);
        VecR pi = built.internal_potential(upi, vmap);
        Rat g1 = sandwich_gap(built.net, built.costs, x, pi);
        Rat g2 = verify_equilibrium(built.net, built.costs, x).gap;
        if (g1 > max_gap) max_gap = g1;
        if (g2 > max_gap) max_gap = g2;
        ++checked;
        if (verify_oracle && !s.jump && k > 0) {
          OracleOptions oo;
          oo.tol = env_oracle_tol();
          OracleResult r = equilibrium_at(built.net, built.costs, lam, oo);
          for (int e = 0; e < built.net.m(); ++e) {
            double diff = std::abs(r.x[static_cast<std::size_t>(e)] -
                                   to_double(x[static_cast<std::size_t>(e)]));
            if (diff > oracle_worst) oracle_worst = diff;
          }
        }
      }
    }
    std::cout << "checked " << checked << " samples, max gap " << to_string(max_gap);
    if (verify_oracle) std::cout << ", max oracle flow deviation " << oracle_worst;
    std::cout << "\n";
    if (max_gap != 0) return kExitInvariant;
    return 0;
  }

  if (plot->parsed()) {
    UserCurve uc = curve_from_json(load_json(plot_curve));
    write_text(plot_out, plotdata_csv(uc.instance, uc.curve, split_list(plot_series)));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const InvariantError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
}
