// clp: command-line front end for the circuit-augmentation toolkit.
//
// Subcommands: generate | solve | verify | mcp | decompose | bench.
// Exit codes: 0 success, 2 validation failure, 3 numerical failure.
// Errors are reported as one JSON line on stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "circuitlp/augment.hpp"
#include "circuitlp/generators.hpp"
#include "circuitlp/instance.hpp"
#include "circuitlp/mcp.hpp"
#include "circuitlp/trace.hpp"

using nlohmann::json;
using namespace circuitlp;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string rational_string(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open output file: " + path);
  out << text;
}

AugmentRule rule_from(const std::string& name) {
  if (name == "wallacher") return AugmentRule::wallacher;
  if (name == "existential") return AugmentRule::existential;
  if (name == "full") return AugmentRule::full;
  throw ValidationError("unknown rule: " + name +
                        " (expected wallacher, existential, or full)");
}

Eigen::VectorXd start_point(const LpInstance& inst) {
  if (!inst.x0) throw ValidationError("instance carries no starting point");
  return *inst.x0;
}

// Exact power-of-two ceiling of the starting gap, so the segmentation of
// (0, g] always covers the walk.
Rational segmentation_top(double gap0) {
  if (!(gap0 > 0)) return Rational(1);
  const int e = static_cast<int>(std::ceil(std::log2(gap0))) + 1;
  Rational g(1);
  for (int i = 0; i < std::abs(e); ++i) g *= 2;
  if (e < 0) g = Rational(1) / g;
  return g;
}

SolveResult run_rule(LpInstance& inst, const Eigen::VectorXd& x0, AugmentRule rule,
                     SolveOptions opts) {
  opts.rule = rule;
  switch (rule) {
    case AugmentRule::wallacher:
      return solve_wallacher(inst, x0, opts);
    case AugmentRule::full:
      return solve_full(inst, x0, opts);
    case AugmentRule::existential: {
      ensure_optimal_value(inst);
      const auto prof = mcp_profile(inst);
      const auto dec = polarized_decomposition(prof, segmentation_top(inst.gap(x0)),
                                               Rational(1, 4));
      return solve_existential(inst, x0, dec, prof, opts);
    }
  }
  throw ValidationError("unknown rule");
}

// ---------------------------------------------------------------------------

int cmd_generate(const std::string& kind, int m, int n, std::uint64_t seed,
                 const std::vector<int>& exponents, const std::string& out) {
  LpInstance inst;
  if (!exponents.empty()) {
    inst = make_polarized_block(m, exponents);
  } else {
    inst = generate_instance(kind, m, n, seed);
  }
  save_instance(inst, out);
  json j{{"kind", exponents.empty() ? kind : "polarized-block"},
         {"m", inst.m},
         {"n", inst.n},
         {"seed", seed},
         {"path", out}};
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_solve(const std::string& instance_path, const std::string& rule_name, double eps,
              long max_iters, int trace_level, const std::string& trace_path,
              const std::string& trace_format) {
  LpInstance inst = load_instance(instance_path);
  const Eigen::VectorXd x0 = start_point(inst);
  SolveOptions opts;
  opts.eps_term = eps;
  opts.max_iters = max_iters;
  opts.trace_level = std::max(1, trace_level);

  const AugmentRule rule = rule_from(rule_name);
  SolveResult res = run_rule(inst, x0, rule, opts);
  const double vstar = ensure_optimal_value(inst);
  const double objective = inst.objective(res.x);

  const auto rep = verify_walk(inst, x0, res.trace);
  if (!trace_path.empty()) export_trace(res.trace, trace_path, trace_format);

  json j{{"instance", inst.meta.name},
         {"rule", rule_name},
         {"objective", objective},
         {"optimal_value", vstar},
         {"rel_gap", inst.gap(res.x) / (1.0 + std::abs(vstar))},
         {"wallacher_steps", res.trace.totals.wallacher_steps},
         {"lsc_steps", res.trace.totals.lsc_steps},
         {"oracle_calls", res.trace.totals.oracle_calls},
         {"verified", rep.ok()}};
  std::cout << j.dump() << "\n";
  return rep.ok() ? 0 : 2;
}

int cmd_verify(const std::string& instance_path, const std::string& trace_path) {
  LpInstance inst = load_instance(instance_path);
  const WalkTrace trace = import_trace(trace_path);
  const auto rep = verify_walk(inst, start_point(inst), trace);
  for (const auto& v : rep.violations)
    std::cerr << json{{"error", "verify"}, {"message", v}}.dump() << "\n";
  json j{{"instance", inst.meta.name},
         {"steps", trace.steps.size()},
         {"violations", rep.violations.size()}};
  std::cout << j.dump() << "\n";
  return rep.ok() ? 0 : 2;
}

int cmd_mcp(const std::string& instance_path, const std::string& out) {
  LpInstance inst = load_instance(instance_path);
  ensure_optimal_value(inst);
  const auto prof = mcp_profile(inst);

  std::ostringstream os;
  os << "curve,coord,g,value\n";
  for (int i = 0; i < static_cast<int>(prof.coord.size()); ++i)
    for (size_t k = 0; k < prof.coord[i].knot.size(); ++k)
      os << "primal," << i << ',' << fmt(to_double(prof.coord[i].knot[k])) << ','
         << fmt(to_double(prof.coord[i].val[k])) << "\n";

  // dual curve sampled at the primal knot set (plus the origin)
  std::vector<double> gs{0.0};
  for (const auto& b : prof.breakpoints) gs.push_back(to_double(b));
  for (double g : gs) {
    const auto ds = exact_dual_mcp(inst, g);
    for (int i = 0; i < inst.n; ++i)
      os << "dual," << i << ',' << fmt(g) << ',' << fmt(ds.sm[i]) << "\n";
  }
  write_text(out, os.str());
  return 0;
}

int cmd_decompose(const std::string& instance_path, double gmax, double gamma,
                  const std::string& out) {
  LpInstance inst = load_instance(instance_path);
  ensure_optimal_value(inst);
  const auto prof = mcp_profile(inst);
  const Rational g =
      gmax > 0 ? Rational(gmax) : segmentation_top(inst.gap(start_point(inst)));
  if (!(gamma > 0 && gamma < 1)) throw ValidationError("gamma must lie in (0,1)");
  const Rational gam(gamma);
  const auto dec = polarized_decomposition(prof, g, gam);

  json j;
  j["gamma"] = to_double(dec.gamma);
  j["breakpoints"] = json::array();
  for (const auto& b : dec.breakpoints)
    j["breakpoints"].push_back(
        {{"value", to_double(b)}, {"exact", rational_string(b)}});
  j["intervals"] = json::array();
  for (int i = 0; i < dec.intervals(); ++i)
    j["intervals"].push_back({{"low", to_double(dec.breakpoints[i])},
                              {"high", to_double(dec.breakpoints[i + 1])},
                              {"B", dec.partitions[i].first},
                              {"N", dec.partitions[i].second}});

  // per-coordinate piece-count brackets for the scaling-band cover
  const Rational eta = 2 * gam > 1 ? Rational(1) : Rational(2 * gam);
  j["slc_eta"] = to_double(eta);
  j["slc"] = json::array();
  int total_upper = 0;
  for (int i = 0; i < inst.n; ++i) {
    if (prof.coord[i].eval(g) == 0) {
      j["slc"].push_back({{"coord", i}, {"lower", 0}, {"upper", 0}});
      continue;
    }
    const auto b = slc(prof.coord[i], eta, g);
    total_upper += b.upper;
    j["slc"].push_back({{"coord", i}, {"lower", b.lower}, {"upper", b.upper}});
  }
  j["slc_total_upper"] = total_upper;
  write_text(out, j.dump(2) + "\n");
  return 0;
}

struct BenchTask {
  std::string kind;
  std::uint64_t seed;
  int m, n;
  std::string rule;
};

int cmd_bench(const std::vector<std::string>& kinds, const std::string& seed_spec,
              std::uint64_t base_seed, int m_flag, int n_flag,
              const std::vector<std::string>& rules, double eps, int jobs,
              const std::string& out) {
  // seeds: "a..b" or comma list
  std::vector<std::uint64_t> seeds;
  if (const auto dots = seed_spec.find(".."); dots != std::string::npos) {
    const long a = std::stol(seed_spec.substr(0, dots));
    const long b = std::stol(seed_spec.substr(dots + 2));
    if (a > b) throw ValidationError("empty seed range: " + seed_spec);
    for (long s = a; s <= b; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
  } else {
    std::stringstream ss(seed_spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
  }
  for (const auto& r : rules) rule_from(r);  // validate before any compute

  std::vector<BenchTask> tasks;
  for (const auto& kind : kinds)
    for (const auto seed : seeds) {
      const int m = m_flag > 0 ? m_flag : 3 + static_cast<int>(seed % 4);
      const int n = n_flag > 0 ? n_flag : 7 + static_cast<int>(seed % 6);
      for (const auto& rule : rules) tasks.push_back({kind, base_seed + seed, m, n, rule});
    }

  std::vector<std::string> rows(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      const BenchTask& t = tasks[i];
      std::ostringstream os;
      os << t.kind << ',' << t.seed << ',' << t.m << ',' << t.n << ',' << t.rule << ',';
      try {
        LpInstance inst = generate_instance(t.kind, t.m, t.n, t.seed);
        ensure_optimal_value(inst);
        SolveOptions opts;
        opts.eps_term = eps;
        opts.trace_level = 2;
        const Eigen::VectorXd x0 = start_point(inst);
        const SolveResult res = run_rule(inst, x0, rule_from(t.rule), opts);
        const bool ok = verify_walk(inst, x0, res.trace).ok();
        const auto& tt = res.trace.totals;
        os << tt.wallacher_steps + tt.lsc_steps << ',' << tt.wallacher_steps << ','
           << tt.lsc_steps << ',' << tt.oracle_calls << ','
           << fmt(inst.gap(res.x) / (1.0 + std::abs(*inst.meta.optimal_value))) << ','
           << (ok ? 1 : 0);
      } catch (const std::exception& e) {
        os << ",,,,," << "error:" << e.what();
      }
      rows[i] = os.str();
    }
  };
  const int nthreads = std::max(1, jobs);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::ostringstream os;
  os << "kind,seed,m,n,rule,aug_steps,wallacher_steps,lsc_steps,oracle_calls,"
        "rel_gap,verified\n";
  for (const auto& r : rows) os << r << "\n";
  write_text(out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"circuit-augmentation LP toolkit"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a generated instance to a file");
  std::string g_kind = "generalized-flow", g_out;
  int g_m = 3, g_n = 7;
  std::uint64_t g_seed = 1;
  std::vector<int> g_exps;
  gen->add_option("--kind", g_kind, "instance family")
      ->check(CLI::IsMember(generator_kinds()));
  gen->add_option("--m", g_m, "rows");
  gen->add_option("--n", g_n, "columns");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("--exponents", g_exps,
                  "build the geometric block family with these column scales "
                  "(overrides --kind/--n)");
  gen->add_option("--out", g_out, "output instance file")->required();

  // solve
  auto* sol = app.add_subcommand("solve", "run one augmentation rule on an instance");
  std::string s_instance, s_rule = "full", s_trace, s_trace_format = "jsonl";
  double s_eps = 1e-9;
  long s_max_iters = 200000;
  int s_trace_level = 2;
  sol->add_option("--instance", s_instance, "instance file")->required();
  sol->add_option("--rule", s_rule, "wallacher | existential | full");
  sol->add_option("--eps", s_eps, "termination tolerance");
  sol->add_option("--max-iters", s_max_iters, "augmentation step cap");
  sol->add_option("--trace", s_trace, "write the walk trace to this file");
  sol->add_option("--trace-format", s_trace_format, "jsonl | csv");
  sol->add_option("--trace-level", s_trace_level, "0 off, 1 steps, 2 diagnostics");

  // verify
  auto* ver = app.add_subcommand("verify", "replay a trace against an instance");
  std::string v_instance, v_trace;
  ver->add_option("--instance", v_instance, "instance file")->required();
  ver->add_option("--trace", v_trace, "trace file (jsonl)")->required();

  // mcp
  auto* mcp = app.add_subcommand("mcp", "dump the exact per-coordinate path curves");
  std::string m_instance, m_out;
  mcp->add_option("--instance", m_instance, "instance file")->required();
  mcp->add_option("--out", m_out, "output csv (default stdout)");

  // decompose
  auto* dcp = app.add_subcommand("decompose",
                                 "emit the polarized segmentation and cover brackets");
  std::string d_instance, d_out;
  double d_gmax = 0, d_gamma = 0.25;
  dcp->add_option("--instance", d_instance, "instance file")->required();
  dcp->add_option("--gmax", d_gmax, "top of the segmented gap range (default: auto)");
  dcp->add_option("--gamma", d_gamma, "polarization ratio in (0,1)");
  dcp->add_option("--out", d_out, "output json (default stdout)");

  // bench
  auto* ben = app.add_subcommand("bench", "run a corpus across rules, emit a table");
  std::vector<std::string> b_kinds{"generalized-flow", "mincost-flow", "simplex",
                                   "polarized-block"};
  std::vector<std::string> b_rules{"wallacher", "full"};
  std::string b_seeds = "1..20", b_out;
  std::uint64_t b_seed = 0;
  int b_m = 0, b_n = 0, b_jobs = 1;
  double b_eps = 1e-9;
  ben->add_option("--kinds", b_kinds, "instance families")->delimiter(',');
  ben->add_option("--seeds", b_seeds, "seed list: a..b or comma-separated");
  ben->add_option("--seed", b_seed, "base seed added to every corpus seed");
  ben->add_option("--m", b_m, "fixed rows (default: per-seed)");
  ben->add_option("--n", b_n, "fixed columns (default: per-seed)");
  ben->add_option("--rules", b_rules, "augmentation rules to compare")->delimiter(',');
  ben->add_option("--eps", b_eps, "termination tolerance");
  ben->add_option("--jobs", b_jobs, "parallel workers");
  ben->add_option("--out", b_out, "output csv (default stdout)");

  try {
    app.parse(argc, argv);
    if (gen->parsed())
      return cmd_generate(g_kind, g_m, g_n, g_seed, g_exps, g_out);
    if (sol->parsed())
      return cmd_solve(s_instance, s_rule, s_eps, s_max_iters, s_trace_level, s_trace,
                       s_trace_format);
    if (ver->parsed()) return cmd_verify(v_instance, v_trace);
    if (mcp->parsed()) return cmd_mcp(m_instance, m_out);
    if (dcp->parsed()) return cmd_decompose(d_instance, d_gmax, d_gamma, d_out);
    if (ben->parsed())
      return cmd_bench(b_kinds, b_seeds, b_seed, b_m, b_n, b_rules, b_eps, b_jobs,
                       b_out);
    throw ValidationError("no subcommand given");
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << json{{"error", "validation"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << json{{"error", "numerical"}, {"message", e.what()}}.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 3;
  }
}
