#include "circuitlp/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "circuitlp/errors.hpp"
#include "circuitlp/exactla.hpp"
#include "circuitlp/ratio_circuit.hpp"

namespace circuitlp {

using nlohmann::json;

const char* step_kind_name(StepKind k) {
  switch (k) {
    case StepKind::wallacher: return "wallacher";
    case StepKind::lsc: return "lsc";
    case StepKind::none: return "none";
  }
  return "none";
}

StepKind step_kind_from(const std::string& name) {
  if (name == "wallacher") return StepKind::wallacher;
  if (name == "lsc") return StepKind::lsc;
  if (name == "none") return StepKind::none;
  throw ValidationError("unknown step kind: " + name);
}

std::vector<int> direction_support(const Eigen::MatrixXd& A, const Eigen::VectorXd& z) {
  const int n = static_cast<int>(z.size());
  Eigen::VectorXd weighted(n);
  for (int i = 0; i < n; ++i) {
    const double col = A.rows() > 0 ? A.col(i).cwiseAbs().maxCoeff() : 0.0;
    weighted[i] = std::abs(z[i]) * std::max(1.0, col);
  }
  const double top = weighted.size() > 0 ? weighted.maxCoeff() : 0.0;
  std::vector<int> support;
  if (top <= 0) return support;
  for (int i = 0; i < n; ++i)
    if (weighted[i] >= 1e-13 * top) support.push_back(i);
  return support;
}

namespace {

struct ReplayCandidate {
  Eigen::VectorXd z;  // oriented direction, ‖z‖∞ = 1
  double alpha = 0;
  Eigen::VectorXd x_next;
  double objective = 0;
  bool valid = false;
};

// Maximal ratio step from x along z (requires a negative coordinate).
ReplayCandidate ratio_step(const LpInstance& inst, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& z) {
  ReplayCandidate cand;
  cand.z = z;
  double alpha = std::numeric_limits<double>::infinity();
  int argmin = -1;
  for (int i = 0; i < inst.n; ++i) {
    if (z[i] >= 0) continue;
    const double ratio = std::max(x[i], 0.0) / (-z[i]);
    if (ratio < alpha) {
      alpha = ratio;
      argmin = i;
    }
  }
  if (argmin < 0) return cand;  // no blocking coordinate: not a finite step
  cand.alpha = alpha;
  cand.x_next = x + alpha * z;
  for (int i = 0; i < inst.n; ++i)
    if (cand.x_next[i] < 0) cand.x_next[i] = 0;
  cand.x_next[argmin] = 0;
  cand.objective = inst.objective(cand.x_next);
  cand.valid = true;
  return cand;
}

json diag_to_json(const RoundDiag& d) {
  json j;
  j["B"] = d.B;
  j["N"] = d.N;
  j["k"] = d.k;
  j["sigma_head"] = d.sigma_head;
  j["s_size"] = d.s_size;
  j["phi_ideal"] = d.phi_ideal;
  j["oracle_calls"] = d.oracle_calls;
  j["lsc_calls"] = d.lsc_calls;
  j["lambda0"] = d.lambda0;
  j["lambda1"] = d.lambda1;
  j["obj0"] = d.obj0;
  j["obj1"] = d.obj1;
  j["hat_g"] = d.hat_g;
  j["round_complete"] = d.round_complete;
  return j;
}

RoundDiag diag_from_json(const json& j) {
  RoundDiag d;
  d.B = j.at("B").get<std::vector<int>>();
  d.N = j.at("N").get<std::vector<int>>();
  d.k = j.at("k").get<int>();
  d.sigma_head = j.at("sigma_head").get<std::vector<double>>();
  d.s_size = j.at("s_size").get<int>();
  d.phi_ideal = j.at("phi_ideal").get<long>();
  d.oracle_calls = j.at("oracle_calls").get<long>();
  d.lsc_calls = j.at("lsc_calls").get<long>();
  d.lambda0 = j.at("lambda0").get<double>();
  d.lambda1 = j.at("lambda1").get<double>();
  d.obj0 = j.at("obj0").get<double>();
  d.obj1 = j.at("obj1").get<double>();
  d.hat_g = j.at("hat_g").get<double>();
  d.round_complete = j.at("round_complete").get<bool>();
  return d;
}

}  // namespace

WalkReport verify_walk(const LpInstance& inst, const Eigen::VectorXd& x0,
                       const WalkTrace& trace) {
  WalkReport report;
  auto flag = [&](int index, const std::string& what) {
    report.violations.push_back("step " + std::to_string(index) + ": " + what);
  };
  if (x0.size() != inst.n) {
    report.violations.push_back("start point has wrong dimension");
    return report;
  }
  if (!check_feasible(inst, x0).feasible) {
    report.violations.push_back("start point is not feasible");
    return report;
  }

  const double cnorm = inst.c.size() > 0 ? inst.c.cwiseAbs().sum() : 0.0;
  Eigen::VectorXd x = x0;
  for (const WalkStep& step : trace.steps) {
    if (step.kind == StepKind::none) {
      if (!step.support.empty()) flag(step.index, "bookkeeping record carries a support");
      const double obj = inst.objective(x);
      if (std::abs(step.objective_after - obj) > 1e-7 * (1.0 + std::abs(obj)))
        flag(step.index, "objective does not match the walk at a round boundary");
      continue;
    }
    if (step.support.empty()) {
      flag(step.index, "augmentation step without a support");
      continue;
    }
    bool indexed = true;
    for (size_t j = 0; j < step.support.size(); ++j) {
      const int i = step.support[j];
      if (i < 0 || i >= inst.n || (j > 0 && step.support[j - 1] >= i)) {
        indexed = false;
        break;
      }
    }
    if (!indexed) {
      flag(step.index, "support indices are not an ascending subset of the coordinates");
      continue;
    }

    // the support columns must carry a one-dimensional kernel
    const int s = static_cast<int>(step.support.size());
    QMatrix cols(inst.m, s);
    for (int r = 0; r < inst.m; ++r)
      for (int j = 0; j < s; ++j) cols.at(r, j) = Rational(inst.A(r, step.support[j]));
    const auto basis = exact_kernel_basis(cols);
    if (basis.size() != 1) {
      flag(step.index, "support is not elementary: kernel dimension is " +
                           std::to_string(basis.size()));
      continue;
    }
    bool minimal = true;
    for (const Rational& entry : basis[0])
      if (entry == 0) minimal = false;
    if (!minimal) {
      flag(step.index, "support is not elementary: a support coordinate vanishes");
      continue;
    }

    Eigen::VectorXd z = Eigen::VectorXd::Zero(inst.n);
    for (int j = 0; j < s; ++j) z[step.support[j]] = to_double(basis[0][j]);
    z /= z.lpNorm<Eigen::Infinity>();
    const double cz = inst.c.dot(z);
    const double decisive = 1e-11 * (1.0 + cnorm);

    std::vector<ReplayCandidate> cands;
    if (cz < -decisive) {
      cands.push_back(ratio_step(inst, x, z));
    } else if (cz > decisive) {
      cands.push_back(ratio_step(inst, x, -z));
    } else {
      cands.push_back(ratio_step(inst, x, z));
      cands.push_back(ratio_step(inst, x, -z));
    }
    cands.erase(std::remove_if(cands.begin(), cands.end(),
                               [](const ReplayCandidate& c) { return !c.valid; }),
                cands.end());
    if (cands.empty()) {
      flag(step.index, "direction admits no maximal ratio step");
      continue;
    }
    const ReplayCandidate& best = *std::min_element(
        cands.begin(), cands.end(), [&](const ReplayCandidate& a, const ReplayCandidate& b) {
          const double da = std::abs(a.objective - step.objective_after);
          const double db = std::abs(b.objective - step.objective_after);
          if (da != db) return da < db;
          return std::abs(a.alpha - step.alpha) < std::abs(b.alpha - step.alpha);
        });

    if (std::abs(step.alpha - best.alpha) > 1e-7 * (1.0 + std::abs(best.alpha)))
      flag(step.index, "recorded step length is not the maximal ratio step");
    if (std::abs(step.objective_after - best.objective) >
        1e-7 * (1.0 + std::abs(best.objective)))
      flag(step.index, "objective chain is broken");
    if (!check_feasible(inst, best.x_next).feasible)
      flag(step.index, "walk leaves the feasible region");

    if (step.kind == StepKind::wallacher) {
      // eps 0: ask for the circuit itself even when the remaining gap is tiny;
      // the producer recorded a step here, so a direction must exist
      const WallacherStep fresh = wallacher_step(inst, x, 0.0);
      const std::vector<int> oracle_support = direction_support(inst.A, fresh.rc.z);
      if (oracle_support != step.support)
        flag(step.index, "ratio-greedy step does not match a fresh oracle call");
    }

    x = best.x_next;
  }
  return report;
}

void export_trace(const WalkTrace& trace, const std::string& path, const std::string& format) {
  if (format != "jsonl" && format != "csv")
    throw ValidationError("unknown trace format: " + format);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open trace file for writing: " + path);

  if (format == "csv") {
    out << "index,kind,alpha,objective_after,lambda,k,S_size\n";
    out.precision(17);
    for (const WalkStep& step : trace.steps) {
      out << step.index << ',' << step_kind_name(step.kind) << ',' << step.alpha << ','
          << step.objective_after << ',';
      if (step.lambda) out << *step.lambda;
      out << ',';
      if (step.round_diag && step.round_diag->k >= 0) out << step.round_diag->k;
      out << ',';
      if (step.round_diag && step.round_diag->s_size >= 0) out << step.round_diag->s_size;
      out << '\n';
    }
    return;
  }

  json header;
  header["instance"] = trace.instance_name;
  header["totals"] = {{"oracle_calls", trace.totals.oracle_calls},
                      {"wallacher_steps", trace.totals.wallacher_steps},
                      {"lsc_steps", trace.totals.lsc_steps}};
  out << header.dump() << '\n';
  for (const WalkStep& step : trace.steps) {
    json j;
    j["index"] = step.index;
    j["kind"] = step_kind_name(step.kind);
    j["support"] = step.support;
    j["alpha"] = step.alpha;
    j["objective_after"] = step.objective_after;
    if (step.lambda)
      j["lambda"] = *step.lambda;
    else
      j["lambda"] = nullptr;
    if (step.round_diag) j["round_diag"] = diag_to_json(*step.round_diag);
    out << j.dump() << '\n';
  }
}

WalkTrace import_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trace file is empty: " + path);
  WalkTrace trace;
  try {
    const json header = json::parse(line);
    trace.instance_name = header.at("instance").get<std::string>();
    const json& totals = header.at("totals");
    trace.totals.oracle_calls = totals.at("oracle_calls").get<long>();
    trace.totals.wallacher_steps = totals.at("wallacher_steps").get<long>();
    trace.totals.lsc_steps = totals.at("lsc_steps").get<long>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      WalkStep step;
      step.index = j.at("index").get<int>();
      step.kind = step_kind_from(j.at("kind").get<std::string>());
      step.support = j.at("support").get<std::vector<int>>();
      step.alpha = j.at("alpha").get<double>();
      step.objective_after = j.at("objective_after").get<double>();
      if (!j.at("lambda").is_null()) step.lambda = j.at("lambda").get<double>();
      if (j.contains("round_diag")) step.round_diag = diag_from_json(j.at("round_diag"));
      trace.steps.push_back(std::move(step));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed trace file: ") + e.what());
  }
  return trace;
}

}  // namespace circuitlp
