#include "circuitlp/instance.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace circuitlp {

using nlohmann::json;

double LpInstance::gap(const Eigen::VectorXd& x) const {
  if (!meta.optimal_value)
    throw ValidationError("gap: optimal value not cached; call ensure_optimal_value first");
  return c.dot(x) - *meta.optimal_value;
}

FeasibilityReport check_feasible(const LpInstance& inst, const Eigen::VectorXd& x, double eps) {
  if (x.size() != inst.n) throw ValidationError("check_feasible: wrong point dimension");
  FeasibilityReport r;
  r.residual_inf = inst.m ? (inst.A * x - inst.b).lpNorm<Eigen::Infinity>() : 0.0;
  r.min_coord = x.size() ? x.minCoeff() : 0.0;
  r.objective = inst.c.dot(x);
  const double rhs_scale = 1.0 + (inst.m ? inst.b.lpNorm<Eigen::Infinity>() : 0.0);
  r.feasible = r.residual_inf <= eps * rhs_scale && r.min_coord >= -eps;
  return r;
}

static void validate_shape(const LpInstance& inst) {
  if (inst.m < 0 || inst.n <= 0 || inst.m > inst.n)
    throw ValidationError("instance: need 0 <= m <= n and n >= 1");
  if (inst.A.rows() != inst.m || inst.A.cols() != inst.n || inst.b.size() != inst.m ||
      inst.c.size() != inst.n)
    throw ValidationError("instance: matrix/vector shapes disagree with m, n");
  if (!inst.A.allFinite() || !inst.b.allFinite() || !inst.c.allFinite())
    throw ValidationError("instance: non-finite entries");
  if (inst.x0 && (inst.x0->size() != inst.n || !inst.x0->allFinite()))
    throw ValidationError("instance: x0 has wrong dimension or non-finite entries");
}

void repair_rank(LpInstance& inst) {
  // Dependence is judged relative to each row's own magnitude so that rows of
  // wildly different scales (deliberately graded instances) are not dropped.
  std::vector<Eigen::VectorXd> pivot_rows;
  std::vector<int> pivot_cols;
  std::vector<double> pivot_b;
  std::vector<int> keep, dropped;
  const double b_scale = 1.0 + (inst.m ? inst.b.cwiseAbs().maxCoeff() : 0.0);
  for (int i = 0; i < inst.m; ++i) {
    Eigen::VectorXd v = inst.A.row(i);
    double bv = inst.b(i);
    const double row_scale = std::max(1e-300, v.cwiseAbs().maxCoeff());
    for (size_t k = 0; k < pivot_rows.size(); ++k) {
      const double f = v(pivot_cols[k]) / pivot_rows[k](pivot_cols[k]);
      if (f != 0.0) {
        v -= f * pivot_rows[k];
        bv -= f * pivot_b[k];
        v(pivot_cols[k]) = 0.0;
      }
    }
    int pc = -1;
    double mx = 1e-10 * row_scale;
    for (int j = 0; j < inst.n; ++j)
      if (std::abs(v(j)) > mx) {
        mx = std::abs(v(j));
        pc = j;
      }
    if (pc >= 0) {
      pivot_rows.push_back(v);
      pivot_cols.push_back(pc);
      pivot_b.push_back(bv);
      keep.push_back(i);
    } else {
      if (std::abs(bv) > kFeasEps * b_scale)
        throw ValidationError("repair_rank: dependent row " + std::to_string(i) +
                              " has inconsistent right-hand side");
      dropped.push_back(i);
    }
  }
  if (dropped.empty()) return;
  Eigen::MatrixXd A2(static_cast<int>(keep.size()), inst.n);
  Eigen::VectorXd b2(static_cast<int>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    A2.row(static_cast<int>(k)) = inst.A.row(keep[k]);
    b2(static_cast<int>(k)) = inst.b(keep[k]);
  }
  inst.A = std::move(A2);
  inst.b = std::move(b2);
  inst.m = static_cast<int>(keep.size());
  for (int i : dropped) inst.meta.repaired_rows.push_back(i);
}

LpProblem<double> to_problem(const LpInstance& inst) {
  LpProblem<double> p;
  p.m = inst.m;
  p.n = inst.n;
  p.A.resize(static_cast<size_t>(inst.m) * inst.n);
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j) p.A[static_cast<size_t>(i) * inst.n + j] = inst.A(i, j);
  p.b.assign(inst.b.data(), inst.b.data() + inst.m);
  p.c.assign(inst.c.data(), inst.c.data() + inst.n);
  return p;
}

LpProblem<Rational> to_problem_exact(const LpInstance& inst) {
  LpProblem<Rational> p;
  p.m = inst.m;
  p.n = inst.n;
  p.A.resize(static_cast<size_t>(inst.m) * inst.n);
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j) p.A[static_cast<size_t>(i) * inst.n + j] = Rational(inst.A(i, j));
  p.b.resize(inst.m);
  p.c.resize(inst.n);
  for (int i = 0; i < inst.m; ++i) p.b[i] = Rational(inst.b(i));
  for (int j = 0; j < inst.n; ++j) p.c[j] = Rational(inst.c(j));
  return p;
}

double ensure_optimal_value(LpInstance& inst) {
  if (inst.meta.optimal_value) return *inst.meta.optimal_value;
  LpSolution<double> sol = solve_lp(to_problem(inst));
  if (sol.status == LpStatus::Infeasible)
    throw ValidationError("instance is infeasible");
  if (sol.status == LpStatus::Unbounded) {
    inst.meta.bounded = false;
    throw ValidationError("instance is unbounded in the objective direction");
  }
  inst.meta.optimal_value = sol.objective;
  return sol.objective;
}

bool ensure_bounded(LpInstance& inst) {
  if (inst.meta.bounded) return *inst.meta.bounded;
  bool bounded = true;
  std::vector<int> fixed;
  LpProblem<double> p = to_problem(inst);
  for (int j = 0; j < inst.n && bounded; ++j) {
    for (int k = 0; k < inst.n; ++k) p.c[k] = (k == j) ? -1.0 : 0.0;
    LpSolution<double> sol = solve_lp(p);
    if (sol.status == LpStatus::Infeasible) throw ValidationError("instance is infeasible");
    if (sol.status == LpStatus::Unbounded) {
      bounded = false;
      break;
    }
    if (-sol.objective <= kFeasEps * (1.0 + inst.b.cwiseAbs().maxCoeff())) fixed.push_back(j);
  }
  inst.meta.bounded = bounded;
  if (bounded) inst.meta.fixed_at_zero = std::move(fixed);
  return bounded;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

std::vector<double> from_eigen(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd analytic_center_ish(const LpInstance& inst) {
  // variables (x, t, s) with x - t*1 - s = 0 replaced by x_j = t + s_j:
  // max t  s.t.  A(t*1 + s) = b, s >= 0, t >= 0 — then shift so t may reach
  // only nonnegative values (interior points of standard-form regions have
  // x > 0, so t* > 0 whenever an interior exists).
  LpProblem<double> p;
  p.m = inst.m;
  p.n = inst.n + 1;
  p.A.assign(static_cast<size_t>(p.m) * p.n, 0.0);
  p.b.assign(inst.b.data(), inst.b.data() + inst.m);
  p.c.assign(p.n, 0.0);
  for (int i = 0; i < inst.m; ++i) {
    double rowsum = 0;
    for (int j = 0; j < inst.n; ++j) {
      p.A[static_cast<size_t>(i) * p.n + j] = inst.A(i, j);
      rowsum += inst.A(i, j);
    }
    p.A[static_cast<size_t>(i) * p.n + inst.n] = rowsum;
  }
  p.c[inst.n] = -1.0;  // maximise t
  LpSolution<double> sol = solve_lp(p);
  if (sol.status == LpStatus::Infeasible) throw ValidationError("instance is infeasible");
  if (sol.status == LpStatus::Unbounded) {
    // t unbounded: clamp with an extra budget row sum(s) + t <= big
    p.m += 1;
    std::vector<double> A2(static_cast<size_t>(p.m) * (p.n + 1), 0.0);
    for (int i = 0; i < inst.m; ++i)
      for (int j = 0; j < p.n; ++j) A2[static_cast<size_t>(i) * (p.n + 1) + j] =
          p.A[static_cast<size_t>(i) * p.n + j];
    const double big = 1e3 * (1.0 + inst.b.cwiseAbs().maxCoeff());
    for (int j = 0; j <= p.n; ++j) A2[static_cast<size_t>(inst.m) * (p.n + 1) + j] = 1.0;
    p.n += 1;
    p.A = std::move(A2);
    p.b.push_back(big);
    p.c.push_back(0.0);
    sol = solve_lp(p);
    if (sol.status != LpStatus::Optimal)
      throw NumericalError("analytic_center_ish: unexpected solver status");
  }
  Eigen::VectorXd x(inst.n);
  const double t = sol.x[inst.n];
  for (int j = 0; j < inst.n; ++j) x(j) = sol.x[j] + t;
  return x;
}

// ---------------------------------------------------------------------------
// JSON round trip

static json instance_to_json(const LpInstance& inst) {
  json j;
  j["name"] = inst.meta.name;
  j["m"] = inst.m;
  j["n"] = inst.n;
  json rows = json::array();
  for (int i = 0; i < inst.m; ++i) {
    json row = json::array();
    for (int k = 0; k < inst.n; ++k) row.push_back(inst.A(i, k));
    rows.push_back(std::move(row));
  }
  j["A"] = std::move(rows);
  j["b"] = from_eigen(inst.b);
  j["c"] = from_eigen(inst.c);
  if (inst.x0) j["x0"] = from_eigen(*inst.x0);
  if (inst.meta.optimal_value) j["optimal_value"] = *inst.meta.optimal_value;
  return j;
}

static LpInstance instance_from_json(const json& j) {
  LpInstance inst;
  try {
    inst.meta.name = j.value("name", std::string("unnamed"));
    inst.meta.kind = "file";
    inst.m = j.at("m").get<int>();
    inst.n = j.at("n").get<int>();
    const auto& rows = j.at("A");
    if (!rows.is_array() || static_cast<int>(rows.size()) != inst.m)
      throw ValidationError("instance: A must have m rows");
    inst.A.resize(std::max(inst.m, 0), std::max(inst.n, 0));
    for (int i = 0; i < inst.m; ++i) {
      const auto& row = rows.at(i);
      if (!row.is_array() || static_cast<int>(row.size()) != inst.n)
        throw ValidationError("instance: row " + std::to_string(i) + " must have n entries");
      for (int k = 0; k < inst.n; ++k) inst.A(i, k) = row.at(k).get<double>();
    }
    std::vector<double> b = j.at("b").get<std::vector<double>>();
    std::vector<double> c = j.at("c").get<std::vector<double>>();
    if (static_cast<int>(b.size()) != inst.m || static_cast<int>(c.size()) != inst.n)
      throw ValidationError("instance: b or c has the wrong length");
    inst.b = to_eigen(b);
    inst.c = to_eigen(c);
    if (j.contains("x0")) inst.x0 = to_eigen(j.at("x0").get<std::vector<double>>());
    if (j.contains("optimal_value")) inst.meta.optimal_value = j.at("optimal_value").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("instance: malformed JSON: ") + e.what());
  }
  validate_shape(inst);
  repair_rank(inst);
  if (inst.x0) {
    FeasibilityReport r = check_feasible(inst, *inst.x0);
    if (!r.feasible)
      throw ValidationError("instance: declared x0 is not feasible (residual " +
                            std::to_string(r.residual_inf) + ", min coord " +
                            std::to_string(r.min_coord) + ")");
  }
  return inst;
}

std::string instance_to_json_string(const LpInstance& inst) {
  return instance_to_json(inst).dump(2) + "\n";
}

LpInstance instance_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("instance: JSON parse error: ") + e.what());
  }
  return instance_from_json(j);
}

LpInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open instance file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  LpInstance inst = instance_from_json_string(ss.str());
  if (inst.meta.name == "unnamed") inst.meta.name = path;
  return inst;
}

void save_instance(const LpInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write instance file: " + path);
  out << instance_to_json_string(inst);
}

}  // namespace circuitlp
