#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "circuitlp/simplex.hpp"

namespace circuitlp {

struct InstanceMetadata {
  std::string name;
  std::string kind;  // generator family, or "file"
  std::uint64_t seed = 0;
  std::optional<double> optimal_value;
  std::optional<bool> bounded;
  std::vector<int> repaired_rows;   // original row indices dropped as dependent
  std::vector<int> fixed_at_zero;   // coordinates that are zero in every feasible point
};

// min <c,x>  s.t.  A x = b, x >= 0, with A full row rank after repair.
struct LpInstance {
  int m = 0, n = 0;
  Eigen::MatrixXd A;
  Eigen::VectorXd b, c;
  std::optional<Eigen::VectorXd> x0;
  InstanceMetadata meta;

  double objective(const Eigen::VectorXd& x) const { return c.dot(x); }
  // objective gap against the cached optimal value (which must be present)
  double gap(const Eigen::VectorXd& x) const;
};

struct FeasibilityReport {
  bool feasible = false;
  double residual_inf = 0;  // ||Ax - b||_inf
  double min_coord = 0;
  double objective = 0;
};

inline constexpr double kFeasEps = 1e-9;

FeasibilityReport check_feasible(const LpInstance& inst, const Eigen::VectorXd& x,
                                 double eps = kFeasEps);

LpInstance load_instance(const std::string& path);
void save_instance(const LpInstance& inst, const std::string& path);
std::string instance_to_json_string(const LpInstance& inst);
LpInstance instance_from_json_string(const std::string& text);

// Drops linearly dependent rows in place (elimination with pivoting, per-row
// threshold 1e-10 * max|row|) and records them in meta.repaired_rows.  Throws
// when a dependent row has an inconsistent right-hand side.
void repair_rank(LpInstance& inst);

// Solves min <c,x> once and caches the value; throws ValidationError when the
// instance is unbounded in the objective direction.
double ensure_optimal_value(LpInstance& inst);

// Per-coordinate max solves: caches boundedness of the feasible region and the
// list of coordinates fixed at zero.  Returns the cached boundedness flag.
bool ensure_bounded(LpInstance& inst);

LpProblem<double> to_problem(const LpInstance& inst);
LpProblem<Rational> to_problem_exact(const LpInstance& inst);

Eigen::VectorXd to_eigen(const std::vector<double>& v);
std::vector<double> from_eigen(const Eigen::VectorXd& v);

// Strictly-feasible-ish starting point: solves max t s.t. Ax = b, x >= t*1,
// then returns the maximiser (interior whenever the region has volume).
Eigen::VectorXd analytic_center_ish(const LpInstance& inst);

}  // namespace circuitlp
