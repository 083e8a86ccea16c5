#pragma once

// The augmentation oracle: minimum-ratio circuit computation with primal and
// dual certificates, the maximal augmentation step, and the ratio-greedy
// (Wallacher-style) step built from the two.

#include <Eigen/Dense>
#include <utility>

#include "circuitlp/instance.hpp"
#include "circuitlp/simplex.hpp"

namespace circuitlp {

struct RatioCircuitResult {
  LpStatus status = LpStatus::Optimal;
  Eigen::VectorXd z;  // elementary or zero (Optimal); improving ray (Unbounded)
  Eigen::VectorXd y;  // duals of the kernel rows
  Eigen::VectorXd s;  // u − Aᵀy
  double lambda = 0;  // −(optimal objective), clamped to ≥ 0
  double objective = 0;
  bool weight_row_tight = false;
  long pivots = 0;
};

// min ⟨u,z⟩ over Az = 0 with ⟨v,z⁺⟩ + ⟨w,z⁻⟩ ≤ 1; infinite weights forbid the
// corresponding sign. The optimum is attained by 0 or by an elementary vector.
RatioCircuitResult ratio_circuit(const LpInstance& inst, const Eigen::VectorXd& u,
                                 const Weights<double>& v, const Weights<double>& w);

// Maximal feasible step x + αz; z must have a negative coordinate.
std::pair<Eigen::VectorXd, double> aug_max(const LpInstance& inst, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& z);

struct WallacherStep {
  Eigen::VectorXd x_next;
  RatioCircuitResult rc;
  bool optimal = false;  // λ below the termination threshold
  double alpha = 0;
};

// One ratio-greedy augmentation from x with weights (0, 1/x); x_i = 0 entries
// get infinite minus-weight. Declares optimality when λ ≤ eps_term·(1+|⟨c,x⟩|).
WallacherStep wallacher_step(const LpInstance& inst, const Eigen::VectorXd& x,
                             double eps_term = 1e-9);

}  // namespace circuitlp
