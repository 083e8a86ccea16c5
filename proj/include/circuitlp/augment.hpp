#pragma once

// Circuit-augmentation drivers.  Three rules share the ratio-circuit oracle:
// the ratio-greedy baseline ("wallacher"), the oracle-assisted small-instance
// solver ("existential", needs the exact profile and segmentation), and the
// full solver ("full") that alternates a fixed-length greedy phase with up to
// n forced long steps driven by a guessed partition.

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "circuitlp/instance.hpp"
#include "circuitlp/lifting.hpp"
#include "circuitlp/mcp.hpp"
#include "circuitlp/ratio_circuit.hpp"
#include "circuitlp/trace.hpp"

namespace circuitlp {

// Threshold/step-count constants of the full solver, kept as natural logs:
// f1 grows like (3n)^(5n) and overflows doubles from n ≈ 35 on.
//   f1 = 32n²(3n)^(5n)f6   f2 = 64n^2.5   f3(p) = (3n)^(5p)f6
//   f4 = 2n                f5 = 2n²       f6 = 3785n⁶
struct FConstants {
  int n = 0;
  double log_f1 = 0, log_f2 = 0, log_f4 = 0, log_f5 = 0, log_f6 = 0;
  double log_f3(int p) const;
  double f4() const { return 2.0 * n; }
  long short_steps() const;  // ⌈n·log(4·f1)⌉, the greedy-phase length
  static FConstants make(int n);
};

// One forced long step: the small-coordinate set S_p and the moving target
// y_p on the ray L(t) = ray_origin + t·ray_dir through [y0, xbar].
struct LongStepState {
  int p = 0;
  std::vector<int> S_p;
  Eigen::VectorXd y_p;
  Eigen::VectorXd ray_origin, ray_dir;
};

struct LongStepRecord {
  LongStepState state;
  Eigen::VectorXd y_next;  // target at the minimal admissible ray parameter
  RatioCircuitResult rc;
  double alpha = 0;
  Eigen::VectorXd x_after;
};

enum class AugmentRule { wallacher, existential, full };

struct SolveOptions {
  AugmentRule rule = AugmentRule::full;
  long max_iters = 200000;  // cap on augmentation steps
  double eps_term = 1e-9;   // stop once λ ≤ eps_term·(1 + |⟨c,x⟩|)
  int trace_level = 1;      // 0 off, 1 steps, 2 steps + round diagnostics
};

struct SolveResult {
  Eigen::VectorXd x;
  WalkTrace trace;
};

// Ratio-greedy augmentation until the oracle certifies near-optimality.
// Aborts after 3n consecutive zero-length steps (degeneracy diagnostic).
SolveResult solve_wallacher(const LpInstance& inst, const Eigen::VectorXd& x0,
                            const SolveOptions& opts);

// One long-step oracle call: min ⟨c,z⟩ over the kernel with the weight row
//   Σ_{S_p} z⁺/(2·y_next) + f4·Σ_B z⁻/x + Σ_{N∖S_p} z⁻/x ≤ 1
// and z⁻ forbidden on S_p.  Zero entries of x or y_next turn into infinite
// weights (the corresponding sign is forbidden).
RatioCircuitResult lsc_step(const LpInstance& inst, const Eigen::VectorXd& x,
                            const std::vector<int>& B, const std::vector<int>& N,
                            const std::vector<int>& S_p, const Eigen::VectorXd& y_next,
                            const FConstants& fc);

// Runs up to n forced long steps; stops early only when the next moving
// target does not exist on the ray.  Throws when xbar == y0.
std::pair<Eigen::VectorXd, std::vector<LongStepRecord>> long_steps_forced(
    const LpInstance& inst, const Eigen::VectorXd& x, const Eigen::VectorXd& xbar,
    const Eigen::VectorXd& y0, const std::vector<int>& Ntilde, const FConstants& fc);

struct PartitionGuess {
  std::vector<int> B, N;  // ascending; may overlap or miss indices
  bool consistent = false;  // true iff B, N partition [n]
};

// Window tests on the ratios xhat1 ./ xhat0: coordinates that kept their
// scale go to B, coordinates that shrank like λ1/λ0 go to N.
PartitionGuess guess_partition(int n, const Eigen::VectorXd& xhat0,
                               const Eigen::VectorXd& xhat1, double lambda0,
                               double lambda1);

// Largest k with 4n²·λ0/σ_k < λ1 for σ sorted nonincreasing; 0 when none.
int choose_k(const Eigen::VectorXd& sigma, double lambda0, double lambda1, int n);

struct LongStepTargets {
  Eigen::VectorXd dx;                 // kernel direction
  std::optional<Eigen::VectorXd> y0;  // xbar + alpha·dx; empty when no
                                      // admissible step size exists
  double alpha = 0;
};

// Long-step direction and starting target: project −x̄_N/x̂0_N onto the span
// of the d = dim − k smallest singular directions of op, lift to B, rescale
// by x̂0.  alpha is the largest value keeping y0 ≥ 0 on B and above the floor
// 8n²·x̂0/σ_k on N (floor 0 when k = 0).  sigma_k is ignored when k = 0.
LongStepTargets build_targets(const LpInstance& inst, const Eigen::VectorXd& xhat0,
                              const Eigen::VectorXd& xbar, const std::vector<int>& B,
                              const std::vector<int>& N, int k, double sigma_k,
                              const LiftingOperator& op);

// Full driver.  Per round: gap estimate + per-coordinate path approximation
// (n+1 oracle calls), short_steps() greedy augmentations, a second estimate +
// approximation (n+1 calls), then — when the partition guess is consistent,
// k < dim, and the targets exist — up to n forced long steps.
SolveResult solve_full(const LpInstance& inst, const Eigen::VectorXd& x0,
                       const SolveOptions& opts);

// Small-instance driver with the exact profile and segmentation supplied.
// Locates the segment of the current gap, computes the singular values of the
// rescaled lifting map, and when the gap sits deep inside a long
// singular-value subinterval runs guarded long steps from exact anchor
// points; otherwise takes a ratio-greedy step.  Requires a cached optimal
// value on inst.
SolveResult solve_existential(const LpInstance& inst, const Eigen::VectorXd& x0,
                              const PolarizedDecomposition& dec, const McpProfile& prof,
                              const SolveOptions& opts);

}  // namespace circuitlp
