#pragma once

// Circuit-walk recording and replay.  Solvers append one WalkStep per
// augmentation plus bookkeeping records (kind == none) at round boundaries;
// verify_walk re-derives every direction from its recorded support and checks
// the walk against the instance from scratch.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "circuitlp/instance.hpp"

namespace circuitlp {

enum class StepKind { wallacher, lsc, none };

const char* step_kind_name(StepKind k);
StepKind step_kind_from(const std::string& name);  // throws ValidationError

// Diagnostics attached to round-boundary records and to long steps.
struct RoundDiag {
  std::vector<int> B, N;           // guessed (or oracle) partition
  int k = -1;                      // singular-value cut, -1 = not computed
  std::vector<double> sigma_head;  // leading singular values, at most 8
  int s_size = -1;                 // |S_p| of a long step
  long phi_ideal = -1;             // idealized round counter, -1 = no oracle
  long oracle_calls = -1;          // oracle calls spent in the round
  long lsc_calls = -1;             // long-step oracle calls in the round
  double lambda0 = 0, lambda1 = 0;  // the round's two gap estimates
  double obj0 = 0, obj1 = 0;        // objective at the two estimate points
  double hat_g = -1;                // target gap of the long-step phase
  bool round_complete = false;
};

struct WalkStep {
  int index = 0;
  StepKind kind = StepKind::none;
  std::vector<int> support;  // ascending; empty exactly when kind == none
  double alpha = 0;          // step length for the direction scaled to unit max-norm
  double objective_after = 0;
  std::optional<double> lambda;
  std::optional<RoundDiag> round_diag;
};

struct WalkTrace {
  std::string instance_name;
  std::vector<WalkStep> steps;
  struct Totals {
    long oracle_calls = 0;
    long wallacher_steps = 0;
    long lsc_steps = 0;
  } totals;
};

struct WalkReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Replays the trace from x0.  Each non-bookkeeping step must have a circuit
// support (the support columns span a one-dimensional kernel), the implied
// maximal step must reproduce the recorded objective, and every visited point
// must be feasible.  Ratio-greedy steps are additionally cross-checked
// against a fresh oracle call.  Violations are collected, not thrown.
WalkReport verify_walk(const LpInstance& inst, const Eigen::VectorXd& x0,
                       const WalkTrace& trace);

// format: "jsonl" (lossless, one header line then one line per step) or
// "csv" (flat columns index,kind,alpha,objective_after,lambda,k,S_size).
void export_trace(const WalkTrace& trace, const std::string& path, const std::string& format);

// Reads a jsonl file written by export_trace.
WalkTrace import_trace(const std::string& path);

// Support of a direction, robust to badly scaled columns: coordinate i counts
// when |z_i| weighted by the column magnitude of A clears a relative
// threshold.  LP solutions keep non-basic entries at exact zero, so this only
// has to reject roundoff on degenerate basic entries.
std::vector<int> direction_support(const Eigen::MatrixXd& A, const Eigen::VectorXd& z);

}  // namespace circuitlp
