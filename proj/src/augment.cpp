#include "circuitlp/augment.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "circuitlp/errors.hpp"

namespace circuitlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_partition(int n, const std::vector<int>& B, const std::vector<int>& N) {
  std::vector<int> count(n, 0);
  for (int i : B) {
    if (i < 0 || i >= n) throw ValidationError("partition index out of range");
    ++count[i];
  }
  for (int i : N) {
    if (i < 0 || i >= n) throw ValidationError("partition index out of range");
    ++count[i];
  }
  for (int i = 0; i < n; ++i)
    if (count[i] != 1) throw ValidationError("B and N must partition the coordinates");
}

void validate_start(const LpInstance& inst, const Eigen::VectorXd& x0) {
  if (x0.size() != inst.n) throw ValidationError("start point has wrong dimension");
  const FeasibilityReport rep = check_feasible(inst, x0);
  if (!rep.feasible) throw ValidationError("start point is not feasible");
}

// Trace bookkeeping shared by the drivers.  Totals are always counted; steps
// are recorded from trace_level 1, round-boundary records and per-step
// diagnostics from level 2.
struct Recorder {
  const LpInstance& inst;
  int level;
  WalkTrace trace;
  int next_index = 0;

  void spend(long calls) { trace.totals.oracle_calls += calls; }

  void step(StepKind kind, const Eigen::VectorXd& z, double alpha, double objective_after,
            std::optional<double> lambda, std::optional<RoundDiag> diag) {
    if (kind == StepKind::wallacher) ++trace.totals.wallacher_steps;
    if (kind == StepKind::lsc) ++trace.totals.lsc_steps;
    if (level < 1) return;
    if (kind == StepKind::none && level < 2) return;
    WalkStep ws;
    ws.index = next_index++;
    ws.kind = kind;
    if (kind != StepKind::none) ws.support = direction_support(inst.A, z);
    // Store the length in the scale verify_walk reconstructs: the direction
    // normalized to unit max-norm.  The oracle's own scaling of z is not
    // recoverable from a support alone.
    const double znorm = z.lpNorm<Eigen::Infinity>();
    ws.alpha = (kind != StepKind::none && znorm > 0) ? alpha * znorm : alpha;
    ws.objective_after = objective_after;
    ws.lambda = lambda;
    if (level >= 2) ws.round_diag = std::move(diag);
    trace.steps.push_back(std::move(ws));
  }
};

struct LongStepRun {
  Eigen::VectorXd x;
  std::vector<LongStepRecord> records;
  long calls = 0;
};

// The long-step loop proper: up to n rounds of (small set, next target on the
// ray, oracle call, maximal augmentation).  keep_going, when set, is checked
// before each oracle call.
LongStepRun long_steps_core(const LpInstance& inst, Eigen::VectorXd x,
                            const Eigen::VectorXd& xbar, const Eigen::VectorXd& y0,
                            const std::vector<int>& Ntilde, const FConstants& fc,
                            const std::function<bool(const Eigen::VectorXd&)>& keep_going) {
  const int n = inst.n;
  std::vector<uint8_t> in_N(n, 0);
  for (int i : Ntilde) {
    if (i < 0 || i >= n) throw ValidationError("partition index out of range");
    in_N[i] = 1;
  }
  std::vector<int> B;
  for (int i = 0; i < n; ++i)
    if (!in_N[i]) B.push_back(i);

  const Eigen::VectorXd dir = xbar - y0;
  LongStepRun run;
  run.x = std::move(x);
  Eigen::VectorXd y_p = y0;
  double t_cur = 0;
  for (int p = 0; p < n; ++p) {
    if (keep_going && !keep_going(run.x)) break;
    std::vector<int> S_p;
    for (int i : Ntilde)
      if (run.x[i] <= 3.0 * n * y_p[i]) S_p.push_back(i);

    // minimal t >= t_cur with L(t) >= 4n·y_p on Ntilde
    double lo = t_cur, hi = kInf;
    bool exists = true;
    for (int i : Ntilde) {
      const double thr = 4.0 * n * y_p[i];
      const double d = dir[i];
      if (d > 0)
        lo = std::max(lo, (thr - y0[i]) / d);
      else if (d < 0)
        hi = std::min(hi, (thr - y0[i]) / d);
      else if (y0[i] < thr) {
        exists = false;
        break;
      }
    }
    if (!exists || lo > hi || !std::isfinite(lo)) break;
    const double t_next = lo;
    const Eigen::VectorXd y_next = y0 + t_next * dir;

    const RatioCircuitResult rc = lsc_step(inst, run.x, B, Ntilde, S_p, y_next, fc);
    ++run.calls;
    if (rc.status == LpStatus::Unbounded)
      throw ValidationError("objective is unbounded over the feasible region");
    if (rc.z.lpNorm<Eigen::Infinity>() == 0) break;
    if (rc.z.minCoeff() >= 0)
      throw ValidationError("objective is unbounded over the feasible region");
    auto [x_next, alpha] = aug_max(inst, run.x, rc.z);

    LongStepRecord record;
    record.state = LongStepState{p, std::move(S_p), y_p, y0, dir};
    record.y_next = y_next;
    record.rc = rc;
    record.alpha = alpha;
    record.x_after = x_next;
    run.records.push_back(std::move(record));

    run.x = std::move(x_next);
    y_p = y_next;
    t_cur = t_next;
  }
  return run;
}

std::vector<double> sigma_head_of(const LiftingOperator& op) {
  const int head = std::min(8, op.dim());
  return std::vector<double>(op.sigma.data(), op.sigma.data() + head);
}

}  // namespace

double FConstants::log_f3(int p) const {
  if (p < 0) throw ValidationError("negative power in threshold constant");
  return 5.0 * p * std::log(3.0 * n) + log_f6;
}

long FConstants::short_steps() const {
  return static_cast<long>(std::ceil(n * (std::log(4.0) + log_f1)));
}

FConstants FConstants::make(int n) {
  if (n < 1) throw ValidationError("threshold constants need n >= 1");
  FConstants fc;
  fc.n = n;
  const double ln = std::log(static_cast<double>(n));
  fc.log_f6 = std::log(3785.0) + 6.0 * ln;
  fc.log_f1 = std::log(32.0) + 2.0 * ln + 5.0 * n * std::log(3.0 * n) + fc.log_f6;
  fc.log_f2 = std::log(64.0) + 2.5 * ln;
  fc.log_f4 = std::log(2.0) + ln;
  fc.log_f5 = std::log(2.0) + 2.0 * ln;
  // the greedy phase must also absorb the n·log(8192·n^7.5) restart overhead
  assert(fc.short_steps() >=
         static_cast<long>(std::ceil(n * (std::log(8192.0) + 7.5 * ln))));
  return fc;
}

SolveResult solve_wallacher(const LpInstance& inst, const Eigen::VectorXd& x0,
                            const SolveOptions& opts) {
  validate_start(inst, x0);
  Recorder rec{inst, opts.trace_level, {}, 0};
  rec.trace.instance_name = inst.meta.name;
  Eigen::VectorXd x = x0;
  long zero_run = 0;
  bool done = false;
  for (long it = 0; it < opts.max_iters; ++it) {
    const WallacherStep ws = wallacher_step(inst, x, opts.eps_term);
    rec.spend(1);
    if (ws.rc.status == LpStatus::Unbounded)
      throw ValidationError("objective is unbounded over the feasible region");
    if (ws.optimal) {
      done = true;
      break;
    }
    x = ws.x_next;
    rec.step(StepKind::wallacher, ws.rc.z, ws.alpha, inst.objective(x), ws.rc.lambda,
             std::nullopt);
    if (ws.alpha > 0)
      zero_run = 0;
    else if (++zero_run >= 3L * inst.n)
      throw NumericalError("no progress over 3n consecutive steps");
  }
  if (!done) throw NumericalError("step limit reached before optimality");
  return {std::move(x), std::move(rec.trace)};
}

RatioCircuitResult lsc_step(const LpInstance& inst, const Eigen::VectorXd& x,
                            const std::vector<int>& B, const std::vector<int>& N,
                            const std::vector<int>& S_p, const Eigen::VectorXd& y_next,
                            const FConstants& fc) {
  const int n = inst.n;
  if (x.size() != n || y_next.size() != n)
    throw ValidationError("long step: dimension mismatch");
  validate_partition(n, B, N);
  std::vector<uint8_t> in_N(n, 0), in_S(n, 0);
  for (int i : N) in_N[i] = 1;
  for (int i : S_p) {
    if (i < 0 || i >= n || !in_N[i])
      throw ValidationError("long step: small set must sit inside N");
    if (y_next[i] < 0) throw ValidationError("long step: negative target coordinate");
    in_S[i] = 1;
  }
  if (x.minCoeff() < 0) throw ValidationError("long step: negative point coordinate");

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n), w(n);
  const double f4 = fc.f4();
  for (int i = 0; i < n; ++i) {
    if (in_S[i]) {
      v[i] = 1.0 / (2.0 * y_next[i]);  // a zero target forbids the plus sign
      w[i] = kInf;
    } else if (in_N[i]) {
      w[i] = 1.0 / x[i];
    } else {
      w[i] = f4 / x[i];
    }
  }
  return ratio_circuit(inst, inst.c, make_weights(v), make_weights(w));
}

std::pair<Eigen::VectorXd, std::vector<LongStepRecord>> long_steps_forced(
    const LpInstance& inst, const Eigen::VectorXd& x, const Eigen::VectorXd& xbar,
    const Eigen::VectorXd& y0, const std::vector<int>& Ntilde, const FConstants& fc) {
  if (xbar.size() != inst.n || y0.size() != inst.n)
    throw ValidationError("long steps: dimension mismatch");
  if ((xbar - y0).lpNorm<Eigen::Infinity>() == 0)
    throw ValidationError("long steps: ray endpoints coincide");
  validate_start(inst, x);
  LongStepRun run = long_steps_core(inst, x, xbar, y0, Ntilde, fc, nullptr);
  return {std::move(run.x), std::move(run.records)};
}

PartitionGuess guess_partition(int n, const Eigen::VectorXd& xhat0,
                               const Eigen::VectorXd& xhat1, double lambda0,
                               double lambda1) {
  if (xhat0.size() != n || xhat1.size() != n)
    throw ValidationError("partition guess: dimension mismatch");
  if (!(lambda0 > 0) || !(lambda1 > 0))
    throw ValidationError("partition guess: gap estimates must be positive");
  PartitionGuess out;
  const double ratio = lambda1 / lambda0;
  std::vector<int> hits(n, 0);
  for (int i = 0; i < n; ++i) {
    const double r = xhat1[i] / xhat0[i];
    const bool in_B = r >= 1.0 / (16.0 * n) && r <= 4.0 * n;
    const bool in_N = r >= ratio / (4.0 * n * n) && r <= 16.0 * n * n * ratio;
    if (in_B) {
      out.B.push_back(i);
      ++hits[i];
    }
    if (in_N) {
      out.N.push_back(i);
      ++hits[i];
    }
  }
  out.consistent = true;
  for (int i = 0; i < n; ++i)
    if (hits[i] != 1) {
      out.consistent = false;
      break;
    }
  return out;
}

int choose_k(const Eigen::VectorXd& sigma, double lambda0, double lambda1, int n) {
  if (n < 1) throw ValidationError("singular cut needs n >= 1");
  const double rhs = 4.0 * n * n * lambda0;
  int k = 0;
  while (k < sigma.size() && sigma[k] * lambda1 > rhs) ++k;
  return k;
}

LongStepTargets build_targets(const LpInstance& inst, const Eigen::VectorXd& xhat0,
                              const Eigen::VectorXd& xbar, const std::vector<int>& B,
                              const std::vector<int>& N, int k, double sigma_k,
                              const LiftingOperator& op) {
  const int n = inst.n;
  if (xhat0.size() != n || xbar.size() != n)
    throw ValidationError("long-step targets: dimension mismatch");
  validate_partition(n, B, N);
  if (xhat0.minCoeff() <= 0)
    throw ValidationError("long-step targets: scale estimates must be positive");
  if (k < 0 || k >= op.dim())
    throw ValidationError("long-step targets: need 0 <= k < dim");
  if (k > 0 && !(sigma_k > 0))
    throw ValidationError("long-step targets: need sigma_k > 0 when k > 0");

  const Eigen::MatrixXd Vd = singular_subspace(op, op.dim() - k);
  Eigen::VectorXd zN(static_cast<int>(N.size()));
  for (size_t j = 0; j < N.size(); ++j) zN[static_cast<int>(j)] = -xbar[N[j]] / xhat0[N[j]];
  const auto [proj, lift] = project_and_lift(op, Vd, zN);

  Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
  for (size_t j = 0; j < B.size(); ++j) dx[B[j]] = xhat0[B[j]] * lift[static_cast<int>(j)];
  for (size_t j = 0; j < N.size(); ++j) dx[N[j]] = xhat0[N[j]] * proj[static_cast<int>(j)];
  const double dmax = dx.lpNorm<Eigen::Infinity>();
  if (dmax > 0)
    for (int i = 0; i < n; ++i)
      if (std::abs(dx[i]) <= 1e-14 * dmax) dx[i] = 0;
  // relative kernel residual: compare A·dx against the cancellation-free sum
  // |A|·|dx| so the test stays meaningful for badly scaled columns
  const double residual = (inst.A * dx).lpNorm<Eigen::Infinity>();
  const double magnitude = (inst.A.cwiseAbs() * dx.cwiseAbs()).lpNorm<Eigen::Infinity>();
  if (dmax > 0 && residual > 1e-8 * magnitude)
    throw NumericalError("long-step direction left the kernel");

  std::vector<double> floor_at(n, 0.0);
  if (k > 0)
    for (int i : N) floor_at[i] = 8.0 * n * n * xhat0[i] / sigma_k;

  // largest alpha keeping xbar + alpha·dx above the floors
  double lo = 0, hi = kInf;
  bool admissible = true;
  for (int i = 0; i < n && admissible; ++i) {
    const double base = std::max(xbar[i], 0.0);
    const double need = floor_at[i];
    const double d = dx[i];
    if (d > 0) {
      if (base < need) lo = std::max(lo, (need - base) / d);
    } else if (d < 0) {
      if (base < need)
        admissible = false;
      else
        hi = std::min(hi, (base - need) / (-d));
    } else if (base < need) {
      admissible = false;
    }
  }

  LongStepTargets out;
  out.dx = dx;
  if (!admissible || lo > hi || !std::isfinite(lo)) return out;
  const double alpha = std::isfinite(hi) ? hi : lo;
  Eigen::VectorXd y0 = xbar + alpha * dx;
  if (!check_feasible(inst, y0).feasible) return out;
  out.y0 = y0.cwiseMax(0.0);
  out.alpha = alpha;
  return out;
}

SolveResult solve_full(const LpInstance& inst, const Eigen::VectorXd& x0,
                       const SolveOptions& opts) {
  validate_start(inst, x0);
  const int n = inst.n;
  const FConstants fc = FConstants::make(n);
  const long phase_len = fc.short_steps();
  Recorder rec{inst, opts.trace_level, {}, 0};
  rec.trace.instance_name = inst.meta.name;

  Eigen::VectorXd x = x0;
  long iters = 0;
  while (true) {
    RoundDiag diag;
    long round_calls = 0, lsc_calls = 0;
    auto spend = [&](long calls) {
      rec.spend(calls);
      round_calls += calls;
    };
    auto small_gap = [&](double lambda, double obj) {
      return lambda <= opts.eps_term * (1.0 + std::abs(obj));
    };
    auto emit_boundary = [&](double lambda, bool complete) {
      diag.oracle_calls = round_calls;
      diag.lsc_calls = lsc_calls;
      diag.round_complete = complete;
      rec.step(StepKind::none, Eigen::VectorXd(), 0.0, inst.objective(x), lambda, diag);
    };

    double obj = inst.objective(x);
    const GapEstimate ge0 = approx_gap(inst, x);
    spend(1);
    if (ge0.rc.status == LpStatus::Unbounded)
      throw ValidationError("objective is unbounded over the feasible region");
    diag.lambda0 = ge0.lambda;
    diag.obj0 = obj;
    if (small_gap(ge0.lambda, obj)) {
      emit_boundary(ge0.lambda, false);
      break;
    }
    const ApproxMcp am0 = approx_mcp(inst, x, ge0);
    spend(n);
    const Eigen::VectorXd xhat0 = am0.xhat;

    bool terminal = false;
    double terminal_lambda = 0;
    for (long s = 0; s < phase_len; ++s) {
      if (iters >= opts.max_iters) throw NumericalError("step limit reached before optimality");
      const WallacherStep ws = wallacher_step(inst, x, opts.eps_term);
      spend(1);
      if (ws.rc.status == LpStatus::Unbounded)
        throw ValidationError("objective is unbounded over the feasible region");
      if (ws.optimal) {
        terminal = true;
        terminal_lambda = ws.rc.lambda;
        break;
      }
      x = ws.x_next;
      ++iters;
      rec.step(StepKind::wallacher, ws.rc.z, ws.alpha, inst.objective(x), ws.rc.lambda,
               std::nullopt);
    }
    if (terminal) {
      emit_boundary(terminal_lambda, false);
      break;
    }

    obj = inst.objective(x);
    const GapEstimate ge1 = approx_gap(inst, x);
    spend(1);
    if (ge1.rc.status == LpStatus::Unbounded)
      throw ValidationError("objective is unbounded over the feasible region");
    diag.lambda1 = ge1.lambda;
    diag.obj1 = obj;
    if (small_gap(ge1.lambda, obj)) {
      emit_boundary(ge1.lambda, false);
      break;
    }
    const ApproxMcp am1 = approx_mcp(inst, x, ge1);
    spend(n);

    const PartitionGuess pg = guess_partition(n, xhat0, am1.xhat, ge0.lambda, ge1.lambda);
    diag.B = pg.B;
    diag.N = pg.N;
    if (pg.consistent && !pg.N.empty() && xhat0.minCoeff() > 0) {
      // scale the constraint columns before extracting the kernel so extreme
      // per-coordinate scales cancel instead of drowning the small directions
      const SubspaceBasis rbasis = rescaled_kernel_basis(inst.A, xhat0);
      double n_mass = 0;
      for (int i : pg.N)
        if (rbasis.M.cols() > 0)
          n_mass = std::max(n_mass, rbasis.M.row(i).lpNorm<Eigen::Infinity>());
      if (n_mass > 1e-12) {
        const LiftingOperator op = build_operator(rbasis, pg.B, pg.N);
        const int k = choose_k(op.sigma, ge0.lambda, ge1.lambda, n);
        diag.k = k;
        diag.sigma_head = sigma_head_of(op);
        if (k < op.dim()) {
          const double sigma_k = k == 0 ? kInf : op.sigma[k - 1];
          const LongStepTargets tg = build_targets(inst, xhat0, am1.xbar, pg.B, pg.N, k,
                                                   sigma_k, op);
          if (tg.y0 && (am1.xbar - *tg.y0).lpNorm<Eigen::Infinity>() > 0) {
            LongStepRun run =
                long_steps_core(inst, x, am1.xbar, *tg.y0, pg.N, fc, nullptr);
            lsc_calls = run.calls;
            spend(run.calls);
            x = std::move(run.x);
            for (const auto& r : run.records) {
              if (iters >= opts.max_iters)
                throw NumericalError("step limit reached before optimality");
              ++iters;
              std::optional<RoundDiag> step_diag;
              if (opts.trace_level >= 2) {
                RoundDiag sd;
                sd.s_size = static_cast<int>(r.state.S_p.size());
                step_diag = std::move(sd);
              }
              rec.step(StepKind::lsc, r.rc.z, r.alpha, inst.objective(r.x_after),
                       r.rc.lambda, std::move(step_diag));
            }
          }
        }
      }
    }
    emit_boundary(ge1.lambda, true);
  }
  return {std::move(x), std::move(rec.trace)};
}

SolveResult solve_existential(const LpInstance& inst, const Eigen::VectorXd& x0,
                              const PolarizedDecomposition& dec, const McpProfile& prof,
                              const SolveOptions& opts) {
  validate_start(inst, x0);
  if (!inst.meta.optimal_value)
    throw ValidationError("needs a cached optimal value");
  const int n = inst.n;
  if (static_cast<int>(prof.coord.size()) != n)
    throw ValidationError("profile does not match the instance");
  const int segments = dec.intervals();
  if (segments < 1 || static_cast<int>(dec.breakpoints.size()) != segments + 1)
    throw ValidationError("malformed segmentation");
  const FConstants fc = FConstants::make(n);
  Recorder rec{inst, opts.trace_level, {}, 0};
  rec.trace.instance_name = inst.meta.name;

  std::vector<double> bp(dec.breakpoints.size());
  for (size_t j = 0; j < bp.size(); ++j) bp[j] = to_double(dec.breakpoints[j]);
  Eigen::VectorXd x = x0;
  if (inst.gap(x) > bp.back() * (1.0 + 1e-9) + 1e-12)
    throw ValidationError("segmentation does not cover the initial gap");

  // scaling targets for the idealized round counter (diagnostics only)
  std::optional<ScalingFunctions> sf;
  if (opts.trace_level >= 2) {
    const Rational two_gamma = dec.gamma * 2;
    const Rational eta = two_gamma > 1 ? Rational(1) : two_gamma;
    sf = build_h(prof, dec, eta);
  }

  long iters = 0;
  while (true) {
    const double obj = inst.objective(x);
    const double g = inst.gap(x);
    RoundDiag diag;
    long round_calls = 0, lsc_calls = 0;
    auto spend = [&](long calls) {
      rec.spend(calls);
      round_calls += calls;
    };
    auto emit_boundary = [&](double lambda, bool complete) {
      diag.oracle_calls = round_calls;
      diag.lsc_calls = lsc_calls;
      diag.round_complete = complete;
      rec.step(StepKind::none, Eigen::VectorXd(), 0.0, inst.objective(x), lambda, diag);
    };
    diag.lambda0 = g;
    diag.obj0 = obj;
    if (sf) diag.phi_ideal = ideal_potential(inst, dec, *sf, g);
    if (g <= opts.eps_term * (1.0 + std::abs(obj))) {
      emit_boundary(g, false);
      break;
    }

    int j = segments - 1;  // segment with b_j < g <= b_{j+1}
    for (int t = 0; t < segments; ++t)
      if (g <= bp[t + 1]) {
        j = t;
        break;
      }
    const std::vector<int>& B = dec.partitions[j].first;
    const std::vector<int>& N = dec.partitions[j].second;
    diag.B = B;
    diag.N = N;

    if (!N.empty()) {
      Eigen::VectorXd scale(n);
      for (int i = 0; i < n; ++i) {
        const double v = to_double(prof.coord[i].eval(dec.breakpoints[j + 1]));
        scale[i] = v > 0 ? v : 1.0;  // coordinates pinned at zero get a unit scale
      }
      const SubspaceBasis rbasis = rescaled_kernel_basis(inst.A, scale);
      double n_mass = 0;
      for (int i : N)
        if (rbasis.M.cols() > 0)
          n_mass = std::max(n_mass, rbasis.M.row(i).lpNorm<Eigen::Infinity>());
      if (n_mass > 1e-12) {
        const LiftingOperator op = build_operator(rbasis, B, N);
        const int k = count_sigma(op, bp[j + 1] / g, kInf);
        diag.k = k;
        diag.sigma_head = sigma_head_of(op);
        const double hat_g =
            k == 0 ? bp[j] : std::max(bp[j], bp[j + 1] / op.sigma[k - 1]);
        diag.hat_g = hat_g;

        bool deep = k < op.dim();
        if (deep && hat_g > 0) deep = fc.log_f1 + std::log(hat_g) < std::log(g);
        if (deep) {
          const double sigma_next = op.sigma[k];
          if (sigma_next > 0)
            deep = std::log(g) <= std::log(bp[j + 1]) - fc.log_f2 - std::log(sigma_next);
        }
        if (deep) {
          const Eigen::VectorXd xbar = exact_mcp(inst, g).xm_feasible;
          const Eigen::VectorXd y0 = exact_mcp(inst, n * hat_g).xm_feasible;
          if ((xbar - y0).lpNorm<Eigen::Infinity>() > 0) {
            auto keep = [&](const Eigen::VectorXd& xx) {
              const double gg = inst.gap(xx);
              if (!(gg > 0)) return false;
              if (hat_g <= 0) return true;
              return fc.log_f1 + std::log(hat_g) < std::log(gg);
            };
            LongStepRun run = long_steps_core(inst, x, xbar, y0, N, fc, keep);
            lsc_calls = run.calls;
            spend(run.calls);
            x = std::move(run.x);
            for (const auto& r : run.records) {
              if (iters >= opts.max_iters)
                throw NumericalError("step limit reached before optimality");
              ++iters;
              std::optional<RoundDiag> step_diag;
              if (opts.trace_level >= 2) {
                RoundDiag sd;
                sd.s_size = static_cast<int>(r.state.S_p.size());
                sd.hat_g = hat_g;
                step_diag = std::move(sd);
              }
              rec.step(StepKind::lsc, r.rc.z, r.alpha, inst.objective(r.x_after),
                       r.rc.lambda, std::move(step_diag));
            }
          }
        }
      }
    }

    // one ratio-greedy step closes every iteration
    const WallacherStep ws = wallacher_step(inst, x, opts.eps_term);
    spend(1);
    if (ws.rc.status == LpStatus::Unbounded)
      throw ValidationError("objective is unbounded over the feasible region");
    diag.lambda1 = ws.rc.lambda;
    if (ws.optimal) {
      diag.obj1 = inst.objective(x);
      emit_boundary(ws.rc.lambda, true);
      break;
    }
    if (iters >= opts.max_iters) throw NumericalError("step limit reached before optimality");
    x = ws.x_next;
    ++iters;
    rec.step(StepKind::wallacher, ws.rc.z, ws.alpha, inst.objective(x), ws.rc.lambda,
             std::nullopt);
    diag.obj1 = inst.objective(x);
    emit_boundary(ws.rc.lambda, true);
  }
  return {std::move(x), std::move(rec.trace)};
}

}  // namespace circuitlp
