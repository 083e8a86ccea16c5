#include <cstdio>
#include <iostream>

#include "circuitlp/augment.hpp"
#include "circuitlp/trace.hpp"
#include "circuitlp/lifting.hpp"
#include "circuitlp/generators.hpp"
#include "circuitlp/mcp.hpp"

using namespace circuitlp;

static LpInstance simplex3() {
  LpInstance inst;
  inst.m = 1;
  inst.n = 3;
  inst.A.resize(1, 3);
  inst.A << 1, 1, 1;
  inst.b.resize(1);
  inst.b << 1;
  inst.c.resize(3);
  inst.c << 1, 2, 0;
  inst.meta.name = "simplex3";
  return inst;
}

static Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

int main() {
  // --- constants
  for (int n : {1, 2, 3, 4, 6, 8}) {
    auto fc = FConstants::make(n);
    std::printf("n=%d log_f1=%.6f short_steps=%ld\n", n, fc.log_f1, fc.short_steps());
  }

  auto inst = simplex3();

  // --- wallacher on simplex3
  {
    SolveOptions opts;
    auto res = solve_wallacher(inst, vec3(1.0 / 3, 1.0 / 3, 1.0 / 3), opts);
    std::printf("[wall simplex3] steps=%ld oracle=%ld x=(%g,%g,%g)\n",
                res.trace.totals.wallacher_steps, res.trace.totals.oracle_calls, res.x[0],
                res.x[1], res.x[2]);
    for (auto& s : res.trace.steps)
      std::printf("  step %d kind=%s alpha=%.17g obj=%.17g lambda=%.17g sup={%d..}\n", s.index,
                  step_kind_name(s.kind), s.alpha, s.objective_after, s.lambda ? *s.lambda : -1,
                  s.support.empty() ? -1 : s.support[0]);
  }

  // --- lsc_step frozen case
  {
    auto fc = FConstants::make(3);
    auto rc = lsc_step(inst, vec3(0.2, 0.5, 0.3), {2}, {0, 1}, {0}, vec3(0.5, 0.2, 0.3), fc);
    std::printf("[lsc] lambda=%.17g z=(%g,%g,%g)\n", rc.lambda, rc.z[0], rc.z[1], rc.z[2]);
    auto rc2 = lsc_step(inst, vec3(0.2, 0.5, 0.3), {2}, {0, 1}, {0, 1}, vec3(0.5, 0.0, 0.3), fc);
    std::printf("[lsc inf] lambda=%.17g znorm=%g\n", rc2.lambda, rc2.z.lpNorm<Eigen::Infinity>());
  }

  // --- long_steps_forced progress case
  {
    auto fc = FConstants::make(3);
    auto [x, recs] = long_steps_forced(inst, vec3(0.9, 0.05, 0.05), vec3(0.2, 0.2, 0.6),
                                       vec3(0.01, 0.01, 0.98), {0, 1}, fc);
    std::printf("[lsf] records=%zu x=(%g,%g,%g)\n", recs.size(), x[0], x[1], x[2]);
    for (auto& r : recs) {
      std::printf("  p=%d |S|=%zu ynext=(%g,%g,%g) alpha=%.17g xafter=(%g,%g,%g) lam=%g\n",
                  r.state.p, r.state.S_p.size(), r.y_next[0], r.y_next[1], r.y_next[2], r.alpha,
                  r.x_after[0], r.x_after[1], r.x_after[2], r.rc.lambda);
    }
    // immediate break case
    auto [x2, recs2] = long_steps_forced(inst, vec3(0.2, 0.5, 0.3), vec3(0.2, 0.5, 0.3),
                                         vec3(0.2, 0.1, 0.7), {0, 1}, fc);
    std::printf("[lsf break] records=%zu x unchanged=%d\n", recs2.size(),
                (x2 - vec3(0.2, 0.5, 0.3)).lpNorm<Eigen::Infinity>() == 0);
  }

  // --- build_targets cases
  {
    auto basis = kernel_basis(inst.A);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    auto op = rescale_operator(basis, ones, {2}, {0, 1});
    std::printf("[bt] sigma=(%.12g,%.12g)\n", op.sigma[0], op.sigma[1]);
    auto t0 = build_targets(inst, ones, vec3(0.3, 0.3, 0.4), {2}, {0, 1}, 0, 0, op);
    std::printf("[bt k0] dx=(%g,%g,%g) alpha=%.17g y0=(%g,%g,%g)\n", t0.dx[0], t0.dx[1], t0.dx[2],
                t0.alpha, t0.y0 ? (*t0.y0)[0] : -1, t0.y0 ? (*t0.y0)[1] : -1,
                t0.y0 ? (*t0.y0)[2] : -1);
    auto t1 = build_targets(inst, ones, vec3(0.3, 0.3, 0.4), {2}, {0, 1}, 1, op.sigma[0], op);
    std::printf("[bt k1 perp] dxnorm=%g has_y0=%d\n", t1.dx.lpNorm<Eigen::Infinity>(),
                t1.y0.has_value());
    auto t2 = build_targets(inst, ones, vec3(0.0, 0.0, 1.0), {2}, {0, 1}, 0, 0, op);
    std::printf("[bt y0=xbar] alpha=%.17g y0=(%g,%g,%g)\n", t2.alpha, (*t2.y0)[0], (*t2.y0)[1],
                (*t2.y0)[2]);
    Eigen::VectorXd small = Eigen::VectorXd::Constant(3, 1e-3);
    auto ops = rescale_operator(basis, small, {2}, {0, 1});
    auto t3 = build_targets(inst, small, vec3(0.5, 0.2, 0.3), {2}, {0, 1}, 1, ops.sigma[0], ops);
    std::printf("[bt floors] dx=(%g,%g,%g) alpha=%.17g y0=(%.12g,%.12g,%.12g)\n", t3.dx[0],
                t3.dx[1], t3.dx[2], t3.alpha, t3.y0 ? (*t3.y0)[0] : -1, t3.y0 ? (*t3.y0)[1] : -1,
                t3.y0 ? (*t3.y0)[2] : -1);
  }

  // --- block instrumentation (n=6)
  {
    auto blk = make_polarized_block(3, {0, 500, 900});
    auto ms = exact_mcp(blk, 1.0);
    Eigen::VectorXd xhat0 = ms.xm;
    std::printf("[blk] xm(1)=(%g,%g,%g,%g,%g,%g)\n", xhat0[0], xhat0[1], xhat0[2], xhat0[3],
                xhat0[4], xhat0[5]);
    auto basis = rescaled_kernel_basis(blk.A, xhat0);
    auto op = build_operator(basis, {0, 1, 2, 4, 5}, {3});
    std::printf("[blk] dim=%d sigma0=%.12g\n", op.dim(), op.sigma[0]);
    auto xbar = exact_mcp(blk, 1e-6).xm_feasible;
    std::printf("[blk] xbar=(%g,%g,%g,%g,%g,%g) gap=%g\n", xbar[0], xbar[1], xbar[2], xbar[3],
                xbar[4], xbar[5], blk.gap(xbar));
    auto tg = build_targets(blk, xhat0, xbar, {0, 1, 2, 4, 5}, {3}, 0, 0, op);
    std::printf("[blk] dx=(%g,%g,%g,%g,%g,%g) alpha=%g has_y0=%d\n", tg.dx[0], tg.dx[1], tg.dx[2],
                tg.dx[3], tg.dx[4], tg.dx[5], tg.alpha, tg.y0.has_value());
    if (tg.y0)
      std::printf("[blk] y0=(%g,%g,%g,%g,%g,%g)\n", (*tg.y0)[0], (*tg.y0)[1], (*tg.y0)[2],
                  (*tg.y0)[3], (*tg.y0)[4], (*tg.y0)[5]);
  }

  // --- solve_full on simplex3
  {
    SolveOptions opts;
    opts.trace_level = 2;
    auto res = solve_full(inst, vec3(1.0 / 3, 1.0 / 3, 1.0 / 3), opts);
    std::printf("[full simplex3] wall=%ld lsc=%ld oracle=%ld x=(%g,%g,%g) steps=%zu\n",
                res.trace.totals.wallacher_steps, res.trace.totals.lsc_steps,
                res.trace.totals.oracle_calls, res.x[0], res.x[1], res.x[2],
                res.trace.steps.size());
  }

  // --- solve_existential on simplex3 near-optimal start
  {
    ensure_optimal_value(inst);
    std::printf("[ex] vstar=%.17g\n", *inst.meta.optimal_value);
    auto prof = mcp_profile(inst);
    auto dec = polarized_decomposition(prof, Rational(2), Rational(1, 4));
    std::printf("[ex] intervals=%d bps:", dec.intervals());
    for (auto& b : dec.breakpoints) std::printf(" %g", to_double(b));
    std::printf("\n");
    SolveOptions opts;
    opts.trace_level = 2;
    auto res = solve_existential(inst, vec3(1e-4, 1e-4, 1 - 2e-4), dec, prof, opts);
    std::printf("[ex simplex3] wall=%ld lsc=%ld oracle=%ld x=(%g,%g,%g)\n",
                res.trace.totals.wallacher_steps, res.trace.totals.lsc_steps,
                res.trace.totals.oracle_calls, res.x[0], res.x[1], res.x[2]);
    for (auto& s : res.trace.steps) {
      std::printf("  step %d kind=%s alpha=%.12g obj=%.12g", s.index, step_kind_name(s.kind),
                  s.alpha, s.objective_after);
      if (s.round_diag)
        std::printf(" [k=%d ssize=%d hatg=%g oc=%ld lsc=%ld phi=%ld complete=%d]",
                    s.round_diag->k, s.round_diag->s_size, s.round_diag->hat_g,
                    s.round_diag->oracle_calls, s.round_diag->lsc_calls, s.round_diag->phi_ideal,
                    s.round_diag->round_complete);
      std::printf("\n");
    }
    // eps=1e-2 variant from uniform start
    SolveOptions loose;
    loose.eps_term = 1e-2;
    auto res2 = solve_existential(inst, vec3(1.0 / 3, 1.0 / 3, 1.0 / 3), dec, prof, loose);
    std::printf("[ex loose] wall=%ld lsc=%ld gap=%g\n", res2.trace.totals.wallacher_steps,
                res2.trace.totals.lsc_steps, inst.gap(res2.x));
  }

  // --- block family end to end
  {
    auto blk = make_polarized_block(3, {0, 450, 900});
    SolveOptions opts;
    opts.eps_term = 1e-280;
    opts.max_iters = 100000;
    opts.trace_level = 2;
    auto wall = solve_wallacher(blk, *blk.x0, opts);
    std::printf("[blk wall] steps=%ld gap=%g\n", wall.trace.totals.wallacher_steps,
                blk.gap(wall.x));
    auto full = solve_full(blk, *blk.x0, opts);
    std::printf("[blk full] wall=%ld lsc=%ld oracle=%ld gap=%g\n",
                full.trace.totals.wallacher_steps, full.trace.totals.lsc_steps,
                full.trace.totals.oracle_calls, blk.gap(full.x));
    long complete = 0;
    for (auto& s : full.trace.steps)
      if (s.kind == StepKind::none && s.round_diag) {
        auto& d = *s.round_diag;
        std::printf("  round: complete=%d oc=%ld lsc=%ld k=%d l0=%g l1=%g obj1=%g B=%zu N=%zu\n",
                    d.round_complete, d.oracle_calls, d.lsc_calls, d.k, d.lambda0, d.lambda1,
                    d.obj1, d.B.size(), d.N.size());
        if (d.round_complete) {
          ++complete;
          long expect = (6 + 1) + 685 + (6 + 1) + d.lsc_calls;
          if (d.oracle_calls != expect)
            std::printf("  !! accounting mismatch %ld vs %ld\n", d.oracle_calls, expect);
        }
      }
    std::printf("[blk full] complete rounds=%ld\n", complete);
  }

  // --- block existential
  {
    auto blk = make_polarized_block(3, {0, 450, 900});
    auto prof = mcp_profile(blk);
    auto dec = polarized_decomposition(prof, Rational(2), Rational(1, 4));
    std::printf("[blk ex] intervals=%d bps:", dec.intervals());
    for (auto& b : dec.breakpoints) std::printf(" %g", to_double(b));
    std::printf("\n");
    for (int j = 0; j < dec.intervals(); ++j) {
      std::printf("  part %d: B={", j);
      for (int i : dec.partitions[j].first) std::printf("%d ", i);
      std::printf("} N={");
      for (int i : dec.partitions[j].second) std::printf("%d ", i);
      std::printf("}\n");
    }
    SolveOptions opts;
    opts.eps_term = 1e-25;
    opts.max_iters = 100000;
    opts.trace_level = 2;
    auto res = solve_existential(blk, *blk.x0, dec, prof, opts);
    std::printf("[blk ex] wall=%ld lsc=%ld oracle=%ld gap=%g\n",
                res.trace.totals.wallacher_steps, res.trace.totals.lsc_steps,
                res.trace.totals.oracle_calls, blk.gap(res.x));
    for (auto& s : res.trace.steps)
      if (s.kind == StepKind::lsc && s.round_diag)
        std::printf("  lsc step alpha=%g obj=%g ssize=%d hatg=%g\n", s.alpha, s.objective_after,
                    s.round_diag->s_size, s.round_diag->hat_g);
    int fired = 0;
    for (auto& s : res.trace.steps)
      if (s.kind == StepKind::none && s.round_diag && s.round_diag->lsc_calls > 0) ++fired;
    std::printf("[blk ex] rounds with lsc=%d\n", fired);
  }

  // --- blk wall oracle count (for frozen accounting)
  {
    auto blk = make_polarized_block(3, {0, 450, 900});
    SolveOptions opts;
    opts.eps_term = 1e-12;
    opts.max_iters = 100000;
    opts.trace_level = 2;
    auto wall = solve_wallacher(blk, *blk.x0, opts);
    std::printf("[blk wall2] steps=%ld oracle=%ld gap=%g\n", wall.trace.totals.wallacher_steps,
                wall.trace.totals.oracle_calls, blk.gap(wall.x));
    auto rep = verify_walk(blk, *blk.x0, wall.trace);
    std::printf("[blk wall2] verify ok=%d nv=%zu\n", rep.ok() ? 1 : 0, rep.violations.size());
  }

  // --- corpus sweep: wallacher + full, verify every trace, track decay rate
  {
    int bad_gap = 0, bad_verify = 0, runs = 0;
    double worst_ratio = 0.0, worst_excess = 0.0;
    long max_wall = 0, sum_wall = 0, sum_full_wall = 0, full_lsc = 0;
    for (const char* kind : {"generalized-flow", "mincost-flow", "simplex"}) {
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const int m = 3 + static_cast<int>(seed % 4);
        const int n = 7 + static_cast<int>(seed % 6);
        auto inst = generate_instance(kind, m, n, seed);
        ensure_optimal_value(inst);
        const double vstar = *inst.meta.optimal_value;
        SolveOptions opts;
        opts.eps_term = 1e-9;
        opts.max_iters = 10000;
        opts.trace_level = 2;
        auto w = solve_wallacher(inst, *inst.x0, opts);
        auto f = solve_full(inst, *inst.x0, opts);
        ++runs;
        for (auto* r : {&w, &f}) {
          const double rel = inst.gap(r->x) / (1.0 + std::abs(vstar));
          if (rel > 1e-7) {
            ++bad_gap;
            std::printf("[corpus BAD gap] %s seed=%llu m=%d n=%d rel=%g\n", kind,
                        (unsigned long long)seed, m, n, rel);
          }
          auto rep = verify_walk(inst, *inst.x0, r->trace);
          if (!rep.ok()) {
            ++bad_verify;
            std::printf("[corpus BAD verify] %s seed=%llu: %s\n", kind,
                        (unsigned long long)seed, rep.violations[0].c_str());
          }
        }
        // per-step decay along the wallacher walk
        double g = inst.gap(*inst.x0);
        for (auto& s : w.trace.steps) {
          const double g2 = std::max(vstar * 0.0, s.objective_after - vstar);
          if (g > 1e-300) {
            const double ratio = g2 / g;
            worst_ratio = std::max(worst_ratio, ratio);
            worst_excess = std::max(worst_excess, ratio - (1.0 - 1.0 / n));
          }
          g = g2;
        }
        // step-count cap: steps <= ceil(n log(g0/g_end)) + 1
        const double g0 = inst.gap(*inst.x0), g1 = inst.gap(w.x);
        if (g1 > 0 && g0 > g1) {
          const double cap = std::ceil(n * std::log(g0 / g1)) + 1;
          if (w.trace.totals.wallacher_steps > cap)
            std::printf("[corpus BAD cap] %s seed=%llu steps=%ld cap=%g\n", kind,
                        (unsigned long long)seed, w.trace.totals.wallacher_steps, cap);
        }
        max_wall = std::max(max_wall, w.trace.totals.wallacher_steps);
        sum_wall += w.trace.totals.wallacher_steps;
        sum_full_wall += f.trace.totals.wallacher_steps;
        full_lsc += f.trace.totals.lsc_steps;
      }
    }
    std::printf("[corpus] runs=%d bad_gap=%d bad_verify=%d worst_ratio=%.6f worst_excess=%.3g\n",
                runs, bad_gap, bad_verify, worst_ratio, worst_excess);
    std::printf("[corpus] max_wall=%ld sum_wall=%ld sum_full_wall=%ld full_lsc=%ld\n", max_wall,
                sum_wall, sum_full_wall, full_lsc);
  }

  // --- anchor properties on the block family's middle interval
  {
    auto blk = make_polarized_block(3, {0, 450, 900});
    auto prof = mcp_profile(blk);
    auto dec = polarized_decomposition(prof, Rational(2), Rational(1, 4));
    const int n = blk.n;
    // interval 1: (g_1, g_2] with partition B={0,1,2,5} N={3,4}
    const double gj = to_double(dec.breakpoints[1]);
    const double gj1 = to_double(dec.breakpoints[2]);
    auto& part = dec.partitions[1];
    auto xm_top = exact_mcp(blk, gj1).xm;
    auto basis = rescaled_kernel_basis(blk.A, xm_top);
    auto op = build_operator(basis, part.first, part.second);
    std::printf("[anchor] interval=(%g,%g] sigma=", gj, gj1);
    for (double s : op.sigma) std::printf("%.12g ", s);
    std::printf("\n");
    for (double g : {1e-140, gj1 * 0.5, gj1}) {
      const int k = count_sigma(op, gj1 / g, std::numeric_limits<double>::infinity());
      const double hatg =
          (k >= 1 && k <= static_cast<int>(op.sigma.size())) ?
              std::max(gj, gj1 / op.sigma[k - 1]) : gj;
      auto xbar = exact_mcp(blk, g).xm_feasible;
      auto y0 = exact_mcp(blk, n * hatg).xm_feasible;
      auto xm_g = exact_mcp(blk, g).xm;
      const double p1 = blk.gap(xbar) / (n * g);
      double p2 = 0.0;
      for (int i : part.second) p2 = std::max(p2, xm_g[i] / (n * xbar[i]));
      const double pa = hatg > 0 ? blk.gap(y0) / (n * hatg) : blk.gap(y0);
      double pb = 0.0;
      if (k >= 1)
        for (int i : part.second) pb = std::max(pb, (1.0 / op.sigma[k - 1]) / (y0[i] / xm_top[i]));
      std::printf("[anchor] g=%g k=%d hatg=%g p1=%.4g p2=%.4g pa=%.4g pb=%.4g\n", g, k, hatg, p1,
                  p2, pa, pb);
    }
    // force k = 1: hatg = max(gj, gj1/sigma_1), property (b) becomes active
    {
      const double hatg = std::max(gj, gj1 / op.sigma[0]);
      auto y0 = exact_mcp(blk, n * hatg).xm_feasible;
      const double pa = blk.gap(y0) / (n * hatg);
      double pb = 0.0;
      for (int i : part.second) pb = std::max(pb, (1.0 / op.sigma[0]) / (y0[i] / xm_top[i]));
      std::printf("[anchor k1] hatg=%g pa=%.6g pb=%.6g y0N=(%g,%g) xmtopN=(%g,%g)\n", hatg, pa, pb,
                  y0[part.second[0]], y0[part.second[1]], xm_top[part.second[0]],
                  xm_top[part.second[1]]);
    }
  }

  return 0;
}
