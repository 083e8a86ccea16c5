#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "circuitlp/augment.hpp"
#include "circuitlp/exactla.hpp"
#include "circuitlp/generators.hpp"
#include "circuitlp/lifting.hpp"
#include "circuitlp/mcp.hpp"
#include "circuitlp/trace.hpp"

using namespace circuitlp;

namespace {

LpInstance simplex3() {
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
  inst.meta.optimal_value = 0.0;
  return inst;
}

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

std::vector<LpInstance> corpus() {
  std::vector<LpInstance> out;
  for (const char* kind : {"generalized-flow", "mincost-flow", "simplex"})
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const int m = 3 + static_cast<int>(seed % 4);
      const int n = 7 + static_cast<int>(seed % 6);
      out.push_back(generate_instance(kind, m, n, seed));
      ensure_optimal_value(out.back());
    }
  return out;
}

double rel_gap(const LpInstance& inst, const Eigen::VectorXd& x) {
  return inst.gap(x) / (1.0 + std::abs(*inst.meta.optimal_value));
}

}  // namespace

TEST_CASE("threshold constants match the closed forms") {
  // values pinned against an independent evaluation of the formulas
  const struct {
    int n;
    double log_f1;
    long steps;
  } table[] = {{1, 17.197599, 19},  {2, 35.167309, 74},   {3, 53.451804, 165},
               {4, 72.493025, 296}, {6, 112.749766, 685}, {8, 155.462223, 1255}};
  for (const auto& row : table) {
    const auto fc = FConstants::make(row.n);
    CHECK(std::abs(fc.log_f1 - row.log_f1) < 5e-7);
    CHECK(fc.short_steps() == row.steps);
  }

  for (int n : {1, 2, 3, 5, 9, 40, 1000}) {
    const auto fc = FConstants::make(n);
    const double ln = std::log(static_cast<double>(n));
    CHECK(fc.log_f6 == doctest::Approx(std::log(3785.0) + 6 * ln).epsilon(1e-12));
    CHECK(fc.log_f2 == doctest::Approx(std::log(64.0) + 2.5 * ln).epsilon(1e-12));
    CHECK(fc.log_f5 == doctest::Approx(std::log(2.0) + 2 * ln).epsilon(1e-12));
    CHECK(fc.f4() == 2.0 * n);
    // f1 = 32 n^2 (3n)^(5n) f6, assembled in log space
    CHECK(fc.log_f1 ==
          doctest::Approx(std::log(32.0) + 2 * ln + fc.log_f3(n)).epsilon(1e-12));
    // f3(p) = (3n)^(5p) f6
    CHECK(fc.log_f3(0) == doctest::Approx(fc.log_f6).epsilon(1e-12));
    CHECK(fc.log_f3(2) ==
          doctest::Approx(10 * std::log(3.0 * n) + fc.log_f6).epsilon(1e-12));
    // the greedy phase is long enough to absorb the restart overhead
    CHECK(fc.short_steps() >=
          static_cast<long>(std::ceil(n * (std::log(8192.0) + 7.5 * ln))));
    // ceil(n log(4 f1)) bracketing
    const double raw = n * (std::log(4.0) + fc.log_f1);
    CHECK(fc.short_steps() >= raw - 1e-9);
    CHECK(fc.short_steps() < raw + 1.0);
  }

  CHECK_THROWS_AS(FConstants::make(0), ValidationError);
  CHECK_THROWS_AS(FConstants::make(-2), ValidationError);
  CHECK_THROWS_AS(FConstants::make(3).log_f3(-1), ValidationError);
}

TEST_CASE("partition guess window tests") {
  const int n = 4;
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(n, 0.7);

  // unchanged scales with a collapsed gap: everything lands in B
  {
    const auto pg = guess_partition(n, x0, x0, 1.0, 1e-5);
    CHECK(pg.consistent);
    CHECK(pg.B == std::vector<int>{0, 1, 2, 3});
    CHECK(pg.N.empty());
  }
  // scales shrinking exactly like the gap: everything lands in N
  {
    const auto pg = guess_partition(n, x0, (1e-5 * x0).eval(), 1.0, 1e-5);
    CHECK(pg.consistent);
    CHECK(pg.N == std::vector<int>{0, 1, 2, 3});
    CHECK(pg.B.empty());
  }
  // one coordinate between the two windows: not a partition
  // (dead zone for n=4, ratio 1e-5: (16n^2·1e-5, 1/(16n)) = (2.56e-3, 1.56e-2))
  {
    Eigen::VectorXd x1 = x0;
    x1[1] = 6e-3 * x0[1];
    const auto pg = guess_partition(n, x0, x1, 1.0, 1e-5);
    CHECK_FALSE(pg.consistent);
    CHECK(std::count(pg.B.begin(), pg.B.end(), 1) == 0);
    CHECK(std::count(pg.N.begin(), pg.N.end(), 1) == 0);
  }
  // mixed consistent split
  {
    Eigen::VectorXd x1 = x0;
    x1[0] = 2e-5 * x0[0];
    x1[3] = 0.5e-5 * x0[3];
    const auto pg = guess_partition(n, x0, x1, 1.0, 1e-5);
    CHECK(pg.consistent);
    CHECK(pg.B == std::vector<int>{1, 2});
    CHECK(pg.N == std::vector<int>{0, 3});
  }

  CHECK_THROWS_AS(guess_partition(n, x0, x0, 0.0, 1e-5), ValidationError);
  CHECK_THROWS_AS(guess_partition(n, x0, x0, 1.0, -1.0), ValidationError);
  CHECK_THROWS_AS(guess_partition(3, x0, x0, 1.0, 0.5), ValidationError);
}

TEST_CASE("singular cut selection") {
  Eigen::VectorXd sigma(3);
  sigma << 100, 10, 1;
  // n = 2: the cut threshold is sigma_i > 4n^2 lambda0 / lambda1
  CHECK(choose_k(sigma, 1.0 / 16, 0.5, 2) == 2);
  CHECK(choose_k(sigma, 1.0 / 16, 0.005, 2) == 0);
  // every direction clears the threshold
  Eigen::VectorXd huge(2);
  huge << 1e30, 1e29;
  CHECK(choose_k(huge, 1.0, 1.0, 2) == 2);
  CHECK(choose_k(Eigen::VectorXd(0), 1.0, 1.0, 2) == 0);

  // monotone in lambda1
  Eigen::VectorXd s2(4);
  s2 << 500, 70, 3, 0.2;
  int prev = 0;
  for (double l1 = 1e-4; l1 < 1e3; l1 *= 3) {
    const int k = choose_k(s2, 0.7, l1, 3);
    CHECK(k >= prev);
    prev = k;
  }
  CHECK(prev == 4);
}

TEST_CASE("long-step oracle call") {
  auto inst = simplex3();
  const auto fc = FConstants::make(3);

  // hand-sized case: S = {0}, so negative movement on 0 is forbidden
  const auto rc = lsc_step(inst, vec3(0.2, 0.5, 0.3), {2}, {0, 1}, {0},
                           vec3(0.5, 0.2, 0.3), fc);
  CHECK(rc.status == LpStatus::Optimal);
  CHECK(rc.lambda == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((rc.z - vec3(0.0, -0.5, 0.5)).lpNorm<Eigen::Infinity>() < 1e-12);

  // zero target coordinates make the weights infinite: no useful direction
  const auto rc2 = lsc_step(inst, vec3(0.2, 0.5, 0.3), {2}, {0, 1}, {0, 1},
                            vec3(0.5, 0.0, 0.3), fc);
  CHECK(rc2.lambda == 0.0);
  CHECK(rc2.z.lpNorm<Eigen::Infinity>() == 0.0);

  CHECK_THROWS_AS(lsc_step(inst, vec3(0.2, 0.5, 0.3), {2}, {0, 1}, {2},
                           vec3(0.5, 0.2, 0.3), fc),
                  ValidationError);
  CHECK_THROWS_AS(lsc_step(inst, vec3(0.2, 0.5, 0.3), {2}, {0, 1}, {1},
                           vec3(0.5, -0.1, 0.3), fc),
                  ValidationError);
}

TEST_CASE("forced long steps walk the moving target") {
  auto inst = simplex3();
  const auto fc = FConstants::make(3);

  auto [x, recs] = long_steps_forced(inst, vec3(0.9, 0.05, 0.05), vec3(0.2, 0.2, 0.6),
                                     vec3(0.01, 0.01, 0.98), {0, 1}, fc);
  REQUIRE(recs.size() == 1);
  CHECK(recs.size() <= 3);  // never more than n
  const auto& r = recs[0];
  CHECK(r.state.p == 0);
  CHECK(r.state.S_p == std::vector<int>{1});
  CHECK((r.y_next - vec3(0.12, 0.12, 0.76)).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK(r.alpha == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.rc.lambda == doctest::Approx(0.9).epsilon(1e-9));
  CHECK((r.x_after - vec3(0.0, 0.05, 0.95)).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK((x - r.x_after).lpNorm<Eigen::Infinity>() == 0.0);

  // the next target may already be unreachable: no records, x untouched
  auto [x2, recs2] = long_steps_forced(inst, vec3(0.2, 0.5, 0.3), vec3(0.2, 0.5, 0.3),
                                       vec3(0.2, 0.1, 0.7), {0, 1}, fc);
  CHECK(recs2.empty());
  CHECK((x2 - vec3(0.2, 0.5, 0.3)).lpNorm<Eigen::Infinity>() == 0.0);

  CHECK_THROWS_AS(long_steps_forced(inst, vec3(0.2, 0.5, 0.3), vec3(0.1, 0.2, 0.7),
                                    vec3(0.1, 0.2, 0.7), {0, 1}, fc),
                  ValidationError);
}

TEST_CASE("long-step targets on the 2-simplex") {
  auto inst = simplex3();
  const auto basis = kernel_basis(inst.A);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  const auto op = rescale_operator(basis, ones, {2}, {0, 1});
  REQUIRE(op.sigma.size() == 2);
  CHECK(op.sigma[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(op.sigma[1]) < 1e-12);

  // k = 0: the projection is the identity, dx_N = -xbar_N exactly
  {
    const auto t = build_targets(inst, ones, vec3(0.3, 0.3, 0.4), {2}, {0, 1}, 0, 0, op);
    CHECK((t.dx - vec3(-0.3, -0.3, 0.6)).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(t.alpha == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(t.y0.has_value());
    CHECK((*t.y0 - vec3(0.0, 0.0, 1.0)).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((inst.A * t.dx).lpNorm<Eigen::Infinity>() < 1e-12);
  }
  // k = 1 leaves only the zero singular direction; -xbar_N is orthogonal to it
  {
    const auto t = build_targets(inst, ones, vec3(0.3, 0.3, 0.4), {2}, {0, 1}, 1,
                                 op.sigma[0], op);
    CHECK(t.dx.lpNorm<Eigen::Infinity>() < 1e-12);
    // xbar misses the floor 8n^2/sigma_1, so no admissible target exists
    CHECK_FALSE(t.y0.has_value());
  }
  // xbar already optimal: zero direction, y0 = xbar
  {
    const auto t = build_targets(inst, ones, vec3(0.0, 0.0, 1.0), {2}, {0, 1}, 0, 0, op);
    CHECK(t.alpha == 0.0);
    REQUIRE(t.y0.has_value());
    CHECK((*t.y0 - vec3(0.0, 0.0, 1.0)).lpNorm<Eigen::Infinity>() == 0.0);
  }
  // k = 1 with a scale small enough that the floor binds at a positive alpha
  {
    const Eigen::VectorXd small = Eigen::VectorXd::Constant(3, 1e-3);
    const auto ops = rescale_operator(basis, small, {2}, {0, 1});
    const auto t = build_targets(inst, small, vec3(0.5, 0.2, 0.3), {2}, {0, 1}, 1,
                                 ops.sigma[0], ops);
    CHECK((t.dx - vec3(-0.15, 0.15, 0.0)).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(t.alpha == doctest::Approx(2.9939220783637919).epsilon(1e-9));
    REQUIRE(t.y0.has_value());
    CHECK((*t.y0 - vec3(0.050911688245, 0.649088311755, 0.3)).lpNorm<Eigen::Infinity>() <
          1e-9);
    // the binding coordinate sits exactly on the floor 8n^2 xhat0 / sigma_1
    CHECK((*t.y0)[0] ==
          doctest::Approx(8.0 * 9.0 * small[0] / ops.sigma[0]).epsilon(1e-9));
  }

  CHECK_THROWS_AS(build_targets(inst, ones, vec3(0.3, 0.3, 0.4), {2}, {0, 1}, 2,
                                op.sigma[0], op),
                  ValidationError);
  CHECK_THROWS_AS(
      build_targets(inst, Eigen::VectorXd::Zero(3), vec3(0.3, 0.3, 0.4), {2}, {0, 1}, 0,
                    0, op),
      ValidationError);
}

TEST_CASE("long-step targets on a deep-scaled block instance") {
  auto blk = make_polarized_block(3, {0, 500, 900});
  const int n = blk.n;
  const auto ms = exact_mcp(blk, 1.0);
  const Eigen::VectorXd xhat0 = ms.xm;
  CHECK(xhat0.head(4).isApprox(Eigen::VectorXd::Ones(4), 1e-9));
  CHECK(xhat0[4] == doctest::Approx(3.05494e-151).epsilon(1e-4));
  CHECK(xhat0[5] == doctest::Approx(1.18305e-271).epsilon(1e-4));

  const std::vector<int> B{0, 1, 2, 4, 5}, N{3};
  const auto basis = rescaled_kernel_basis(blk.A, xhat0);
  const auto op = build_operator(basis, B, N);
  REQUIRE(op.dim() == 1);
  CHECK(op.sigma[0] == doctest::Approx(1.0).epsilon(1e-9));

  const Eigen::VectorXd xbar = exact_mcp(blk, 1e-6).xm_feasible;
  const double g = blk.gap(xbar);
  CHECK(g == doctest::Approx(8.33333e-07).epsilon(1e-4));

  const auto t = build_targets(blk, xhat0, xbar, B, N, 0, 0, op);
  // k = 0 means the singular coordinate is cancelled outright
  CHECK(t.dx[3] == doctest::Approx(-xbar[3]).epsilon(1e-12));
  REQUIRE(t.y0.has_value());
  CHECK((*t.y0)[3] == 0.0);
  CHECK(check_feasible(blk, *t.y0).feasible);

  // kernel membership, measured cancellation-free
  const Eigen::VectorXd resid = blk.A * t.dx;
  const Eigen::VectorXd scale = blk.A.cwiseAbs() * t.dx.cwiseAbs();
  for (int i = 0; i < blk.m; ++i)
    CHECK(std::abs(resid[i]) <= 1e-8 * (1.0 + scale[i]));

  // with the gap below 1/(512 n^3.5 sigma_1), the lifted part stays small
  REQUIRE(g <= 1.0 / (512.0 * std::pow(n, 3.5) * op.sigma[0]));
  double dxB = 0.0;
  for (int i : B) dxB += t.dx[i] * t.dx[i];
  CHECK(std::sqrt(dxB) <= 1.0 / (16.0 * n * n));
}

TEST_CASE("ratio-greedy solver on the 2-simplex") {
  auto inst = simplex3();
  SolveOptions opts;
  const auto res = solve_wallacher(inst, vec3(1.0 / 3, 1.0 / 3, 1.0 / 3), opts);
  CHECK(res.trace.totals.wallacher_steps == 2);
  CHECK(res.trace.totals.lsc_steps == 0);
  CHECK(res.trace.totals.oracle_calls == 3);
  CHECK((res.x - vec3(0, 0, 1)).lpNorm<Eigen::Infinity>() < 1e-12);

  REQUIRE(res.trace.steps.size() == 2);
  const auto& s0 = res.trace.steps[0];
  const auto& s1 = res.trace.steps[1];
  CHECK(s0.kind == StepKind::wallacher);
  CHECK(s0.support == std::vector<int>{1, 2});
  CHECK(s0.alpha == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(s0.objective_after == doctest::Approx(1.0 / 3).epsilon(1e-12));
  REQUIRE(s0.lambda.has_value());
  CHECK(*s0.lambda == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(s1.support == std::vector<int>{0, 2});
  CHECK(s1.alpha == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(s1.objective_after == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*s1.lambda == doctest::Approx(1.0 / 3).epsilon(1e-12));

  // starting at the optimum: certified immediately, no steps recorded
  const auto res2 = solve_wallacher(inst, vec3(0, 0, 1), opts);
  CHECK(res2.trace.totals.wallacher_steps == 0);
  CHECK(res2.trace.totals.oracle_calls == 1);
  CHECK((res2.x - vec3(0, 0, 1)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("ratio-greedy solver: guarantees on generated instances") {
  for (const auto& inst : corpus()) {
    SolveOptions opts;
    opts.trace_level = 2;
    const auto res = solve_wallacher(inst, *inst.x0, opts);
    CHECK(rel_gap(inst, res.x) <= 1e-7);

    const double vstar = *inst.meta.optimal_value;
    const double g0 = inst.gap(*inst.x0);
    // per-step decay never beats the worst-case bound backwards:
    // each step removes at least a 1/n fraction of the remaining gap
    double g = g0;
    for (const auto& s : res.trace.steps) {
      const double g2 = std::max(0.0, s.objective_after - vstar);
      if (g > 1e-300)
        CHECK(g2 / g <= (1.0 - 1.0 / inst.n) * (1.0 + 1e-9) + 1e-15);
      g = g2;
    }
    // consequently the step count obeys the logarithmic cap
    const double g1 = inst.gap(res.x);
    if (g1 > 0 && g0 > g1) {
      const double cap = std::ceil(inst.n * std::log(g0 / g1)) + 1.0;
      CHECK(static_cast<double>(res.trace.totals.wallacher_steps) <= cap);
    }

    const auto rep = verify_walk(inst, *inst.x0, res.trace);
    for (const auto& v : rep.violations) CAPTURE(v);
    CHECK(rep.ok());
  }
}

TEST_CASE("ratio-greedy solver error paths") {
  // unbounded ray: min -x1 with x1 = x2 free to grow
  LpInstance ub;
  ub.m = 1;
  ub.n = 2;
  ub.A.resize(1, 2);
  ub.A << 1, -1;
  ub.b.resize(1);
  ub.b << 0;
  ub.c.resize(2);
  ub.c << -1, 0;
  SolveOptions opts;
  Eigen::VectorXd start(2);
  start << 1, 1;
  CHECK_THROWS_AS(solve_wallacher(ub, start, opts), ValidationError);

  auto inst = simplex3();
  SolveOptions one;
  one.max_iters = 1;
  CHECK_THROWS_AS(solve_wallacher(inst, vec3(1.0 / 3, 1.0 / 3, 1.0 / 3), one),
                  NumericalError);
  CHECK_THROWS_AS(solve_wallacher(inst, vec3(0.5, 0.5, 0.5), opts), ValidationError);

  // byte-level determinism across repeated runs
  auto gen = generate_instance("generalized-flow", 4, 8, 7);
  const auto a = solve_wallacher(gen, *gen.x0, opts);
  const auto b = solve_wallacher(gen, *gen.x0, opts);
  REQUIRE(a.trace.steps.size() == b.trace.steps.size());
  CHECK((a.x - b.x).lpNorm<Eigen::Infinity>() == 0.0);
  for (size_t i = 0; i < a.trace.steps.size(); ++i) {
    CHECK(a.trace.steps[i].alpha == b.trace.steps[i].alpha);
    CHECK(a.trace.steps[i].objective_after == b.trace.steps[i].objective_after);
    CHECK(a.trace.steps[i].support == b.trace.steps[i].support);
  }
}

TEST_CASE("full solver on the 2-simplex") {
  auto inst = simplex3();
  SolveOptions opts;
  opts.trace_level = 2;
  const auto res = solve_full(inst, vec3(1.0 / 3, 1.0 / 3, 1.0 / 3), opts);
  CHECK((res.x - vec3(0, 0, 1)).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(res.trace.totals.wallacher_steps == 2);
  CHECK(res.trace.totals.lsc_steps == 0);
  // one gap estimate + n path estimates + two greedy steps + the certifying call
  CHECK(res.trace.totals.oracle_calls == 7);

  REQUIRE(res.trace.steps.size() == 3);
  const auto& tail = res.trace.steps.back();
  REQUIRE(tail.kind == StepKind::none);
  REQUIRE(tail.round_diag.has_value());
  CHECK(tail.round_diag->oracle_calls == 7);
  CHECK(tail.round_diag->lsc_calls == 0);
  CHECK_FALSE(tail.round_diag->round_complete);
  CHECK(tail.round_diag->lambda0 == doctest::Approx(2.0 / 3).epsilon(1e-9));
}

TEST_CASE("full solver on the deep-scaled block family") {
  auto blk = make_polarized_block(3, {0, 450, 900});
  SolveOptions opts;
  opts.eps_term = 1e-280;
  opts.max_iters = 100000;
  opts.trace_level = 2;

  const auto wall = solve_wallacher(blk, *blk.x0, opts);
  CHECK(wall.trace.totals.wallacher_steps == 3);
  CHECK(blk.gap(wall.x) == 0.0);

  const auto full = solve_full(blk, *blk.x0, opts);
  CHECK(blk.gap(full.x) == 0.0);
  CHECK(full.trace.totals.wallacher_steps == 3);
  CHECK(full.trace.totals.lsc_steps == 0);
  CHECK(full.trace.totals.oracle_calls == 11);

  // observed comparison for the long-interval family: the full rule never
  // needs more augmentation steps than the greedy baseline here
  CHECK(full.trace.totals.wallacher_steps + full.trace.totals.lsc_steps <=
        wall.trace.totals.wallacher_steps);

  long complete = 0, boundaries = 0;
  const auto fc = FConstants::make(blk.n);
  for (const auto& s : full.trace.steps)
    if (s.kind == StepKind::none && s.round_diag) {
      ++boundaries;
      const auto& d = *s.round_diag;
      if (d.round_complete) {
        ++complete;
        // a full round spends (n+1) + short_steps + (n+1) + long-step calls
        CHECK(d.oracle_calls ==
              (blk.n + 1) + fc.short_steps() + (blk.n + 1) + d.lsc_calls);
        CHECK(d.lsc_calls <= blk.n);
      } else {
        // interrupted rounds: the estimate phase plus what the loop managed
        CHECK(d.oracle_calls >= 1);
        CHECK(d.oracle_calls <=
              (blk.n + 1) + fc.short_steps() + (blk.n + 1) + blk.n);
      }
      CHECK(d.lambda0 == doctest::Approx(0.25).epsilon(1e-9));
    }
  CHECK(boundaries == 1);
  // short phases at this scale terminate inside round one
  CHECK(complete == 0);

  const auto rep = verify_walk(blk, *blk.x0, full.trace);
  for (const auto& v : rep.violations) CAPTURE(v);
  CHECK(rep.ok());
}

TEST_CASE("full solver: optimality and clean replay on generated instances") {
  for (const auto& inst : corpus()) {
    SolveOptions opts;
    opts.trace_level = 2;
    const auto res = solve_full(inst, *inst.x0, opts);
    CHECK(rel_gap(inst, res.x) <= 1e-7);

    double prev = std::numeric_limits<double>::infinity();
    for (const auto& s : res.trace.steps)
      if (s.kind != StepKind::none) {
        CHECK(s.objective_after <= prev + 1e-12 * (1.0 + std::abs(prev)));
        prev = s.objective_after;
      }

    const auto rep = verify_walk(inst, *inst.x0, res.trace);
    for (const auto& v : rep.violations) CAPTURE(v);
    CHECK(rep.ok());
  }
}

TEST_CASE("existential solver on the 2-simplex fires guarded long steps") {
  auto inst = simplex3();
  const auto prof = mcp_profile(inst);
  const auto dec = polarized_decomposition(prof, Rational(2), Rational(1, 4));
  REQUIRE(dec.intervals() == 1);

  SolveOptions opts;
  opts.trace_level = 2;
  const auto res = solve_existential(inst, vec3(1e-4, 1e-4, 1.0 - 2e-4), dec, prof, opts);
  CHECK((res.x - vec3(0, 0, 1)).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(res.trace.totals.wallacher_steps == 0);
  CHECK(res.trace.totals.lsc_steps == 2);
  CHECK(res.trace.totals.oracle_calls == 3);

  REQUIRE(res.trace.steps.size() == 3);
  const auto& s0 = res.trace.steps[0];
  const auto& s1 = res.trace.steps[1];
  const auto& tail = res.trace.steps[2];
  CHECK(s0.kind == StepKind::lsc);
  CHECK(s0.alpha == doctest::Approx(1e-4).epsilon(1e-9));
  CHECK(s0.objective_after == doctest::Approx(1e-4).epsilon(1e-9));
  CHECK(s1.kind == StepKind::lsc);
  CHECK(s1.objective_after == doctest::Approx(0.0).epsilon(1e-12));
  // the small-coordinate set grows strictly from one long step to the next
  REQUIRE(s0.round_diag.has_value());
  REQUIRE(s1.round_diag.has_value());
  CHECK(s0.round_diag->s_size == 0);
  CHECK(s1.round_diag->s_size == 1);
  REQUIRE(tail.round_diag.has_value());
  CHECK(tail.round_diag->k == 0);
  CHECK(tail.round_diag->hat_g == 0.0);
  CHECK(tail.round_diag->oracle_calls == 3);
  CHECK(tail.round_diag->lsc_calls == 2);
  CHECK(tail.round_diag->phi_ideal == 1);
  CHECK(tail.round_diag->round_complete);

  // a loose tolerance never reaches the guard: plain greedy steps finish first
  SolveOptions loose;
  loose.eps_term = 1e-2;
  const auto res2 =
      solve_existential(inst, vec3(1.0 / 3, 1.0 / 3, 1.0 / 3), dec, prof, loose);
  CHECK(res2.trace.totals.wallacher_steps == 2);
  CHECK(res2.trace.totals.lsc_steps == 0);
  CHECK(inst.gap(res2.x) == 0.0);
}

TEST_CASE("existential solver on the deep-scaled block family") {
  auto blk = make_polarized_block(3, {0, 450, 900});
  const auto prof = mcp_profile(blk);
  const auto dec = polarized_decomposition(prof, Rational(2), Rational(1, 4));

  REQUIRE(dec.intervals() == 3);
  CHECK(to_double(dec.breakpoints[0]) == 0.0);
  CHECK(to_double(dec.breakpoints[1]) == doctest::Approx(1.18305e-271).epsilon(1e-4));
  CHECK(to_double(dec.breakpoints[2]) == doctest::Approx(3.43955e-136).epsilon(1e-4));
  CHECK(to_double(dec.breakpoints[3]) == 2.0);
  CHECK(dec.partitions[0].first == std::vector<int>{0, 1, 2});
  CHECK(dec.partitions[0].second == std::vector<int>{3, 4, 5});
  CHECK(dec.partitions[1].first == std::vector<int>{0, 1, 2, 5});
  CHECK(dec.partitions[1].second == std::vector<int>{3, 4});
  CHECK(dec.partitions[2].first == std::vector<int>{0, 1, 2, 4, 5});
  CHECK(dec.partitions[2].second == std::vector<int>{3});

  SolveOptions opts;
  opts.eps_term = 1e-25;
  opts.max_iters = 100000;
  opts.trace_level = 2;
  const auto res = solve_existential(blk, *blk.x0, dec, prof, opts);
  // a single greedy step crosses the first scale chasm and lands below eps
  CHECK(res.trace.totals.wallacher_steps == 1);
  CHECK(res.trace.totals.lsc_steps == 0);
  CHECK(res.trace.totals.oracle_calls == 1);
  CHECK(blk.gap(res.x) == doctest::Approx(8.59888e-137).epsilon(1e-4));
}

TEST_CASE("existential solver error paths") {
  auto blk = make_polarized_block(3, {0, 450, 900});
  const auto prof = mcp_profile(blk);
  const auto dec = polarized_decomposition(prof, Rational(2), Rational(1, 4));
  SolveOptions opts;

  LpInstance nostar = blk;
  nostar.meta.optimal_value.reset();
  CHECK_THROWS_AS(solve_existential(nostar, *blk.x0, dec, prof, opts), ValidationError);

  auto other = simplex3();
  const auto prof3 = mcp_profile(other);
  CHECK_THROWS_AS(solve_existential(blk, *blk.x0, dec, prof3, opts), ValidationError);

  // segmentation that stops short of the starting gap
  const auto decsmall = polarized_decomposition(prof, Rational(1, 100), Rational(1, 4));
  CHECK_THROWS_AS(solve_existential(blk, *blk.x0, decsmall, prof, opts),
                  ValidationError);
}

TEST_CASE("anchor points satisfy the long-step entry bounds") {
  auto blk = make_polarized_block(3, {0, 450, 900});
  const int n = blk.n;
  const auto prof = mcp_profile(blk);
  const auto dec = polarized_decomposition(prof, Rational(2), Rational(1, 4));

  // middle interval (g_1, g_2], partition B = {0,1,2,5}, N = {3,4}
  const double gj = to_double(dec.breakpoints[1]);
  const double gj1 = to_double(dec.breakpoints[2]);
  const auto& part = dec.partitions[1];
  const auto op =
      build_operator(rescaled_kernel_basis(blk.A, exact_mcp(blk, gj1).xm), part.first,
                     part.second);

  for (double g : {1e-140, 0.5 * gj1}) {
    const int k = count_sigma(op, gj1 / g, std::numeric_limits<double>::infinity());
    const double hatg = k >= 1 ? std::max(gj, gj1 / op.sigma[k - 1]) : gj;
    const Eigen::VectorXd xm_g = exact_mcp(blk, g).xm;
    const Eigen::VectorXd xbar = exact_mcp(blk, g).xm_feasible;
    const Eigen::VectorXd y0 = exact_mcp(blk, n * hatg).xm_feasible;

    CHECK(check_feasible(blk, xbar).feasible);
    CHECK(check_feasible(blk, y0).feasible);
    // gap of the averaged path point stays within a factor n
    CHECK(blk.gap(xbar) <= n * g * (1.0 + 1e-9));
    // singular coordinates keep at least 1/n of their path value
    for (int i : part.second) CHECK(xbar[i] >= xm_g[i] / n * (1.0 - 1e-9));
    CHECK(blk.gap(y0) <= n * hatg * (1.0 + 1e-9));
    if (k >= 1) {
      const Eigen::VectorXd xm_top = exact_mcp(blk, gj1).xm;
      for (int i : part.second)
        CHECK(y0[i] / xm_top[i] >= (1.0 / op.sigma[k - 1]) * (1.0 - 1e-9));
    }
  }

  // the degenerate bottom interval of the 2-simplex: hat g = 0 anchors
  auto inst = simplex3();
  for (double g : {3e-4, 1e-6}) {
    const Eigen::VectorXd xm_g = exact_mcp(inst, g).xm;
    const Eigen::VectorXd xbar = exact_mcp(inst, g).xm_feasible;
    const Eigen::VectorXd y0 = exact_mcp(inst, 0.0).xm_feasible;
    CHECK(inst.gap(xbar) <= 3 * g * (1.0 + 1e-9));
    for (int i : {0, 1}) CHECK(xbar[i] >= xm_g[i] / 3 * (1.0 - 1e-9));
    CHECK(inst.gap(y0) == 0.0);
  }
}

TEST_CASE("partition guess agrees with the oracle inside one interval") {
  // two gap measurements inside the same segment, with the separation the
  // full solver's rounds produce, recover exactly the oracle partition
  auto blk = make_polarized_block(3, {0, 450, 900});
  const auto prof = mcp_profile(blk);
  const auto dec = polarized_decomposition(prof, Rational(2), Rational(1, 4));

  const struct {
    int interval;
    double l0, l1;
  } cases[] = {{2, 1.0, 1e-6}, {1, 1e-140, 1e-146}};
  for (const auto& cs : cases) {
    const Eigen::VectorXd x0 = exact_mcp(blk, cs.l0).xm;
    const Eigen::VectorXd x1 = exact_mcp(blk, cs.l1).xm;
    const auto pg = guess_partition(blk.n, x0, x1, cs.l0, cs.l1);
    REQUIRE(pg.consistent);
    CHECK(pg.B == dec.partitions[cs.interval].first);
    CHECK(pg.N == dec.partitions[cs.interval].second);
  }

  auto inst = simplex3();
  const auto prof3 = mcp_profile(inst);
  const auto dec3 = polarized_decomposition(prof3, Rational(2), Rational(1, 4));
  const Eigen::VectorXd x0 = exact_mcp(inst, 0.1).xm;
  const Eigen::VectorXd x1 = exact_mcp(inst, 1e-7).xm;
  const auto pg = guess_partition(inst.n, x0, x1, 0.1, 1e-7);
  REQUIRE(pg.consistent);
  CHECK(pg.B == dec3.partitions[0].first);
  CHECK(pg.N == dec3.partitions[0].second);
}

TEST_CASE("estimated rescaling reproduces the oracle singular values") {
  // sigma from diag(xhat)^{-1} ker A vs the oracle's diag(x^m(g))^{-1} ker A:
  // every singular value agrees within the 4n estimation window
  const struct {
    LpInstance inst;
    double g;
    int interval;
  } cases[] = {{make_polarized_block(3, {0, 450, 900}), 1.0, 2},
               {simplex3(), 0.5, 0}};
  for (const auto& cs : cases) {
    const auto& inst = cs.inst;
    const auto prof = mcp_profile(inst);
    const auto dec = polarized_decomposition(prof, Rational(2), Rational(1, 4));
    const auto& part = dec.partitions[cs.interval];

    const Eigen::VectorXd x = exact_mcp(inst, cs.g).xm_feasible;
    const auto ge = approx_gap(inst, x);
    const auto am = approx_mcp(inst, x, ge);
    const auto op_est =
        build_operator(rescaled_kernel_basis(inst.A, am.xhat), part.first, part.second);
    const auto op_orc =
        build_operator(rescaled_kernel_basis(inst.A, exact_mcp(inst, cs.g).xm),
                       part.first, part.second);
    REQUIRE(op_est.sigma.size() == op_orc.sigma.size());
    const double w = 4.0 * inst.n * (1.0 + 1e-9);
    for (int i = 0; i < op_est.sigma.size(); ++i) {
      const double so = op_orc.sigma[i], se = op_est.sigma[i];
      if (so < 1e-12 && se < 1e-12) continue;
      CHECK(se <= w * so);
      CHECK(so <= w * se);
    }
  }
}

TEST_CASE("idealized round counter is monotone along produced walks") {
  auto blk = make_polarized_block(3, {0, 450, 900});
  const auto prof = mcp_profile(blk);
  const auto dec = polarized_decomposition(prof, Rational(2), Rational(1, 4));
  const auto sf = build_h(prof, dec, Rational(1, 2));

  SolveOptions opts;
  opts.eps_term = 1e-280;
  opts.max_iters = 100000;
  opts.trace_level = 2;
  const double vstar = *blk.meta.optimal_value;

  for (auto rule : {AugmentRule::wallacher, AugmentRule::full}) {
    const auto res = rule == AugmentRule::wallacher ? solve_wallacher(blk, *blk.x0, opts)
                                                    : solve_full(blk, *blk.x0, opts);
    long prev = ideal_potential(blk, dec, sf, blk.gap(*blk.x0));
    for (const auto& s : res.trace.steps) {
      if (s.kind == StepKind::none) continue;
      const double g = std::max(0.0, s.objective_after - vstar);
      const long cur = ideal_potential(blk, dec, sf, g);
      CHECK(cur <= prev);
      prev = cur;
    }
    CHECK(prev == 0);  // both rules reach the exact optimum here
  }
}
