#include <doctest.h>

#include <cmath>

#include "circuitlp/generators.hpp"
#include "circuitlp/instance.hpp"
#include "circuitlp/simplex.hpp"

using namespace circuitlp;

namespace {

LpProblem<double> simplex3(double c1, double c2, double c3) {
  LpProblem<double> p;
  p.m = 1;
  p.n = 3;
  p.A = {1, 1, 1};
  p.b = {1};
  p.c = {c1, c2, c3};
  return p;
}

LpProblem<Rational> to_exact(const LpProblem<double>& p) {
  LpProblem<Rational> q;
  q.m = p.m;
  q.n = p.n;
  for (double v : p.A) q.A.emplace_back(v);
  for (double v : p.b) q.b.emplace_back(v);
  for (double v : p.c) q.c.emplace_back(v);
  return q;
}

}  // namespace

TEST_CASE("unit simplex, cost (1,2,0) picks the third vertex") {
  auto sol = solve_lp(simplex3(1, 2, 0));
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sol.x[0] == doctest::Approx(0.0));
  CHECK(sol.x[1] == doctest::Approx(0.0));
  CHECK(sol.x[2] == doctest::Approx(1.0));
  // dual: y = 0, reduced costs equal c
  CHECK(sol.y[0] == doctest::Approx(0.0));
  CHECK(sol.reduced_costs[0] == doctest::Approx(1.0));
  CHECK(sol.reduced_costs[1] == doctest::Approx(2.0));
  CHECK(sol.reduced_costs[2] == doctest::Approx(0.0));
}

TEST_CASE("unit simplex, cost (-1,0,0)") {
  auto sol = solve_lp(simplex3(-1, 0, 0));
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.0));
  CHECK(sol.x[0] == doctest::Approx(1.0));
}

TEST_CASE("free direction gives an unbounded certificate") {
  LpProblem<double> p;
  p.m = 1;
  p.n = 2;
  p.A = {1, -1};
  p.b = {0};
  p.c = {-1, 0};
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Unbounded);
  REQUIRE(sol.ray.size() == 2);
  CHECK(sol.ray[0] == doctest::Approx(sol.ray[1]));
  CHECK(sol.ray[0] > 0);
  // ray stays in the constraint kernel and improves the objective
  CHECK(sol.ray[0] * p.c[0] + sol.ray[1] * p.c[1] < 0);
}

TEST_CASE("negative right-hand side on the simplex is infeasible") {
  LpProblem<double> p;
  p.m = 1;
  p.n = 2;
  p.A = {1, 1};
  p.b = {-1};
  p.c = {0, 0};
  auto sol = solve_lp(p);
  CHECK(sol.status == LpStatus::Infeasible);
}

TEST_CASE("exact mode reproduces the vertex without rounding") {
  auto sol = solve_lp(to_exact(simplex3(1, 2, 0)));
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == Rational(0));
  CHECK(sol.x[0] == Rational(0));
  CHECK(sol.x[2] == Rational(1));
}

TEST_CASE("exact mode with fractional data stays exact") {
  LpProblem<Rational> p;
  p.m = 2;
  p.n = 4;
  // x1 + x2 = 1, x3 + x4 = 1; cost thirds
  p.A = {Rational(1), Rational(1), Rational(0), Rational(0),
         Rational(0), Rational(0), Rational(1), Rational(1)};
  p.b = {Rational(1), Rational(1)};
  p.c = {Rational(1) / 3, Rational(2) / 3, Rational(1) / 7, Rational(1) / 9};
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == Rational(1) / 3 + Rational(1) / 9);
}

TEST_CASE("badly scaled entries survive equilibration") {
  LpProblem<double> p;
  p.m = 2;
  p.n = 4;
  p.A = {1e8, 1e-8, 1.0, 0.0,
         0.0, 1e8, 0.0, 1e-8};
  p.b = {1e8, 1e-4};
  p.c = {1.0, 1e6, 2.0, 0.0};
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  // x = (1, 1e-12, 0, ...) is feasible; optimum puts weight on cheap coords
  double r0 = 1e8 * sol.x[0] + 1e-8 * sol.x[1] + sol.x[2] - 1e8;
  double r1 = 1e8 * sol.x[1] + 1e-8 * sol.x[3] - 1e-4;
  CHECK(std::abs(r0) <= 1e-4);  // relative to the 1e8 row scale
  CHECK(std::abs(r1) <= 1e-12);
}

TEST_CASE("duality and complementary slackness hold on generated instances") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 11ULL}) {
    for (const char* kind : {"simplex", "mincost-flow", "generalized-flow", "dual-2vpi"}) {
      LpInstance inst = generate_instance(kind, 4, 8, seed);
      auto sol = solve_lp(to_problem(inst));
      REQUIRE(sol.status == LpStatus::Optimal);
      Eigen::VectorXd x = to_eigen(sol.x), y = to_eigen(sol.y);
      const double scale = 1.0 + inst.b.cwiseAbs().maxCoeff();
      CHECK((inst.A * x - inst.b).lpNorm<Eigen::Infinity>() <= 1e-9 * scale);
      CHECK(x.minCoeff() >= -1e-9);
      // strong duality
      CHECK(std::abs(inst.b.dot(y) - sol.objective) <= 1e-7 * (1 + std::abs(sol.objective)));
      for (int j = 0; j < inst.n; ++j) {
        const double rc = inst.c(j) - inst.A.col(j).dot(y);
        CHECK(rc == doctest::Approx(sol.reduced_costs[j]).epsilon(1e-6).scale(1.0));
        CHECK(rc >= -1e-7);
        CHECK(std::abs(sol.x[j] * rc) <= 1e-6 * (1 + std::abs(sol.objective)));
      }
    }
  }
}

TEST_CASE("degenerate problem terminates (anti-cycling)") {
  // classic highly degenerate LP: many bases at one vertex
  LpProblem<double> p;
  p.m = 3;
  p.n = 7;
  p.A = {0.25, -8.0, -1.0,  9.0, 1, 0, 0,
         0.5, -12.0, -0.5,  3.0, 0, 1, 0,
         0.0,   0.0,  1.0,  0.0, 0, 0, 1};
  p.b = {0, 0, 1};
  p.c = {-0.75, 150.0, -0.02, 6.0, 0, 0, 0};
  auto sol = solve_lp(p);  // must terminate despite degenerate pivots
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-0.77));  // x = (1,0,1,0,...)
}

TEST_CASE("weighted-row solve matches hand-solved circuit example") {
  // min <u,z> over ker([1 1 1]) with <v,z+> + <w,z-> <= 1
  std::vector<double> A = {1, 1, 1};
  std::vector<double> u = {1, 2, 0};
  auto v = Weights<double>::zeros(3);
  Weights<double> w{{3, 3, 3}, {0, 0, 0}};
  auto r = solve_with_ineq_row<double>(1, 3, A, u, v, w);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.z[0] == doctest::Approx(0.0));
  CHECK(r.z[1] == doctest::Approx(-1.0 / 3));
  CHECK(r.z[2] == doctest::Approx(1.0 / 3));
  CHECK(r.objective == doctest::Approx(-2.0 / 3));
  CHECK(-r.eta == doctest::Approx(2.0 / 3));
  CHECK(r.weight_row_tight);
}

TEST_CASE("weighted-row solve honours infinite weights") {
  // forbid every negative part: only z = 0 remains when costs are nonnegative
  std::vector<double> A = {1, 1, 1};
  std::vector<double> u = {1, 2, 0};
  auto v = Weights<double>::zeros(3);
  Weights<double> w{{0, 0, 0}, {1, 1, 1}};
  auto r = solve_with_ineq_row<double>(1, 3, A, u, v, w);
  REQUIRE(r.status == LpStatus::Optimal);
  for (double zj : r.z) CHECK(zj == doctest::Approx(0.0));
  CHECK(-r.eta == doctest::Approx(0.0));
}

TEST_CASE("weighted-row solve in exact arithmetic") {
  std::vector<Rational> A = {Rational(1), Rational(-1)};
  std::vector<Rational> u = {Rational(1), Rational(0)};
  auto v = Weights<Rational>::zeros(2);
  Weights<Rational> w{{Rational(1), Rational(1)}, {0, 0}};
  auto r = solve_with_ineq_row<Rational>(1, 2, A, u, v, w);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.z[0] == Rational(-1) / 2);
  CHECK(r.z[1] == Rational(-1) / 2);
  CHECK(r.eta == Rational(-1) / 2);
}
