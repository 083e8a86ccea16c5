#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "circuitlp/errors.hpp"
#include "circuitlp/generators.hpp"
#include "circuitlp/instance.hpp"
#include "circuitlp/lifting.hpp"

using namespace circuitlp;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<int>(v.size()));
  int i = 0;
  for (double t : v) x(i++) = t;
  return x;
}

struct Rng {
  std::mt19937_64 g;
  explicit Rng(uint64_t s) : g(s) {}
  double u01() { return (g() >> 11) * 0x1.0p-53; }
  double sym() { return 2 * u01() - 1; }
};

Eigen::MatrixXd random_matrix(Rng& r, int m, int n) {
  Eigen::MatrixXd A(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = r.sym();
  return A;
}

std::pair<std::vector<int>, std::vector<int>> random_partition(Rng& r, int n, int min_each) {
  while (true) {
    std::vector<int> B, N;
    for (int i = 0; i < n; ++i) (r.u01() < 0.5 ? B : N).push_back(i);
    if (static_cast<int>(B.size()) >= min_each && static_cast<int>(N.size()) >= min_each)
      return {B, N};
  }
}

}  // namespace

TEST_CASE("kernel_basis is orthonormal and annihilated by A") {
  for (auto [kind, m, n] : {std::tuple{"simplex", 3, 8}, std::tuple{"mincost-flow", 4, 9},
                            std::tuple{"dual-2vpi", 5, 9}}) {
    LpInstance inst = generate_instance(kind, m, n, 9);
    auto bas = kernel_basis(inst.A);
    CHECK(bas.M.cols() == inst.n - inst.m);
    CHECK((bas.M.transpose() * bas.M - Eigen::MatrixXd::Identity(bas.M.cols(), bas.M.cols()))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    CHECK((inst.A * bas.M).cwiseAbs().maxCoeff() < 1e-9 * (1 + inst.A.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("min_norm_lift hand cases") {
  auto bas = kernel_basis(Eigen::MatrixXd::Ones(1, 3));
  auto w = min_norm_lift(bas, {2}, vec({1}));
  CHECK(w.isApprox(vec({-0.5, -0.5, 1}), 1e-9));

  CHECK(min_norm_lift(bas, {2}, vec({0})).cwiseAbs().maxCoeff() < 1e-12);

  // full-coordinate lift is the identity on the subspace
  Eigen::VectorXd zfull = bas.M.col(0) * 0.7 + bas.M.col(1) * -0.3;
  CHECK(min_norm_lift(bas, {0, 1, 2}, zfull).isApprox(zfull, 1e-9));

  // membership validation
  CHECK_THROWS_AS(min_norm_lift(bas, {0, 1, 2}, vec({1, 1, 1})), ValidationError);
}

TEST_CASE("build_operator hand case: one-column domain") {
  auto bas = kernel_basis(Eigen::MatrixXd::Ones(1, 3));
  auto op = build_operator(bas, {0, 1}, {2});
  REQUIRE(op.dim() == 1);
  CHECK(op.sigma(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  // operator agrees with the min-norm lift
  Eigen::VectorXd lift = op.op_matrix * vec({1});
  CHECK(lift.isApprox(vec({-0.5, -0.5}), 1e-9));
}

TEST_CASE("build_operator degenerate domain throws") {
  Eigen::MatrixXd A(2, 3);
  A << 1, 1, 0, 0, 0, 1;  // kernel = span{(1,-1,0)}
  auto bas = kernel_basis(A);
  CHECK_THROWS_AS(build_operator(bas, {0, 1}, {2}), ValidationError);
  CHECK_THROWS_AS(build_operator(bas, {0, 1, 2}, {}), ValidationError);
}

TEST_CASE("operator norm bound and SVD reconstruction on random subspaces") {
  Rng r(31);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 5 + static_cast<int>(r.u01() * 5);
    const int m = 2 + static_cast<int>(r.u01() * (n - 3));
    Eigen::MatrixXd A = random_matrix(r, m, n);
    auto bas = kernel_basis(A);
    if (bas.M.cols() == 0) continue;
    auto [B, N] = random_partition(r, n, 1);
    LiftingOperator op;
    try {
      op = build_operator(bas, B, N);
    } catch (const ValidationError&) {
      continue;  // degenerate π_N(W)
    }
    // σ sorted nonincreasing
    for (int i = 1; i < op.dim(); ++i) CHECK(op.sigma(i) <= op.sigma(i - 1) + 1e-12);
    // reconstruction Σ σᵢ uᵢ vᵢᵀ == op_matrix
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(static_cast<int>(B.size()), static_cast<int>(N.size()));
    for (int i = 0; i < op.dim(); ++i)
      R += op.sigma(i) * op.left_basis.col(i) * op.right_basis.col(i).transpose();
    CHECK((R - op.op_matrix).cwiseAbs().maxCoeff() < 1e-9 * (1 + op.sigma(0)));
    // ‖ℓ(zN)‖ ≤ σ₁‖zN‖ on random domain vectors, and ℓ(z_N) = z_B for z ∈ W
    for (int t = 0; t < 5; ++t) {
      Eigen::VectorXd coeff(bas.M.cols());
      for (int i = 0; i < coeff.size(); ++i) coeff(i) = r.sym();
      Eigen::VectorXd z = bas.M * coeff;
      Eigen::VectorXd zN(N.size()), zB(B.size());
      for (size_t k = 0; k < N.size(); ++k) zN(static_cast<int>(k)) = z(N[k]);
      for (size_t k = 0; k < B.size(); ++k) zB(static_cast<int>(k)) = z(B[k]);
      CHECK((op.op_matrix * zN).norm() <= op.sigma(0) * zN.norm() * (1 + 1e-9) + 1e-12);
      // the lift reproduces z_B when π_N is injective on W (k = dim W)
      if (op.dim() == bas.M.cols())
        CHECK((op.op_matrix * zN - zB).norm() < 1e-8 * (1 + zB.norm()));
    }
  }
}

TEST_CASE("count_sigma on a stored spectrum") {
  LiftingOperator op;
  op.sigma = vec({3, 1, 0.5});
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(count_sigma(op, 1, inf) == 2);
  CHECK(count_sigma(op, 0, inf) == 3);
  CHECK(count_sigma(op, 4, inf) == 0);
  CHECK(count_sigma(op, 0.5, 3) == 2);  // half-open: excludes σ = 3
  CHECK_THROWS_AS(count_sigma(op, 2, 1), ValidationError);
}

TEST_CASE("singular_subspace spans the small directions") {
  Rng r(77);
  Eigen::MatrixXd A = random_matrix(r, 3, 6);
  auto bas = kernel_basis(A);
  auto [B, N] = std::pair<std::vector<int>, std::vector<int>>{{0, 2, 4}, {1, 3, 5}};
  auto op = build_operator(bas, B, N);
  const int dim = op.dim();
  REQUIRE(dim >= 1);

  CHECK(singular_subspace(op, 0).cols() == 0);
  // d = dim: projection is the identity on the domain
  Eigen::MatrixXd Vfull = singular_subspace(op, dim);
  Eigen::VectorXd zN = op.domain_basis * Eigen::VectorXd::Random(dim);
  auto [proj, lift] = project_and_lift(op, Vfull, zN);
  CHECK((proj - zN).norm() < 1e-9 * (1 + zN.norm()));

  // d = 1: restricted norm is the smallest singular value
  Eigen::MatrixXd V1 = singular_subspace(op, 1);
  const double restricted = (op.op_matrix * V1).norm();
  CHECK(restricted <= op.sigma(dim - 1) * (1 + 1e-9) + 1e-9);
}

TEST_CASE("project_and_lift orthogonality cases") {
  auto bas = kernel_basis(Eigen::MatrixXd::Ones(1, 4));
  std::vector<int> B{0, 1}, N{2, 3};
  auto op = build_operator(bas, B, N);
  REQUIRE(op.dim() == 2);
  Eigen::MatrixXd V1 = singular_subspace(op, 1);
  // a domain vector orthogonal to V1 projects to zero
  Eigen::VectorXd other = op.right_basis.col(0);
  auto [proj0, lift0] = project_and_lift(op, V1, other);
  CHECK(proj0.norm() < 1e-10);
  CHECK(lift0.norm() < 1e-10);
  // and a vector inside V1 is fixed
  auto [proj1, lift1] = project_and_lift(op, V1, V1.col(0));
  CHECK((proj1 - V1.col(0)).norm() < 1e-10);

  // proper subspace domain: membership is enforced
  Eigen::MatrixXd A2(2, 4);
  A2 << 1, 1, 0, 0, 0, 0, 1, -1;  // π_{2,3}(ker) = span{(1,1)}
  auto op2 = build_operator(kernel_basis(A2), {0, 1}, {2, 3});
  REQUIRE(op2.dim() == 1);
  Eigen::MatrixXd V2 = singular_subspace(op2, 1);
  CHECK_THROWS_AS(project_and_lift(op2, V2, vec({5, 6})), ValidationError);
}

TEST_CASE("projection error bound against the block norm") {
  // for z in the subspace: ‖z_N − Π_{V_d} z_N‖ ≤ ‖z_B‖ / σ_k, k = dim − d
  Rng r(123);
  int tested = 0;
  while (tested < 200) {
    const int n = 6 + static_cast<int>(r.u01() * 5);
    const int m = 2 + static_cast<int>(r.u01() * (n - 4));
    Eigen::MatrixXd A = random_matrix(r, m, n);
    auto bas = kernel_basis(A);
    if (bas.M.cols() == 0) continue;
    auto [B, N] = random_partition(r, n, 1);
    LiftingOperator op;
    try {
      op = build_operator(bas, B, N);
    } catch (const ValidationError&) {
      continue;
    }
    for (int d = 0; d <= op.dim(); ++d) {
      Eigen::MatrixXd Vd = singular_subspace(op, d);
      Eigen::VectorXd coeff(bas.M.cols());
      for (int i = 0; i < coeff.size(); ++i) coeff(i) = r.sym();
      Eigen::VectorXd z = bas.M * coeff;
      Eigen::VectorXd zN(N.size()), zB(B.size());
      for (size_t k = 0; k < N.size(); ++k) zN(static_cast<int>(k)) = z(N[k]);
      for (size_t k = 0; k < B.size(); ++k) zB(static_cast<int>(k)) = z(B[k]);
      auto [proj, lift] = project_and_lift(op, Vd, zN);
      const int k = op.dim() - d;
      const double err = (zN - proj).norm();
      if (k == 0) {
        CHECK(err < 1e-9 * (1 + zN.norm()));
      } else if (op.sigma(k - 1) > 1e-300) {
        CHECK(err <= zB.norm() / op.sigma(k - 1) + 1e-9 * (1 + z.norm()));
      }
      ++tested;
    }
  }
}

TEST_CASE("rescale_operator: uniform scalings keep the spectrum") {
  auto bas = kernel_basis(Eigen::MatrixXd::Ones(1, 4));
  std::vector<int> B{0, 1}, N{2, 3};
  auto op = build_operator(bas, B, N);
  auto same = rescale_operator(bas, Eigen::VectorXd::Ones(4), B, N);
  auto twice = rescale_operator(bas, 2 * Eigen::VectorXd::Ones(4), B, N);
  REQUIRE(same.dim() == op.dim());
  REQUIRE(twice.dim() == op.dim());
  for (int i = 0; i < op.dim(); ++i) {
    CHECK(same.sigma(i) == doctest::Approx(op.sigma(i)));
    CHECK(twice.sigma(i) == doctest::Approx(op.sigma(i)));
  }
  CHECK_THROWS_AS(rescale_operator(bas, Eigen::VectorXd::Zero(4), B, N), ValidationError);
}

TEST_CASE("rescale_operator sandwich bounds per sorted singular value") {
  Rng r(55);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 8;
    const int m = 3;
    Eigen::MatrixXd A = random_matrix(r, m, n);
    auto bas = kernel_basis(A);
    auto [B, N] = random_partition(r, n, 2);
    LiftingOperator op, scaled;
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = std::pow(2.0, 4 * r.sym());
    try {
      op = build_operator(bas, B, N);
      scaled = rescale_operator(bas, y, B, N);
    } catch (const ValidationError&) {
      continue;
    }
    REQUIRE(op.dim() == scaled.dim());
    double yB_max = 0, yB_invmax = 0, yN_max = 0, yN_invmax = 0;
    for (int i : B) {
      yB_max = std::max(yB_max, y(i));
      yB_invmax = std::max(yB_invmax, 1.0 / y(i));
    }
    for (int i : N) {
      yN_max = std::max(yN_max, y(i));
      yN_invmax = std::max(yN_invmax, 1.0 / y(i));
    }
    for (int i = 0; i < op.dim(); ++i) {
      CHECK(scaled.sigma(i) <= yB_invmax * yN_max * op.sigma(i) * (1 + 1e-7) + 1e-12);
      CHECK(op.sigma(i) <= yB_max * yN_invmax * scaled.sigma(i) * (1 + 1e-7) + 1e-12);
    }
  }
}
