#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "circuitlp/circuits.hpp"
#include "circuitlp/errors.hpp"
#include "circuitlp/generators.hpp"
#include "circuitlp/instance.hpp"
#include "circuitlp/rational.hpp"

using namespace circuitlp;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<int>(v.size()));
  int i = 0;
  for (double t : v) x(i++) = t;
  return x;
}

Eigen::MatrixXd mat(int m, int n, std::initializer_list<double> v) {
  Eigen::MatrixXd A(m, n);
  int i = 0;
  for (double t : v) {
    A(i / n, i % n) = t;
    ++i;
  }
  return A;
}

// Dumb reference enumeration: every column subset, Eigen rank only.
std::set<std::vector<int>> brute_circuit_supports(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.cols());
  std::set<std::vector<int>> supports;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> S;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) S.push_back(j);
    Eigen::MatrixXd sub(A.rows(), static_cast<int>(S.size()));
    for (size_t k = 0; k < S.size(); ++k) sub.col(static_cast<int>(k)) = A.col(S[k]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    lu.setThreshold(1e-9);
    if (static_cast<int>(S.size()) - lu.rank() != 1) continue;
    Eigen::MatrixXd K = lu.kernel();
    bool full = K.col(0).cwiseAbs().minCoeff() > 1e-9 * K.col(0).cwiseAbs().maxCoeff();
    if (full) supports.insert(S);
  }
  return supports;
}

}  // namespace

TEST_CASE("double-to-rational conversion is exact") {
  CHECK(Rational(0.1) == Rational(3602879701896397) / Rational(36028797018963968ULL));
  CHECK(Rational(0.5) == Rational(1) / 2);
  CHECK(Rational(-3.25) == Rational(-13) / 4);
}

TEST_CASE("is_elementary on hand cases") {
  const auto A = mat(1, 3, {1, 1, 1});
  CHECK(is_elementary(A, vec({1, -1, 0})));
  CHECK(is_elementary(A, vec({0, 1, -1})));
  CHECK_FALSE(is_elementary(A, vec({2, -1, -1})));  // support {0,1,2}, nullity 2
  CHECK_FALSE(is_elementary(A, vec({1, 0, 0})));    // not in the kernel
  CHECK_THROWS_AS(is_elementary(A, vec({0, 0, 0})), ValidationError);
  CHECK(is_elementary(mat(1, 2, {1, -1}), vec({1, 1})));
  // zero column: singleton support is a circuit
  CHECK(is_elementary(mat(2, 3, {1, 0, 0, 0, 0, 1}), vec({0, 1, 0})));
}

TEST_CASE("enumerate_circuits hand cases") {
  auto cs = enumerate_circuits(mat(1, 3, {1, 1, 1}));
  REQUIRE(cs.size() == 3);
  CHECK(cs[0].support == std::vector<int>{0, 1});
  CHECK(cs[1].support == std::vector<int>{0, 2});
  CHECK(cs[2].support == std::vector<int>{1, 2});
  CHECK(cs[0].z.isApprox(vec({1, -1, 0})));
  CHECK(cs[1].z.isApprox(vec({1, 0, -1})));
  CHECK(cs[2].z.isApprox(vec({0, 1, -1})));

  CHECK(enumerate_circuits(mat(2, 2, {1, 0, 0, 1})).empty());  // trivial kernel

  auto single = enumerate_circuits(mat(1, 2, {1, -1}));
  REQUIRE(single.size() == 1);
  CHECK(single[0].z.isApprox(vec({1, 1})));

  CHECK_THROWS_AS(enumerate_circuits(Eigen::MatrixXd::Zero(1, 17)), ValidationError);
}

TEST_CASE("enumerate_circuits matches brute-force subset scan") {
  for (auto [kind, m, n, seed] :
       {std::tuple{"simplex", 3, 7, 5}, std::tuple{"mincost-flow", 4, 9, 7},
        std::tuple{"dual-2vpi", 5, 9, 3}, std::tuple{"generalized-flow", 3, 8, 11}}) {
    LpInstance inst = generate_instance(kind, m, n, seed);
    auto cs = enumerate_circuits(inst.A);
    auto ref = brute_circuit_supports(inst.A);
    std::set<std::vector<int>> got;
    for (const auto& ev : cs) {
      got.insert(ev.support);
      CHECK(is_elementary(inst.A, ev.z));
      CHECK(ev.z.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
      // first nonzero positive
      CHECK(ev.z(ev.support.front()) > 0);
      CHECK((inst.A * ev.z).cwiseAbs().maxCoeff() <
            1e-9 * (1 + inst.A.cwiseAbs().maxCoeff()));
    }
    CHECK(got == ref);
  }
}

TEST_CASE("conformal_decompose hand case") {
  const auto A = mat(1, 3, {1, 1, 1});
  auto terms = conformal_decompose(A, vec({2, -1, -1}));
  REQUIRE(terms.size() == 2);
  std::sort(terms.begin(), terms.end(), [](const ConformalTerm& a, const ConformalTerm& b) {
    return a.h.support < b.h.support;
  });
  CHECK(terms[0].alpha == doctest::Approx(1.0));
  CHECK(terms[1].alpha == doctest::Approx(1.0));
  CHECK(terms[0].h.z.isApprox(vec({1, -1, 0})));
  CHECK(terms[1].h.z.isApprox(vec({1, 0, -1})));
}

TEST_CASE("conformal_decompose edge cases") {
  const auto A = mat(1, 3, {1, 1, 1});
  CHECK(conformal_decompose(A, vec({0, 0, 0})).empty());

  // already elementary: one term, sign-matched (not antipodal-normalized)
  auto t = conformal_decompose(A, vec({-3, 3, 0}));
  REQUIRE(t.size() == 1);
  CHECK(t[0].alpha == doctest::Approx(3.0));
  CHECK(t[0].h.z.isApprox(vec({-1, 1, 0})));

  CHECK_THROWS_AS(conformal_decompose(A, vec({1, 1, 1})), ValidationError);
}

TEST_CASE("conformal_decompose properties on random kernel vectors") {
  std::mt19937_64 g(2024);
  auto u01 = [&] { return (g() >> 11) * 0x1.0p-53; };
  for (auto [kind, m, n] : {std::tuple{"simplex", 3, 8}, std::tuple{"mincost-flow", 4, 10},
                            std::tuple{"generalized-flow", 4, 10}, std::tuple{"dual-2vpi", 6, 12}}) {
    LpInstance inst = generate_instance(kind, m, n, 42);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(inst.A);
    lu.setThreshold(1e-9);
    Eigen::MatrixXd K = lu.kernel();
    for (int rep = 0; rep < 6; ++rep) {
      Eigen::VectorXd w(K.cols());
      for (int i = 0; i < K.cols(); ++i) w(i) = 2 * u01() - 1;
      Eigen::VectorXd z = K * w;
      if (z.cwiseAbs().maxCoeff() < 1e-6) continue;
      auto terms = conformal_decompose(inst.A, z);
      CHECK(static_cast<int>(terms.size()) <= inst.n - inst.m);
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(inst.n);
      for (const auto& term : terms) {
        CHECK(term.alpha > 0);
        CHECK(is_elementary(inst.A, term.h.z));
        sum += term.alpha * term.h.z;
        for (int j = 0; j < inst.n; ++j)
          if (std::abs(z(j)) > 1e-7)
            CHECK(term.h.z(j) * z(j) >= 0);  // conformal: never opposite sign
          else
            CHECK(std::abs(term.h.z(j)) < 1e-6);
      }
      CHECK((sum - z).cwiseAbs().maxCoeff() < 1e-9 * (1 + z.cwiseAbs().maxCoeff()));
    }
  }
}
