#include "circuitlp/circuits.hpp"

#include <algorithm>
#include <string>

#include "circuitlp/errors.hpp"
#include "circuitlp/exactla.hpp"
#include "circuitlp/instance.hpp"
#include "circuitlp/simplex.hpp"

namespace circuitlp {

namespace {

QMatrix columns_of(const QMatrix& A, const std::vector<int>& cols) {
  QMatrix S(A.rows, static_cast<int>(cols.size()));
  for (int i = 0; i < A.rows; ++i)
    for (size_t k = 0; k < cols.size(); ++k) S.at(i, static_cast<int>(k)) = A.at(i, cols[k]);
  return S;
}

Rational max_abs(const std::vector<Rational>& v) {
  Rational m = 0;
  for (const auto& x : v)
    if (abs_val(x) > m) m = abs_val(x);
  return m;
}

}  // namespace

bool is_elementary(const Eigen::MatrixXd& A, const Eigen::VectorXd& z) {
  const double zmax = z.size() ? z.cwiseAbs().maxCoeff() : 0.0;
  if (!(zmax > kFeasEps)) throw ValidationError("is_elementary: vector is (numerically) zero");
  const int n = static_cast<int>(A.cols());
  if (z.size() != n) throw ValidationError("is_elementary: dimension mismatch");
  const double amax = A.size() ? A.cwiseAbs().maxCoeff() : 0.0;
  const double rtol = kFeasEps * (1.0 + amax * zmax * n);
  if ((A * z).cwiseAbs().maxCoeff() > rtol) return false;
  std::vector<int> support;
  for (int j = 0; j < n; ++j)
    if (std::abs(z(j)) > kFeasEps * zmax) support.push_back(j);
  const QMatrix S = columns_of(exact_from(A), support);
  const int nullity = static_cast<int>(support.size()) - exact_rank(S);
  return nullity == 1;
}

std::vector<ElementaryVector> enumerate_circuits(const Eigen::MatrixXd& A) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (n > 16) throw ValidationError("enumerate_circuits: n > 16");
  const QMatrix Aq = exact_from(A);
  const int rank = exact_rank(Aq);
  const int maxk = std::min(n, rank + 1);
  std::vector<ElementaryVector> out;
  std::vector<int> idx;
  for (int k = 1; k <= maxk; ++k) {
    idx.resize(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      // A circuit support is exactly a subset whose column submatrix has
      // nullity 1 with a fully supported kernel vector; minimality follows.
      const QMatrix S = columns_of(Aq, idx);
      auto ker = exact_kernel_basis(S);
      if (ker.size() == 1) {
        bool full = true;
        for (const auto& v : ker[0])
          if (v == 0) {
            full = false;
            break;
          }
        if (full) {
          std::vector<Rational> v = ker[0];
          const Rational scale = (v[0] > 0 ? Rational(1) : Rational(-1)) * max_abs(v);
          ElementaryVector ev;
          ev.support = idx;
          ev.z = Eigen::VectorXd::Zero(n);
          for (int i = 0; i < k; ++i) ev.z(idx[i]) = to_double(v[i] / scale);
          out.push_back(std::move(ev));
        }
      }
      int p = k - 1;
      while (p >= 0 && idx[p] == n - k + p) --p;
      if (p < 0) break;
      ++idx[p];
      for (int q = p + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
    }
  }
  std::sort(out.begin(), out.end(),
            [](const ElementaryVector& a, const ElementaryVector& b) { return a.support < b.support; });
  (void)m;
  return out;
}

std::vector<ConformalTerm> conformal_decompose(const Eigen::MatrixXd& A,
                                               const Eigen::VectorXd& z) {
  const int n = static_cast<int>(A.cols());
  if (z.size() != n) throw ValidationError("conformal_decompose: dimension mismatch");
  const double zmax = z.size() ? z.cwiseAbs().maxCoeff() : 0.0;
  if (zmax <= kFeasEps) return {};

  // Snap z onto ker(A) exactly: keep its values on the free columns of an
  // RREF of A and derive the pivot-column values. Exact kernel membership is
  // what lets the peel terminate with a residual of exactly zero.
  QMatrix R = exact_from(A);
  const auto piv = rref(R);
  std::vector<bool> is_piv(n, false);
  for (int j : piv) is_piv[j] = true;
  std::vector<Rational> zr(n, Rational(0));
  for (int j = 0; j < n; ++j)
    if (!is_piv[j]) zr[j] = Rational(z(j));
  for (size_t k = 0; k < piv.size(); ++k) {
    Rational s = 0;
    for (int f = 0; f < n; ++f)
      if (!is_piv[f] && R.at(static_cast<int>(k), f) != 0) s += R.at(static_cast<int>(k), f) * zr[f];
    zr[piv[k]] = -s;
  }
  for (int j = 0; j < n; ++j)
    if (std::abs(to_double(zr[j]) - z(j)) > 1e-6 * (1.0 + zmax))
      throw ValidationError("conformal_decompose: input is not a kernel vector");

  std::vector<int> sgn(n, 0);
  for (int j = 0; j < n; ++j) sgn[j] = zr[j] > 0 ? 1 : (zr[j] < 0 ? -1 : 0);
  const QMatrix Aq = exact_from(A);
  std::vector<Rational> r = zr;
  std::vector<ConformalTerm> out;

  for (int guard = 0; guard <= n; ++guard) {
    std::vector<int> S;
    for (int j = 0; j < n; ++j)
      if (r[j] != 0) S.push_back(j);
    if (S.empty()) return out;

    // A vertex of {ζ ≥ 0 : A'ζ = 0, Σζ = 1}, where A' carries the signs of
    // the residual, is an elementary vector conformal to it. Row-reduce first
    // so the solver sees a full-row-rank system.
    QMatrix As = columns_of(Aq, S);
    for (int i = 0; i < As.rows; ++i)
      for (size_t k = 0; k < S.size(); ++k) As.at(i, static_cast<int>(k)) *= sgn[S[k]];
    const auto rows = independent_rows(As);
    LpProblem<Rational> p;
    p.n = static_cast<int>(S.size());
    p.m = static_cast<int>(rows.size()) + 1;
    p.A.assign(static_cast<size_t>(p.m) * p.n, Rational(0));
    for (int j = 0; j < p.n; ++j) p.A[j] = 1;
    for (size_t i = 0; i < rows.size(); ++i)
      for (int j = 0; j < p.n; ++j) p.A[(i + 1) * p.n + j] = As.at(rows[i], j);
    p.b.assign(p.m, Rational(0));
    p.b[0] = 1;
    p.c.assign(p.n, Rational(0));
    auto sol = solve_lp(p);
    if (sol.status != LpStatus::Optimal)
      throw NumericalError("conformal_decompose: peel subproblem not optimal");

    Rational alpha = 0;
    bool first = true;
    for (int j = 0; j < p.n; ++j) {
      if (sol.x[j] == 0) continue;
      const Rational ratio = abs_val(r[S[j]]) / sol.x[j];
      if (first || ratio < alpha) {
        alpha = ratio;
        first = false;
      }
    }
    if (first || alpha <= 0) throw NumericalError("conformal_decompose: empty peel step");

    std::vector<Rational> h(n, Rational(0));
    Rational hmax = 0;
    for (int j = 0; j < p.n; ++j) {
      if (sol.x[j] == 0) continue;
      h[S[j]] = Rational(sgn[S[j]]) * sol.x[j];
      if (sol.x[j] > hmax) hmax = sol.x[j];
      r[S[j]] -= alpha * h[S[j]];
    }
    ConformalTerm term;
    term.alpha = to_double(alpha * hmax);
    term.h.z = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (h[j] == 0) continue;
      term.h.support.push_back(j);
      term.h.z(j) = to_double(h[j] / hmax);
    }
    out.push_back(std::move(term));
  }
  throw NumericalError("conformal_decompose: peel did not terminate");
}

}  // namespace circuitlp
