#pragma once

// Small dense exact-rational linear algebra used by the ground-truth layers:
// row reduction, rank, and kernel bases. Conversions from double are exact
// (every finite double is a dyadic rational).

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "circuitlp/rational.hpp"

namespace circuitlp {

struct QMatrix {
  int rows = 0, cols = 0;
  std::vector<Rational> a;  // row-major
  QMatrix() = default;
  QMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
  Rational& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  const Rational& at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

inline QMatrix exact_from(const Eigen::MatrixXd& M) {
  QMatrix q(static_cast<int>(M.rows()), static_cast<int>(M.cols()));
  for (int i = 0; i < q.rows; ++i)
    for (int j = 0; j < q.cols; ++j) q.at(i, j) = Rational(M(i, j));
  return q;
}

// Reduced row echelon form in place; returns pivot columns (ascending).
inline std::vector<int> rref(QMatrix& M) {
  std::vector<int> pivots;
  int r = 0;
  for (int j = 0; j < M.cols && r < M.rows; ++j) {
    int p = -1;
    for (int i = r; i < M.rows; ++i)
      if (M.at(i, j) != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    if (p != r)
      for (int j2 = 0; j2 < M.cols; ++j2) std::swap(M.at(p, j2), M.at(r, j2));
    const Rational piv = M.at(r, j);
    for (int j2 = j; j2 < M.cols; ++j2) M.at(r, j2) /= piv;
    for (int i = 0; i < M.rows; ++i) {
      if (i == r || M.at(i, j) == 0) continue;
      const Rational f = M.at(i, j);
      for (int j2 = j; j2 < M.cols; ++j2) M.at(i, j2) -= f * M.at(r, j2);
    }
    pivots.push_back(j);
    ++r;
  }
  return pivots;
}

inline int exact_rank(QMatrix M) { return static_cast<int>(rref(M).size()); }

// Basis of ker(M), one vector per free column (unit entry there).
inline std::vector<std::vector<Rational>> exact_kernel_basis(QMatrix M) {
  const auto piv = rref(M);
  std::vector<bool> is_piv(M.cols, false);
  for (int j : piv) is_piv[j] = true;
  std::vector<std::vector<Rational>> basis;
  for (int f = 0; f < M.cols; ++f) {
    if (is_piv[f]) continue;
    std::vector<Rational> v(M.cols, Rational(0));
    v[f] = 1;
    for (size_t k = 0; k < piv.size(); ++k) v[piv[k]] = -M.at(static_cast<int>(k), f);
    basis.push_back(std::move(v));
  }
  return basis;
}

// Indices of a maximal linearly independent row subset (ascending).
inline std::vector<int> independent_rows(const QMatrix& M) {
  QMatrix T(M.cols, M.rows);
  for (int i = 0; i < M.rows; ++i)
    for (int j = 0; j < M.cols; ++j) T.at(j, i) = M.at(i, j);
  return rref(T);  // pivot columns of the transpose
}

}  // namespace circuitlp
