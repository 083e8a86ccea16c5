#pragma once

// Lifting maps between coordinate blocks of a kernel subspace: min-norm lifts,
// the block lifting operator and its (domain-restricted) SVD, singular-value
// counting, small-singular-subspace projections, and diagonal rescalings.

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

namespace circuitlp {

struct SubspaceBasis {
  Eigen::MatrixXd M;  // n × d, orthonormal columns spanning the subspace
  std::optional<Eigen::VectorXd> scaling;  // present for diag(y)⁻¹W rescalings
};

// Orthonormal basis of ker(A).
SubspaceBasis kernel_basis(const Eigen::MatrixXd& A);
// Orthonormal basis of diag(y)⁻¹·ker(A) = ker(A·diag(y)), y > 0.
SubspaceBasis rescaled_kernel_basis(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

struct LiftingOperator {
  std::vector<int> B, N;          // partition of [n], ascending
  Eigen::MatrixXd op_matrix;      // |B| × |N|, equals M_B · (M_N)†
  Eigen::MatrixXd domain_basis;   // |N| × k orthonormal basis of π_N(W)
  Eigen::VectorXd sigma;          // k singular values, nonincreasing
  Eigen::MatrixXd right_basis;    // |N| × k, right singular vectors
  Eigen::MatrixXd left_basis;     // |B| × k, left singular vectors
  int dim() const { return static_cast<int>(sigma.size()); }
};

// Min-norm w in the subspace with w_N = zN (validates zN against π_N(W)).
Eigen::VectorXd min_norm_lift(const SubspaceBasis& basis, const std::vector<int>& N,
                              const Eigen::VectorXd& zN);

// Lifting operator for the partition (B, N); the SVD is taken with the domain
// restricted to π_N(W), so there are exactly dim(π_N(W)) singular values.
LiftingOperator build_operator(const SubspaceBasis& basis, const std::vector<int>& B,
                               const std::vector<int>& N);

// Number of singular values in [lo, hi).
int count_sigma(const LiftingOperator& op, double lo, double hi);

// Orthonormal basis (|N| × d) of the span of the d smallest singular values.
Eigen::MatrixXd singular_subspace(const LiftingOperator& op, int d);

// Orthogonal projection of zN onto span(Vd) and its lift through the operator.
std::pair<Eigen::VectorXd, Eigen::VectorXd> project_and_lift(const LiftingOperator& op,
                                                             const Eigen::MatrixXd& Vd,
                                                             const Eigen::VectorXd& zN);

// Operator of the same partition on diag(y)⁻¹W.
LiftingOperator rescale_operator(const SubspaceBasis& basis, const Eigen::VectorXd& y,
                                 const std::vector<int>& B, const std::vector<int>& N);

}  // namespace circuitlp
