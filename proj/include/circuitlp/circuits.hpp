#pragma once

// Elementary-vector predicates, exhaustive circuit enumeration, and conformal
// decomposition. This layer is the ground truth the oracle solvers are tested
// against, so everything here is computed in exact rational arithmetic.

#include <Eigen/Dense>
#include <vector>

namespace circuitlp {

// A support-minimal kernel vector of A, normalized to ‖z‖_∞ = 1.
struct ElementaryVector {
  Eigen::VectorXd z;
  std::vector<int> support;  // ascending
};

// True iff Az ≈ 0 and the support-column submatrix has nullity exactly 1.
bool is_elementary(const Eigen::MatrixXd& A, const Eigen::VectorXd& z);

// All circuits of ker(A), one representative per antipodal pair {z, −z},
// normalized with first nonzero positive. Guarded to n ≤ 16.
std::vector<ElementaryVector> enumerate_circuits(const Eigen::MatrixXd& A);

// One term of a conformal decomposition: alpha > 0 and h sign-matched to the
// decomposed vector (h is *not* sign-flipped to the antipodal representative).
struct ConformalTerm {
  double alpha = 0;
  ElementaryVector h;
};

// Writes z = Σ alpha_k · h_k with every h_k elementary and conformal to z
// (no coordinate of opposite sign). At most n − rank(A) terms.
std::vector<ConformalTerm> conformal_decompose(const Eigen::MatrixXd& A,
                                               const Eigen::VectorXd& z);

}  // namespace circuitlp
