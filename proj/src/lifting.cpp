#include "circuitlp/lifting.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "circuitlp/errors.hpp"

namespace circuitlp {

namespace {

constexpr double kRankTol = 1e-10;

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& M, const std::vector<int>& idx) {
  Eigen::MatrixXd R(static_cast<int>(idx.size()), M.cols());
  for (size_t k = 0; k < idx.size(); ++k) R.row(static_cast<int>(k)) = M.row(idx[k]);
  return R;
}

}  // namespace

SubspaceBasis kernel_basis(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankTol * std::max(1.0, smax)) ++rank;
  SubspaceBasis b;
  b.M = svd.matrixV().rightCols(n - rank);
  return b;
}

SubspaceBasis rescaled_kernel_basis(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  if (y.size() != A.cols()) throw ValidationError("rescaled_kernel_basis: dimension mismatch");
  for (int i = 0; i < y.size(); ++i)
    if (!(y(i) > 0)) throw ValidationError("rescaled_kernel_basis: scaling must be positive");
  SubspaceBasis b = kernel_basis(A * y.asDiagonal());
  b.scaling = y;
  return b;
}

Eigen::VectorXd min_norm_lift(const SubspaceBasis& basis, const std::vector<int>& N,
                              const Eigen::VectorXd& zN) {
  if (static_cast<int>(N.size()) != zN.size())
    throw ValidationError("min_norm_lift: index/vector size mismatch");
  const Eigen::MatrixXd MN = rows_of(basis.M, N);
  // With orthonormal columns ‖Mt‖ = ‖t‖, so the min-norm lift is the
  // least-squares preimage through M_N.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(MN, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTol);
  const Eigen::VectorXd t = svd.solve(zN);
  const double resid = (MN * t - zN).norm();
  if (resid > 1e-8 * (1.0 + zN.norm()))
    throw ValidationError("min_norm_lift: target is not in the projected subspace");
  return basis.M * t;
}

LiftingOperator build_operator(const SubspaceBasis& basis, const std::vector<int>& B,
                               const std::vector<int>& N) {
  if (N.empty()) throw ValidationError("build_operator: empty lifted-from block");
  const int n = static_cast<int>(basis.M.rows());
  if (static_cast<int>(B.size() + N.size()) != n)
    throw ValidationError("build_operator: (B,N) must partition the coordinates");
  const Eigen::MatrixXd MB = rows_of(basis.M, B);
  const Eigen::MatrixXd MN = rows_of(basis.M, N);

  Eigen::JacobiSVD<Eigen::MatrixXd> nsvd(MN, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& nsv = nsvd.singularValues();
  const double smax = nsv.size() ? nsv(0) : 0.0;
  int k = 0;
  for (int i = 0; i < nsv.size(); ++i)
    if (nsv(i) > kRankTol * std::max(1.0, smax)) ++k;
  if (k == 0) throw ValidationError("build_operator: projection of the subspace onto N is {0}");

  LiftingOperator op;
  op.B = B;
  op.N = N;
  op.domain_basis = nsvd.matrixU().leftCols(k);
  // M_N† = V_k Σ_k⁻¹ U_kᵀ; composing the operator with the domain basis U_k
  // leaves T = M_B V_k Σ_k⁻¹, whose SVD carries exactly k singular values.
  const Eigen::MatrixXd pinv_core =
      nsvd.matrixV().leftCols(k) * nsv.head(k).cwiseInverse().asDiagonal();
  op.op_matrix = MB * pinv_core * nsvd.matrixU().leftCols(k).transpose();
  if (B.empty()) {
    op.sigma = Eigen::VectorXd::Zero(k);
    op.left_basis = Eigen::MatrixXd::Zero(0, k);
    op.right_basis = op.domain_basis;
    return op;
  }
  const Eigen::MatrixXd T = MB * pinv_core;
  Eigen::JacobiSVD<Eigen::MatrixXd> tsvd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const int kk = std::min<int>(k, static_cast<int>(B.size()));
  op.sigma = Eigen::VectorXd::Zero(k);
  op.sigma.head(kk) = tsvd.singularValues().head(kk);
  op.left_basis = Eigen::MatrixXd::Zero(static_cast<int>(B.size()), k);
  op.left_basis.leftCols(kk) = tsvd.matrixU().leftCols(kk);
  // Right singular vectors, expressed back in R^{|N|} coordinates.
  if (kk == k) {
    op.right_basis = op.domain_basis * tsvd.matrixV();
  } else {
    // |B| < k: every direction orthogonal to the thin right factor lies in
    // ker(T); a QR completion supplies an orthonormal basis for them.
    Eigen::MatrixXd V(k, k);
    V.leftCols(kk) = tsvd.matrixV().leftCols(kk);
    Eigen::HouseholderQR<Eigen::MatrixXd> cq(tsvd.matrixV().leftCols(kk));
    const Eigen::MatrixXd Qfull = cq.householderQ() * Eigen::MatrixXd::Identity(k, k);
    V.rightCols(k - kk) = Qfull.rightCols(k - kk);
    op.right_basis = op.domain_basis * V;
  }
  return op;
}

int count_sigma(const LiftingOperator& op, double lo, double hi) {
  if (!(lo <= hi)) throw ValidationError("count_sigma: empty interval bounds");
  int c = 0;
  for (int i = 0; i < op.sigma.size(); ++i)
    if (op.sigma(i) >= lo && op.sigma(i) < hi) ++c;
  return c;
}

Eigen::MatrixXd singular_subspace(const LiftingOperator& op, int d) {
  if (d < 0 || d > op.dim())
    throw ValidationError("singular_subspace: dimension out of range [0, " +
                          std::to_string(op.dim()) + "]");
  Eigen::MatrixXd Vd = op.right_basis.rightCols(d);
  if (d > 0 && op.op_matrix.rows() > 0) {
    // min-max sanity: the operator restricted to the span of the d smallest
    // directions cannot beat the (k+1)-st singular value, k = dim − d
    const int k = op.dim() - d;
    const double restricted =
        Eigen::JacobiSVD<Eigen::MatrixXd>(op.op_matrix * Vd).singularValues()(0);
    const double cap = op.sigma(k);  // σ_{k+1} in 1-based counting
    // slack is relative to σ₁: forming op·Vd rounds at that scale
    if (restricted > cap + 1e-7 * (1 + op.sigma(0)))
      throw NumericalError("singular_subspace: restricted norm exceeds the singular bound");
  }
  return Vd;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> project_and_lift(const LiftingOperator& op,
                                                             const Eigen::MatrixXd& Vd,
                                                             const Eigen::VectorXd& zN) {
  if (zN.size() != static_cast<int>(op.N.size()))
    throw ValidationError("project_and_lift: vector length does not match N");
  const Eigen::VectorXd in_dom = op.domain_basis * (op.domain_basis.transpose() * zN);
  if ((in_dom - zN).norm() > 1e-8 * (1.0 + zN.norm()))
    throw ValidationError("project_and_lift: target is not in the projected subspace");
  Eigen::VectorXd proj = Vd * (Vd.transpose() * zN);
  Eigen::VectorXd lift = op.op_matrix * proj;
  return {std::move(proj), std::move(lift)};
}

LiftingOperator rescale_operator(const SubspaceBasis& basis, const Eigen::VectorXd& y,
                                 const std::vector<int>& B, const std::vector<int>& N) {
  if (y.size() != basis.M.rows()) throw ValidationError("rescale_operator: dimension mismatch");
  for (int i = 0; i < y.size(); ++i)
    if (!(y(i) > 0)) throw ValidationError("rescale_operator: scaling must be positive");
  // diag(y)⁻¹W, re-orthonormalized
  Eigen::MatrixXd S = y.cwiseInverse().asDiagonal() * basis.M;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(S);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(S.rows(), S.cols());
  SubspaceBasis rb;
  rb.M = Q;
  rb.scaling = y;
  return build_operator(rb, B, N);
}

}  // namespace circuitlp
