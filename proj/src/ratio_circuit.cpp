#include "circuitlp/ratio_circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "circuitlp/errors.hpp"

namespace circuitlp {

RatioCircuitResult ratio_circuit(const LpInstance& inst, const Eigen::VectorXd& u,
                                 const Weights<double>& v, const Weights<double>& w) {
  const int m = inst.m, n = inst.n;
  if (u.size() != n || v.size() != n || w.size() != n)
    throw ValidationError("ratio_circuit: dimension mismatch");

  // When the constraint matrix mixes wildly different magnitudes, double
  // pivoting overflows or drowns small entries.  Substituting z = D z~ with a
  // positive diagonal D (plus free row scaling) leaves the problem unchanged
  // -- objective, lambda, and dual certificates map back exactly -- while
  // restoring O(1) tableau entries.  Power-of-two factors keep the transform
  // exact, and the gate leaves moderately scaled instances bit-identical.
  double amax = 0.0, amin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = std::abs(inst.A(i, j));
      if (a > 0) {
        amax = std::max(amax, a);
        amin = std::min(amin, a);
      }
    }
  const bool equilibrate = amax > 0 && amax > 1e18 * amin;
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd rsc = Eigen::VectorXd::Ones(std::max(m, 1));
  Eigen::MatrixXd As = inst.A;
  if (equilibrate) {
    for (int j = 0; j < n; ++j) {
      const double cmax = As.col(j).cwiseAbs().maxCoeff();
      if (cmax > 0) d(j) = std::exp2(-std::round(std::log2(cmax)));
      As.col(j) *= d(j);
    }
    for (int i = 0; i < m; ++i) {
      const double rmax = As.row(i).cwiseAbs().maxCoeff();
      if (rmax > 0) rsc(i) = std::exp2(-std::round(std::log2(rmax)));
      As.row(i) *= rsc(i);
    }
  }

  std::vector<double> A(static_cast<size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) A[static_cast<size_t>(i) * n + j] = As(i, j);
  std::vector<double> uv(n);
  Weights<double> vs = v, ws = w;
  for (int j = 0; j < n; ++j) {
    uv[j] = u(j) * d(j);
    vs.value[j] *= d(j);
    ws.value[j] *= d(j);
  }

  auto split = solve_with_ineq_row<double>(m, n, A, uv, vs, ws);
  RatioCircuitResult r;
  r.status = split.status;
  r.pivots = split.pivots;
  if (split.status == LpStatus::Unbounded) {
    r.z = Eigen::Map<Eigen::VectorXd>(split.ray.data(), n).cwiseProduct(d);
    r.y = Eigen::VectorXd::Zero(m);
    r.s = u;
    return r;
  }
  Eigen::VectorXd zt = Eigen::Map<Eigen::VectorXd>(split.z.data(), n);
  // pivoting-noise cleanup so the elementarity predicate sees crisp supports;
  // done in the equilibrated frame where the noise floor is uniform
  const double zmax = zt.cwiseAbs().maxCoeff();
  for (int j = 0; j < n; ++j)
    if (std::abs(zt(j)) <= 1e-11 * zmax) zt(j) = 0.0;
  r.z = zt.cwiseProduct(d);
  r.y = Eigen::Map<Eigen::VectorXd>(split.y.data(), m);
  for (int i = 0; i < m; ++i) r.y(i) *= rsc(i);
  r.s = u - inst.A.transpose() * r.y;
  r.objective = split.objective;
  r.lambda = std::max(0.0, -split.objective);
  r.weight_row_tight = split.weight_row_tight;
  return r;
}

std::pair<Eigen::VectorXd, double> aug_max(const LpInstance& inst, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& z) {
  const int n = inst.n;
  if (x.size() != n || z.size() != n) throw ValidationError("aug_max: dimension mismatch");
  int argmin = -1;
  double alpha = 0;
  for (int i = 0; i < n; ++i) {
    if (z(i) >= 0) continue;
    const double ratio = x(i) / (-z(i));
    if (argmin < 0 || ratio < alpha) {
      alpha = ratio;
      argmin = i;
    }
  }
  if (argmin < 0)
    throw NumericalError("aug_max: direction has no negative coordinate (unbounded step)");
  Eigen::VectorXd xp = x + alpha * z;
  for (int i = 0; i < n; ++i)
    if (xp(i) < 0) xp(i) = 0.0;
  xp(argmin) = 0.0;
  return {std::move(xp), alpha};
}

WallacherStep wallacher_step(const LpInstance& inst, const Eigen::VectorXd& x,
                             double eps_term) {
  const int n = inst.n;
  if (x.size() != n) throw ValidationError("wallacher_step: dimension mismatch");
  Weights<double> w;
  w.value.assign(n, 0.0);
  w.infinite.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (x(i) > 0)
      w.value[i] = 1.0 / x(i);
    else
      w.infinite[i] = 1;
  }
  WallacherStep st;
  st.rc = ratio_circuit(inst, inst.c, Weights<double>::zeros(n), w);
  if (st.rc.status == LpStatus::Unbounded) {
    st.x_next = x;
    return st;
  }
  const double cx = inst.c.dot(x);
  if (st.rc.lambda <= eps_term * (1.0 + std::abs(cx))) {
    st.optimal = true;
    st.x_next = x;
    st.rc.z.setZero();
    return st;
  }
  auto [xp, alpha] = aug_max(inst, x, st.rc.z);
  st.x_next = std::move(xp);
  st.alpha = alpha;
  return st;
}

}  // namespace circuitlp
