#pragma once

// Dense two-phase primal simplex, generic over the scalar type.
//
// The same pivoting code runs in double precision (with power-of-two
// equilibration and an LU-based refinement pass at the end) and in exact
// rational arithmetic (no tolerances at all).  Problems here are desk scale —
// a few hundred variables — so a full tableau is simpler and more predictable
// than a revised method.
//
// Pivot rule: Dantzig (most negative reduced cost, lowest index on ties),
// switching permanently to Bland's rule after 5*(n+m) consecutive degenerate
// pivots.  Every scan runs in ascending index order, so results are
// deterministic across platforms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "circuitlp/errors.hpp"
#include "circuitlp/rational.hpp"

namespace circuitlp {

enum class LpStatus { Optimal, Unbounded, Infeasible };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::Infeasible: return "infeasible";
  }
  return "?";
}

// min <c,x>  s.t.  A x = b, x >= 0.   A is row-major, m*n, full row rank.
template <class T>
struct LpProblem {
  int m = 0, n = 0;
  std::vector<T> A;
  std::vector<T> b;
  std::vector<T> c;

  T& a(int i, int j) { return A[static_cast<size_t>(i) * n + j]; }
  const T& a(int i, int j) const { return A[static_cast<size_t>(i) * n + j]; }
};

template <class T>
struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  std::vector<T> x;              // basic primal point
  std::vector<T> y;              // row duals
  std::vector<T> reduced_costs;  // c - A^T y
  std::vector<int> basis;        // basic column index per row
  T objective{};                 // meaningful when Optimal
  std::vector<T> ray;            // improving ray when Unbounded
  long pivots = 0;
  bool bland_engaged = false;
  double condition_estimate = 0;  // double mode; |U_ii| spread of final basis LU
};

template <class T>
struct SolverEps {  // exact arithmetic: everything compares against zero
  static constexpr bool exact = true;
  static T cost() { return T(0); }
  static T pivot() { return T(0); }
  static T feas() { return T(0); }
};

template <>
struct SolverEps<double> {
  static constexpr bool exact = false;
  static double cost() { return 1e-9; }
  static double pivot() { return 1e-9; }
  static double feas() { return 1e-9; }
};

template <class T>
class SimplexSolver {
 public:
  explicit SimplexSolver(LpProblem<T> p) : p_(std::move(p)) {
    if (p_.m < 0 || p_.n <= 0 || static_cast<size_t>(p_.m) * p_.n != p_.A.size() ||
        static_cast<int>(p_.b.size()) != p_.m || static_cast<int>(p_.c.size()) != p_.n)
      throw ValidationError("simplex: inconsistent problem dimensions");
  }

  LpSolution<T> solve() {
    equilibrate();
    build_tableau();
    phase1();
    if (out_.status != LpStatus::Infeasible) {
      phase2();
      extract();
      if constexpr (std::is_same_v<T, double>) refine();
    }
    unscale();
    return out_;
  }

 private:
  LpProblem<T> p_;  // held in the scaled frame during the solve
  LpSolution<T> out_;
  int m_ = 0, n_ = 0, ncols_ = 0;  // ncols_ = n + m artificials
  std::vector<T> tab_;             // m x (ncols_+1), last column is the rhs
  std::vector<T> d_;               // reduced-cost row for the current phase
  std::vector<int> basis_;
  bool bland_ = false;
  long degen_run_ = 0, degen_switch_ = 0, max_pivots_ = 0;
  T feas_scale_{1};
  std::vector<int> flip_;            // -1 where the row was negated to get b >= 0
  std::vector<T> row_mag_, col_scale_;  // power-of-two factors (double mode)
  T c_scale_{1}, b_scale_{1};

  T& t(int i, int j) { return tab_[static_cast<size_t>(i) * (ncols_ + 1) + j]; }
  T& rhs(int i) { return t(i, ncols_); }

  void equilibrate() {
    row_mag_.assign(p_.m, T(1));
    col_scale_.assign(p_.n, T(1));
    if constexpr (std::is_same_v<T, double>) {
      auto pow2inv = [](double mx) {
        return (mx > 0 && std::isfinite(mx)) ? std::ldexp(1.0, -std::ilogb(mx)) : 1.0;
      };
      for (int i = 0; i < p_.m; ++i) {
        double mx = 0;
        for (int j = 0; j < p_.n; ++j) mx = std::max(mx, std::abs(p_.a(i, j)));
        row_mag_[i] = pow2inv(mx);
        for (int j = 0; j < p_.n; ++j) p_.a(i, j) *= row_mag_[i];
        p_.b[i] *= row_mag_[i];
      }
      for (int j = 0; j < p_.n; ++j) {
        double mx = 0;
        for (int i = 0; i < p_.m; ++i) mx = std::max(mx, std::abs(p_.a(i, j)));
        col_scale_[j] = pow2inv(mx);
        for (int i = 0; i < p_.m; ++i) p_.a(i, j) *= col_scale_[j];
        p_.c[j] *= col_scale_[j];
      }
      double cmx = 0, bmx = 0;
      for (double v : p_.c) cmx = std::max(cmx, std::abs(v));
      for (double v : p_.b) bmx = std::max(bmx, std::abs(v));
      c_scale_ = pow2inv(cmx);
      b_scale_ = pow2inv(bmx);
      for (auto& v : p_.c) v *= c_scale_;
      for (auto& v : p_.b) v *= b_scale_;
    }
  }

  void build_tableau() {
    m_ = p_.m;
    n_ = p_.n;
    ncols_ = n_ + m_;
    degen_switch_ = 5L * (n_ + m_);
    max_pivots_ = 20000L + 400L * (n_ + m_);
    tab_.assign(static_cast<size_t>(m_) * (ncols_ + 1), T(0));
    basis_.resize(m_);
    flip_.assign(m_, 1);
    feas_scale_ = T(1);
    for (int i = 0; i < m_; ++i) {
      if (p_.b[i] < T(0)) flip_[i] = -1;
      for (int j = 0; j < n_; ++j) t(i, j) = flip_[i] < 0 ? T(-p_.a(i, j)) : p_.a(i, j);
      rhs(i) = flip_[i] < 0 ? T(-p_.b[i]) : p_.b[i];
      feas_scale_ = std::max<T>(feas_scale_, T(1) + rhs(i));
      t(i, n_ + i) = T(1);
      basis_[i] = n_ + i;
    }
  }

  void pivot(int r, int e) {
    const T piv = t(r, e);
    for (int j = 0; j <= ncols_; ++j) t(r, j) = t(r, j) / piv;
    t(r, e) = T(1);
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const T f = t(i, e);
      if (f == T(0)) continue;
      for (int j = 0; j <= ncols_; ++j) t(i, j) -= f * t(r, j);
      t(i, e) = T(0);
      if constexpr (!SolverEps<T>::exact) {
        if (rhs(i) < T(0) && rhs(i) > -SolverEps<T>::feas()) rhs(i) = T(0);
      }
    }
    const T fd = d_[e];
    if (fd != T(0)) {
      for (int j = 0; j < ncols_; ++j) d_[j] -= fd * t(r, j);
      d_[e] = T(0);
    }
    basis_[r] = e;
    ++out_.pivots;
    if (out_.pivots > max_pivots_)
      throw NumericalError("simplex: pivot limit exceeded (" + std::to_string(max_pivots_) + ")");
  }

  int pick_entering(int limit) const {
    const T eps = SolverEps<T>::cost();
    if (bland_) {
      for (int j = 0; j < limit; ++j)
        if (d_[j] < -eps) return j;
      return -1;
    }
    int best = -1;
    T bestd{};
    for (int j = 0; j < limit; ++j)
      if (d_[j] < -eps && (best < 0 || d_[j] < bestd)) {
        best = j;
        bestd = d_[j];
      }
    return best;
  }

  int pick_leaving(int e) {
    const T peps = SolverEps<T>::pivot();
    int best = -1;
    T bestr{};
    for (int i = 0; i < m_; ++i) {
      if (!(t(i, e) > peps)) continue;
      const T r = rhs(i) / t(i, e);
      if (best < 0 || r < bestr) {
        best = i;
        bestr = r;
      }
    }
    if (best < 0) return -1;
    if (bland_) {
      // smallest basic index among the minimisers
      for (int i = 0; i < m_; ++i) {
        if (!(t(i, e) > peps)) continue;
        if (rhs(i) / t(i, e) == bestr && basis_[i] < basis_[best]) best = i;
      }
    }
    degen_run_ = (bestr <= SolverEps<T>::feas()) ? degen_run_ + 1 : 0;
    if (!bland_ && degen_run_ > degen_switch_) {
      bland_ = true;
      out_.bland_engaged = true;
    }
    return best;
  }

  void run_pivots(int limit, bool phase_one) {
    for (;;) {
      const int e = pick_entering(limit);
      if (e < 0) return;
      const int r = pick_leaving(e);
      if (r < 0) {
        if (phase_one) throw NumericalError("simplex: phase 1 unbounded");
        make_ray(e);
        out_.status = LpStatus::Unbounded;
        return;
      }
      pivot(r, e);
    }
  }

  void phase1() {
    d_.assign(ncols_, T(0));
    for (int j = 0; j < n_; ++j) {
      T s{};
      for (int i = 0; i < m_; ++i) s += t(i, j);
      d_[j] = -s;
    }
    run_pivots(n_, true);
    T art{};
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= n_) art += rhs(i);
    if (art > SolverEps<T>::feas() * feas_scale_) {
      out_.status = LpStatus::Infeasible;
      return;
    }
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      int e = -1;
      for (int j = 0; j < n_; ++j)
        if (abs_val(t(i, j)) > SolverEps<T>::pivot()) {
          e = j;
          break;
        }
      if (e < 0)
        throw ValidationError("simplex: constraint rows are linearly dependent (repair rank first)");
      pivot(i, e);
    }
  }

  void reset_phase2_costs() {
    d_.assign(ncols_, T(0));
    for (int j = 0; j < ncols_; ++j) {
      T s = (j < n_) ? p_.c[j] : T(0);
      for (int i = 0; i < m_; ++i)
        if (basis_[i] < n_) s -= p_.c[basis_[i]] * t(i, j);
      d_[j] = s;
    }
  }

  void phase2() {
    reset_phase2_costs();
    run_pivots(n_, false);
  }

  void make_ray(int e) {
    extract();
    out_.ray.assign(n_, T(0));
    out_.ray[e] = T(1);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) out_.ray[basis_[i]] = -t(i, e);
  }

  void extract() {
    out_.x.assign(n_, T(0));
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) out_.x[basis_[i]] = rhs(i);
    if constexpr (!SolverEps<T>::exact) {
      for (auto& v : out_.x)
        if (v < T(0) && v >= -SolverEps<T>::feas() * feas_scale_) v = T(0);
    }
    out_.y.assign(m_, T(0));
    for (int i = 0; i < m_; ++i) out_.y[i] = -d_[n_ + i];
    out_.reduced_costs.assign(n_, T(0));
    for (int j = 0; j < n_; ++j) out_.reduced_costs[j] = d_[j];
    out_.basis = basis_;
    T obj{};
    for (int j = 0; j < n_; ++j) obj += p_.c[j] * out_.x[j];
    out_.objective = obj;
  }

  // Recompute x_B, y and reduced costs from a fresh LU of the basis matrix.
  // If the tableau drifted enough that the recomputed reduced costs are not
  // optimal, rebuild the tableau from the basis and keep pivoting.
  void refine() {
    if (out_.status != LpStatus::Optimal || m_ == 0) return;
    if constexpr (std::is_same_v<T, double>) {
      double cscale = 1;
      for (int j = 0; j < n_; ++j) cscale = std::max(cscale, std::abs(p_.c[j]));
      for (int cycle = 0; cycle < 6; ++cycle) {
        Eigen::MatrixXd B(m_, m_);
        for (int k = 0; k < m_; ++k) {
          const int col = basis_[k];
          for (int i = 0; i < m_; ++i)
            B(i, k) = col < n_ ? flip_[i] * p_.a(i, col) : (col - n_ == i ? 1.0 : 0.0);
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        const auto& U = lu.matrixLU();
        double umax = 0, umin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
          const double u = std::abs(U(i, i));
          umax = std::max(umax, u);
          umin = std::min(umin, u);
        }
        out_.condition_estimate =
            umin > 0 ? umax / umin : std::numeric_limits<double>::infinity();
        if (!(out_.condition_estimate < 1e12))
          throw NumericalError("simplex: basis condition estimate exceeds 1e12");
        Eigen::VectorXd bb(m_), cb(m_);
        for (int i = 0; i < m_; ++i) bb(i) = flip_[i] * p_.b[i];
        for (int k = 0; k < m_; ++k) cb(k) = basis_[k] < n_ ? p_.c[basis_[k]] : 0.0;
        const Eigen::VectorXd xb = lu.solve(bb);
        const Eigen::VectorXd yv = lu.transpose().solve(cb);
        std::vector<double> rc(n_);
        double worst = 0;
        for (int j = 0; j < n_; ++j) {
          double s = p_.c[j];
          for (int i = 0; i < m_; ++i) s -= flip_[i] * p_.a(i, j) * yv(i);
          rc[j] = s;
          worst = std::min(worst, s);
        }
        if (worst >= -SolverEps<double>::cost() * cscale || cycle == 5) {
          if (worst < -SolverEps<double>::cost() * cscale)
            throw NumericalError("simplex: failed to reach optimality after rebuilds");
          out_.x.assign(n_, 0.0);
          for (int k = 0; k < m_; ++k) {
            if (basis_[k] >= n_) continue;
            double v = xb(k);
            if (v < 0 && v >= -SolverEps<double>::feas() * static_cast<double>(feas_scale_))
              v = 0;
            out_.x[basis_[k]] = v;
          }
          for (int i = 0; i < m_; ++i) out_.y[i] = yv(i);  // tableau frame
          out_.reduced_costs = rc;
          out_.basis = basis_;
          double obj = 0;
          for (int j = 0; j < n_; ++j) obj += p_.c[j] * out_.x[j];
          out_.objective = obj;
          return;
        }
        // rebuild tableau at the current basis, then continue pivoting
        Eigen::MatrixXd cols(m_, ncols_ + 1);
        for (int j = 0; j < n_; ++j)
          for (int i = 0; i < m_; ++i) cols(i, j) = flip_[i] * p_.a(i, j);
        cols.block(0, n_, m_, m_).setIdentity();
        cols.col(ncols_) = bb;
        const Eigen::MatrixXd sol = lu.solve(cols);
        for (int i = 0; i < m_; ++i)
          for (int j = 0; j <= ncols_; ++j) t(i, j) = sol(i, j);
        reset_phase2_costs();
        run_pivots(n_, false);
        extract();
        if (out_.status != LpStatus::Optimal) return;
      }
    }
  }

  void unscale() {
    if constexpr (std::is_same_v<T, double>) {
      const double cs = c_scale_, bs = b_scale_;
      for (int j = 0; j < static_cast<int>(out_.x.size()); ++j) out_.x[j] *= col_scale_[j] / bs;
      for (int j = 0; j < static_cast<int>(out_.ray.size()); ++j) out_.ray[j] *= col_scale_[j];
      for (int i = 0; i < static_cast<int>(out_.y.size()); ++i)
        out_.y[i] *= flip_[i] * row_mag_[i] / cs;
      for (int j = 0; j < static_cast<int>(out_.reduced_costs.size()); ++j)
        out_.reduced_costs[j] /= col_scale_[j] * cs;
      out_.objective /= cs * bs;
    } else {
      for (int i = 0; i < static_cast<int>(out_.y.size()); ++i)
        if (flip_[i] < 0) out_.y[i] = -out_.y[i];
    }
  }
};

template <class T>
LpSolution<T> solve_lp(const LpProblem<T>& p) {
  SimplexSolver<T> s(p);
  return s.solve();
}

// ---------------------------------------------------------------------------
// Weighted one-inequality-row solve used by the circuit oracle.

// Nonnegative weight vector in which individual entries may be infinite.
// An infinite weight removes the corresponding split column entirely (the
// convention inf * 0 = 0: the variable is simply forced to zero).
template <class T>
struct Weights {
  std::vector<T> value;
  std::vector<uint8_t> infinite;

  static Weights zeros(int n) { return {std::vector<T>(n, T(0)), std::vector<uint8_t>(n, 0)}; }
  int size() const { return static_cast<int>(value.size()); }
  bool is_inf(int i) const { return infinite[i] != 0; }
};

inline Weights<double> make_weights(const Eigen::VectorXd& v) {
  Weights<double> w;
  w.value.resize(v.size());
  w.infinite.assign(v.size(), 0);
  for (int i = 0; i < v.size(); ++i) {
    if (std::isinf(v(i))) {
      w.infinite[i] = 1;
      w.value[i] = 0;
    } else {
      w.value[i] = v(i);
    }
  }
  return w;
}

template <class T>
struct SplitLpResult {
  LpStatus status = LpStatus::Optimal;
  std::vector<T> z;    // z+ - z-
  std::vector<T> y;    // duals of the A-rows
  T eta{};             // dual of the weight row (<= 0 at an optimum)
  T objective{};
  std::vector<T> ray;  // z-space improving ray when Unbounded
  long pivots = 0;
  bool weight_row_tight = false;
};

// min <u, z+> - <u, z->  s.t.  A z+ - A z- = 0,
//                              <v, z+> + <w, z-> + slack = 1,  z+-, slack >= 0.
template <class T>
SplitLpResult<T> solve_with_ineq_row(int m, int n, const std::vector<T>& A,
                                     const std::vector<T>& u, const Weights<T>& v,
                                     const Weights<T>& w) {
  if (static_cast<int>(u.size()) != n || v.size() != n || w.size() != n ||
      static_cast<size_t>(m) * n != A.size())
    throw ValidationError("solve_with_ineq_row: inconsistent dimensions");
  auto check_weight = [&](const Weights<T>& ww, const char* side) {
    T mx{1};
    for (int i = 0; i < n; ++i)
      if (!ww.is_inf(i)) mx = std::max<T>(mx, abs_val(ww.value[i]));
    for (int i = 0; i < n; ++i)
      if (!ww.is_inf(i) && ww.value[i] < T(0)) {
        if constexpr (SolverEps<T>::exact)
          throw ValidationError(std::string("solve_with_ineq_row: negative ") + side + " weight");
        else if (ww.value[i] < -SolverEps<T>::feas() * mx)
          throw ValidationError(std::string("solve_with_ineq_row: negative ") + side + " weight");
      }
  };
  check_weight(v, "plus");
  check_weight(w, "minus");

  std::vector<int> plus_col(n, -1), minus_col(n, -1);
  int ncol = 0;
  for (int j = 0; j < n; ++j)
    if (!v.is_inf(j)) plus_col[j] = ncol++;
  for (int j = 0; j < n; ++j)
    if (!w.is_inf(j)) minus_col[j] = ncol++;
  const int slack = ncol++;

  LpProblem<T> p;
  p.m = m + 1;
  p.n = ncol;
  p.A.assign(static_cast<size_t>(p.m) * p.n, T(0));
  p.b.assign(p.m, T(0));
  p.c.assign(p.n, T(0));
  p.b[m] = T(1);
  for (int j = 0; j < n; ++j) {
    if (plus_col[j] >= 0) {
      for (int i = 0; i < m; ++i) p.a(i, plus_col[j]) = A[static_cast<size_t>(i) * n + j];
      p.a(m, plus_col[j]) = std::max<T>(v.value[j], T(0));
      p.c[plus_col[j]] = u[j];
    }
    if (minus_col[j] >= 0) {
      for (int i = 0; i < m; ++i) p.a(i, minus_col[j]) = -A[static_cast<size_t>(i) * n + j];
      p.a(m, minus_col[j]) = std::max<T>(w.value[j], T(0));
      p.c[minus_col[j]] = -u[j];
    }
  }
  p.a(m, slack) = T(1);

  LpSolution<T> sol = solve_lp(p);
  SplitLpResult<T> r;
  r.status = sol.status;
  r.pivots = sol.pivots;
  if (sol.status == LpStatus::Infeasible)
    throw NumericalError("solve_with_ineq_row: infeasible split problem (z = 0 is feasible)");
  r.z.assign(n, T(0));
  for (int j = 0; j < n; ++j) {
    T zj{};
    if (plus_col[j] >= 0) zj += sol.x[plus_col[j]];
    if (minus_col[j] >= 0) zj -= sol.x[minus_col[j]];
    r.z[j] = zj;
  }
  r.y.assign(sol.y.begin(), sol.y.begin() + m);
  r.eta = sol.y.empty() ? T(0) : sol.y[m];
  r.objective = sol.objective;
  r.weight_row_tight = !(sol.x[slack] > SolverEps<T>::feas());
  if (sol.status == LpStatus::Unbounded) {
    r.ray.assign(n, T(0));
    for (int j = 0; j < n; ++j) {
      T zj{};
      if (plus_col[j] >= 0) zj += sol.ray[plus_col[j]];
      if (minus_col[j] >= 0) zj -= sol.ray[minus_col[j]];
      r.ray[j] = zj;
    }
  }
  return r;
}

}  // namespace circuitlp
