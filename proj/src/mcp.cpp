#include "circuitlp/mcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "circuitlp/exactla.hpp"

namespace circuitlp {

namespace {

bool exact_mode(const LpInstance& inst) { return inst.n <= kExactModeMaxN; }

// {z >= 0 : Az = 0} = {0} is exactly boundedness of the feasible region.
bool region_bounded_exact(const LpInstance& inst) {
  LpProblem<Rational> p;
  p.m = inst.m + 1;
  p.n = inst.n + 1;
  p.A.assign(static_cast<size_t>(p.m) * p.n, Rational(0));
  p.b.assign(p.m, Rational(0));
  p.c.assign(p.n, Rational(0));
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j) p.a(i, j) = Rational(inst.A(i, j));
  for (int j = 0; j < inst.n; ++j) {
    p.a(inst.m, j) = 1;
    p.c[j] = -1;  // max sum z_j
  }
  p.a(inst.m, inst.n) = 1;  // sum z + t = 1
  p.b[inst.m] = 1;
  const auto sol = solve_lp(p);
  return sol.status == LpStatus::Optimal && sol.objective == 0;
}

Rational exact_optimal_value(const LpInstance& inst) {
  const auto sol = solve_lp(to_problem_exact(inst));
  if (sol.status == LpStatus::Infeasible)
    throw ValidationError("mcp: instance is infeasible");
  if (sol.status == LpStatus::Unbounded)
    throw ValidationError("mcp: objective is unbounded below");
  return sol.objective;
}

double double_optimal_value(const LpInstance& inst) {
  if (inst.meta.optimal_value) return *inst.meta.optimal_value;
  const auto sol = solve_lp(to_problem(inst));
  if (sol.status != LpStatus::Optimal)
    throw ValidationError("mcp: instance must be feasible and bounded");
  return sol.objective;
}

// Solve the square rational system M x = rhs; returns false when singular.
bool solve_square(const std::vector<std::vector<Rational>>& M, const std::vector<Rational>& rhs,
                  std::vector<Rational>& x) {
  const int k = static_cast<int>(rhs.size());
  QMatrix aug(k, k + 1);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) aug.at(i, j) = M[i][j];
    aug.at(i, k) = rhs[i];
  }
  const auto piv = rref(aug);
  if (static_cast<int>(piv.size()) != k || (k > 0 && piv.back() >= k)) return false;
  x.assign(k, Rational(0));
  for (int r = 0; r < k; ++r) x[piv[r]] = aug.at(r, k);
  return true;
}

}  // namespace

VertexSet enumerate_vertices(const LpInstance& inst) {
  if (inst.n > 16)
    throw ValidationError("enumerate_vertices: basis scan limited to n <= 16");
  if (inst.meta.bounded.has_value()) {
    if (!*inst.meta.bounded)
      throw ValidationError("enumerate_vertices: feasible region is unbounded");
  } else if (!region_bounded_exact(inst)) {
    throw ValidationError("enumerate_vertices: feasible region is unbounded");
  }

  const int m = inst.m, n = inst.n;
  std::set<std::vector<Rational>> seen;
  VertexSet out;

  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i) idx[i] = i;
  const auto advance = [&]() {
    int i = m - 1;
    while (i >= 0 && idx[i] == n - m + i) --i;
    if (i < 0) return false;
    ++idx[i];
    for (int j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
    return true;
  };

  std::vector<std::vector<Rational>> B(m, std::vector<Rational>(m));
  std::vector<Rational> rhs(m), xb;
  if (m == 0) {
    // ker(A) trivial only when n == 0; with no rows, bounded means x = 0
    out.verts.push_back(std::vector<Rational>(n, Rational(0)));
  } else {
    do {
      for (int i = 0; i < m; ++i) {
        for (int k = 0; k < m; ++k) B[i][k] = Rational(inst.A(i, idx[k]));
        rhs[i] = Rational(inst.b(i));
      }
      if (!solve_square(B, rhs, xb)) continue;
      bool feas = true;
      for (const auto& v : xb)
        if (v < 0) {
          feas = false;
          break;
        }
      if (!feas) continue;
      std::vector<Rational> full(n, Rational(0));
      for (int k = 0; k < m; ++k) full[idx[k]] = xb[k];
      if (seen.insert(full).second) out.verts.push_back(std::move(full));
    } while (advance());
  }

  if (out.verts.empty()) throw ValidationError("enumerate_vertices: instance is infeasible");

  std::vector<Rational> cost(out.verts.size());
  for (size_t k = 0; k < out.verts.size(); ++k) {
    Rational cv = 0;
    for (int j = 0; j < n; ++j) cv += Rational(inst.c(j)) * out.verts[k][j];
    cost[k] = cv;
  }
  out.vstar = *std::min_element(cost.begin(), cost.end());
  out.gap.resize(cost.size());
  for (size_t k = 0; k < cost.size(); ++k) out.gap[k] = cost[k] - out.vstar;
  return out;
}

McpProfile mcp_profile(const LpInstance& inst) {
  const VertexSet vs = enumerate_vertices(inst);
  McpProfile prof;
  prof.vstar = vs.vstar;
  prof.coord.resize(inst.n);

  std::set<Rational> bp;
  for (int i = 0; i < inst.n; ++i) {
    // best coordinate value per distinct gap
    std::map<Rational, Rational> best;
    for (size_t k = 0; k < vs.verts.size(); ++k) {
      auto [it, fresh] = best.emplace(vs.gap[k], vs.verts[k][i]);
      if (!fresh && vs.verts[k][i] > it->second) it->second = vs.verts[k][i];
    }
    // upper concave hull, left to right (gaps ascending)
    std::vector<std::pair<Rational, Rational>> hull;
    for (const auto& [g, v] : best) {
      while (hull.size() >= 2) {
        const auto& o = hull[hull.size() - 2];
        const auto& a = hull[hull.size() - 1];
        const Rational cross =
            (a.first - o.first) * (v - o.second) - (a.second - o.second) * (g - o.first);
        if (cross >= 0)
          hull.pop_back();  // middle point on or below the chord
        else
          break;
      }
      hull.push_back({g, v});
    }
    // keep the nondecreasing prefix; the profile is constant past its peak
    PiecewiseLinear& f = prof.coord[i];
    f.knot.push_back(hull[0].first);  // gap 0: the optimal vertex is in the scan
    f.val.push_back(hull[0].second);
    for (size_t k = 1; k < hull.size(); ++k) {
      if (hull[k].second < hull[k - 1].second) break;
      f.knot.push_back(hull[k].first);
      f.val.push_back(hull[k].second);
    }
    for (size_t k = 1; k < f.knot.size(); ++k) bp.insert(f.knot[k]);
    f.validate_concave_nondecreasing();
  }
  prof.breakpoints.assign(bp.begin(), bp.end());
  return prof;
}

McpSample exact_mcp(const LpInstance& inst, double g) {
  if (!(g >= 0)) throw ValidationError("exact_mcp: gap budget must be nonnegative");
  const int m = inst.m, n = inst.n;
  McpSample out;
  out.g = g;
  out.xm = Eigen::VectorXd::Zero(n);
  out.xm_feasible = Eigen::VectorXd::Zero(n);
  out.witness.resize(n);

  if (exact_mode(inst)) {
    const Rational vstar = exact_optimal_value(inst);
    const Rational budget = vstar + Rational(g);
    LpProblem<Rational> p;
    p.m = m + 1;
    p.n = n + 1;
    p.A.assign(static_cast<size_t>(p.m) * p.n, Rational(0));
    p.b.assign(p.m, Rational(0));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) p.a(i, j) = Rational(inst.A(i, j));
      p.b[i] = Rational(inst.b(i));
    }
    for (int j = 0; j < n; ++j) p.a(m, j) = Rational(inst.c(j));
    p.a(m, n) = 1;  // <c,x> + t = v* + g
    p.b[m] = budget;
    for (int i = 0; i < n; ++i) {
      p.c.assign(p.n, Rational(0));
      p.c[i] = -1;
      const auto sol = solve_lp(p);
      if (sol.status != LpStatus::Optimal)
        throw NumericalError("exact_mcp: per-coordinate solve not optimal on a bounded region");
      out.xm_exact.push_back(sol.x[i]);
      out.xm(i) = to_double(sol.x[i]);
      Eigen::VectorXd w(n);
      for (int j = 0; j < n; ++j) w(j) = to_double(sol.x[j]);
      out.witness[i] = w;
      out.xm_feasible += w / n;
    }
    return out;
  }

  const double vstar = double_optimal_value(inst);
  LpProblem<double> p;
  p.m = m + 1;
  p.n = n + 1;
  p.A.assign(static_cast<size_t>(p.m) * p.n, 0.0);
  p.b.assign(p.m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) p.a(i, j) = inst.A(i, j);
    p.b[i] = inst.b(i);
  }
  for (int j = 0; j < n; ++j) p.a(m, j) = inst.c(j);
  p.a(m, n) = 1;
  p.b[m] = vstar + g;
  for (int i = 0; i < n; ++i) {
    p.c.assign(p.n, 0.0);
    p.c[i] = -1;
    const auto sol = solve_lp(p);
    if (sol.status != LpStatus::Optimal)
      throw NumericalError("exact_mcp: per-coordinate solve not optimal on a bounded region");
    out.xm(i) = sol.x[i];
    Eigen::VectorXd w(n);
    for (int j = 0; j < n; ++j) w(j) = sol.x[j];
    out.witness[i] = w;
    out.xm_feasible += w / n;
  }
  return out;
}

DualMcpSample exact_dual_mcp(const LpInstance& inst, double g) {
  if (!(g >= 0)) throw ValidationError("exact_dual_mcp: gap budget must be nonnegative");
  const int m = inst.m, n = inst.n;
  DualMcpSample out;
  out.g = g;
  out.sm = Eigen::VectorXd::Zero(n);

  // variables: y+ (m), y- (m), s (n), t (1)
  // rows:      A^T y+ - A^T y- + s = c   (n rows)
  //            <b,y+> - <b,y-> - t = v* - g
  const auto build = [&](auto scalar) {
    using T = decltype(scalar);
    LpProblem<T> p;
    p.m = n + 1;
    p.n = 2 * m + n + 1;
    p.A.assign(static_cast<size_t>(p.m) * p.n, T(0));
    p.b.assign(p.m, T(0));
    p.c.assign(p.n, T(0));
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < m; ++i) {
        p.a(j, i) = T(inst.A(i, j));
        p.a(j, m + i) = T(-inst.A(i, j));
      }
      p.a(j, 2 * m + j) = T(1);
      p.b[j] = T(inst.c(j));
    }
    for (int i = 0; i < m; ++i) {
      p.a(n, i) = T(inst.b(i));
      p.a(n, m + i) = T(-inst.b(i));
    }
    p.a(n, 2 * m + n) = T(-1);
    return p;
  };

  bool all_finite = true;
  if (exact_mode(inst)) {
    const Rational vstar = exact_optimal_value(inst);
    auto p = build(Rational(0));
    p.b[n] = vstar - Rational(g);
    std::vector<Rational> ex(n, Rational(0));
    for (int i = 0; i < n; ++i) {
      p.c.assign(p.n, Rational(0));
      p.c[2 * m + i] = -1;
      const auto sol = solve_lp(p);
      if (sol.status == LpStatus::Infeasible)
        throw NumericalError("exact_dual_mcp: dual region empty (instance not bounded/feasible?)");
      if (sol.status == LpStatus::Unbounded) {
        out.sm(i) = std::numeric_limits<double>::infinity();
        all_finite = false;
      } else {
        ex[i] = sol.x[2 * m + i];
        out.sm(i) = to_double(ex[i]);
      }
    }
    if (all_finite) out.sm_exact = std::move(ex);
    return out;
  }

  const double vstar = double_optimal_value(inst);
  auto p = build(0.0);
  p.b[n] = vstar - g;
  for (int i = 0; i < n; ++i) {
    p.c.assign(p.n, 0.0);
    p.c[2 * m + i] = -1;
    const auto sol = solve_lp(p);
    if (sol.status == LpStatus::Infeasible)
      throw NumericalError("exact_dual_mcp: dual region empty (instance not bounded/feasible?)");
    out.sm(i) = sol.status == LpStatus::Unbounded ? std::numeric_limits<double>::infinity()
                                                  : sol.x[2 * m + i];
  }
  return out;
}

GapEstimate approx_gap(const LpInstance& inst, const Eigen::VectorXd& x) {
  const auto rep = check_feasible(inst, x);
  if (!rep.feasible) throw ValidationError("approx_gap: point is not feasible");
  Eigen::VectorXd winv(inst.n);
  for (int i = 0; i < inst.n; ++i)
    winv(i) = x(i) > 0 ? 1.0 / x(i) : std::numeric_limits<double>::infinity();
  GapEstimate ge;
  ge.rc = ratio_circuit(inst, inst.c, Weights<double>::zeros(inst.n), make_weights(winv));
  if (ge.rc.status == LpStatus::Unbounded)
    throw ValidationError("approx_gap: objective is unbounded below");
  ge.lambda = ge.rc.lambda;
  ge.s = ge.rc.s;
  ge.y = ge.rc.y;
  return ge;
}

ApproxMcp approx_mcp(const LpInstance& inst, const Eigen::VectorXd& x) {
  return approx_mcp(inst, x, approx_gap(inst, x));
}

ApproxMcp approx_mcp(const LpInstance& inst, const Eigen::VectorXd& x, const GapEstimate& ge) {
  const int n = inst.n;
  if (!(ge.lambda > 0))
    throw ValidationError("approx_mcp: gap estimate is zero (point is optimal)");

  // v = s/λ, w = 2/x − s/λ.  The oracle's dual band gives 0 <= s <= λ/x, so
  // both sides are nonnegative; drift beyond a small tolerance means the
  // certificate and the point do not belong together.
  Weights<double> v = Weights<double>::zeros(n);
  Eigen::VectorXd wv(n);
  for (int i = 0; i < n; ++i) {
    const double si = ge.s(i) / ge.lambda;
    if (si < -1e-7 * (1.0 + std::abs(ge.s(i))))
      throw NumericalError("approx_mcp: negative dual slack in the certificate");
    v.value[i] = std::max(0.0, si);
    if (x(i) > 0) {
      const double wi = 2.0 / x(i) - si;
      if (wi < (1.0 - 1e-6) / x(i))
        throw NumericalError("approx_mcp: minus-weight below 1/x (certificate mismatch)");
      wv(i) = wi;
    } else {
      wv(i) = std::numeric_limits<double>::infinity();
    }
  }
  const Weights<double> w = make_weights(wv);

  ApproxMcp out;
  out.lambda = ge.lambda;
  out.xhat = Eigen::VectorXd::Zero(n);
  out.xbar = Eigen::VectorXd::Zero(n);
  out.point.resize(n);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    u(i) = -1;
    const auto rc = ratio_circuit(inst, u, v, w);
    u(i) = 0;
    if (rc.status == LpStatus::Unbounded)
      throw ValidationError("approx_mcp: feasible region is unbounded");
    Eigen::VectorXd pt = x + rc.z;
    for (int j = 0; j < n; ++j)
      if (pt(j) < 0) {
        if (pt(j) < -kFeasEps * (1.0 + x.cwiseAbs().maxCoeff()))
          throw NumericalError("approx_mcp: augmented point left the nonnegative orthant");
        pt(j) = 0;
      }
    out.xhat(i) = x(i) + rc.z(i);
    out.point[i] = pt;
    out.xbar += pt / n;
  }
  return out;
}

}  // namespace circuitlp
