#include "circuitlp/generators.hpp"

#include <cmath>
#include <random>

namespace circuitlp {

namespace {

// mt19937_64 output is pinned by the standard; mapping to [0,1) by hand keeps
// the streams bit-identical across library implementations.
struct Rng {
  std::mt19937_64 g;
  explicit Rng(std::uint64_t seed, std::uint64_t stream) : g(seed * 0x9e3779b97f4a7c15ULL + stream) {}
  double u01() { return static_cast<double>(g() >> 11) * 0x1.0p-53; }
  int uint_below(int k) { return static_cast<int>(g() % static_cast<std::uint64_t>(k)); }
};

std::string family_name(const std::string& kind, int m, int n, std::uint64_t seed) {
  return kind + "-" + std::to_string(m) + "x" + std::to_string(n) + "-s" + std::to_string(seed);
}

LpInstance gen_simplex(int m, int n, std::uint64_t seed) {
  if (n <= m) throw ValidationError("simplex generator: need n > m");
  Rng rng(seed, 1);
  LpInstance inst;
  inst.m = m;
  inst.n = n;
  inst.A = Eigen::MatrixXd::Zero(m, n);
  inst.b = Eigen::VectorXd::Ones(m);
  inst.c = Eigen::VectorXd::Zero(n);
  // split the columns into m contiguous groups, each forming a unit simplex
  int base = n / m, extra = n % m, col = 0;
  std::vector<std::pair<int, int>> span(m);
  for (int i = 0; i < m; ++i) {
    int len = base + (i < extra ? 1 : 0);
    span[i] = {col, col + len};
    for (int j = col; j < col + len; ++j) inst.A(i, j) = 1.0;
    col += len;
  }
  for (int j = 0; j < n; ++j) inst.c(j) = rng.u01();
  Eigen::VectorXd x0(n);
  for (int i = 0; i < m; ++i) {
    const int len = span[i].second - span[i].first;
    for (int j = span[i].first; j < span[i].second; ++j) x0(j) = 1.0 / len;
  }
  inst.x0 = x0;
  inst.meta = {family_name("simplex", m, n, seed), "simplex", seed, {}, {}, {}, {}};
  return inst;
}

std::vector<std::pair<int, int>> dag_arcs(int m, int n, std::uint64_t seed) {
  // nodes 0..m over m+1 nodes; a path covers every node, the rest are random
  // forward arcs, so the graph is acyclic and the incidence has rank m after
  // dropping the last node's row.
  if (n < m) throw ValidationError("flow generator: need n >= m arcs");
  Rng rng(seed, 2);
  std::vector<std::pair<int, int>> arcs;
  for (int v = 0; v < m; ++v) arcs.emplace_back(v, v + 1);
  for (int k = m; k < n; ++k) {
    int u = rng.uint_below(m);
    int v = u + 1 + rng.uint_below(m + 1 - u - 1 > 0 ? m - u : 1);
    if (v > m) v = m;
    arcs.emplace_back(u, v);
  }
  return arcs;
}

LpInstance gen_mincost_flow(int m, int n, std::uint64_t seed) {
  auto arcs = dag_arcs(m, n, seed);
  Rng rng(seed, 3);
  LpInstance inst;
  inst.m = m;
  inst.n = n;
  inst.A = Eigen::MatrixXd::Zero(m, n);
  for (int j = 0; j < n; ++j) {
    auto [u, v] = arcs[j];
    if (u < m) inst.A(u, j) += 1.0;  // tail
    if (v < m) inst.A(v, j) -= 1.0;  // head; node m's row is dropped
  }
  Eigen::VectorXd x0(n), c(n);
  for (int j = 0; j < n; ++j) {
    x0(j) = 0.5 + rng.u01();
    c(j) = rng.u01() * 2.0;
  }
  inst.b = inst.A * x0;
  inst.c = c;
  inst.x0 = x0;
  inst.meta = {family_name("mincost-flow", m, n, seed), "mincost-flow", seed, {}, {}, {}, {}};
  return inst;
}

LpInstance gen_generalized_flow(int m, int n, std::uint64_t seed) {
  if (n < m) throw ValidationError("generalized-flow generator: need n >= m");
  Rng rng(seed, 4);
  LpInstance inst;
  inst.m = m;
  inst.n = n;
  inst.A = Eigen::MatrixXd::Zero(m, n);
  // one discharge arc per node keeps the rank full and the region bounded
  for (int j = 0; j < m; ++j) inst.A(j, j) = 1.0;
  for (int j = m; j < n; ++j) {
    int u = m > 1 ? rng.uint_below(m - 1) : 0;
    int v = u + 1 + (m - u - 1 > 1 ? rng.uint_below(m - u - 1) : 0);
    const double gain = std::exp2(2.0 * rng.u01() - 1.0);  // in [1/2, 2]
    inst.A(u, j) = 1.0;
    if (v < m && v != u) inst.A(v, j) = -gain;
  }
  Eigen::VectorXd x0(n), c(n);
  for (int j = 0; j < n; ++j) {
    x0(j) = 0.5 + rng.u01();
    c(j) = rng.u01() * 2.0;
  }
  inst.b = inst.A * x0;
  inst.c = c;
  inst.x0 = x0;
  inst.meta = {family_name("generalized-flow", m, n, seed), "generalized-flow", seed, {}, {}, {}, {}};
  return inst;
}

LpInstance gen_dual_2vpi(int m, int n, std::uint64_t seed) {
  const int q = n - m;  // structural variables; one slack per row
  if (q < 1 || q > m)
    throw ValidationError("dual-2vpi generator: need m < n <= 2m");
  Rng rng(seed, 5);
  LpInstance inst;
  inst.m = m;
  inst.n = n;
  inst.A = Eigen::MatrixXd::Zero(m, n);
  inst.b = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd y0(q);
  for (int j = 0; j < q; ++j) y0(j) = 0.25 + 0.5 * rng.u01();
  // box rows first: x_j + s_i = U_j keeps everything bounded
  for (int j = 0; j < q; ++j) {
    inst.A(j, j) = 1.0;
    inst.b(j) = 2.0 + rng.u01();
  }
  for (int i = q; i < m; ++i) {
    int u = rng.uint_below(q);
    int v = q > 1 ? (u + 1 + rng.uint_below(q - 1)) % q : u;
    const double au = (rng.u01() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.u01());
    const double av = v == u ? 0.0 : (rng.u01() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.u01());
    inst.A(i, u) = au;
    if (v != u) inst.A(i, v) = av;
    inst.b(i) = au * y0(u) + av * (v == u ? 0.0 : y0(v)) + 0.1 + rng.u01();
  }
  for (int i = 0; i < m; ++i) inst.A(i, q + i) = 1.0;  // slack block
  Eigen::VectorXd x0(n), c = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < q; ++j) {
    x0(j) = y0(j);
    c(j) = 2.0 * rng.u01() - 1.0;
  }
  for (int i = 0; i < m; ++i) x0(q + i) = inst.b(i) - inst.A.row(i).head(q).dot(y0);
  inst.c = c;
  inst.x0 = x0;
  inst.meta = {family_name("dual-2vpi", m, n, seed), "dual-2vpi", seed, {}, {}, {}, {}};
  return inst;
}

}  // namespace

LpInstance make_polarized_block(int m, const std::vector<int>& exponents) {
  const int k = static_cast<int>(exponents.size());
  if (k < 1 || k > m) throw ValidationError("polarized-block: need 1 <= n - m <= m");
  const int n = m + k;
  LpInstance inst;
  inst.m = m;
  inst.n = n;
  inst.A = Eigen::MatrixXd::Zero(m, n);
  inst.A.leftCols(m).setIdentity();
  for (int j = 0; j < k; ++j) inst.A(j, m + j) = std::exp2(exponents[j]);
  inst.b = Eigen::VectorXd::Ones(m);
  inst.c = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < k; ++j) inst.c(m + j) = 1.0;
  Eigen::VectorXd x0(n);
  for (int i = 0; i < m; ++i) x0(i) = i < k ? 0.75 : 1.0;
  for (int j = 0; j < k; ++j) x0(m + j) = 0.25 * std::exp2(-exponents[j]);
  inst.x0 = x0;
  inst.meta.name = "polarized-block-" + std::to_string(m) + "x" + std::to_string(n);
  inst.meta.kind = "polarized-block";
  inst.meta.optimal_value = 0.0;
  return inst;
}

std::vector<std::pair<int, int>> mincost_flow_arcs(int m, int n, std::uint64_t seed) {
  return dag_arcs(m, n, seed);
}

std::vector<std::string> generator_kinds() {
  return {"simplex", "mincost-flow", "generalized-flow", "dual-2vpi", "polarized-block"};
}

LpInstance generate_instance(const std::string& kind, int m, int n, std::uint64_t seed) {
  if (m < 1 || n < 2 || n <= m)
    throw ValidationError("generate_instance: need 1 <= m < n");
  LpInstance inst;
  if (kind == "simplex") {
    inst = gen_simplex(m, n, seed);
  } else if (kind == "mincost-flow") {
    inst = gen_mincost_flow(m, n, seed);
  } else if (kind == "generalized-flow") {
    inst = gen_generalized_flow(m, n, seed);
  } else if (kind == "dual-2vpi") {
    inst = gen_dual_2vpi(m, n, seed);
  } else if (kind == "polarized-block") {
    if (n - m > m) throw ValidationError("polarized-block: need n <= 2m");
    Rng rng(seed, 6);
    std::vector<int> exps(n - m);
    for (int j = 0; j < n - m; ++j) exps[j] = rng.uint_below(40) + 30 * j;
    inst = make_polarized_block(m, exps);
    inst.meta.name = family_name(kind, m, n, seed);
    inst.meta.kind = kind;
    inst.meta.seed = seed;
  } else {
    throw ValidationError("unknown generator kind: " + kind);
  }
  repair_rank(inst);
  if (!inst.meta.repaired_rows.empty())
    throw NumericalError("generator produced rank-deficient rows unexpectedly");
  FeasibilityReport r = check_feasible(inst, *inst.x0);
  if (!r.feasible)
    throw NumericalError("generator witness infeasible: residual " +
                         std::to_string(r.residual_inf));
  return inst;
}

}  // namespace circuitlp
