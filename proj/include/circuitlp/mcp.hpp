#pragma once

// Max-central-path machinery.  For a bounded instance with optimal value v*,
// the per-coordinate profile is
//
//     xm_i(g) = max { x_i : Ax = b, x >= 0, <c,x> <= v* + g },
//
// a concave nondecreasing piecewise-linear function of the gap budget g, and
// sm_i(g) is the analogous maximum of s_i over the dual slack polyhedron with
// <b,y> >= v* - g.  Everything here runs in exact rational arithmetic for
// small instances; pointwise values fall back to double precision above that.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "circuitlp/instance.hpp"
#include "circuitlp/piecewise.hpp"
#include "circuitlp/ratio_circuit.hpp"

namespace circuitlp {

// Largest instance size for which the exact-rational paths are used.
inline constexpr int kExactModeMaxN = 12;

// ---------------------------------------------------------------------------
// Exact vertex enumeration (basis scan), the backbone of the profile build.

struct VertexSet {
  std::vector<std::vector<Rational>> verts;  // distinct vertices of {Ax=b, x>=0}
  std::vector<Rational> gap;                 // <c,v> - vstar per vertex
  Rational vstar;                            // exact optimal value
};

VertexSet enumerate_vertices(const LpInstance& inst);  // needs n <= 16, bounded

// Full profile: one piecewise-linear function per coordinate, computed from
// the upper concave hull of the vertex projections {(gap(v), v_i)}.
struct McpProfile {
  std::vector<PiecewiseLinear> coord;  // xm_i, i = 0..n-1
  Rational vstar;
  // ascending union of all per-coordinate knots in (0, inf), i.e. the gap
  // values where some xm_i changes slope
  std::vector<Rational> breakpoints;
};

McpProfile mcp_profile(const LpInstance& inst);

// ---------------------------------------------------------------------------
// Pointwise oracles.

struct McpSample {
  double g = 0;
  Eigen::VectorXd xm;                     // per-coordinate maxima
  std::vector<Rational> xm_exact;         // filled in exact mode
  std::vector<Eigen::VectorXd> witness;   // argmax point per coordinate
  Eigen::VectorXd xm_feasible;            // average of the witnesses (feasible)
};

// n LP solves: max x_i over {Ax=b, x>=0, <c,x> <= v*+g}.  Exact-rational when
// n <= kExactModeMaxN, double otherwise.  Requires a cached optimal value.
McpSample exact_mcp(const LpInstance& inst, double g);

struct DualMcpSample {
  double g = 0;
  Eigen::VectorXd sm;              // per-coordinate maxima of the dual slack
  std::vector<Rational> sm_exact;  // filled in exact mode
};

// n LP solves: max s_i over {A^T y + s = c, s >= 0, <b,y> >= v* - g}.
DualMcpSample exact_dual_mcp(const LpInstance& inst, double g);

// ---------------------------------------------------------------------------
// Circuit-based approximations.

struct GapEstimate {
  double lambda = 0;   // optimality gap over-/under-estimator (g/n <= λ <= g)
  Eigen::VectorXd s;   // dual slack certificate u - A^T y
  Eigen::VectorXd y;
  RatioCircuitResult rc;
};

// ratio_circuit(c, 0, 1/x) at a feasible x; the Wallacher weighting.
GapEstimate approx_gap(const LpInstance& inst, const Eigen::VectorXd& x);

struct ApproxMcp {
  double lambda = 0;
  Eigen::VectorXd xhat;                 // per-coordinate estimates x_i + z'_i
  std::vector<Eigen::VectorXd> point;   // the feasible point behind each xhat_i
  Eigen::VectorXd xbar;                 // average of the points (feasible)
};

// One ratio-circuit solve per coordinate with weights v = s/λ, w = 2/x − s/λ
// built from an approx_gap certificate.  Throws ValidationError when λ
// vanishes (x is already optimal, the estimator is undefined there).
ApproxMcp approx_mcp(const LpInstance& inst, const Eigen::VectorXd& x);
ApproxMcp approx_mcp(const LpInstance& inst, const Eigen::VectorXd& x, const GapEstimate& ge);

// ---------------------------------------------------------------------------
// Shifted linear cover: how many affine pieces does a continuous ψ with
// η·φ <= ψ <= φ on [0, g] need?  Returns a certified bracket.

struct SlcBracket {
  int lower = 0;  // minimal pieces ignoring continuity (greedy maximal cover)
  int upper = 0;  // pieces of an explicitly constructed continuous ψ
};

// φ must be concave, nondecreasing, with φ(0) >= 0; η in (0,1], g > 0.
SlcBracket slc(const PiecewiseLinear& phi, const Rational& eta, const Rational& g);

// ---------------------------------------------------------------------------
// Polarized segmentation of [0, g] and the scaling functions built on it.

struct PolarizedDecomposition {
  // ascending 0 = b_0 < b_1 < ... < b_r = g
  std::vector<Rational> breakpoints;
  // partitions[j] = (B, N) for the interval [b_j, b_{j+1}]
  std::vector<std::pair<std::vector<int>, std::vector<int>>> partitions;
  Rational gamma;
  int intervals() const { return static_cast<int>(partitions.size()); }
};

// Greedy extension downward from g: coordinate i goes to B on an interval
// exactly when xm_i(b_low) >= gamma * xm_i(b_high); the interval is extended
// while the polarization inequalities hold at every profile knot inside it.
PolarizedDecomposition polarized_decomposition(const LpInstance& inst, double g, double gamma);
PolarizedDecomposition polarized_decomposition(const McpProfile& prof, const Rational& g,
                                               const Rational& gamma);

// Per-coordinate scaling targets h_i: anchored at (η/2)·xm_i(g) on top,
// extended downward interval by interval (constant on B, proportional on N).
struct ScalingFunctions {
  std::vector<PiecewiseLinear> h;
  Rational eta;
  // intervals where some coordinate leaves the band [ (η/2)·xm_i, xm_i ]
  // somewhere inside the interval (diagnostic, not an error)
  std::vector<int> band_violations;
};

ScalingFunctions build_h(const McpProfile& prof, const PolarizedDecomposition& dec,
                         const Rational& eta);

// Idealized round counter: 0 at g = 0; otherwise
//   1 + Σ_{i=1..a} (|N^(i-1) Δ N^(i)| + 1) + #{ σ of ℓ_a : σ >= b_{a+1}/g }
// where a is the interval index with g in (b_a, b_{a+1}] and ℓ_a is the
// lifting map of ker(A) rescaled by diag(h(b_{a+1}))^{-1} between the
// interval's partition classes.
long ideal_potential(const LpInstance& inst, const PolarizedDecomposition& dec,
                     const ScalingFunctions& sf, double g);

}  // namespace circuitlp
