// Polarized segmentation of a gap range: on each interval every coordinate's
// profile either stays within a γ factor of its top value (class B) or stays
// within a γ factor of proportional decay (class N).  All checks run on the
// exact rational profile; between profile knots both sides of every
// inequality are affine in g, so checking knots and interval endpoints is
// exhaustive, not a sampling heuristic.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "circuitlp/lifting.hpp"
#include "circuitlp/mcp.hpp"

namespace circuitlp {

namespace {

struct IntervalCheck {
  bool valid = false;
  std::vector<int> B, N;
};

IntervalCheck try_interval(const McpProfile& prof, const Rational& bottom, const Rational& top,
                           const Rational& gamma) {
  const int n = static_cast<int>(prof.coord.size());
  IntervalCheck out;

  std::vector<Rational> pts{bottom, top};
  for (const auto& t : prof.breakpoints)
    if (t > bottom && t < top) pts.push_back(t);

  std::vector<Rational> xm_top(n);
  std::vector<bool> in_b(n);
  for (int i = 0; i < n; ++i) {
    xm_top[i] = prof.coord[i].eval(top);
    in_b[i] = prof.coord[i].eval(bottom) >= gamma * xm_top[i];
  }
  for (int i = 0; i < n; ++i) {
    for (const auto& p : pts) {
      const Rational v = prof.coord[i].eval(p);
      if (in_b[i]) {
        if (v < gamma * xm_top[i] || v > xm_top[i]) return out;
      } else {
        if (v * gamma * top > p * xm_top[i]) return out;          // decay ceiling
        if (v * top < gamma * p * xm_top[i]) return out;          // decay floor
      }
    }
    (in_b[i] ? out.B : out.N).push_back(i);
  }
  out.valid = true;
  return out;
}

}  // namespace

PolarizedDecomposition polarized_decomposition(const McpProfile& prof, const Rational& g,
                                               const Rational& gamma) {
  if (!(g > 0)) throw ValidationError("polarized_decomposition: need g > 0");
  if (!(gamma > 0) || gamma > 1)
    throw ValidationError("polarized_decomposition: gamma must lie in (0, 1]");

  // intervals are built downward from g, each extended as far as the checks
  // allow: first to 0, then to each knot from the bottom up, and when no knot
  // works, to gamma^2 * top, which always validates inside a single segment
  std::vector<std::pair<Rational, IntervalCheck>> stack;  // (bottom, classes), top-down
  Rational top = g;
  const int cap = 100000;
  while (top > 0) {
    std::vector<Rational> cands{Rational(0)};
    for (const auto& t : prof.breakpoints)
      if (t > 0 && t < top) cands.push_back(t);

    bool placed = false;
    for (const auto& bottom : cands) {
      IntervalCheck chk = try_interval(prof, bottom, top, gamma);
      if (chk.valid) {
        stack.push_back({bottom, std::move(chk)});
        top = bottom;
        placed = true;
        break;
      }
    }
    if (!placed) {
      const Rational bottom = gamma * gamma * top;
      if (!(bottom < top))
        throw ValidationError(
            "polarized_decomposition: no interval of positive length validates at gamma = 1");
      IntervalCheck chk = try_interval(prof, bottom, top, gamma);
      if (!chk.valid)
        throw NumericalError("polarized_decomposition: in-segment fallback interval rejected");
      stack.push_back({bottom, std::move(chk)});
      top = bottom;
    }
    if (static_cast<int>(stack.size()) > cap)
      throw NumericalError("polarized_decomposition: interval count exceeded the safety cap");
  }

  // stack is top-down and its last bottom is 0; emit everything ascending
  PolarizedDecomposition dec;
  dec.gamma = gamma;
  const size_t r = stack.size();
  dec.breakpoints.resize(r + 1);
  dec.partitions.resize(r);
  dec.breakpoints[r] = g;
  for (size_t k = 0; k < r; ++k) {
    dec.breakpoints[r - 1 - k] = stack[k].first;
    dec.partitions[r - 1 - k] = {std::move(stack[k].second.B), std::move(stack[k].second.N)};
  }
  return dec;
}

PolarizedDecomposition polarized_decomposition(const LpInstance& inst, double g, double gamma) {
  return polarized_decomposition(mcp_profile(inst), Rational(g), Rational(gamma));
}

ScalingFunctions build_h(const McpProfile& prof, const PolarizedDecomposition& dec,
                         const Rational& eta) {
  if (!(eta > 0) || eta > 2)
    throw ValidationError("build_h: eta must lie in (0, 2]");
  const int n = static_cast<int>(prof.coord.size());
  const int r = dec.intervals();
  if (r == 0) throw ValidationError("build_h: empty decomposition");

  ScalingFunctions sf;
  sf.eta = eta;
  sf.h.resize(n);
  const Rational half_eta = eta / 2;
  for (int i = 0; i < n; ++i) {
    std::vector<Rational> vals(r + 1);
    vals[r] = half_eta * prof.coord[i].eval(dec.breakpoints[r]);
    for (int j = r - 1; j >= 0; --j) {
      const auto& Bj = dec.partitions[j].first;
      const bool in_b = std::binary_search(Bj.begin(), Bj.end(), i);
      vals[j] = in_b ? vals[j + 1]
                     : vals[j + 1] * dec.breakpoints[j] / dec.breakpoints[j + 1];
    }
    sf.h[i].knot = dec.breakpoints;
    sf.h[i].val = std::move(vals);
  }

  // band diagnostic: h must sit inside [ (η/2)·xm, xm ] — check every cell of
  // the union grid, where both functions are affine
  for (int j = 0; j < r; ++j) {
    std::vector<Rational> pts{dec.breakpoints[j], dec.breakpoints[j + 1]};
    for (const auto& t : prof.breakpoints)
      if (t > pts[0] && t < pts[1]) pts.push_back(t);
    bool bad = false;
    for (int i = 0; i < n && !bad; ++i)
      for (const auto& p : pts) {
        const Rational hv = sf.h[i].eval(p);
        const Rational xv = prof.coord[i].eval(p);
        if (hv > xv || hv < half_eta * xv) {
          bad = true;
          break;
        }
      }
    if (bad) sf.band_violations.push_back(j);
  }
  return sf;
}

long ideal_potential(const LpInstance& inst, const PolarizedDecomposition& dec,
                     const ScalingFunctions& sf, double g) {
  if (g < 0) throw ValidationError("ideal_potential: negative gap");
  if (g == 0) return 0;
  const Rational rg(g);
  const auto& bp = dec.breakpoints;
  if (rg > bp.back()) throw ValidationError("ideal_potential: gap beyond the decomposition range");
  if (static_cast<int>(sf.h.size()) != inst.n)
    throw ValidationError("ideal_potential: scaling functions do not match the instance");

  // interval index a with g in (bp[a], bp[a+1]]
  int a = 0;
  while (a + 1 < static_cast<int>(bp.size()) - 1 && rg > bp[a + 1]) ++a;

  long phi = 1;
  for (int i = 1; i <= a; ++i) {
    const auto& prevN = dec.partitions[i - 1].second;
    const auto& curN = dec.partitions[i].second;
    std::vector<int> sym;
    std::set_symmetric_difference(prevN.begin(), prevN.end(), curN.begin(), curN.end(),
                                  std::back_inserter(sym));
    phi += static_cast<long>(sym.size()) + 1;
  }

  const auto& [B, N] = dec.partitions[a];
  if (!N.empty()) {
    Eigen::VectorXd y(inst.n);
    for (int i = 0; i < inst.n; ++i) {
      const double hv = to_double(sf.h[i].eval(bp[a + 1]));
      if (!(hv > 0) || !std::isfinite(hv))
        throw ValidationError("ideal_potential: scaling value not positive finite at the anchor");
      y(i) = hv;
    }
    const SubspaceBasis basis = rescaled_kernel_basis(inst.A, y);
    double nmax = 0;
    for (int i : N) nmax = std::max(nmax, basis.M.row(i).cwiseAbs().maxCoeff());
    if (nmax > 1e-12) {
      const LiftingOperator op = build_operator(basis, B, N);
      const double theta = to_double(bp[a + 1] / rg);
      phi += count_sigma(op, theta, std::numeric_limits<double>::infinity());
    }
  }
  return phi;
}

}  // namespace circuitlp
