// Shifted-linear-cover bracket.  Everything here is exact rational 2D
// geometry: a candidate piece ψ(t) = α + βt on [a,b] must satisfy ψ <= φ
// (with φ concave this binds only at the endpoints, ψ−φ being convex) and
// ψ >= ηφ (binds only at breakpoints of φ, both being piecewise affine).
// Single-piece feasibility is therefore a small system of halfplanes in
// (α, β), and the maximal right end of a feasible piece is found exactly:
// feasibility is monotone in b, the transition value makes three constraints
// concurrent, and the concurrency equations are linear in b.

#include <algorithm>
#include <set>
#include <vector>

#include "circuitlp/mcp.hpp"

namespace circuitlp {

namespace {

struct Constraint {
  Rational t, r;  // the line α + β·t = r
  bool lower;     // α + β·t >= r when true, <= when false
};

bool point_ok(const Rational& al, const Rational& be, const std::vector<Constraint>& cs) {
  for (const auto& c : cs) {
    const Rational v = al + be * c.t;
    if (c.lower ? v < c.r : v > c.r) return false;
  }
  return true;
}

// Feasibility of a halfplane intersection with >= 2 distinct normals: the
// region contains no line, so if nonempty it has a vertex, and every vertex
// is the meet of two constraint lines with distinct t.
bool halfplanes_feasible(const std::vector<Constraint>& cs) {
  for (size_t i = 0; i < cs.size(); ++i)
    for (size_t j = i + 1; j < cs.size(); ++j) {
      if (cs[i].t == cs[j].t) continue;
      const Rational be = (cs[i].r - cs[j].r) / (cs[i].t - cs[j].t);
      const Rational al = cs[i].r - be * cs[i].t;
      if (point_ok(al, be, cs)) return true;
    }
  return false;
}

struct SlcContext {
  const PiecewiseLinear& phi;
  Rational eta, g;
  std::vector<Rational> knots;  // phi knots strictly inside (0, g)

  // φ(t) = c + d·t on [lo, hi], valid when (lo, hi) contains no knot
  std::pair<Rational, Rational> segment(const Rational& lo) const {
    if (lo >= phi.knot.back()) return {phi.val.back(), Rational(0)};
    size_t k = 0;
    while (k + 1 < phi.knot.size() && phi.knot[k + 1] <= lo) ++k;
    const Rational d = phi.slope_after(k);
    return {phi.val[k] - d * phi.knot[k], d};
  }

  std::vector<Constraint> piece_constraints(const Rational& a, const Rational& b) const {
    std::set<Rational> pts{a, b};
    for (const auto& t : knots)
      if (t > a && t < b) pts.insert(t);
    std::vector<Constraint> cs;
    for (const auto& t : pts) cs.push_back({t, eta * phi.eval(t), true});
    cs.push_back({a, phi.eval(a), false});
    cs.push_back({b, phi.eval(b), false});
    return cs;
  }

  bool piece_feasible(const Rational& a, const Rational& b) const {
    return halfplanes_feasible(piece_constraints(a, b));
  }

  // Largest b in (lo, hi) with a feasible piece [a, b], given that [a, lo] is
  // feasible and [a, hi] is not; (lo, hi) contains no knot.
  Rational refine_piece(const Rational& a, const Rational& lo, const Rational& hi) const {
    const auto [c, d] = segment(lo);
    std::vector<Constraint> fixed;
    fixed.push_back({a, eta * phi.eval(a), true});
    fixed.push_back({a, phi.eval(a), false});
    for (const auto& t : knots)
      if (t > a && t <= lo) fixed.push_back({t, eta * phi.eval(t), true});

    std::set<Rational> cands;
    const auto add = [&](const Rational& b) {
      if (b > lo && b < hi) cands.insert(b);
    };
    for (size_t i = 0; i < fixed.size(); ++i)
      for (size_t j = i + 1; j < fixed.size(); ++j) {
        if (fixed[i].t == fixed[j].t) continue;
        const Rational be = (fixed[i].r - fixed[j].r) / (fixed[i].t - fixed[j].t);
        const Rational al = fixed[i].r - be * fixed[i].t;
        // b where this meet lands on the moving upper line α+βb = c+db,
        // respectively the moving lower line α+βb = η(c+db)
        if (be != d) add((c - al) / (be - d));
        if (be != eta * d) add((eta * c - al) / (be - eta * d));
      }
    if (d != 0) add(-c / d);  // the band ηφ..φ collapses where φ(b) = 0

    for (auto it = cands.rbegin(); it != cands.rend(); ++it)
      if (piece_feasible(a, *it)) return *it;
    return lo;
  }

  Rational max_piece_end(const Rational& a) const {
    Rational prev = a;
    for (const auto& t : knots) {
      if (t <= a) continue;
      if (piece_feasible(a, t))
        prev = t;
      else
        return refine_piece(a, prev, t);
    }
    if (piece_feasible(a, g)) return g;
    return refine_piece(a, prev, g);
  }

  // ---- continuous construction: pieces pinned to φ at their right ends ----

  bool reach_ok(const Rational& a, const Rational& psa, const Rational& t) const {
    // exists β with  ηφ(t_k) <= psa + β(t_k − a)  at knots and at t, and
    // psa + β(t − a) <= φ(t); the upper side elsewhere follows by convexity
    Rational lbmax = (eta * phi.eval(t) - psa) / (t - a);
    for (const auto& tk : knots) {
      if (tk <= a || tk > t) continue;
      lbmax = std::max(lbmax, (eta * phi.eval(tk) - psa) / (tk - a));
    }
    return lbmax <= (phi.eval(t) - psa) / (t - a);
  }

  Rational refine_reach(const Rational& a, const Rational& psa, const Rational& lo,
                        const Rational& hi) const {
    const auto [c, d] = segment(lo);
    std::set<Rational> cands;
    for (const auto& tk : knots) {
      if (tk <= a || tk > lo) continue;
      // reach dies where some fixed lower slope catches the pinned upper slope
      const Rational lb = (eta * phi.eval(tk) - psa) / (tk - a);
      if (d != lb) {
        const Rational root = (psa - c - lb * a) / (d - lb);
        if (root > lo && root < hi) cands.insert(root);
      }
    }
    for (auto it = cands.rbegin(); it != cands.rend(); ++it)
      if (reach_ok(a, psa, *it)) return *it;
    return lo;
  }

  Rational max_reach(const Rational& a, const Rational& psa) const {
    Rational prev = a;
    for (const auto& t : knots) {
      if (t <= a) continue;
      if (reach_ok(a, psa, t))
        prev = t;
      else
        return refine_reach(a, psa, prev, t);
    }
    if (reach_ok(a, psa, g)) return g;
    return refine_reach(a, psa, prev, g);
  }
};

}  // namespace

SlcBracket slc(const PiecewiseLinear& phi, const Rational& eta, const Rational& g) {
  phi.validate_concave_nondecreasing();
  if (phi.val.front() < 0) throw ValidationError("slc: phi(0) must be nonnegative");
  if (!(eta > 0) || eta > 1) throw ValidationError("slc: eta must lie in (0, 1]");
  if (!(g > 0)) throw ValidationError("slc: need g > 0");

  SlcContext ctx{phi, eta, g, {}};
  for (const auto& t : phi.knot)
    if (t > 0 && t < g) ctx.knots.push_back(t);
  const size_t cap = ctx.knots.size() + 16;

  SlcBracket out;
  Rational a(0);
  while (a < g) {
    const Rational b = ctx.max_piece_end(a);
    if (!(b > a)) throw NumericalError("slc: lower-bound greedy failed to advance");
    ++out.lower;
    if (static_cast<size_t>(out.lower) > cap)
      throw NumericalError("slc: lower-bound piece count exceeded the knot budget");
    a = b;
  }

  a = 0;
  Rational psa = phi.val.front();
  while (a < g) {
    const Rational t = ctx.max_reach(a, psa);
    if (!(t > a)) throw NumericalError("slc: continuous greedy failed to advance");
    ++out.upper;
    if (static_cast<size_t>(out.upper) > cap)
      throw NumericalError("slc: continuous piece count exceeded the knot budget");
    psa = phi.eval(t);
    a = t;
  }

  if (out.lower > out.upper)
    throw NumericalError("slc: bracket inverted (lower exceeds upper)");
  return out;
}

}  // namespace circuitlp
