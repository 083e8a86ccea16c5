#pragma once

// Exact piecewise-linear functions on [0, ∞) with rational knots, used for
// per-coordinate max-central-path profiles and their approximations. The
// function is affine between consecutive knots and constant past the last one.

#include <vector>

#include "circuitlp/errors.hpp"
#include "circuitlp/rational.hpp"

namespace circuitlp {

struct PiecewiseLinear {
  std::vector<Rational> knot;  // ascending, knot.front() == 0
  std::vector<Rational> val;

  Rational eval(const Rational& g) const {
    if (knot.empty()) throw ValidationError("piecewise eval: empty function");
    if (g < knot.front()) throw ValidationError("piecewise eval: negative argument");
    if (g >= knot.back()) return val.back();
    size_t lo = 0, hi = knot.size() - 1;
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      (knot[mid] <= g ? lo : hi) = mid;
    }
    const Rational t = (g - knot[lo]) / (knot[lo + 1] - knot[lo]);
    return val[lo] + t * (val[lo + 1] - val[lo]);
  }

  // slope of the segment starting at knot k (0 past the end)
  Rational slope_after(size_t k) const {
    if (k + 1 >= knot.size()) return Rational(0);
    return (val[k + 1] - val[k]) / (knot[k + 1] - knot[k]);
  }

  // number of distinct affine pieces of the restriction to [0, g]
  int pieces_on(const Rational& g) const {
    if (!(g > 0)) throw ValidationError("piecewise pieces: need g > 0");
    int count = 0;
    bool have_prev = false;
    Rational prev_slope;
    for (size_t k = 0; k < knot.size(); ++k) {
      if (knot[k] >= g) break;
      const Rational s = slope_after(k);
      if (!have_prev || s != prev_slope) {
        ++count;
        prev_slope = s;
        have_prev = true;
      }
    }
    return count == 0 ? 1 : count;
  }

  void validate_concave_nondecreasing() const {
    if (knot.empty() || knot.size() != val.size())
      throw ValidationError("piecewise: malformed knot/value lists");
    if (knot.front() != 0) throw ValidationError("piecewise: domain must start at 0");
    for (size_t k = 0; k + 1 < knot.size(); ++k) {
      if (!(knot[k] < knot[k + 1])) throw ValidationError("piecewise: knots must increase");
      if (val[k + 1] < val[k])
        throw ValidationError("piecewise: function must be nondecreasing");
      if (k > 0 && slope_after(k) > slope_after(k - 1))
        throw ValidationError("piecewise: function must be concave");
    }
    // the implicit constant tail must not break concavity either (slope 0 is
    // minimal among nonnegative slopes, so nothing to check there)
  }
};

}  // namespace circuitlp
