#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace circuitlp {

// Arbitrary-precision rationals for the exact solver mode.  Conversion from
// double is exact (doubles are dyadic rationals), so feeding instance data
// through this type never introduces rounding.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double x) { return x; }

inline Rational abs_val(const Rational& r) { return r < 0 ? Rational(-r) : r; }
inline double abs_val(double x) { return x < 0 ? -x : x; }

}  // namespace circuitlp
