#pragma once

// Certified threshold tests d(x, y) < t / d(x, y) <= t for every system.
// Exact systems decide these without rounding; the float toral system only
// answers "yes" when the tracked error bound leaves no doubt.

#include "shadowkit/system.hpp"

namespace shadowkit {

inline bool within(const ShiftSpace& s, const SymbolicPoint& x, const SymbolicPoint& y, double t, bool strict = true) {
  const double d = s.distance(x, y);
  return strict ? d < t : d <= t;
}

inline bool within(const ToralAutomorphism& s, const TorusPoint& x, const TorusPoint& y, double t, bool strict = true) {
  return s.within(x, y, rational_from_double(t), strict);
}

inline bool within(const FloatToralAutomorphism& s, const FloatTorusPoint& x, const FloatTorusPoint& y, double t,
                   bool strict = true) {
  const Measured m = s.measure(x, y);
  return strict ? m.value + m.error < t : m.value + m.error <= t;
}

inline bool within(const CircleRotation& s, const CirclePoint& x, const CirclePoint& y, double t, bool strict = true) {
  const int c = cmp(s.exact_distance(x, y), rational_from_double(t));
  return strict ? c < 0 : c <= 0;
}

inline bool within(const FinitePermutation& s, const PermPoint& x, const PermPoint& y, double t, bool strict = true) {
  const double d = s.distance(x, y);
  return strict ? d < t : d <= t;
}

/// Absolute error attached to a reported distance value.
template <class Sys>
double distance_error(const Sys&, const typename Sys::point_type&, const typename Sys::point_type&) {
  return 0.0;
}

inline double distance_error(const FloatToralAutomorphism& s, const FloatTorusPoint& x, const FloatTorusPoint& y) {
  return s.measure(x, y).error;
}

inline double distance_error(const ToralAutomorphism&, const TorusPoint&, const TorusPoint&) {
  // sqrt of a correctly rounded double
  return 4.0 * std::numeric_limits<double>::epsilon();
}

}  // namespace shadowkit
