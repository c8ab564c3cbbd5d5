#pragma once

// Finite delta-pseudo-orbits {y_n}_{n=a}^{b}: d(f(y_n), y_{n+1}) <= delta.

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "shadowkit/metric.hpp"

namespace shadowkit {

template <class Sys>
struct PseudoOrbit {
  using point_type = typename Sys::point_type;

  std::int64_t first = 0;
  std::vector<point_type> points;
  double gap = 0.0;

  std::int64_t last() const { return first + static_cast<std::int64_t>(points.size()) - 1; }
  std::size_t size() const { return points.size(); }
  const point_type& at(std::int64_t n) const { return points[static_cast<std::size_t>(n - first)]; }
};

/// Jump sizes d(f(y_n), y_{n+1}) for n = a..b-1.
template <class Sys>
std::vector<double> jumps(const Sys& sys, const std::vector<typename Sys::point_type>& pts) {
  std::vector<double> out;
  if (pts.size() < 2) return out;
  out.reserve(pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) out.push_back(sys.distance(sys.apply(pts[i], 1), pts[i + 1]));
  return out;
}

template <class Sys>
double compute_gap(const Sys& sys, const std::vector<typename Sys::point_type>& pts) {
  const auto j = jumps(sys, pts);
  return j.empty() ? 0.0 : *std::max_element(j.begin(), j.end());
}

template <class Sys>
PseudoOrbit<Sys> make_pseudo_orbit(const Sys& sys, std::int64_t first, std::vector<typename Sys::point_type> pts) {
  if (pts.empty()) fail(ErrorCode::empty_input, "pseudo-orbit needs at least one point");
  PseudoOrbit<Sys> po{first, std::move(pts), 0.0};
  po.gap = compute_gap(sys, po.points);
  return po;
}

/// Certified test that every jump is <= delta.
template <class Sys>
bool is_pseudo_orbit(const Sys& sys, const PseudoOrbit<Sys>& po, double delta) {
  for (std::size_t i = 0; i + 1 < po.points.size(); ++i) {
    if (!within(sys, sys.apply(po.points[i], 1), po.points[i + 1], delta, false)) return false;
  }
  return true;
}

template <class Sys>
PseudoOrbit<Sys> from_true_orbit(const Sys& sys, const typename Sys::point_type& x, std::int64_t a, std::int64_t b) {
  if (a > b) fail(ErrorCode::precondition, "from_true_orbit needs a <= b");
  std::vector<typename Sys::point_type> pts;
  pts.reserve(static_cast<std::size_t>(b - a + 1));
  pts.push_back(sys.apply(x, a));
  for (std::int64_t n = a; n < b; ++n) pts.push_back(sys.apply(pts.back(), 1));
  return PseudoOrbit<Sys>{a, std::move(pts), 0.0};
}

namespace detail {

/// Leading k with 2^{-k} <= delta; a symbol change at |i| >= k keeps a jump below delta.
inline std::int64_t shift_window(double delta) {
  std::int64_t k = 0;
  while (std::ldexp(1.0, -static_cast<int>(k)) > delta) ++k;
  return k;
}

inline Symbol pick(const std::vector<Symbol>& options, std::mt19937_64& rng) {
  return options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
}

/// f(y) with random admissible symbols at indices outside (-keep_left, keep_right).
inline SymbolicPoint scramble_outside(const ShiftSpace& s, const SymbolicPoint& y, std::int64_t keep_left,
                                      std::int64_t keep_right, std::mt19937_64& rng) {
  const Word kept = y.window(-keep_left + 1, keep_right);
  if (kept.empty()) return y;
  const std::size_t r = s.alphabet_size();
  // random walk of 1..3 symbols on each side, then close with a canonical extension
  std::uniform_int_distribution<int> len(1, 3);
  Word right;
  Symbol cur = kept.back();
  for (int i = len(rng); i > 0; --i) {
    std::vector<Symbol> next;
    for (std::size_t t = 0; t < r; ++t)
      if (s.allowed(cur, static_cast<Symbol>(t))) next.push_back(static_cast<Symbol>(t));
    cur = pick(next, rng);
    right.push_back(cur);
  }
  Word left;
  cur = kept.front();
  for (int i = len(rng); i > 0; --i) {
    std::vector<Symbol> prev;
    for (std::size_t t = 0; t < r; ++t)
      if (s.allowed(static_cast<Symbol>(t), cur)) prev.push_back(static_cast<Symbol>(t));
    cur = pick(prev, rng);
    left.push_back(cur);
  }
  std::reverse(left.begin(), left.end());
  Word full = left;
  full.insert(full.end(), kept.begin(), kept.end());
  full.insert(full.end(), right.begin(), right.end());
  return s.point_through(full, -keep_left + 1 - static_cast<std::int64_t>(left.size()));
}

}  // namespace detail

/// Shift perturbation: each y'_{n+1} is f(y'_n) with the symbols at |i| >= k
/// re-drawn at random, where 2^{-k} <= delta. Starts from po's first point.
inline PseudoOrbit<ShiftSpace> perturb(const ShiftSpace& s, const PseudoOrbit<ShiftSpace>& po, double delta,
                                       std::uint64_t seed) {
  if (!(delta >= 0.0)) fail(ErrorCode::precondition, "delta must be nonnegative");
  if (delta == 0.0 || po.points.empty()) return po;
  std::mt19937_64 rng(seed);
  const std::int64_t k = detail::shift_window(delta);
  std::vector<SymbolicPoint> pts{po.points.front()};
  std::uniform_int_distribution<std::int64_t> extra(0, 3);
  while (pts.size() < po.points.size()) {
    const SymbolicPoint image = s.apply(pts.back(), 1);
    pts.push_back(detail::scramble_outside(s, image, k + extra(rng), k + extra(rng), rng));
  }
  return make_pseudo_orbit(s, po.first, std::move(pts));
}

/// Toral perturbation: y'_{n+1} = f(y'_n) + (y_{n+1} - f(y_n)) + e_n with random rational
/// e_n, |e_n| <= delta - gap(po). delta = 0 returns po unchanged.
inline PseudoOrbit<ToralAutomorphism> perturb(const ToralAutomorphism& t, const PseudoOrbit<ToralAutomorphism>& po,
                                              double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) fail(ErrorCode::precondition, "delta must be nonnegative");
  if (delta == 0.0 || po.points.empty()) return po;
  const double base_gap = compute_gap(t, po.points);
  if (base_gap > delta) fail(ErrorCode::precondition, "input pseudo-orbit gap exceeds delta");
  Rational budget = rational_from_double(delta);
  if (base_gap > 0.0) budget -= rational_from_double(base_gap * (1.0 + 1e-9) + 1e-300);
  if (sgn(budget) <= 0) return po;
  // components (j1, j2) * budget * 7/10 / 2^20 with |j| <= 2^20 keep |e| <= 0.99 budget
  const long scale = 1L << 20;
  const Rational unit = budget * Rational(7, 10) / Rational(scale);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> comp(-scale, scale);
  std::vector<TorusPoint> pts{po.points.front()};
  for (std::size_t n = 0; n + 1 < po.points.size(); ++n) {
    const auto drift = t.difference(po.points[n + 1], t.step(po.points[n]));
    const TorusPoint image = t.step(pts.back());
    const long e0 = comp(rng);
    const long e1 = comp(rng);
    std::array<QuadraticNumber, 2> next{image.coords[0] + drift[0] + QuadraticNumber(unit * e0, t.radicand()),
                                        image.coords[1] + drift[1] + QuadraticNumber(unit * e1, t.radicand())};
    pts.push_back(t.reduce(next));
  }
  return make_pseudo_orbit(t, po.first, std::move(pts));
}

/// Rotation perturbation, same scheme as the toral one on the circle.
inline PseudoOrbit<CircleRotation> perturb(const CircleRotation& r, const PseudoOrbit<CircleRotation>& po,
                                           double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) fail(ErrorCode::precondition, "delta must be nonnegative");
  if (delta == 0.0 || po.points.empty()) return po;
  const double base_gap = compute_gap(r, po.points);
  if (base_gap > delta) fail(ErrorCode::precondition, "input pseudo-orbit gap exceeds delta");
  Rational budget = rational_from_double(delta);
  if (base_gap > 0.0) budget -= rational_from_double(base_gap);
  if (sgn(budget) <= 0) return po;
  const long scale = 1L << 20;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> comp(-scale, scale);
  std::vector<CirclePoint> pts{po.points.front()};
  for (std::size_t n = 0; n + 1 < po.points.size(); ++n) {
    const Rational drift = po.points[n + 1].x - r.apply(po.points[n], 1).x;
    Rational next = r.apply(pts.back(), 1).x + drift + budget * Rational(comp(rng), scale);
    next.canonicalize();
    pts.push_back(r.make_point(next));
  }
  return make_pseudo_orbit(r, po.first, std::move(pts));
}

template <class Sys>
struct Concatenation {
  PseudoOrbit<Sys> orbit;
  std::vector<std::int64_t> switch_times;  // c_0 = 0, c_i = sum_{j<=i} (n_j + X_j)
};

/// Emits {f^t(x_1)}_{t<n_1} {f^t(y_1)}_{t<X_1} {f^t(x_2)}_{t<n_2} ... ; the final point
/// f^{n_j}(x_j) of each segment is replaced by the connector start y_j.
template <class Sys>
Concatenation<Sys> concatenate(const Sys& sys,
                               const std::vector<std::pair<typename Sys::point_type, std::int64_t>>& segments,
                               const std::vector<std::pair<typename Sys::point_type, std::int64_t>>& connectors) {
  if (segments.empty()) fail(ErrorCode::empty_input, "no segments");
  if (connectors.size() != segments.size()) fail(ErrorCode::precondition, "need one connector per segment");
  Concatenation<Sys> out;
  out.switch_times.push_back(0);
  std::vector<typename Sys::point_type> pts;
  std::int64_t c = 0;
  for (std::size_t j = 0; j < segments.size(); ++j) {
    const auto& [x, n] = segments[j];
    const auto& [y, len] = connectors[j];
    if (n < 0 || len < 1) fail(ErrorCode::precondition, "segment lengths must be >= 0 and connector lengths >= 1");
    auto cur = x;
    for (std::int64_t t = 0; t < n; ++t) {
      pts.push_back(cur);
      cur = sys.apply(cur, 1);
    }
    cur = y;
    for (std::int64_t t = 0; t < len; ++t) {
      pts.push_back(cur);
      cur = sys.apply(cur, 1);
    }
    c += n + len;
    out.switch_times.push_back(c);
  }
  out.orbit = make_pseudo_orbit(sys, 0, std::move(pts));
  return out;
}

}  // namespace shadowkit
