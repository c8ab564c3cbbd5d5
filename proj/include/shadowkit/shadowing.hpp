#pragma once

// Constructive shadowing: for a delta-pseudo-orbit {y_n}_{n=a}^{b} produce a point x
// with d(f^n(x), y_n) < epsilon for every n in [a, b].

#include <cmath>
#include <optional>
#include <random>

#include "shadowkit/pseudo_orbit.hpp"
#include "shadowkit/toral_kernel.hpp"

namespace shadowkit {

template <class Sys>
struct ShadowingResult {
  using point_type = typename Sys::point_type;

  point_type tracer;  // x itself; the orbit point matched with y_n is f^n(x)
  std::int64_t first = 0;
  double max_deviation = 0.0;
  std::vector<double> per_index_deviations;
  double epsilon_used = 0.0;
  double delta_used = 0.0;
};

// ---- calibration -----------------------------------------------------------

/// Smallest k >= 0 with 2^{-k} <= epsilon.
inline int shift_level(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail(ErrorCode::precondition, "epsilon must be positive and finite");
  int k = 0;
  while (std::ldexp(1.0, -k) > epsilon) ++k;
  return k;
}

inline double delta_for_epsilon(const ShiftSpace&, double epsilon) { return std::ldexp(1.0, -(shift_level(epsilon) + 1)); }

/// Geometric-series constant: a delta-pseudo-orbit is traced within C * delta.
inline double shadowing_constant(const ToralAutomorphism& t) {
  const Splitting s = t.splitting();
  const double lu = std::fabs(s.lambda_u.to_double());
  const double ls = std::fabs(s.lambda_s.to_double());
  return t.projection_norm() * (1.0 / (1.0 - ls) + lu / (lu - 1.0));
}

inline double delta_for_epsilon(const ToralAutomorphism& t, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail(ErrorCode::precondition, "epsilon must be positive and finite");
  return epsilon / shadowing_constant(t);
}

template <class Sys>
double delta_for_epsilon(const Sys&, double) {
  fail(ErrorCode::unsupported_system, "no shadowing guarantee for this system kind");
}

// ---- verification ----------------------------------------------------------

/// Independent re-check: recomputes f^n(x) from the tracer and every deviation.
template <class Sys>
bool verify_shadowing(const Sys& sys, const PseudoOrbit<Sys>& po, const ShadowingResult<Sys>& r, double epsilon) {
  auto z = sys.apply(r.tracer, po.first);
  for (std::size_t i = 0; i < po.points.size(); ++i) {
    if (i > 0) z = sys.apply(z, 1);
    if (!within(sys, z, po.points[i], epsilon, true)) return false;
  }
  return true;
}

/// Toral re-check: f^a(x) by an exact matrix power, then exact single steps.
inline bool verify_shadowing(const ToralAutomorphism& t, const PseudoOrbit<ToralAutomorphism>& po,
                             const ShadowingResult<ToralAutomorphism>& r, double epsilon) {
  const Rational eps = rational_from_double(epsilon);
  ToralOrbitKernel z(t, t.apply(r.tracer, po.first));
  for (std::size_t i = 0; i < po.points.size(); ++i) {
    if (i > 0) z.step();
    if (!z.deviation(po.points[i], eps).within) return false;
  }
  return true;
}

namespace detail {

template <class Sys>
void fill_deviations(const Sys& sys, const PseudoOrbit<Sys>& po, ShadowingResult<Sys>& r) {
  r.first = po.first;
  r.per_index_deviations.clear();
  auto z = sys.apply(r.tracer, po.first);
  for (std::size_t i = 0; i < po.points.size(); ++i) {
    if (i > 0) z = sys.apply(z, 1);
    r.per_index_deviations.push_back(sys.distance(z, po.points[i]));
  }
  r.max_deviation = *std::max_element(r.per_index_deviations.begin(), r.per_index_deviations.end());
}

}  // namespace detail

// ---- subshifts of finite type ----------------------------------------------

/// Central-symbol splice: x_m = (y_m)_0 on [a, b], y_a's left side before a and
/// y_b's right side after b.
inline ShadowingResult<ShiftSpace> shadow(const ShiftSpace& s, const PseudoOrbit<ShiftSpace>& po, double epsilon) {
  if (po.points.empty()) fail(ErrorCode::empty_input, "empty pseudo-orbit");
  const double delta = delta_for_epsilon(s, epsilon);
  for (const auto& y : po.points) s.require_valid(y);
  if (!is_pseudo_orbit(s, po, delta)) fail(ErrorCode::calibration_violated, "pseudo-orbit gap exceeds delta(epsilon)");

  Word middle;
  middle.reserve(po.points.size());
  for (const auto& y : po.points) middle.push_back(y.at(0));
  const SymbolicPoint left = s.apply(po.points.front(), -po.first);
  const SymbolicPoint right = s.apply(po.points.back(), -po.last());
  ShadowingResult<ShiftSpace> r;
  r.tracer = splice(left, po.first, middle, right);
  if (!s.valid(r.tracer)) fail(ErrorCode::internal_invariant, "spliced tracer is not admissible");
  r.epsilon_used = epsilon;
  r.delta_used = delta;
  detail::fill_deviations(s, po, r);
  if (!(r.max_deviation < epsilon)) fail(ErrorCode::internal_invariant, "spliced tracer misses epsilon");
  return r;
}

// ---- hyperbolic toral automorphisms ----------------------------------------

/// Jump errors e_n (nearest lifts) are split along E^u and E^s; the tracer
/// is y_a + u_a v_u where u_n = (u_{n+1} + alpha_n) / lambda_u, u_b = 0, and the
/// stable correction starts at zero at n = a. The tracer orbit is iterated exactly.
inline ShadowingResult<ToralAutomorphism> shadow(const ToralAutomorphism& t, const PseudoOrbit<ToralAutomorphism>& po,
                                                 double epsilon) {
  if (po.points.empty()) fail(ErrorCode::empty_input, "empty pseudo-orbit");
  const double delta = delta_for_epsilon(t, epsilon);
  for (const auto& y : po.points) t.require_valid(y);
  if (!is_pseudo_orbit(t, po, delta)) fail(ErrorCode::calibration_violated, "pseudo-orbit gap exceeds delta(epsilon)");

  const Splitting sp = t.splitting();
  const QuadraticNumber inv_lu = sp.lambda_u.inverse();
  QuadraticNumber u(Rational(0), t.radicand());
  for (std::size_t i = po.points.size() - 1; i-- > 0;) {
    const auto e = t.difference(po.points[i + 1], t.step(po.points[i]));
    const auto ab = ToralAutomorphism::eigen_coordinates(sp, e);
    u = (u + ab[0]) * inv_lu;
  }
  const auto& y0 = po.points.front();
  const TorusPoint z0 = t.reduce({y0.coords[0] + u * sp.v_u[0], y0.coords[1] + u * sp.v_u[1]});

  ShadowingResult<ToralAutomorphism> r;
  r.tracer = t.apply(z0, -po.first);
  r.epsilon_used = epsilon;
  r.delta_used = delta;
  r.first = po.first;
  const Rational eps = rational_from_double(epsilon);
  ToralOrbitKernel z(t, z0);
  bool ok = true;
  for (std::size_t i = 0; i < po.points.size(); ++i) {
    if (i > 0) z.step();
    const Deviation dev = z.deviation(po.points[i], eps);
    r.per_index_deviations.push_back(dev.value);
    ok = ok && dev.within;
  }
  r.max_deviation = *std::max_element(r.per_index_deviations.begin(), r.per_index_deviations.end());
  if (!ok) fail(ErrorCode::internal_invariant, "toral tracer misses epsilon");
  return r;
}

template <class Sys>
ShadowingResult<Sys> shadow(const Sys&, const PseudoOrbit<Sys>&, double) {
  fail(ErrorCode::unsupported_system, "no shadowing construction for this system kind");
}

// ---- negative control ------------------------------------------------------

template <class Sys>
struct FalsifyResult {
  bool found = false;
  std::optional<PseudoOrbit<Sys>> orbit;
  double delta = 0.0;
  double epsilon = 0.0;
  double grid_spacing = 0.0;
  /// For grid point g/G: an index n with d(f^n(g/G), y_n) >= epsilon + spacing/2.
  std::vector<std::int64_t> certificate;
  std::string note;
};

/// Checks a grid certificate: every x in the circle lies within spacing/2 of a grid
/// point whose orbit leaves the epsilon + spacing/2 ball, so no x epsilon-traces.
inline bool verify_certificate(const CircleRotation& r, const FalsifyResult<CircleRotation>& res) {
  if (!res.found || !res.orbit) return false;
  const auto g = static_cast<long>(res.certificate.size());
  if (g == 0) return false;
  const Rational spacing(1, g);
  const Rational margin = rational_from_double(res.epsilon) + spacing / 2;
  const auto& po = *res.orbit;
  for (long i = 0; i < g; ++i) {
    const std::int64_t n = res.certificate[static_cast<std::size_t>(i)];
    if (n < po.first || n > po.last()) return false;
    const CirclePoint x = r.apply(r.make_point(Rational(i, g)), n);
    if (cmp(r.exact_distance(x, po.at(n)), margin) < 0) return false;
  }
  return is_pseudo_orbit(r, po, res.delta);
}

/// Drifting pseudo-orbits y_{n+1} = y_n + alpha +/- delta of doubling lengths up to the
/// horizon, each tested against a grid of spacing <= epsilon/4. A positive
/// fixed_length tests that single length instead.
inline FalsifyResult<CircleRotation> falsify_shadowing(const CircleRotation& r, double epsilon, std::int64_t horizon,
                                                       std::uint64_t seed, double delta = -1.0,
                                                       std::int64_t fixed_length = 0) {
  if (!(epsilon > 0.0)) fail(ErrorCode::precondition, "epsilon must be positive");
  if (delta < 0.0) delta = epsilon / 100.0;
  FalsifyResult<CircleRotation> res;
  res.delta = delta;
  res.epsilon = epsilon;
  if (epsilon > 0.5) {
    res.note = "epsilon exceeds the circle's diameter; every point traces";
    return res;
  }
  const long g = static_cast<long>(std::ceil(4.0 / epsilon));
  res.grid_spacing = 1.0 / static_cast<double>(g);
  const Rational spacing(1, g);
  const Rational margin = rational_from_double(epsilon) + spacing / 2;
  std::mt19937_64 rng(seed);
  // one ulp below delta: a delta-pseudo-orbit whether delta is read as the double or as
  // the decimal it was parsed from
  const Rational step = rational_from_double(std::nextafter(delta, 0.0));
  const Rational drift = (rng() & 1U) ? step : Rational(-step);
  const Rational start(static_cast<long>(rng() % 1000), 1000);

  if (fixed_length > 0) horizon = fixed_length;
  for (std::int64_t len = fixed_length > 0 ? fixed_length : 2;; len = std::min(horizon, len * 2)) {
    std::vector<CirclePoint> pts{r.make_point(start)};
    for (std::int64_t n = 1; n < len; ++n) pts.push_back(r.make_point(pts.back().x + r.angle() + drift));
    auto po = make_pseudo_orbit(r, 0, std::move(pts));
    std::vector<std::int64_t> cert;
    for (long i = 0; i < g; ++i) {
      CirclePoint x = r.make_point(Rational(i, g));
      std::int64_t hit = -1;
      for (std::int64_t n = 0; n < len; ++n) {
        if (cmp(r.exact_distance(x, po.points[static_cast<std::size_t>(n)]), margin) >= 0) {
          hit = n;
          break;
        }
        x = r.apply(x, 1);
      }
      if (hit < 0) break;
      cert.push_back(hit);
    }
    if (static_cast<long>(cert.size()) == g) {
      res.found = true;
      res.orbit = std::move(po);
      res.certificate = std::move(cert);
      res.note = "grid certificate at spacing 1/" + std::to_string(g);
      return res;
    }
    if (len >= horizon) break;
  }
  res.note = "no certified counterexample within horizon";
  return res;
}

/// Under the discrete metric a pseudo-orbit with gap < 1 is a true orbit, hence shadowed
/// by its first point (checked exhaustively over starting points). With delta >= 1 and
/// epsilon <= 1 the two-point orbit y_0 = 0, y_1 != f(0) cannot be traced.
inline FalsifyResult<FinitePermutation> falsify_shadowing(const FinitePermutation& p, double epsilon,
                                                          std::int64_t horizon, std::uint64_t,
                                                          double delta = -1.0, std::int64_t = 0) {
  if (!(epsilon > 0.0)) fail(ErrorCode::precondition, "epsilon must be positive");
  FalsifyResult<FinitePermutation> res;
  res.epsilon = epsilon;
  res.delta = delta < 0.0 ? epsilon / 100.0 : delta;
  if (epsilon > 1.0) {
    res.note = "epsilon exceeds the diameter; every point traces";
    return res;
  }
  if (res.delta >= 1.0 && p.size() >= 2) {
    const PermPoint y0{0};
    const PermPoint y1{p.apply(y0, 1).i == 0 ? 1 : 0};
    res.found = true;
    res.orbit = make_pseudo_orbit(p, 0, {y0, y1});
    res.certificate = {0, 1};
    res.note = "a tracer must equal y_0 and then f(y_0) != y_1";
    return res;
  }
  const std::int64_t len = std::max<std::int64_t>(1, std::min<std::int64_t>(horizon, 2 * static_cast<std::int64_t>(p.size())));
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(p.size()); ++i) {
    const auto po = from_true_orbit(p, PermPoint{i}, 0, len - 1);
    for (std::int64_t n = 0; n < len; ++n)
      if (p.distance(p.apply(PermPoint{i}, n), po.at(n)) != 0.0) fail(ErrorCode::internal_invariant, "orbit mismatch");
  }
  res.note = "every delta-pseudo-orbit with delta < 1 is a true orbit (exhaustive)";
  return res;
}

/// Hyperbolic systems shadow; the search has nothing to find.
template <class Sys>
FalsifyResult<Sys> falsify_shadowing(const Sys&, double epsilon, std::int64_t, std::uint64_t, double delta = -1.0,
                                     std::int64_t = 0) {
  FalsifyResult<Sys> res;
  res.epsilon = epsilon;
  res.delta = delta < 0.0 ? epsilon / 100.0 : delta;
  res.note = "system has the shadowing property";
  return res;
}

}  // namespace shadowkit
