#pragma once

// Integer-form torus distance in Q(sqrt D)^2. A coordinate difference is held as
// (x + y sqrt D) / m with integers x, y, m so that the nearest-translate reduction,
// the distance estimate and the exact threshold test need no rational canonicalization.

#include <array>
#include <cmath>
#include <utility>

#include "shadowkit/quadratic.hpp"

namespace shadowkit {

/// Outcome of a certified distance measurement.
struct Deviation {
  double value = 0.0;   // torus distance, correct to a few ulps
  bool within = false;  // exact: distance < threshold (or <= when not strict)
};

namespace detail {

/// floor(y * sqrt(d) * 2^s) for nonsquare d > 0.
inline Integer floor_root_term(const Integer& y, long d, unsigned long s) {
  if (sgn(y) == 0) return 0;
  Integer rad = y * y * d;
  mpz_mul_2exp(rad.get_mpz_t(), rad.get_mpz_t(), 2 * s);
  Integer r;
  mpz_sqrt(r.get_mpz_t(), rad.get_mpz_t());
  return sgn(y) > 0 ? r : Integer(-(r + 1));
}

/// floor((n + y sqrt d) / m) for m > 0.
inline Integer floor_scaled(const Integer& n, const Integer& y, long d, const Integer& m) {
  Integer t = n + floor_root_term(y, d, 0);
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), t.get_mpz_t(), m.get_mpz_t());
  return q;
}

/// Sign of g + h sqrt d.
inline int sign_root(const Integer& g, const Integer& h, long d) {
  const int sg = sgn(g), sh = sgn(h);
  if (sh == 0) return sg;
  if (sg == 0 || sg == sh) return sh;
  const int c = cmp(g * g, h * h * d);
  return c > 0 ? sg : sh;
}

/// Double approximation of (x + y sqrt d) / m and an absolute error bound.
inline std::pair<double, double> approx_scaled(const Integer& x, const Integer& y, long d, const Integer& m) {
  const long mbits = static_cast<long>(mpz_sizeinbase(m.get_mpz_t(), 2));
  unsigned long s = mbits >= 90 ? 0UL : static_cast<unsigned long>(90 - mbits);
  if (sgn(x) == 0 && sgn(y) == 0) return {0.0, 0.0};
  // N = x 2^s + floor(y sqrt(d) 2^s) is within 1 of (x + y sqrt d) 2^s; widen s
  // until N carries enough bits that cancellation cannot eat the relative accuracy.
  Integer num;
  for (;;) {
    mpz_mul_2exp(num.get_mpz_t(), x.get_mpz_t(), s);
    num += floor_root_term(y, d, s);
    if (mpz_sizeinbase(num.get_mpz_t(), 2) >= 72 || s > 8192) break;
    s += 80;
  }
  Integer den;
  mpz_mul_2exp(den.get_mpz_t(), m.get_mpz_t(), s);
  const double v = Rational(num, den).get_d();
  const double err = std::ldexp(1.0, -static_cast<int>(s + static_cast<unsigned long>(mbits)) + 2) +
                     4.0 * std::fabs(v) * 1.2e-16;
  return {v, err};
}

inline Integer common_denominator(const QuadraticNumber& u, const QuadraticNumber& v) {
  Integer l = u.rational_part().get_den();
  mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), u.radical_part().get_den_mpz_t());
  mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.rational_part().get_den_mpz_t());
  mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.radical_part().get_den_mpz_t());
  return l;
}

/// Numerators of q over the denominator m (m must be a multiple of q's denominators).
inline std::pair<Integer, Integer> numerators(const QuadraticNumber& q, const Integer& m) {
  const Rational& a = q.rational_part();
  const Rational& b = q.radical_part();
  return {a.get_num() * (m / a.get_den()), b.get_num() * (m / b.get_den())};
}

/// Distance of the difference vector ((x_i + y_i sqrt d) / m)_i after nearest-translate
/// reduction; decides |.| < t exactly when t is given.
inline Deviation torus_deviation(std::array<Integer, 2> x, const std::array<Integer, 2>& y, const Integer& m, long d,
                                 const Rational* t, bool strict) {
  const Integer two_m = 2 * m;
  for (int i = 0; i < 2; ++i) x[i] -= floor_scaled(2 * x[i] + m, 2 * y[i], d, two_m) * m;
  const auto [v0, e0] = approx_scaled(x[0], y[0], d, m);
  const auto [v1, e1] = approx_scaled(x[1], y[1], d, m);
  Deviation out;
  out.value = std::hypot(v0, v1);
  if (t == nullptr) return out;
  const double err = e0 + e1 + out.value * 2.3e-16;
  const double tv = t->get_d();
  const double terr = std::fabs(tv) * 2.3e-16 + 1e-300;
  if (out.value + err < tv - terr) {
    out.within = true;
  } else if (out.value - err > tv + terr) {
    out.within = false;
  } else {
    // (x0^2 + d y0^2 + x1^2 + d y1^2) + 2 (x0 y0 + x1 y1) sqrt d  against  t^2 m^2
    const Integer g0 = x[0] * x[0] + y[0] * y[0] * d + x[1] * x[1] + y[1] * y[1] * d;
    const Integer h0 = 2 * (x[0] * y[0] + x[1] * y[1]);
    const Integer tden2 = t->get_den() * t->get_den();
    const Integer g = g0 * tden2 - t->get_num() * t->get_num() * m * m;
    const Integer h = h0 * tden2;
    const int s = sign_root(g, h, d);
    out.within = strict ? s < 0 : s <= 0;
  }
  return out;
}

/// Torus distance between points with coordinates in Q(sqrt d).
inline Deviation torus_deviation(const std::array<QuadraticNumber, 2>& p, const std::array<QuadraticNumber, 2>& q,
                                 long d, const Rational* t, bool strict) {
  const Integer m0 = common_denominator(p[0], q[0]);
  const Integer m1 = common_denominator(p[1], q[1]);
  Integer m;
  mpz_lcm(m.get_mpz_t(), m0.get_mpz_t(), m1.get_mpz_t());
  std::array<Integer, 2> x, y;
  for (int i = 0; i < 2; ++i) {
    const auto [pa, pb] = numerators(p[static_cast<std::size_t>(i)], m);
    const auto [qa, qb] = numerators(q[static_cast<std::size_t>(i)], m);
    x[i] = pa - qa;
    y[i] = pb - qb;
  }
  return torus_deviation(std::move(x), y, m, d, t, strict);
}

}  // namespace detail
}  // namespace shadowkit
