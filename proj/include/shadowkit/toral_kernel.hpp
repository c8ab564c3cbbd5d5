#pragma once

// Fast exact orbit iteration on T^2 for points in Q(sqrt D)^2. Both coordinates are
// stored as (P_i + Q_i sqrt D) / den with one shared integer denominator, so a step is
// integer arithmetic plus one integer square root per coordinate and no gcd.

#include <array>
#include <utility>

#include "shadowkit/toral.hpp"

namespace shadowkit {

class ToralOrbitKernel {
 public:
  ToralOrbitKernel(const ToralAutomorphism& t, const TorusPoint& z)
      : t_(&t), d_(t.radicand()), den_(detail::common_denominator(z.coords[0], z.coords[1])) {
    for (int i = 0; i < 2; ++i) std::tie(p_[i], q_[i]) = detail::numerators(z.coords[static_cast<std::size_t>(i)], den_);
  }

  void step() {
    const Mat2& m = t_->matrix();
    Integer p0 = m.a * p_[0] + m.b * p_[1];
    Integer p1 = m.c * p_[0] + m.d * p_[1];
    Integer q0 = m.a * q_[0] + m.b * q_[1];
    Integer q1 = m.c * q_[0] + m.d * q_[1];
    p_[0] = std::move(p0);
    p_[1] = std::move(p1);
    q_[0] = std::move(q0);
    q_[1] = std::move(q1);
    for (int i = 0; i < 2; ++i) p_[i] -= detail::floor_scaled(p_[i], q_[i], d_, den_) * den_;
  }

  TorusPoint point() const {
    return TorusPoint{{QuadraticNumber(Rational(p_[0], den_), Rational(q_[0], den_), d_),
                       QuadraticNumber(Rational(p_[1], den_), Rational(q_[1], den_), d_)}};
  }

  /// Torus distance to y, with an exact decision of d < t (strict) or d <= t.
  Deviation deviation(const TorusPoint& y, const Rational& t, bool strict = true) const {
    Integer ly = detail::common_denominator(y.coords[0], y.coords[1]);
    const Integer m = den_ * ly;
    std::array<Integer, 2> x, r;
    for (int i = 0; i < 2; ++i) {
      const auto [ya, yb] = detail::numerators(y.coords[static_cast<std::size_t>(i)], ly);
      x[i] = p_[i] * ly - ya * den_;
      r[i] = q_[i] * ly - yb * den_;
    }
    return detail::torus_deviation(std::move(x), r, m, d_, &t, strict);
  }

 private:
  const ToralAutomorphism* t_;
  long d_;
  Integer den_;
  std::array<Integer, 2> p_, q_;
};

}  // namespace shadowkit
