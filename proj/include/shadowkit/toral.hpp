#pragma once

// Hyperbolic toral automorphisms.
//
// ToralAutomorphism is the exact 2x2 case: coordinates live in Q(sqrt D),
// D = trace^2 - 4 det, so rational periodic points and the quadratic-irrational
// stable/unstable lines are all represented without rounding.
// FloatToralAutomorphism handles any dimension in double precision and carries
// an explicit absolute error bound with every point.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "shadowkit/error.hpp"
#include "shadowkit/quadratic.hpp"
#include "shadowkit/torus_metric.hpp"

namespace shadowkit {

using IntMatrix = std::vector<std::vector<long>>;

struct TorusPoint {
  std::array<QuadraticNumber, 2> coords;
  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

/// 2x2 integer matrix with arbitrary-precision entries.
struct Mat2 {
  Integer a, b, c, d;

  static Mat2 identity() { return {1, 0, 0, 1}; }
  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  Integer det() const { return a * d - b * c; }
  Integer trace() const { return a + d; }
};

inline Mat2 power(Mat2 base, std::uint64_t e) {
  Mat2 r = Mat2::identity();
  while (e) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

struct Splitting {
  QuadraticNumber lambda_u;
  QuadraticNumber lambda_s;
  std::array<QuadraticNumber, 2> v_u;  // exact, unnormalized: (b, lambda - a)
  std::array<QuadraticNumber, 2> v_s;
  std::array<double, 2> unit_u;
  std::array<double, 2> unit_s;
};

/// Coordinate difference reduced to [-1/2, 1/2); ties go to -1/2.
inline QuadraticNumber nearest_difference(const QuadraticNumber& x, const QuadraticNumber& y) {
  const Rational half(1, 2);
  QuadraticNumber t = x - y + QuadraticNumber(half, x.radicand());
  t = t.frac();
  return t - QuadraticNumber(half, x.radicand());
}

class ToralAutomorphism {
 public:
  using point_type = TorusPoint;

  ToralAutomorphism(long a, long b, long c, long d) : m_{a, b, c, d} {
    const long det = a * d - b * c;
    if (det != 1 && det != -1) fail(ErrorCode::invalid_system, "toral matrix must have |det| = 1");
    const long tr = a + d;
    const bool hyperbolic = det == 1 ? std::labs(tr) > 2 : tr != 0;
    if (!hyperbolic) fail(ErrorCode::not_hyperbolic, "matrix has an eigenvalue of modulus 1");
    det_ = det;
    radicand_ = tr * tr - 4 * det;
    const Mat2 inv{det * d, -det * b, -det * c, det * a};
    inverse_ = inv;
  }

  explicit ToralAutomorphism(const IntMatrix& m) : ToralAutomorphism(check2(m)[0][0], m[0][1], m[1][0], m[1][1]) {}

  static ToralAutomorphism cat_map() { return {2, 1, 1, 1}; }

  long a() const { return m_.a.get_si(); }
  long b() const { return m_.b.get_si(); }
  long c() const { return m_.c.get_si(); }
  long d() const { return m_.d.get_si(); }
  long det() const { return det_; }
  long trace() const { return a() + d(); }
  long radicand() const { return radicand_; }
  const Mat2& matrix() const { return m_; }
  const Mat2& inverse_matrix() const { return inverse_; }

  Mat2 matrix_power(std::int64_t k) const {
    return k >= 0 ? power(m_, static_cast<std::uint64_t>(k)) : power(inverse_, static_cast<std::uint64_t>(-k));
  }

  TorusPoint make_point(const Rational& x, const Rational& y) const {
    return reduce({QuadraticNumber(x, radicand_), QuadraticNumber(y, radicand_)});
  }

  TorusPoint reduce(const std::array<QuadraticNumber, 2>& v) const {
    TorusPoint p{{v[0].frac(), v[1].frac()}};
    return p;
  }

  bool valid(const TorusPoint& p) const {
    for (const auto& c : p.coords) {
      if (!c.is_rational() && c.radicand() != radicand_) return false;
      if (c.sign() < 0 || c >= QuadraticNumber(Rational(1), radicand_)) return false;
    }
    return true;
  }

  void require_valid(const TorusPoint& p) const {
    if (!valid(p)) fail(ErrorCode::malformed_point, "torus point must have coordinates in [0,1) of Q(sqrt D)");
  }

  /// Plane action of an integer matrix (no reduction).
  static std::array<QuadraticNumber, 2> act(const Mat2& m, const std::array<QuadraticNumber, 2>& v) {
    const long d = v[0].is_rational() ? v[1].radicand() : v[0].radicand();
    const auto& a0 = v[0].rational_part();
    const auto& a1 = v[1].rational_part();
    const auto& b0 = v[0].radical_part();
    const auto& b1 = v[1].radical_part();
    if (d <= 0) return {QuadraticNumber(combine(m.a, a0, m.b, a1)), QuadraticNumber(combine(m.c, a0, m.d, a1))};
    return {QuadraticNumber(combine(m.a, a0, m.b, a1), combine(m.a, b0, m.b, b1), d),
            QuadraticNumber(combine(m.c, a0, m.d, a1), combine(m.c, b0, m.d, b1), d)};
  }

  TorusPoint apply(const TorusPoint& x, std::int64_t k) const {
    require_valid(x);
    if (k == 0) return x;
    if (k == 1) return step(x);
    return reduce(act(matrix_power(k), x.coords));
  }

  /// One forward step without validation; used on hot paths.
  TorusPoint step(const TorusPoint& x) const { return reduce(act(m_, x.coords)); }

  std::array<QuadraticNumber, 2> difference(const TorusPoint& x, const TorusPoint& y) const {
    return {nearest_difference(x.coords[0], y.coords[0]), nearest_difference(x.coords[1], y.coords[1])};
  }

  /// Exact squared torus distance.
  QuadraticNumber distance_squared(const TorusPoint& x, const TorusPoint& y) const {
    auto v = difference(x, y);
    return v[0] * v[0] + v[1] * v[1];
  }

  double distance(const TorusPoint& x, const TorusPoint& y) const {
    return detail::torus_deviation(x.coords, y.coords, radicand_, nullptr, true).value;
  }

  /// Exact test d(x, y) < t (strict) or d(x, y) <= t.
  bool within(const TorusPoint& x, const TorusPoint& y, const Rational& t, bool strict = true) const {
    return detail::torus_deviation(x.coords, y.coords, radicand_, &t, strict).within;
  }

  Splitting splitting() const {
    const QuadraticNumber root = QuadraticNumber::sqrt_of(radicand_);
    const QuadraticNumber tr(Rational(trace()), radicand_);
    const Rational half(1, 2);
    QuadraticNumber plus = (tr + root) * half;
    QuadraticNumber minus = (tr - root) * half;
    Splitting s;
    const bool plus_expands = compare(plus * plus, QuadraticNumber(Rational(1), radicand_)) > 0;
    s.lambda_u = plus_expands ? plus : minus;
    s.lambda_s = plus_expands ? minus : plus;
    const QuadraticNumber qa(Rational(a()), radicand_);
    const QuadraticNumber qb(Rational(b()), radicand_);
    s.v_u = {qb, s.lambda_u - qa};
    s.v_s = {qb, s.lambda_s - qa};
    const auto unit = [](const std::array<QuadraticNumber, 2>& v) {
      const double x = v[0].to_double();
      const double y = v[1].to_double();
      const double n = std::hypot(x, y);
      return std::array<double, 2>{x / n, y / n};
    };
    s.unit_u = unit(s.v_u);
    s.unit_s = unit(s.v_s);
    return s;
  }

  /// Coordinates (alpha, beta) of v in the basis (v_u, v_s).
  static std::array<QuadraticNumber, 2> eigen_coordinates(const Splitting& s, const std::array<QuadraticNumber, 2>& v) {
    const QuadraticNumber det = s.v_u[0] * s.v_s[1] - s.v_u[1] * s.v_s[0];
    const QuadraticNumber inv = det.inverse();
    QuadraticNumber alpha = (v[0] * s.v_s[1] - v[1] * s.v_s[0]) * inv;
    QuadraticNumber beta = (s.v_u[0] * v[1] - s.v_u[1] * v[0]) * inv;
    return {alpha, beta};
  }

  /// Norm of the projection onto E^u along E^s (equal to the one onto E^s along
  /// E^u in two dimensions): 1 / sin(angle between the eigenlines).
  double projection_norm() const {
    const Splitting s = splitting();
    const double cross = s.unit_u[0] * s.unit_s[1] - s.unit_u[1] * s.unit_s[0];
    return 1.0 / std::fabs(cross);
  }

  /// Index of any periodic point: number of eigenvalues inside the unit circle.
  int index() const { return 1; }

  std::string describe() const {
    return "toral:" + m_.a.get_str() + " " + m_.b.get_str() + ";" + m_.c.get_str() + " " + m_.d.get_str();
  }

 private:
  /// p * x + q * y with a single canonicalization.
  static Rational combine(const Integer& p, const Rational& x, const Integer& q, const Rational& y) {
    Rational r;
    if (x.get_den() == y.get_den()) {
      r.get_num() = p * x.get_num() + q * y.get_num();
      r.get_den() = x.get_den();
    } else {
      r.get_num() = p * x.get_num() * y.get_den() + q * y.get_num() * x.get_den();
      r.get_den() = x.get_den() * y.get_den();
    }
    r.canonicalize();
    return r;
  }

  static const IntMatrix& check2(const IntMatrix& m) {
    if (m.size() != 2 || m[0].size() != 2 || m[1].size() != 2)
      fail(ErrorCode::invalid_system, "exact toral systems must be 2x2");
    return m;
  }

  Mat2 m_;
  Mat2 inverse_;
  long det_ = 1;
  long radicand_ = 5;
};

struct FloatTorusPoint {
  std::vector<double> coords;
  double error = 0.0;  // absolute bound on each coordinate
  friend bool operator==(const FloatTorusPoint&, const FloatTorusPoint&) = default;
};

struct Measured {
  double value = 0.0;
  double error = 0.0;
};

/// Any-dimension hyperbolic toral automorphism in double precision with tracked error.
class FloatToralAutomorphism {
 public:
  using point_type = FloatTorusPoint;

  explicit FloatToralAutomorphism(IntMatrix m) : m_(std::move(m)) {
    const std::size_t n = m_.size();
    if (n < 1) fail(ErrorCode::invalid_system, "empty toral matrix");
    for (const auto& row : m_) {
      if (row.size() != n) fail(ErrorCode::invalid_system, "toral matrix must be square");
    }
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(m_[i][j]);
      }
    }
    inverse_ = exact_inverse(m_);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(e, false);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
      if (std::fabs(std::abs(solver.eigenvalues()[i]) - 1.0) < 1e-9)
        fail(ErrorCode::not_hyperbolic, "matrix has an eigenvalue of modulus 1");
    }
    norm_ = inf_norm(m_);
    inverse_norm_ = inf_norm(inverse_);
  }

  std::size_t dimension() const { return m_.size(); }
  const IntMatrix& matrix() const { return m_; }

  bool valid(const FloatTorusPoint& p) const {
    if (p.coords.size() != dimension() || !(p.error >= 0.0)) return false;
    for (double c : p.coords) {
      if (!(c >= 0.0 && c < 1.0)) return false;
    }
    return true;
  }

  FloatTorusPoint apply(const FloatTorusPoint& x, std::int64_t k) const {
    if (!valid(x)) fail(ErrorCode::malformed_point, "float torus point out of range");
    FloatTorusPoint y = x;
    const IntMatrix& m = k >= 0 ? m_ : inverse_;
    const double nrm = k >= 0 ? norm_ : inverse_norm_;
    const double ulp = std::numeric_limits<double>::epsilon();
    const auto steps = static_cast<std::uint64_t>(k >= 0 ? k : -k);
    const auto n = dimension();
    for (std::uint64_t s = 0; s < steps; ++s) {
      std::vector<double> out(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += static_cast<double>(m[i][j]) * y.coords[j];
        acc -= std::floor(acc);
        if (acc >= 1.0) acc = 0.0;
        out[i] = acc;
      }
      y.coords = std::move(out);
      y.error = nrm * y.error + (static_cast<double>(n) + 2.0) * nrm * ulp;
    }
    return y;
  }

  Measured measure(const FloatTorusPoint& x, const FloatTorusPoint& y) const {
    double sq = 0.0;
    for (std::size_t i = 0; i < dimension(); ++i) {
      double t = x.coords[i] - y.coords[i];
      t -= std::round(t);
      sq += t * t;
    }
    const double err = std::sqrt(static_cast<double>(dimension())) * (x.error + y.error) +
                       4.0 * std::numeric_limits<double>::epsilon();
    return {std::sqrt(sq), err};
  }

  double distance(const FloatTorusPoint& x, const FloatTorusPoint& y) const { return measure(x, y).value; }

  std::string describe() const {
    std::string s = "toral-float:";
    for (std::size_t i = 0; i < m_.size(); ++i) {
      if (i) s += ';';
      for (std::size_t j = 0; j < m_.size(); ++j) {
        if (j) s += ' ';
        s += std::to_string(m_[i][j]);
      }
    }
    return s;
  }

 private:
  static double inf_norm(const IntMatrix& m) {
    double best = 0.0;
    for (const auto& row : m) {
      double s = 0.0;
      for (long v : row) s += std::fabs(static_cast<double>(v));
      best = std::max(best, s);
    }
    return best;
  }

  static IntMatrix exact_inverse(const IntMatrix& m) {
    const std::size_t n = m.size();
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(2 * n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a[i][j] = m[i][j];
      a[i][n + i] = 1;
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t piv = col;
      while (piv < n && sgn(a[piv][col]) == 0) ++piv;
      if (piv == n) fail(ErrorCode::invalid_system, "singular toral matrix");
      std::swap(a[piv], a[col]);
      const Rational p = a[col][col];
      for (auto& v : a[col]) v /= p;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col || sgn(a[r][col]) == 0) continue;
        const Rational f = a[r][col];
        for (std::size_t j = 0; j < 2 * n; ++j) a[r][j] -= f * a[col][j];
      }
    }
    IntMatrix inv(n, std::vector<long>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const Rational& v = a[i][n + j];
        if (v.get_den() != 1) fail(ErrorCode::invalid_system, "toral matrix must have |det| = 1");
        inv[i][j] = v.get_num().get_si();
      }
    }
    return inv;
  }

  IntMatrix m_;
  IntMatrix inverse_;
  double norm_ = 1.0;
  double inverse_norm_ = 1.0;
};

}  // namespace shadowkit
