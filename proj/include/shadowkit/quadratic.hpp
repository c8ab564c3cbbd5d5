#pragma once

// Exact arithmetic in the real quadratic field Q(sqrt(D)).
//
// Values are a + b*sqrt(D) with rational a, b and a fixed positive
// non-square radicand D. Sign tests, comparisons and floor() are exact;
// to_double() evaluates with enough precision to survive the cancellation
// that orbits of hyperbolic maps produce (a and b grow like |lambda|^n while
// the value itself stays in [0, 1)).

#include <gmpxx.h>

#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "shadowkit/error.hpp"

namespace shadowkit {

using Rational = mpq_class;
using Integer = mpz_class;

inline Integer floor_of(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline int sign_of(const Rational& q) { return sgn(q); }

/// Parses "p", "p/q", or a finite decimal "-1.25e-3" into an exact rational.
inline Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (c != ' ' && c != '\t') s.push_back(c);
  }
  if (s.empty()) fail(ErrorCode::syntax, "empty number");
  try {
    if (s.find('/') != std::string::npos) {
      if (s[0] == '+') s.erase(0, 1);
      Rational q(s, 10);
      if (q.get_den() == 0) fail(ErrorCode::syntax, "zero denominator in '" + text + "'");
      q.canonicalize();
      return q;
    }
    bool neg = false;
    std::size_t pos = 0;
    if (s[pos] == '+' || s[pos] == '-') {
      neg = s[pos] == '-';
      ++pos;
    }
    std::string mant;
    long exp10 = 0;
    bool seen_dot = false;
    bool any_digit = false;
    for (; pos < s.size(); ++pos) {
      char c = s[pos];
      if (c >= '0' && c <= '9') {
        mant.push_back(c);
        any_digit = true;
        if (seen_dot) --exp10;
      } else if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else if (c == 'e' || c == 'E') {
        exp10 += std::stol(s.substr(pos + 1));
        pos = s.size();
        break;
      } else {
        fail(ErrorCode::syntax, "bad number '" + text + "'");
      }
    }
    if (!any_digit) fail(ErrorCode::syntax, "bad number '" + text + "'");
    Integer num(mant, 10);
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
    Rational q = exp10 < 0 ? Rational(num, scale) : Rational(num * scale);
    q.canonicalize();
    return neg ? Rational(-q) : q;
  } catch (const std::invalid_argument&) {
    fail(ErrorCode::syntax, "bad number '" + text + "'");
  } catch (const std::out_of_range&) {
    fail(ErrorCode::syntax, "bad exponent in '" + text + "'");
  }
}

/// Exact value of a finite double.
inline Rational rational_from_double(double v) {
  Rational q(v);
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(10); }

class QuadraticNumber {
 public:
  QuadraticNumber() = default;
  QuadraticNumber(Rational a, Rational b, long radicand) : a_(std::move(a)), b_(std::move(b)), d_(radicand) {
    if (d_ <= 0) fail(ErrorCode::invalid_system, "radicand must be positive");
    a_.canonicalize();
    b_.canonicalize();
  }
  explicit QuadraticNumber(Rational a, long radicand = 0) : a_(std::move(a)), b_(0), d_(radicand) { a_.canonicalize(); }

  static QuadraticNumber sqrt_of(long radicand) { return {Rational(0), Rational(1), radicand}; }

  const Rational& rational_part() const { return a_; }
  const Rational& radical_part() const { return b_; }
  long radicand() const { return d_; }
  bool is_rational() const { return sgn(b_) == 0; }

  int sign() const {
    const int sa = sgn(a_);
    const int sb = sgn(b_);
    if (sb == 0) return sa;
    if (sa == 0 || sa == sb) return sb;
    const Rational lhs = a_ * a_;
    const Rational rhs = b_ * b_ * d_;
    const int c = cmp(lhs, rhs);
    return c > 0 ? sa : sb;
  }

  QuadraticNumber conjugate() const { return {a_, -b_, d_, raw_tag{}}; }

  QuadraticNumber& operator+=(const QuadraticNumber& o) {
    d_ = merge(o);
    a_ += o.a_;
    b_ += o.b_;
    return *this;
  }
  QuadraticNumber& operator-=(const QuadraticNumber& o) {
    d_ = merge(o);
    a_ -= o.a_;
    b_ -= o.b_;
    return *this;
  }
  QuadraticNumber& operator*=(const QuadraticNumber& o) {
    const long d = merge(o);
    Rational na = a_ * o.a_ + b_ * o.b_ * d;
    Rational nb = a_ * o.b_ + b_ * o.a_;
    a_ = std::move(na);
    b_ = std::move(nb);
    d_ = d;
    return *this;
  }
  QuadraticNumber& operator*=(const Rational& q) {
    a_ *= q;
    b_ *= q;
    return *this;
  }
  QuadraticNumber& operator/=(const QuadraticNumber& o) { return *this *= o.inverse(); }

  QuadraticNumber inverse() const {
    const Rational norm = a_ * a_ - b_ * b_ * d_;
    if (sgn(norm) == 0) fail(ErrorCode::internal_invariant, "division by zero in Q(sqrt D)");
    return {a_ / norm, -b_ / norm, d_, raw_tag{}};
  }

  Rational norm() const { return a_ * a_ - b_ * b_ * d_; }

  friend QuadraticNumber operator+(QuadraticNumber x, const QuadraticNumber& y) { return x += y; }
  friend QuadraticNumber operator-(QuadraticNumber x, const QuadraticNumber& y) { return x -= y; }
  friend QuadraticNumber operator*(QuadraticNumber x, const QuadraticNumber& y) { return x *= y; }
  friend QuadraticNumber operator*(QuadraticNumber x, const Rational& q) { return x *= q; }
  friend QuadraticNumber operator*(const Rational& q, QuadraticNumber x) { return x *= q; }
  friend QuadraticNumber operator/(QuadraticNumber x, const QuadraticNumber& y) { return x /= y; }
  friend QuadraticNumber operator-(const QuadraticNumber& x) { return {-x.a_, -x.b_, x.d_, raw_tag{}}; }

  friend bool operator==(const QuadraticNumber& x, const QuadraticNumber& y) {
    return x.a_ == y.a_ && x.b_ == y.b_ && (sgn(x.b_) == 0 || x.d_ == y.d_);
  }
  friend int compare(const QuadraticNumber& x, const QuadraticNumber& y) { return (x - y).sign(); }
  friend bool operator<(const QuadraticNumber& x, const QuadraticNumber& y) { return compare(x, y) < 0; }
  friend bool operator<=(const QuadraticNumber& x, const QuadraticNumber& y) { return compare(x, y) <= 0; }
  friend bool operator>(const QuadraticNumber& x, const QuadraticNumber& y) { return compare(x, y) > 0; }
  friend bool operator>=(const QuadraticNumber& x, const QuadraticNumber& y) { return compare(x, y) >= 0; }

  /// Exact floor.
  Integer floor() const {
    if (sgn(b_) == 0) return floor_of(a_);
    // b*sqrt(D) = sign(b) * sqrt(D p^2) / q for b = p/q.
    Integer p = abs(b_.get_num());
    const Integer& q = b_.get_den();
    Integer rad = p * p * d_;
    Integer r;
    mpz_sqrt(r.get_mpz_t(), rad.get_mpz_t());
    Rational lo = a_ + (sgn(b_) > 0 ? Rational(r, q) : Rational(-(r + 1), q));
    lo.canonicalize();
    Integer m = floor_of(lo);
    while ((*this - QuadraticNumber(Rational(m + 1), d_)).sign() >= 0) ++m;
    return m;
  }

  /// Representation in [0, 1).
  QuadraticNumber frac() const {
    QuadraticNumber r = *this;
    r.a_ -= Rational(floor());
    return r;
  }

  double to_double() const {
    if (sgn(b_) == 0) return a_.get_d();
    const std::size_t bits = 96 + bit_size(a_) + bit_size(b_);
    mpf_class root(d_, bits);
    root = sqrt(root);
    mpf_class va(a_, bits);
    mpf_class vb(b_, bits);
    mpf_class v(va + vb * root, bits);
    return v.get_d();
  }

  std::string to_string() const {
    std::ostringstream os;
    os << a_.get_str(10);
    if (sgn(b_) != 0) {
      os << (sgn(b_) > 0 ? "+" : "") << b_.get_str(10) << "√" << d_;
    }
    return os.str();
  }

  friend std::ostream& operator<<(std::ostream& os, const QuadraticNumber& x) { return os << x.to_string(); }

  /// Inverse of to_string(): "a", "a+b√D", "a-b√D" (also accepts "sqrt" for the radical sign).
  static QuadraticNumber parse(const std::string& text, long radicand) {
    std::string s = text;
    const std::string utf_root = "√";
    std::size_t root_pos = s.find(utf_root);
    std::size_t root_len = utf_root.size();
    if (root_pos == std::string::npos) {
      root_pos = s.find("sqrt");
      root_len = 4;
    }
    if (root_pos == std::string::npos) return QuadraticNumber(parse_rational(s), radicand);
    const long d = std::stol(s.substr(root_pos + root_len));
    if (radicand != 0 && d != radicand) fail(ErrorCode::malformed_point, "radicand mismatch in '" + text + "'");
    std::string head = s.substr(0, root_pos);
    // split head into a and b at the last sign that is not part of an exponent or the leading sign
    std::size_t split = std::string::npos;
    for (std::size_t i = head.size(); i-- > 1;) {
      if ((head[i] == '+' || head[i] == '-') && head[i - 1] != 'e' && head[i - 1] != 'E') {
        split = i;
        break;
      }
    }
    if (split == std::string::npos) fail(ErrorCode::malformed_point, "bad quadratic '" + text + "'");
    return {parse_rational(head.substr(0, split)), parse_rational(head.substr(split)), d};
  }

 private:
  struct raw_tag {};
  QuadraticNumber(Rational a, Rational b, long d, raw_tag) : a_(std::move(a)), b_(std::move(b)), d_(d) {}

  long merge(const QuadraticNumber& o) const {
    if (sgn(o.b_) == 0) return d_ != 0 ? d_ : o.d_;
    if (sgn(b_) == 0 || d_ == 0) return o.d_;
    if (d_ != o.d_) fail(ErrorCode::internal_invariant, "mixed radicands");
    return d_;
  }

  static std::size_t bit_size(const Rational& q) {
    return mpz_sizeinbase(q.get_num_mpz_t(), 2) + mpz_sizeinbase(q.get_den_mpz_t(), 2);
  }

  Rational a_{0};
  Rational b_{0};
  long d_ = 0;
};

}  // namespace shadowkit
