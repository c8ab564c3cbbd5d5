#pragma once

// Non-hyperbolic contrast systems: an exact rational circle rotation and a
// permutation of a finite set with the discrete metric.

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "shadowkit/error.hpp"
#include "shadowkit/quadratic.hpp"

namespace shadowkit {

struct CirclePoint {
  Rational x;
  friend bool operator==(const CirclePoint&, const CirclePoint&) = default;
};

inline Rational frac(const Rational& q) { return q - Rational(floor_of(q)); }

class CircleRotation {
 public:
  using point_type = CirclePoint;

  explicit CircleRotation(Rational angle) : angle_(std::move(angle)) {
    angle_.canonicalize();
    if (sgn(angle_) < 0 || angle_ >= 1) fail(ErrorCode::invalid_system, "rotation angle must lie in [0,1)");
  }

  const Rational& angle() const { return angle_; }

  CirclePoint make_point(Rational x) const {
    x.canonicalize();
    return {frac(x)};
  }

  bool valid(const CirclePoint& p) const { return sgn(p.x) >= 0 && p.x < 1; }

  CirclePoint apply(const CirclePoint& p, std::int64_t k) const {
    if (!valid(p)) fail(ErrorCode::malformed_point, "circle point must lie in [0,1)");
    return {frac(p.x + angle_ * Rational(static_cast<long>(k)))};
  }

  /// Exact arc distance in [0, 1/2].
  Rational exact_distance(const CirclePoint& p, const CirclePoint& q) const {
    const Rational t = frac(p.x - q.x);
    const Rational u = 1 - t;
    return t < u ? t : u;
  }

  double distance(const CirclePoint& p, const CirclePoint& q) const { return exact_distance(p, q).get_d(); }

  std::string describe() const { return "rotation:" + angle_.get_str(); }

 private:
  Rational angle_;
};

struct PermPoint {
  std::int64_t i = 0;
  friend bool operator==(const PermPoint&, const PermPoint&) = default;
};

class FinitePermutation {
 public:
  using point_type = PermPoint;

  explicit FinitePermutation(std::vector<std::int64_t> images) : images_(std::move(images)) {
    const auto m = static_cast<std::int64_t>(images_.size());
    if (m < 1) fail(ErrorCode::invalid_system, "empty permutation");
    std::vector<char> seen(images_.size(), 0);
    for (auto v : images_) {
      if (v < 0 || v >= m || seen[static_cast<std::size_t>(v)])
        fail(ErrorCode::invalid_system, "images must form a permutation of 0..m-1");
      seen[static_cast<std::size_t>(v)] = 1;
    }
    inverse_.assign(images_.size(), 0);
    for (std::size_t i = 0; i < images_.size(); ++i) inverse_[static_cast<std::size_t>(images_[i])] = static_cast<std::int64_t>(i);
  }

  std::size_t size() const { return images_.size(); }
  const std::vector<std::int64_t>& images() const { return images_; }

  bool valid(const PermPoint& p) const { return p.i >= 0 && p.i < static_cast<std::int64_t>(images_.size()); }

  PermPoint apply(const PermPoint& p, std::int64_t k) const {
    if (!valid(p)) fail(ErrorCode::malformed_point, "permutation point out of range");
    // reduce k modulo the cycle length of p
    std::int64_t len = 1;
    for (std::int64_t j = images_[static_cast<std::size_t>(p.i)]; j != p.i; j = images_[static_cast<std::size_t>(j)]) ++len;
    std::int64_t steps = ((k % len) + len) % len;
    std::int64_t cur = p.i;
    while (steps-- > 0) cur = images_[static_cast<std::size_t>(cur)];
    return {cur};
  }

  /// Discrete metric.
  double distance(const PermPoint& p, const PermPoint& q) const { return p.i == q.i ? 0.0 : 1.0; }

  std::string describe() const {
    std::string s = "permutation:";
    for (std::size_t i = 0; i < images_.size(); ++i) {
      if (i) s += ' ';
      s += std::to_string(images_[i]);
    }
    return s;
  }

 private:
  std::vector<std::int64_t> images_;
  std::vector<std::int64_t> inverse_;
};

}  // namespace shadowkit
