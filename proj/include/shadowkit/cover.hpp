#pragma once

// Finite covers by cells of diameter < delta: cylinders on a centred window for
// subshifts, dyadic half-open grid boxes for the 2-torus.

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "shadowkit/system.hpp"

namespace shadowkit {

inline constexpr std::size_t default_cell_budget = std::size_t{1} << 20;

/// Cylinders [u]_{-w..w} for every admissible word u of length 2w + 1.
class ShiftCover {
 public:
  ShiftCover(const ShiftSpace& s, int w, double target_delta, std::vector<Word> words)
      : sys_(&s), w_(w), target_delta_(target_delta), words_(std::move(words)) {
    for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(key(words_[i]), i);
  }

  const ShiftSpace& system() const { return *sys_; }
  int half_width() const { return w_; }
  std::size_t window_length() const { return static_cast<std::size_t>(2 * w_ + 1); }
  double target_delta() const { return target_delta_; }
  /// Points sharing the window [-w, w] first differ at |i| >= w + 1.
  double diameter() const { return std::ldexp(1.0, -(w_ + 1)); }
  std::size_t size() const { return words_.size(); }
  const Word& word(std::size_t cell) const { return words_.at(cell); }
  const std::vector<Word>& words() const { return words_; }

  std::size_t cell_of(const SymbolicPoint& p) const {
    const auto it = index_.find(key(p.window(-w_, w_ + 1)));
    if (it == index_.end()) fail(ErrorCode::malformed_point, "point window is not admissible");
    return it->second;
  }
  bool contains(std::size_t cell, const SymbolicPoint& p) const { return p.window(-w_, w_ + 1) == words_.at(cell); }
  SymbolicPoint representative(std::size_t cell) const { return sys_->point_through(words_.at(cell), -w_); }
  std::string describe_cell(std::size_t cell) const {
    std::string s;
    for (Symbol c : words_.at(cell)) s += detail::symbol_char(c);
    return s;
  }

 private:
  static std::string key(const Word& w) { return std::string(w.begin(), w.end()); }

  const ShiftSpace* sys_;
  int w_;
  double target_delta_;
  std::vector<Word> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Half-open boxes [c/m, (c+1)/m) on the 2-torus, m = 2^j.
class ToralCover {
 public:
  ToralCover(const ToralAutomorphism& t, long m, double target_delta) : sys_(&t), m_(m), target_delta_(target_delta) {}

  const ToralAutomorphism& system() const { return *sys_; }
  long side_count() const { return m_; }
  Rational side() const { return Rational(1, m_); }
  double target_delta() const { return target_delta_; }
  double diameter() const { return std::sqrt(2.0) / static_cast<double>(m_); }
  std::size_t size() const { return static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_); }

  std::array<long, 2> corner(std::size_t cell) const {
    return {static_cast<long>(cell / static_cast<std::size_t>(m_)), static_cast<long>(cell % static_cast<std::size_t>(m_))};
  }
  std::size_t cell_index(long cx, long cy) const {
    return static_cast<std::size_t>(cx) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(cy);
  }
  std::size_t cell_of(const TorusPoint& p) const {
    sys_->require_valid(p);
    const long cx = (p.coords[0] * Rational(m_)).floor().get_si();
    const long cy = (p.coords[1] * Rational(m_)).floor().get_si();
    return cell_index(cx, cy);
  }
  bool contains(std::size_t cell, const TorusPoint& p) const { return cell_of(p) == cell; }
  TorusPoint representative(std::size_t cell) const {
    const auto c = corner(cell);
    return sys_->make_point(Rational(2 * c[0] + 1, 2 * m_), Rational(2 * c[1] + 1, 2 * m_));
  }
  std::string describe_cell(std::size_t cell) const {
    const auto c = corner(cell);
    return "[" + std::to_string(c[0]) + "/" + std::to_string(m_) + "," + std::to_string(c[1]) + "/" + std::to_string(m_) + ")";
  }

 private:
  const ToralAutomorphism* sys_;
  long m_;
  double target_delta_;
};

/// Smallest w with 2^{-w} < delta; one cylinder per admissible word of length 2w + 1.
inline ShiftCover build_cover(const ShiftSpace& s, double delta, std::size_t budget = default_cell_budget) {
  if (!(delta > 0.0)) fail(ErrorCode::precondition, "cover needs delta > 0");
  int w = 0;
  while (!(std::ldexp(1.0, -w) < delta)) {
    if (++w > 60) fail(ErrorCode::budget_exceeded, "delta too small for a cylinder cover");
  }
  const std::size_t len = static_cast<std::size_t>(2 * w + 1);
  const std::size_t r = s.alphabet_size();
  // count admissible words first so the budget is enforced before enumeration
  std::vector<double> count(r, 1.0);
  for (std::size_t step = 1; step < len; ++step) {
    std::vector<double> next(r, 0.0);
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = 0; b < r; ++b)
        if (s.allowed(static_cast<Symbol>(b), static_cast<Symbol>(a))) next[a] += count[b];
    count = std::move(next);
  }
  double total = 0.0;
  for (double c : count) total += c;
  if (total > static_cast<double>(budget))
    fail(ErrorCode::budget_exceeded, "cylinder cover needs " + std::to_string(static_cast<long long>(total)) + " cells");

  std::vector<Word> words;
  Word cur;
  // depth-first in symbol order: words come out lexicographically sorted
  const auto extend = [&](auto&& self) -> void {
    if (cur.size() == len) {
      words.push_back(cur);
      return;
    }
    for (std::size_t t = 0; t < r; ++t) {
      const auto sym = static_cast<Symbol>(t);
      if (!cur.empty() && !s.allowed(cur.back(), sym)) continue;
      cur.push_back(sym);
      self(self);
      cur.pop_back();
    }
  };
  extend(extend);
  return ShiftCover(s, w, delta, std::move(words));
}

/// Dyadic grid of side 2^{-j}, j smallest with sqrt(2) 2^{-j} < delta.
inline ToralCover build_cover(const ToralAutomorphism& t, double delta, std::size_t budget = default_cell_budget) {
  if (!(delta > 0.0)) fail(ErrorCode::precondition, "cover needs delta > 0");
  const Rational d = rational_from_double(delta);
  long m = 1;
  // sqrt(2)/m < delta  <=>  2 < delta^2 m^2
  while (!(Rational(2) < d * d * Rational(m) * Rational(m))) {
    m *= 2;
    if (static_cast<double>(m) * static_cast<double>(m) > static_cast<double>(budget))
      fail(ErrorCode::budget_exceeded, "grid cover exceeds the cell budget");
  }
  return ToralCover(t, m, delta);
}

}  // namespace shadowkit
