#pragma once

// Transition-time schedules X^(n)_{i,j}: the least X >= max(M_{n-1}, X^(n-1)_{i,j} + 1)
// with f^{-X}(U_i) ∩ U_j nonempty, thresholds M_n = max_{i != j} X^(n)_{i,j}, and a
// witness y in U_j with f^X(y) in U_i for every entry. Entries are computed on demand;
// thresholds are computed exactly without materializing the r0 x r0 matrices.

#include <algorithm>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "shadowkit/cover.hpp"

namespace shadowkit {

inline constexpr int default_levels = 4;
inline constexpr std::int64_t default_horizon = 100000;

namespace detail {

/// Which path lengths connect a to b in the transition graph. Boolean powers of an
/// irreducible matrix are eventually periodic; lengths past the stored range are
/// folded back onto it.
class PathLengths {
 public:
  explicit PathLengths(const ShiftSpace& s) : r_(s.alphabet_size()) {
    Mat id(r_ * r_, 0), t(r_ * r_, 0);
    for (std::size_t a = 0; a < r_; ++a) {
      id[a * r_ + a] = 1;
      for (std::size_t b = 0; b < r_; ++b) t[a * r_ + b] = s.allowed(static_cast<Symbol>(a), static_cast<Symbol>(b)) ? 1 : 0;
    }
    pow_.push_back(id);
    base_ = r_ * r_ + r_ + 1;
    while (true) {
      while (pow_.size() <= base_ + r_) pow_.push_back(mul(pow_.back(), t));
      period_ = 0;
      for (std::size_t h = 1; h <= r_; ++h) {
        if (pow_[base_ + h] == pow_[base_]) {
          period_ = h;
          break;
        }
      }
      if (period_ != 0) break;
      base_ *= 2;  // not yet periodic: extend
    }
  }

  bool has(Symbol a, Symbol b, std::int64_t len) const {
    if (len < 0) return false;
    auto l = static_cast<std::size_t>(len);
    if (l > base_) l = base_ + (l - base_) % period_;
    return pow_[l][a * r_ + b] != 0;
  }

  /// Least length >= from connecting a to b, or -1.
  std::int64_t next(Symbol a, Symbol b, std::int64_t from) const {
    from = std::max<std::int64_t>(from, 0);
    for (std::int64_t l = from; l <= from + static_cast<std::int64_t>(base_ + period_); ++l)
      if (has(a, b, l)) return l;
    return -1;
  }

  std::size_t period() const { return period_; }

 private:
  using Mat = std::vector<char>;
  Mat mul(const Mat& x, const Mat& y) const {
    Mat z(r_ * r_, 0);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t k = 0; k < r_; ++k)
        if (x[i * r_ + k])
          for (std::size_t j = 0; j < r_; ++j)
            if (y[k * r_ + j]) z[i * r_ + j] = 1;
    return z;
  }

  std::size_t r_;
  std::size_t base_ = 0;
  std::size_t period_ = 0;
  std::vector<Mat> pow_;
};

inline std::uint64_t key3(int n, std::size_t i, std::size_t j) {
  return (static_cast<std::uint64_t>(n) << 58) ^ (static_cast<std::uint64_t>(i) << 29) ^ static_cast<std::uint64_t>(j);
}

}  // namespace detail

// ---- subshifts --------------------------------------------------------------

class ShiftSchedule {
 public:
  using point_type = SymbolicPoint;

  ShiftSchedule(const ShiftCover& cover, int levels, std::int64_t horizon)
      : cover_(&cover), levels_(levels), horizon_(horizon), lengths_(cover.system()) {
    if (levels < 1) fail(ErrorCode::precondition, "schedule needs at least one level");
    compute_thresholds();
  }

  const ShiftCover& cover() const { return *cover_; }
  int levels() const { return levels_; }
  std::int64_t horizon() const { return horizon_; }
  /// M_n for n = 0..levels.
  std::int64_t threshold(int n) const { return thresholds_.at(static_cast<std::size_t>(n)); }
  const std::vector<std::int64_t>& thresholds() const { return thresholds_; }

  /// Does some y in U_j have f^X(y) in U_i?
  bool hits(std::size_t i, std::size_t j, std::int64_t x) const {
    const Word& ui = cover_->word(i);
    const Word& uj = cover_->word(j);
    const auto len = static_cast<std::int64_t>(ui.size());
    if (x < 1) return x == 0 && i == j;
    if (x < len) return std::equal(uj.begin() + x, uj.end(), ui.begin());
    return lengths_.has(uj.back(), ui.front(), x - len + 1);
  }

  std::int64_t time(int n, std::size_t i, std::size_t j) const {
    if (n < 1 || n > levels_) fail(ErrorCode::precondition, "level out of range");
    const auto k = detail::key3(n, i, j);
    if (const auto it = cache_.find(k); it != cache_.end()) return it->second;
    const std::int64_t lo = n == 1 ? 1 : std::max(threshold(n - 1), time(n - 1, i, j) + 1);
    const std::int64_t x = least_hit(i, j, lo, n);
    if (i == j && x > threshold(n))
      fail(ErrorCode::horizon_exceeded, "diagonal entry escapes [M_{n-1}, M_n] at level " + std::to_string(n));
    cache_.emplace(k, x);
    return x;
  }

  /// y in U_j with f^X(y) in U_i, X = X^(n)_{i,j}: u_j, then a bridge, then u_i.
  SymbolicPoint witness(int n, std::size_t i, std::size_t j) const {
    const std::int64_t x = time(n, i, j);
    return connector(i, j, x);
  }

  SymbolicPoint connector(std::size_t i, std::size_t j, std::int64_t x) const {
    if (!hits(i, j, x)) fail(ErrorCode::no_witness, "no connector for this transition time");
    const Word& ui = cover_->word(i);
    const Word& uj = cover_->word(j);
    const auto len = static_cast<std::int64_t>(ui.size());
    Word w = uj;
    if (x < len) {
      w.insert(w.end(), ui.end() - x, ui.end());
    } else {
      const Path p = cover_->system().path(uj.back(), ui.front(), static_cast<std::size_t>(x - len + 1));
      if (!p.found) fail(ErrorCode::internal_invariant, "bridge path vanished");
      w.insert(w.end(), p.symbols.begin(), p.symbols.end());
      w.insert(w.end(), ui.begin(), ui.end());
    }
    const SymbolicPoint y = cover_->system().point_through(w, -cover_->half_width());
    if (!cover_->contains(j, y) || !cover_->contains(i, cover_->system().apply(y, x)))
      fail(ErrorCode::internal_invariant, "connector misses its cells");
    return y;
  }

  bool replay(int n, std::size_t i, std::size_t j) const {
    const SymbolicPoint y = witness(n, i, j);
    return cover_->contains(j, y) && cover_->contains(i, cover_->system().apply(y, time(n, i, j)));
  }

 private:
  std::int64_t least_hit(std::size_t i, std::size_t j, std::int64_t lo, int n) const {
    const auto len = static_cast<std::int64_t>(cover_->window_length());
    std::int64_t x = lo;
    for (; x < len; ++x)
      if (hits(i, j, x)) return x;
    const std::int64_t l = lengths_.next(cover_->word(j).back(), cover_->word(i).front(), x - len + 1);
    if (l < 0 || l + len - 1 > horizon_)
      fail(ErrorCode::horizon_exceeded, "no transition within the horizon at (n=" + std::to_string(n) + ", i=" +
                                            std::to_string(i) + ", j=" + std::to_string(j) + ")");
    return l + len - 1;
  }

  // Per group g = (a, b) of pairs with last(u_j) = a, first(u_i) = b: for X >= L the
  // hit condition depends on g only, so the largest off-diagonal entry of each group
  // follows the recursion v_n(g) = next_g(max(M_{n-1}, v_{n-1}(g) + 1)).
  void compute_thresholds() {
    const ShiftSpace& s = cover_->system();
    if (!s.irreducible()) fail(ErrorCode::not_transitive, "transition matrix is reducible");
    const std::size_t r = s.alphabet_size();
    const auto len = static_cast<std::int64_t>(cover_->window_length());
    const auto& words = cover_->words();

    // word counts by end symbols and by (first, last)
    std::vector<std::int64_t> by_last(r, 0), by_first(r, 0);
    std::vector<std::int64_t> first_last(r * r, 0);
    for (const auto& w : words) {
      ++by_last[w.back()];
      ++by_first[w.front()];
      ++first_last[w.front() * r + w.back()];
    }
    // admissible words of length l from b to a: N_l(b, a); prefix/suffix extension counts
    const auto counts = [&](std::size_t l) {
      std::vector<std::int64_t> c(r * r, 0);  // c[b*r+a]
      for (std::size_t b = 0; b < r; ++b) c[b * r + b] = 1;
      for (std::size_t step = 1; step < l; ++step) {
        std::vector<std::int64_t> nx(r * r, 0);
        for (std::size_t b = 0; b < r; ++b)
          for (std::size_t a = 0; a < r; ++a)
            if (c[b * r + a])
              for (std::size_t t = 0; t < r; ++t)
                if (s.allowed(static_cast<Symbol>(a), static_cast<Symbol>(t))) nx[b * r + t] += c[b * r + a];
        c = std::move(nx);
      }
      return c;
    };
    // E_X(b): words p of length X with p.back() -> b; S_X(a): words q of length X with a -> q.front()
    const auto ext = [&](std::size_t l, bool before) {
      std::vector<std::int64_t> e(r, 0);
      const auto c = counts(l);
      for (std::size_t x = 0; x < r; ++x)
        for (std::size_t y = 0; y < r; ++y)
          for (std::size_t z = 0; z < r; ++z) {
            const std::int64_t nwords = c[y * r + z];
            if (nwords == 0) continue;
            if (before && s.allowed(static_cast<Symbol>(z), static_cast<Symbol>(x))) e[x] += nwords;   // ...z -> x
            if (!before && s.allowed(static_cast<Symbol>(x), static_cast<Symbol>(y))) e[x] += nwords;  // x -> y...
          }
      return e;
    };

    std::vector<std::int64_t> vmax(r * r, -1);  // index a*r+b
    std::vector<long double> compat(r * r, 0.0L);
    for (std::int64_t x = 1; x < len; ++x) {
      const auto nv = counts(static_cast<std::size_t>(len - x));
      const auto e = ext(static_cast<std::size_t>(x), true);
      const auto sx = ext(static_cast<std::size_t>(x), false);
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b)
          compat[a * r + b] += static_cast<long double>(nv[b * r + a]) * static_cast<long double>(e[b]) *
                               static_cast<long double>(sx[a]);
    }
    for (std::size_t a = 0; a < r; ++a) {
      for (std::size_t b = 0; b < r; ++b) {
        const long double total = static_cast<long double>(by_last[a]) * static_cast<long double>(by_first[b]);
        const long double offdiag = total - static_cast<long double>(first_last[b * r + a]);
        if (offdiag <= 0.0L) continue;
        if (compat[a * r + b] < offdiag) {
          const std::int64_t tau = lengths_.next(static_cast<Symbol>(a), static_cast<Symbol>(b), 1);
          if (tau < 0) fail(ErrorCode::not_transitive, "symbols are not connected");
          vmax[a * r + b] = len - 1 + tau;
        } else {
          vmax[a * r + b] = group_max_by_enumeration(static_cast<Symbol>(a), static_cast<Symbol>(b));
        }
      }
    }
    thresholds_.assign(1, 0);
    std::int64_t m1 = 0;
    for (auto v : vmax) m1 = std::max(m1, v);
    if (m1 <= 0) fail(ErrorCode::precondition, "cover has a single cell; no off-diagonal pairs");
    thresholds_.push_back(m1);
    for (int n = 2; n <= levels_; ++n) {
      const std::int64_t prev = thresholds_.back();
      if (prev < len) {
        // group recursion needs thresholds past the window; small covers enumerate instead
        thresholds_.push_back(enumerate_threshold(n));
        continue;
      }
      std::int64_t mn = 0;
      for (std::size_t a = 0; a < r; ++a) {
        for (std::size_t b = 0; b < r; ++b) {
          auto& v = vmax[a * r + b];
          if (v < 0) continue;
          const std::int64_t lo = std::max(prev, v + 1);
          const std::int64_t l = lengths_.next(static_cast<Symbol>(a), static_cast<Symbol>(b), lo - len + 1);
          if (l < 0) fail(ErrorCode::not_transitive, "symbols are not connected");
          v = l + len - 1;
          mn = std::max(mn, v);
        }
      }
      if (mn > horizon_) fail(ErrorCode::horizon_exceeded, "threshold M_" + std::to_string(n) + " exceeds the horizon");
      thresholds_.push_back(mn);
    }
  }

  std::int64_t enumerate_threshold(int n) const {
    const std::size_t cells = cover_->size();
    if (static_cast<double>(cells) * static_cast<double>(cells) > 4e6)
      fail(ErrorCode::budget_exceeded, "cover too large to enumerate thresholds");
    // time() reads thresholds_[n] only for diagonal pairs, which are skipped here
    std::int64_t best = 0;
    for (std::size_t i = 0; i < cells; ++i)
      for (std::size_t j = 0; j < cells; ++j)
        if (i != j) best = std::max(best, time(n, i, j));
    return best;
  }

  std::int64_t group_max_by_enumeration(Symbol a, Symbol b) const {
    const auto& words = cover_->words();
    std::vector<std::size_t> js, is;
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (words[k].back() == a) js.push_back(k);
      if (words[k].front() == b) is.push_back(k);
    }
    if (static_cast<double>(js.size()) * static_cast<double>(is.size()) > 5e7)
      fail(ErrorCode::budget_exceeded, "transition group too large to enumerate");
    std::int64_t best = -1;
    for (auto j : js)
      for (auto i : is)
        if (i != j) best = std::max(best, least_hit(i, j, 1, 1));
    return best;
  }

  const ShiftCover* cover_;
  int levels_;
  std::int64_t horizon_;
  detail::PathLengths lengths_;
  std::vector<std::int64_t> thresholds_;
  mutable std::map<std::uint64_t, std::int64_t> cache_;
};

inline ShiftSchedule transition_times(const ShiftSpace&, const ShiftCover& cover, int levels = default_levels,
                                      std::int64_t horizon = default_horizon) {
  return ShiftSchedule(cover, levels, horizon);
}

// ---- toral grids --------------------------------------------------------------

namespace detail {

using i128 = __int128;

inline std::int64_t floor_div(i128 n, i128 d) {
  if (d < 0) n = -n, d = -d;
  i128 q = n / d;
  if (n % d != 0 && n < 0) --q;
  return static_cast<std::int64_t>(q);
}

inline std::int64_t pos_mod(std::int64_t x, std::int64_t m) {
  const std::int64_t r = x % m;
  return r < 0 ? r + m : r;
}

/// Offsets g in (Z/m)^2 whose open cell g + (0,1)^2 meets the open parallelogram
/// A^X (0,1)^2 modulo m Z^2 (scaled coordinates: a cover cell has side 1). One
/// meeting plane cell is kept per offset to build witnesses.
struct OffsetSet {
  std::int64_t m = 0;
  std::size_t count = 0;
  std::vector<std::uint64_t> bits;
  std::vector<std::array<std::int64_t, 2>> plane_cell;

  bool full() const { return count == static_cast<std::size_t>(m * m); }
  std::size_t index(std::int64_t gx, std::int64_t gy) const { return static_cast<std::size_t>(gx * m + gy); }
  bool test(std::size_t g) const { return (bits[g >> 6] >> (g & 63)) & 1U; }
  void insert(std::int64_t x, std::int64_t y) {
    const std::size_t g = index(pos_mod(x, m), pos_mod(y, m));
    if (test(g)) return;
    bits[g >> 6] |= std::uint64_t{1} << (g & 63);
    plane_cell[g] = {x, y};
    ++count;
  }
};

struct Frac {
  i128 num, den;  // den > 0
};

inline bool less(const Frac& x, const Frac& y) { return x.num * y.den < y.num * x.den; }

inline OffsetSet rasterize(const Mat2& ax, std::int64_t m, std::size_t column_budget) {
  for (const Integer* e : {&ax.a, &ax.b, &ax.c, &ax.d})
    if (!e->fits_slong_p() || abs(*e) > Integer(std::int64_t{1} << 40))
      fail(ErrorCode::budget_exceeded, "transition time too large for grid rasterization");
  const std::array<i128, 2> a{ax.a.get_si(), ax.c.get_si()};
  const std::array<i128, 2> b{ax.b.get_si(), ax.d.get_si()};
  const std::array<std::array<i128, 2>, 4> v{{{0, 0}, a, {a[0] + b[0], a[1] + b[1]}, b}};
  i128 xmin = 0, xmax = 0;
  for (const auto& p : v) xmin = std::min(xmin, p[0]), xmax = std::max(xmax, p[0]);

  OffsetSet out;
  out.m = m;
  out.bits.assign(static_cast<std::size_t>((m * m + 63) / 64), 0);
  out.plane_cell.resize(static_cast<std::size_t>(m * m));
  std::size_t columns = 0;
  for (i128 x = xmin; x < xmax && !out.full(); ++x) {
    if (++columns > column_budget) fail(ErrorCode::budget_exceeded, "grid rasterization exceeded its column budget");
    bool any = false;
    Frac lo{}, hi{};
    const auto take = [&](const Frac& f) {
      if (!any) {
        lo = hi = f;
        any = true;
        return;
      }
      if (less(f, lo)) lo = f;
      if (less(hi, f)) hi = f;
    };
    for (const auto& p : v)
      if (p[0] >= x && p[0] <= x + 1) take({p[1], 1});
    for (int e = 0; e < 4; ++e) {
      const auto& p = v[static_cast<std::size_t>(e)];
      const auto& q = v[static_cast<std::size_t>((e + 1) % 4)];
      if (p[0] == q[0]) continue;
      for (i128 x0 : {x, x + 1}) {
        if (x0 < std::min(p[0], q[0]) || x0 > std::max(p[0], q[0])) continue;
        i128 den = q[0] - p[0];
        i128 num = p[1] * den + (x0 - p[0]) * (q[1] - p[1]);
        if (den < 0) num = -num, den = -den;
        take({num, den});
      }
    }
    if (!any) continue;
    const std::int64_t kmin = floor_div(lo.num, lo.den);
    const std::int64_t kmax = -floor_div(-hi.num, hi.den) - 1;
    for (std::int64_t k = kmin; k <= kmax && !out.full(); ++k) out.insert(static_cast<std::int64_t>(x), k);
  }
  return out;
}

/// Vertex average of the closed parallelogram A^X [0,1]^2 clipped to h + [0,1]^2.
inline std::array<Rational, 2> clipped_centre(const Mat2& ax, const std::array<std::int64_t, 2>& h) {
  using P = std::array<Rational, 2>;
  std::vector<P> poly{{Rational(0), Rational(0)},
                      {Rational(ax.a), Rational(ax.c)},
                      {Rational(ax.a + ax.b), Rational(ax.c + ax.d)},
                      {Rational(ax.b), Rational(ax.d)}};
  const auto clip = [&](int axis, const Rational& bound, bool keep_above) {
    std::vector<P> out;
    const auto inside = [&](const P& p) { return keep_above ? p[axis] >= bound : p[axis] <= bound; };
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const P& cur = poly[k];
      const P& nxt = poly[(k + 1) % poly.size()];
      const bool ci = inside(cur), ni = inside(nxt);
      if (ci) out.push_back(cur);
      if (ci != ni) {
        const Rational t = (bound - cur[axis]) / (nxt[axis] - cur[axis]);
        out.push_back({cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])});
      }
    }
    poly = std::move(out);
  };
  clip(0, Rational(h[0]), true);
  clip(0, Rational(h[0] + 1), false);
  clip(1, Rational(h[1]), true);
  clip(1, Rational(h[1] + 1), false);
  if (poly.empty()) fail(ErrorCode::internal_invariant, "witness cell does not meet the parallelogram");
  P c{Rational(0), Rational(0)};
  for (const auto& p : poly) c[0] += p[0], c[1] += p[1];
  c[0] /= Rational(static_cast<long>(poly.size()));
  c[1] /= Rational(static_cast<long>(poly.size()));
  return c;
}

}  // namespace detail

class ToralSchedule {
 public:
  using point_type = TorusPoint;

  ToralSchedule(const ToralCover& cover, int levels, std::int64_t horizon, std::size_t column_budget = 50'000'000)
      : cover_(&cover), levels_(levels), horizon_(horizon), column_budget_(column_budget) {
    if (levels < 1) fail(ErrorCode::precondition, "schedule needs at least one level");
    compute_thresholds();
  }

  const ToralCover& cover() const { return *cover_; }
  int levels() const { return levels_; }
  std::int64_t horizon() const { return horizon_; }
  std::int64_t threshold(int n) const { return thresholds_.at(static_cast<std::size_t>(n)); }
  const std::vector<std::int64_t>& thresholds() const { return thresholds_; }
  /// First X >= 1 at which every pair of cells is connected.
  std::int64_t saturation_time() const { return saturation_; }

  bool hits(std::size_t i, std::size_t j, std::int64_t x) const {
    if (x < 1) return x == 0 && i == j;
    return offsets(x).test(offset_for(i, j, x));
  }

  std::int64_t time(int n, std::size_t i, std::size_t j) const {
    if (n < 1 || n > levels_) fail(ErrorCode::precondition, "level out of range");
    const auto k = detail::key3(n, i, j);
    if (const auto it = cache_.find(k); it != cache_.end()) return it->second;
    const std::int64_t lo = n == 1 ? 1 : std::max(threshold(n - 1), time(n - 1, i, j) + 1);
    std::int64_t x = lo;
    while (!hits(i, j, x)) {
      if (++x > horizon_)
        fail(ErrorCode::horizon_exceeded, "no transition within the horizon at (n=" + std::to_string(n) + ", i=" +
                                              std::to_string(i) + ", j=" + std::to_string(j) + ")");
    }
    if (i == j && x > threshold(n))
      fail(ErrorCode::horizon_exceeded, "diagonal entry escapes [M_{n-1}, M_n] at level " + std::to_string(n));
    cache_.emplace(k, x);
    return x;
  }

  TorusPoint witness(int n, std::size_t i, std::size_t j) const { return connector(i, j, time(n, i, j)); }

  /// y in U_j with f^X(y) in U_i, from the centre of a plane cell meeting A^X(U_j).
  TorusPoint connector(std::size_t i, std::size_t j, std::int64_t x) const {
    if (!hits(i, j, x)) fail(ErrorCode::no_witness, "no connector for this transition time");
    const ToralAutomorphism& t = cover_->system();
    const Mat2 ax = t.matrix_power(x);
    const auto& h = offsets(x).plane_cell[offset_for(i, j, x)];
    const auto q = detail::clipped_centre(ax, h);
    const Mat2 inv = t.matrix_power(-x);
    const Rational ux = Rational(inv.a) * q[0] + Rational(inv.b) * q[1];
    const Rational uy = Rational(inv.c) * q[0] + Rational(inv.d) * q[1];
    const auto cj = cover_->corner(j);
    const Rational m(cover_->side_count());
    const TorusPoint y = t.make_point((Rational(cj[0]) + ux) / m, (Rational(cj[1]) + uy) / m);
    if (!cover_->contains(j, y) || !cover_->contains(i, t.apply(y, x)))
      fail(ErrorCode::internal_invariant, "connector misses its cells");
    return y;
  }

  bool replay(int n, std::size_t i, std::size_t j) const {
    const TorusPoint y = witness(n, i, j);
    return cover_->contains(j, y) && cover_->contains(i, cover_->system().apply(y, time(n, i, j)));
  }

 private:
  // g = c_i - A^X c_j (mod m)
  std::size_t offset_for(std::size_t i, std::size_t j, std::int64_t x) const {
    const auto& ax = power_mod(x);
    const auto ci = cover_->corner(i);
    const auto cj = cover_->corner(j);
    const std::int64_t m = cover_->side_count();
    const std::int64_t ux = detail::pos_mod(ax[0] * cj[0] + ax[1] * cj[1], m);
    const std::int64_t uy = detail::pos_mod(ax[2] * cj[0] + ax[3] * cj[1], m);
    return static_cast<std::size_t>(detail::pos_mod(ci[0] - ux, m) * m + detail::pos_mod(ci[1] - uy, m));
  }

  const std::array<std::int64_t, 4>& power_mod(std::int64_t x) const {
    const std::int64_t m = cover_->side_count();
    while (static_cast<std::int64_t>(powers_.size()) <= x) {
      if (powers_.empty()) {
        powers_.push_back({1 % m, 0, 0, 1 % m});
        continue;
      }
      const auto& p = powers_.back();
      const Mat2& a = cover_->system().matrix();
      const std::int64_t a00 = detail::pos_mod(a.a.get_si(), m), a01 = detail::pos_mod(a.b.get_si(), m);
      const std::int64_t a10 = detail::pos_mod(a.c.get_si(), m), a11 = detail::pos_mod(a.d.get_si(), m);
      powers_.push_back({(a00 * p[0] + a01 * p[2]) % m, (a00 * p[1] + a01 * p[3]) % m, (a10 * p[0] + a11 * p[2]) % m,
                         (a10 * p[1] + a11 * p[3]) % m});
    }
    return powers_[static_cast<std::size_t>(x)];
  }

  const detail::OffsetSet& offsets(std::int64_t x) const {
    auto it = sets_.find(x);
    if (it == sets_.end())
      it = sets_.emplace(x, detail::rasterize(cover_->system().matrix_power(x), cover_->side_count(), column_budget_)).first;
    return it->second;
  }

  // M_1: with F the first saturated time, M_1 = F exactly when some cell j misses
  // some i != j at every X < F; otherwise lower candidates are tested the same way.
  void compute_thresholds() {
    const std::int64_t m = cover_->side_count();
    const std::size_t cells = cover_->size();
    if (cells < 2) fail(ErrorCode::precondition, "cover has a single cell; no off-diagonal pairs");
    std::int64_t f = 1;
    while (!offsets(f).full()) {
      if (++f > horizon_) fail(ErrorCode::horizon_exceeded, "grid never saturates within the horizon");
    }
    saturation_ = f;
    std::int64_t m1 = -1;
    std::size_t work = 0;
    for (std::int64_t y = f - 1; y >= 1 && m1 < 0; --y) {
      bool some_missing = false;
      for (std::size_t j = 0; j < cells && !some_missing; ++j) {
        std::vector<char> hit(cells, 0);
        const auto cj = cover_->corner(j);
        for (std::int64_t x = 1; x <= y; ++x) {
          const auto& s = offsets(x);
          const auto& ax = power_mod(x);
          const std::int64_t ux = ax[0] * cj[0] + ax[1] * cj[1];
          const std::int64_t uy = ax[2] * cj[0] + ax[3] * cj[1];
          for (std::size_t g = 0; g < cells; ++g) {
            if (!s.test(g)) continue;
            const std::int64_t gx = static_cast<std::int64_t>(g) / m, gy = static_cast<std::int64_t>(g) % m;
            hit[static_cast<std::size_t>(detail::pos_mod(ux + gx, m) * m + detail::pos_mod(uy + gy, m))] = 1;
          }
          work += cells;
        }
        for (std::size_t i = 0; i < cells; ++i)
          if (i != j && !hit[i]) some_missing = true;
        if (work > std::size_t{4'000'000'000}) fail(ErrorCode::budget_exceeded, "threshold search exceeded its budget");
      }
      if (some_missing) m1 = y + 1;
    }
    if (m1 < 0) m1 = 1;
    thresholds_ = {0, m1};
    // Levels n >= 2 in closed form when every X in [M_1, M_1 + levels - 1] saturates:
    // X^(n)_{ij} = max(M_{n-1}, X^(n-1)_{ij} + 1) and M_n = M_1 + n - 1.
    bool closed = true;
    for (int n = 2; n <= levels_; ++n) {
      for (std::int64_t x = m1; closed && x <= m1 + n - 1; ++x) closed = offsets(x).full();
      if (closed) {
        thresholds_.push_back(m1 + n - 1);
        continue;
      }
      if (static_cast<double>(cells) * static_cast<double>(cells) > 4e6)
        fail(ErrorCode::budget_exceeded, "grid does not saturate on [M_1, M_1 + n - 1]; closed-form levels unavailable");
      std::int64_t best = 0;
      for (std::size_t i = 0; i < cells; ++i)
        for (std::size_t j = 0; j < cells; ++j)
          if (i != j) best = std::max(best, time(n, i, j));
      thresholds_.push_back(best);
    }
  }

  const ToralCover* cover_;
  int levels_;
  std::int64_t horizon_;
  std::size_t column_budget_;
  std::int64_t saturation_ = 0;
  std::vector<std::int64_t> thresholds_;
  mutable std::map<std::int64_t, detail::OffsetSet> sets_;
  mutable std::vector<std::array<std::int64_t, 4>> powers_;
  mutable std::map<std::uint64_t, std::int64_t> cache_;
};

inline ToralSchedule transition_times(const ToralAutomorphism&, const ToralCover& cover, int levels = default_levels,
                                      std::int64_t horizon = default_horizon) {
  return ToralSchedule(cover, levels, horizon);
}

}  // namespace shadowkit
