#pragma once

// Subshifts of finite type over {0, ..., r-1}.
//
// Points are eventually periodic bi-infinite sequences stored as
// (left_tail, core, right_tail, offset):
//
//     ... L L L core R R R ...
//
// with core[offset] at index 0. This class is closed under the shift and
// under the splices the shadowing and specification constructions perform,
// and equality and distance are decidable on it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "shadowkit/error.hpp"

namespace shadowkit {

using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;

struct SymbolicPoint {
  Word left_tail;
  Word core;
  Word right_tail;
  std::int64_t offset = 0;

  std::int64_t core_begin() const { return -offset; }
  std::int64_t core_end() const { return -offset + static_cast<std::int64_t>(core.size()); }

  Symbol at(std::int64_t i) const {
    const std::int64_t j = i + offset;
    const auto n = static_cast<std::int64_t>(core.size());
    if (j >= 0 && j < n) return core[static_cast<std::size_t>(j)];
    if (j >= n) {
      const auto len = static_cast<std::int64_t>(right_tail.size());
      return right_tail[static_cast<std::size_t>((j - n) % len)];
    }
    const auto len = static_cast<std::int64_t>(left_tail.size());
    return left_tail[static_cast<std::size_t>(((j % len) + len) % len)];
  }

  /// Symbols at indices [from, to).
  Word window(std::int64_t from, std::int64_t to) const {
    Word w;
    w.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, to - from)));
    for (std::int64_t i = from; i < to; ++i) w.push_back(at(i));
    return w;
  }

  friend bool operator==(const SymbolicPoint&, const SymbolicPoint&) = default;
};

namespace detail {

/// Symbols 0..35 print as 0-9a-z.
inline char symbol_char(Symbol c) { return c < 10 ? static_cast<char>('0' + c) : static_cast<char>('a' + (c - 10)); }

inline Word primitive_root(const Word& w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
    if (ok) return Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(p));
  }
  return w;
}

inline std::int64_t lcm_len(std::int64_t a, std::int64_t b) { return std::lcm(a, b); }

}  // namespace detail

/// Reduces a point to canonical form: primitive tails, minimal core, and for
/// purely periodic points an offset in [0, period).
inline SymbolicPoint canonical(SymbolicPoint p) {
  if (p.left_tail.empty() || p.right_tail.empty()) fail(ErrorCode::malformed_point, "empty tail");
  p.left_tail = detail::primitive_root(p.left_tail);
  p.right_tail = detail::primitive_root(p.right_tail);
  while (!p.core.empty() && p.core.back() == p.right_tail.back()) {
    p.core.pop_back();
    std::rotate(p.right_tail.rbegin(), p.right_tail.rbegin() + 1, p.right_tail.rend());
  }
  std::size_t drop = 0;
  while (drop < p.core.size() && p.core[drop] == p.left_tail.front()) {
    ++drop;
    std::rotate(p.left_tail.begin(), p.left_tail.begin() + 1, p.left_tail.end());
  }
  if (drop > 0) {
    p.core.erase(p.core.begin(), p.core.begin() + static_cast<std::ptrdiff_t>(drop));
    p.offset -= static_cast<std::int64_t>(drop);
  }
  if (p.core.empty() && p.left_tail == p.right_tail) {
    const auto len = static_cast<std::int64_t>(p.right_tail.size());
    p.offset = ((p.offset % len) + len) % len;
  }
  return p;
}

/// Purely periodic point ... w w w ... with w[phase] at index 0.
inline SymbolicPoint periodic_point(const Word& w, std::int64_t phase = 0) {
  if (w.empty()) fail(ErrorCode::malformed_point, "empty periodic word");
  return canonical(SymbolicPoint{w, {}, w, phase});
}

/// Sequence equal to `left` on (-inf, begin), `middle` on [begin, begin+|middle|),
/// and `right` on [begin+|middle|, +inf).
inline SymbolicPoint splice(const SymbolicPoint& left, std::int64_t begin, const Word& middle,
                            const SymbolicPoint& right) {
  const std::int64_t end = begin + static_cast<std::int64_t>(middle.size());
  const std::int64_t start = std::min(left.core_begin(), begin);
  const std::int64_t stop = std::max(right.core_end(), end);
  SymbolicPoint out;
  const auto ll = static_cast<std::int64_t>(left.left_tail.size());
  const auto rl = static_cast<std::int64_t>(right.right_tail.size());
  out.left_tail = left.window(start - ll, start);
  out.core = left.window(start, begin);
  out.core.insert(out.core.end(), middle.begin(), middle.end());
  Word tail_part = right.window(end, stop);
  out.core.insert(out.core.end(), tail_part.begin(), tail_part.end());
  out.right_tail = right.window(stop, stop + rl);
  out.offset = -start;
  return canonical(std::move(out));
}

/// Number of leading indices (by |i|) on which x and y agree; nullopt when equal.
/// Returns the least k >= 0 with x_k != y_k or x_{-k} != y_{-k}.
inline std::optional<std::int64_t> first_mismatch(const SymbolicPoint& x, const SymbolicPoint& y) {
  const std::int64_t lo = std::min(x.core_begin(), y.core_begin());
  const std::int64_t hi = std::max(x.core_end(), y.core_end());
  std::int64_t period = detail::lcm_len(static_cast<std::int64_t>(x.left_tail.size()),
                                        static_cast<std::int64_t>(y.left_tail.size()));
  period = detail::lcm_len(period, static_cast<std::int64_t>(x.right_tail.size()));
  period = detail::lcm_len(period, static_cast<std::int64_t>(y.right_tail.size()));
  const std::int64_t reach = std::max(std::abs(lo - period), std::abs(hi + period)) + 1;
  for (std::int64_t k = 0; k <= reach; ++k) {
    if (x.at(k) != y.at(k) || x.at(-k) != y.at(-k)) return k;
  }
  return std::nullopt;
}

struct Path {
  Word symbols;  // intermediate symbols strictly between the endpoints
  bool found = false;
};

class ShiftSpace {
 public:
  using point_type = SymbolicPoint;

  explicit ShiftSpace(std::vector<std::vector<std::uint8_t>> transition) : t_(std::move(transition)) {
    const std::size_t r = t_.size();
    if (r < 2) fail(ErrorCode::invalid_system, "alphabet size must be at least 2");
    if (r > 36) fail(ErrorCode::invalid_system, "alphabet size above 36 not supported");
    for (const auto& row : t_) {
      if (row.size() != r) fail(ErrorCode::invalid_system, "transition matrix must be square");
      for (auto v : row) {
        if (v > 1) fail(ErrorCode::invalid_system, "transition matrix must be 0/1");
      }
    }
    for (std::size_t i = 0; i < r; ++i) {
      bool row_ok = false;
      bool col_ok = false;
      for (std::size_t j = 0; j < r; ++j) {
        row_ok = row_ok || t_[i][j] != 0;
        col_ok = col_ok || t_[j][i] != 0;
      }
      if (!row_ok || !col_ok) fail(ErrorCode::invalid_system, "every row and column of T needs a 1");
    }
    compute_reachability();
  }

  static ShiftSpace full(std::size_t r) {
    return ShiftSpace(std::vector<std::vector<std::uint8_t>>(r, std::vector<std::uint8_t>(r, 1)));
  }

  std::size_t alphabet_size() const { return t_.size(); }
  const std::vector<std::vector<std::uint8_t>>& transition() const { return t_; }
  bool allowed(Symbol a, Symbol b) const { return t_[a][b] != 0; }
  bool irreducible() const { return irreducible_; }
  bool reachable(Symbol a, Symbol b) const { return reach_[a][b]; }

  bool admissible(const Word& w) const {
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (!allowed(w[i], w[i + 1])) return false;
    }
    return true;
  }

  bool admissible_cycle(const Word& w) const {
    return !w.empty() && admissible(w) && allowed(w.back(), w.front());
  }

  bool valid(const SymbolicPoint& p) const {
    const auto in_range = [&](const Word& w) {
      return std::all_of(w.begin(), w.end(), [&](Symbol s) { return s < alphabet_size(); });
    };
    if (p.left_tail.empty() || p.right_tail.empty()) return false;
    if (!in_range(p.left_tail) || !in_range(p.core) || !in_range(p.right_tail)) return false;
    if (!admissible_cycle(p.left_tail) || !admissible_cycle(p.right_tail)) return false;
    Word seam;
    seam.push_back(p.left_tail.back());
    seam.insert(seam.end(), p.core.begin(), p.core.end());
    seam.push_back(p.right_tail.front());
    return admissible(seam);
  }

  void require_valid(const SymbolicPoint& p) const {
    if (!valid(p)) fail(ErrorCode::malformed_point, "point is not an admissible sequence of this shift");
  }

  SymbolicPoint apply(const SymbolicPoint& x, std::int64_t k) const {
    require_valid(x);
    SymbolicPoint y = x;
    y.offset += k;
    return canonical(std::move(y));
  }

  double distance(const SymbolicPoint& x, const SymbolicPoint& y) const {
    auto k = first_mismatch(x, y);
    return k ? std::ldexp(1.0, -static_cast<int>(*k)) : 0.0;
  }

  /// Shortest admissible path a -> ... -> b with exactly `steps` transitions,
  /// or the shortest one with at least one transition when steps == 0.
  Path path(Symbol a, Symbol b, std::size_t steps) const {
    const std::size_t r = alphabet_size();
    if (steps == 0) {
      for (std::size_t s = 1; s <= r * r + 1; ++s) {
        Path p = path(a, b, s);
        if (p.found) return p;
      }
      return {};
    }
    // layered reachability backwards from b
    std::vector<std::vector<char>> ok(steps + 1, std::vector<char>(r, 0));
    ok[steps][b] = 1;
    for (std::size_t layer = steps; layer-- > 0;) {
      for (std::size_t s = 0; s < r; ++s) {
        for (std::size_t t = 0; t < r && !ok[layer][s]; ++t) {
          if (t_[s][t] && ok[layer + 1][t]) ok[layer][s] = 1;
        }
      }
    }
    if (!ok[0][a]) return {};
    Path out;
    out.found = true;
    Symbol cur = a;
    for (std::size_t layer = 1; layer < steps; ++layer) {
      for (std::size_t t = 0; t < r; ++t) {
        if (t_[cur][t] && ok[layer][t]) {
          cur = static_cast<Symbol>(t);
          break;
        }
      }
      out.symbols.push_back(cur);
    }
    return out;
  }

  /// Periodic word C and path P such that ...CCC P s is admissible.
  std::pair<Word, Word> left_extension(Symbol s) const { return extension(s, true); }
  /// Path P and periodic word C such that s P CCC... is admissible.
  std::pair<Word, Word> right_extension(Symbol s) const { return extension(s, false); }

  /// A point whose symbols on [from, from+|w|) spell w.
  SymbolicPoint point_through(const Word& w, std::int64_t from) const {
    if (w.empty() || !admissible(w)) fail(ErrorCode::malformed_point, "inadmissible word");
    auto [lcycle, lpath] = left_extension(w.front());
    auto [rpath, rcycle] = right_extension(w.back());
    Word core = lpath;
    core.insert(core.end(), w.begin(), w.end());
    core.insert(core.end(), rpath.begin(), rpath.end());
    SymbolicPoint p{lcycle, core, rcycle, static_cast<std::int64_t>(lpath.size()) - from};
    return canonical(std::move(p));
  }

  std::string describe() const {
    std::string s = "sft:";
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (i) s += ';';
      for (auto v : t_[i]) s += static_cast<char>('0' + v);
    }
    return s;
  }

 private:
  std::pair<Word, Word> extension(Symbol s, bool backwards) const {
    const std::size_t r = alphabet_size();
    std::vector<int> seen(r, -1);
    Word walk{s};
    seen[s] = 0;
    while (true) {
      const Symbol cur = walk.back();
      Symbol next = 0;
      for (std::size_t t = 0; t < r; ++t) {
        if (backwards ? t_[t][cur] : t_[cur][t]) {
          next = static_cast<Symbol>(t);
          break;
        }
      }
      if (seen[next] >= 0) {
        const auto first = static_cast<std::size_t>(seen[next]);
        const auto at = [&](std::size_t i) { return walk[i]; };
        Word path;
        Word cycle;
        if (backwards) {
          // walk[i+1] precedes walk[i]; read forwards the cycle is
          // walk[first] -> walk[last] -> ... -> walk[first+1] -> walk[first].
          cycle.push_back(at(first));
          for (std::size_t i = walk.size(); i-- > first + 1;) cycle.push_back(at(i));
          for (std::size_t i = first; i >= 1; --i) path.push_back(at(i));
          return {cycle, path};
        }
        for (std::size_t i = 1; i <= first; ++i) path.push_back(at(i));
        for (std::size_t i = first + 1; i < walk.size(); ++i) cycle.push_back(at(i));
        cycle.push_back(at(first));
        return {path, cycle};
      }
      seen[next] = static_cast<int>(walk.size());
      walk.push_back(next);
    }
  }

  void compute_reachability() {
    const std::size_t r = alphabet_size();
    reach_.assign(r, std::vector<bool>(r, false));
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < r; ++j) reach_[i][j] = t_[i][j] != 0;
    }
    for (std::size_t k = 0; k < r; ++k) {
      for (std::size_t i = 0; i < r; ++i) {
        if (!reach_[i][k]) continue;
        for (std::size_t j = 0; j < r; ++j) {
          if (reach_[k][j]) reach_[i][j] = true;
        }
      }
    }
    irreducible_ = true;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < r; ++j) irreducible_ = irreducible_ && reach_[i][j];
    }
  }

  std::vector<std::vector<std::uint8_t>> t_;
  std::vector<std::vector<bool>> reach_;
  bool irreducible_ = false;
};

}  // namespace shadowkit
