#include <gtest/gtest.h>

#include <random>

#include "shadowkit/schedule.hpp"

using namespace shadowkit;

namespace {

// Brute force: least X >= lo such that some admissible word of length L + X has
// u_j on [0, L) and u_i on [X, X + L).
std::int64_t brute_least(const ShiftSpace& s, const Word& ui, const Word& uj, std::int64_t lo, std::int64_t cap) {
  const auto len = static_cast<std::int64_t>(ui.size());
  const std::size_t r = s.alphabet_size();
  for (std::int64_t x = lo; x <= cap; ++x) {
    // enumerate fills of the positions strictly between (for x >= L) or check overlap
    const std::int64_t total = len + x;
    Word w(static_cast<std::size_t>(total), 0);
    bool consistent = true;
    std::vector<int> fixed(static_cast<std::size_t>(total), -1);
    for (std::int64_t k = 0; k < len; ++k) fixed[static_cast<std::size_t>(k)] = uj[static_cast<std::size_t>(k)];
    for (std::int64_t k = 0; k < len; ++k) {
      auto& f = fixed[static_cast<std::size_t>(x + k)];
      if (f >= 0 && f != ui[static_cast<std::size_t>(k)]) consistent = false;
      f = ui[static_cast<std::size_t>(k)];
    }
    if (!consistent) continue;
    std::vector<std::size_t> freepos;
    for (std::int64_t k = 0; k < total; ++k)
      if (fixed[static_cast<std::size_t>(k)] < 0) freepos.push_back(static_cast<std::size_t>(k));
    std::size_t combos = 1;
    for (std::size_t k = 0; k < freepos.size(); ++k) combos *= r;
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t v = c;
      for (std::int64_t k = 0; k < total; ++k) {
        const int fx = fixed[static_cast<std::size_t>(k)];
        if (fx >= 0) {
          w[static_cast<std::size_t>(k)] = static_cast<Symbol>(fx);
        } else {
          w[static_cast<std::size_t>(k)] = static_cast<Symbol>(v % r);
          v /= r;
        }
      }
      if (s.admissible(w)) return x;
    }
  }
  return -1;
}

void check_against_brute_force(const ShiftSpace& s, double delta, int levels) {
  const auto cover = build_cover(s, delta);
  const auto sched = transition_times(s, cover, levels, 1000);
  const std::size_t r0 = cover.size();
  std::vector<std::vector<std::int64_t>> prev(r0, std::vector<std::int64_t>(r0, 0));
  std::int64_t m_prev = 0;
  for (int n = 1; n <= levels; ++n) {
    std::int64_t mn = 0;
    for (std::size_t i = 0; i < r0; ++i) {
      for (std::size_t j = 0; j < r0; ++j) {
        const std::int64_t lo = n == 1 ? 1 : std::max(m_prev, prev[i][j] + 1);
        const std::int64_t want = brute_least(s, cover.word(i), cover.word(j), lo, 40);
        ASSERT_EQ(sched.time(n, i, j), want) << "n=" << n << " i=" << i << " j=" << j;
        ASSERT_TRUE(sched.replay(n, i, j));
        prev[i][j] = want;
        if (i != j) mn = std::max(mn, want);
      }
    }
    EXPECT_EQ(sched.threshold(n), mn) << "level " << n;
    EXPECT_GE(sched.threshold(n), sched.threshold(n - 1));
    m_prev = mn;
  }
}

}  // namespace

TEST(Cover, FullShiftWindowOne) {
  const auto s = ShiftSpace::full(2);
  const auto c = build_cover(s, 0.75);
  EXPECT_EQ(c.half_width(), 1);
  EXPECT_EQ(c.size(), 8u);
  EXPECT_LT(c.diameter(), 0.75);
  // every admissible window appears exactly once
  for (std::size_t k = 0; k < c.size(); ++k) EXPECT_EQ(c.cell_of(c.representative(k)), k);
}

TEST(Cover, GoldenMeanWindowWords) {
  const ShiftSpace g({{1, 1}, {1, 0}});
  const auto c = build_cover(g, 0.75);
  EXPECT_EQ(c.size(), 5u);  // 000 001 010 100 101
  for (const auto& w : c.words()) EXPECT_TRUE(g.admissible(w));
}

TEST(Cover, ToralGrid) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto c = build_cover(cat, 0.5);
  EXPECT_EQ(c.side_count(), 4);
  EXPECT_EQ(c.size(), 16u);
  EXPECT_LT(c.diameter(), 0.5);
  EXPECT_EQ(c.cell_of(cat.make_point(Rational(1, 4), Rational(3, 4) - Rational(1, 1000000))), c.cell_index(1, 2));
  EXPECT_EQ(build_cover(cat, 0.05).side_count(), 32);
  EXPECT_THROW(build_cover(cat, 1e-5, 1 << 16), Error);
}

TEST(Cover, BudgetExceeded) {
  try {
    build_cover(ShiftSpace::full(2), 1.0 / 4096, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::budget_exceeded);
  }
}

TEST(ShiftScheduleTest, FullShiftWindowOneMatchesBruteForce) {
  const auto s = ShiftSpace::full(2);
  const auto cover = build_cover(s, 0.75);
  const auto sched = transition_times(s, cover, 4, 1000);
  EXPECT_EQ(sched.threshold(0), 0);
  EXPECT_EQ(sched.threshold(1), 3);
  // "000" -> "111" needs the whole window to clear
  const auto i111 = cover.cell_of(periodic_point({1}, 0));
  const auto i000 = cover.cell_of(periodic_point({0}, 0));
  EXPECT_EQ(sched.time(1, i111, i000), 3);
  EXPECT_EQ(sched.time(1, i000, i000), 1);
  check_against_brute_force(s, 0.75, 4);
}

TEST(ShiftScheduleTest, GoldenMeanMatchesBruteForce) {
  const ShiftSpace g({{1, 1}, {1, 0}});
  check_against_brute_force(g, 0.75, 3);
  check_against_brute_force(g, 0.3, 3);
}

TEST(ShiftScheduleTest, ThreeSymbolsMatchesBruteForce) {
  const ShiftSpace s({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
  check_against_brute_force(s, 0.75, 3);
}

TEST(ShiftScheduleTest, PeriodicMatrix) {
  const ShiftSpace s({{0, 1, 0}, {0, 0, 1}, {1, 1, 0}});
  check_against_brute_force(s, 0.75, 3);
}

TEST(ShiftScheduleTest, ReducibleRejected) {
  const ShiftSpace s({{1, 0}, {0, 1}});
  const auto cover = build_cover(s, 0.75);
  try {
    transition_times(s, cover);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_transitive);
  }
}

TEST(ShiftScheduleTest, ConnectorExample) {
  const auto s = ShiftSpace::full(2);
  const auto cover = build_cover(s, 0.75);
  const auto i111 = cover.cell_of(periodic_point({1}, 0));
  const auto i000 = cover.cell_of(periodic_point({0}, 0));
  const auto sched = transition_times(s, cover);
  const auto y = sched.connector(i111, i000, 3);
  // ...000.000111 : the connecting window, tails are free fill
  EXPECT_EQ(y.window(-1, 5), (Word{0, 0, 0, 1, 1, 1}));
  EXPECT_EQ(cover.cell_of(y), i000);
  EXPECT_EQ(cover.cell_of(s.apply(y, 3)), i111);
}

namespace {

// Independent oracle: area of the open intersection of A^X (0,1)^2 with a unit
// square, by clipping against the square's four half-planes.
Rational clip_area(const Mat2& ax, long hx, long hy) {
  using P = std::array<Rational, 2>;
  std::vector<P> poly{{0, 0}, {Rational(ax.a), Rational(ax.c)}, {Rational(ax.a + ax.b), Rational(ax.c + ax.d)},
                      {Rational(ax.b), Rational(ax.d)}};
  // half-plane n.x <= c
  const auto clip = [&](const Rational& nx, const Rational& ny, const Rational& c) {
    std::vector<P> out;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const P& p = poly[k];
      const P& q = poly[(k + 1) % poly.size()];
      const Rational fp = nx * p[0] + ny * p[1] - c;
      const Rational fq = nx * q[0] + ny * q[1] - c;
      if (sgn(fp) <= 0) out.push_back(p);
      if ((sgn(fp) < 0 && sgn(fq) > 0) || (sgn(fp) > 0 && sgn(fq) < 0)) {
        const Rational t = fp / (fp - fq);
        out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
      }
    }
    poly = out;
  };
  clip(-1, 0, -hx);
  clip(1, 0, hx + 1);
  clip(0, -1, -hy);
  clip(0, 1, hy + 1);
  Rational area = 0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const P& p = poly[k];
    const P& q = poly[(k + 1) % poly.size()];
    area += p[0] * q[1] - q[0] * p[1];
  }
  return abs(area) / 2;
}

bool oracle_hits(const ToralAutomorphism& t, const ToralCover& c, std::size_t i, std::size_t j, std::int64_t x) {
  const Mat2 ax = t.matrix_power(x);
  const long m = c.side_count();
  const auto ci = c.corner(i);
  const auto cj = c.corner(j);
  // image of U_j in scaled plane coordinates: A^X c_j + A^X (0,1)^2
  const Integer ox = ax.a * cj[0] + ax.b * cj[1];
  const Integer oy = ax.c * cj[0] + ax.d * cj[1];
  Integer xs[4] = {0, ax.a, ax.a + ax.b, ax.b};
  Integer ys[4] = {0, ax.c, ax.c + ax.d, ax.d};
  Integer x0 = *std::min_element(xs, xs + 4), x1 = *std::max_element(xs, xs + 4);
  Integer y0 = *std::min_element(ys, ys + 4), y1 = *std::max_element(ys, ys + 4);
  // every translate c_i + m k inside the bounding box
  for (Integer kx = (x0 + ox - ci[0] - m) / m - 1; kx * m + ci[0] <= x1 + ox; ++kx) {
    for (Integer ky = (y0 + oy - ci[1] - m) / m - 1; ky * m + ci[1] <= y1 + oy; ++ky) {
      const Integer hx = kx * m + ci[0] - ox;
      const Integer hy = ky * m + ci[1] - oy;
      if (sgn(clip_area(ax, hx.get_si(), hy.get_si())) > 0) return true;
    }
  }
  return false;
}

}  // namespace

TEST(ToralScheduleTest, SmallGridMatchesPolygonOracle) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto cover = build_cover(cat, 0.5);
  const auto sched = transition_times(cat, cover, 3, 1000);
  const std::size_t r0 = cover.size();
  std::int64_t m1 = 0;
  for (std::size_t i = 0; i < r0; ++i) {
    for (std::size_t j = 0; j < r0; ++j) {
      std::int64_t want = 1;
      while (!oracle_hits(cat, cover, i, j, want)) ++want;
      ASSERT_EQ(sched.time(1, i, j), want) << i << "," << j;
      ASSERT_TRUE(sched.replay(1, i, j));
      if (i != j) m1 = std::max(m1, want);
    }
  }
  EXPECT_EQ(sched.threshold(1), m1);
  for (int n = 2; n <= 3; ++n) {
    std::int64_t mn = 0;
    for (std::size_t i = 0; i < r0; ++i)
      for (std::size_t j = 0; j < r0; ++j) {
        const auto x = sched.time(n, i, j);
        EXPECT_GT(x, sched.time(n - 1, i, j));
        EXPECT_GE(x, sched.threshold(n - 1));
        EXPECT_TRUE(oracle_hits(cat, cover, i, j, x));
        for (std::int64_t y = std::max(sched.threshold(n - 1), sched.time(n - 1, i, j) + 1); y < x; ++y)
          EXPECT_FALSE(oracle_hits(cat, cover, i, j, y));
        EXPECT_TRUE(sched.replay(n, i, j));
        if (i != j) mn = std::max(mn, x);
      }
    EXPECT_EQ(sched.threshold(n), mn);
  }
}

TEST(ToralScheduleTest, OtherMatrixSmallGrid) {
  const ToralAutomorphism t(1, 1, 1, 0);  // det = -1, trace 1
  const auto cover = build_cover(t, 0.3);
  const auto sched = transition_times(t, cover, 2, 1000);
  const std::size_t r0 = cover.size();
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t i = rng() % r0, j = rng() % r0;
    std::int64_t want = 1;
    while (!oracle_hits(t, cover, i, j, want)) ++want;
    ASSERT_EQ(sched.time(1, i, j), want);
    ASSERT_TRUE(sched.replay(2, i, j));
  }
}

TEST(ToralScheduleTest, FineGridThresholds) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto cover = build_cover(cat, 0.0077);  // side 1/256
  ASSERT_EQ(cover.side_count(), 256);
  const auto sched = transition_times(cat, cover, 2, 1000);
  EXPECT_EQ(sched.threshold(1), sched.saturation_time());
  EXPECT_EQ(sched.threshold(2), sched.threshold(1) + 1);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t i = rng() % cover.size(), j = rng() % cover.size();
    EXPECT_TRUE(sched.replay(1, i, j));
    EXPECT_TRUE(sched.replay(2, i, j));
    EXPECT_LE(sched.time(2, i, j), sched.threshold(2));
  }
}
