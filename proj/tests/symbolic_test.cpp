#include <gtest/gtest.h>

#include <random>

#include "shadowkit/symbolic.hpp"

using namespace shadowkit;

namespace {

const Word kZero{0};

SymbolicPoint zeros_with(const Word& core, std::int64_t offset) { return canonical({kZero, core, kZero, offset}); }

ShiftSpace golden_mean() { return ShiftSpace({{1, 1}, {1, 0}}); }

SymbolicPoint random_point(const ShiftSpace& s, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 8);
  Word w;
  std::uniform_int_distribution<int> sym(0, static_cast<int>(s.alphabet_size()) - 1);
  w.push_back(static_cast<Symbol>(sym(rng)));
  const int n = len(rng);
  while (static_cast<int>(w.size()) < n) {
    std::vector<Symbol> next;
    for (Symbol t = 0; t < s.alphabet_size(); ++t)
      if (s.allowed(w.back(), t)) next.push_back(t);
    w.push_back(next[std::uniform_int_distribution<std::size_t>(0, next.size() - 1)(rng)]);
  }
  return s.point_through(w, std::uniform_int_distribution<int>(-5, 5)(rng));
}

}  // namespace

TEST(SymbolicPoint, ShiftMovesIndexZero) {
  const ShiftSpace full = ShiftSpace::full(2);
  const SymbolicPoint x = zeros_with({0, 1, 0}, 1);
  EXPECT_EQ(x.at(0), 1);
  const SymbolicPoint y = full.apply(x, 1);
  EXPECT_EQ(y.at(0), 0);
  EXPECT_EQ(y.at(-1), 1);
  EXPECT_EQ(full.apply(y, -1), x);
}

TEST(SymbolicPoint, CanonicalFormAbsorbsTails) {
  const SymbolicPoint p = canonical({{0, 1, 0, 1}, {0, 1, 0}, {1, 0}, 2});
  EXPECT_TRUE(p.core.empty());
  EXPECT_EQ(p.left_tail, p.right_tail);
  EXPECT_EQ(p.right_tail.size(), 2u);
  for (std::int64_t i = -6; i <= 6; ++i) EXPECT_EQ(p.at(i), (i & 1) ? 1 : 0) << i;
}

TEST(ShiftMetric, MismatchAtOrigin) {
  const ShiftSpace full = ShiftSpace::full(2);
  EXPECT_EQ(full.distance(zeros_with({}, 0), zeros_with({1}, 0)), 1.0);
}

TEST(ShiftMetric, MismatchAtThree) {
  const ShiftSpace full = ShiftSpace::full(2);
  const SymbolicPoint y = zeros_with({1}, -3);
  EXPECT_EQ(y.at(3), 1);
  EXPECT_EQ(full.distance(zeros_with({}, 0), y), 0.125);
}

TEST(ShiftMetric, EqualOnlyWhenSameSequence) {
  const ShiftSpace full = ShiftSpace::full(2);
  const SymbolicPoint a = periodic_point({0, 1}, 0);
  const SymbolicPoint b = canonical({{0, 1}, {0, 1, 0, 1}, {0, 1}, 4});
  EXPECT_EQ(full.distance(a, b), 0.0);
  // far mismatch behind a long shared core
  const SymbolicPoint c = splice(a, 40, {1}, a);
  EXPECT_EQ(full.distance(a, c), std::ldexp(1.0, -40));
}

TEST(ShiftSpace, RejectsBadMatrices) {
  EXPECT_THROW(ShiftSpace({{1, 0}, {1, 0}}), Error);
  EXPECT_THROW(ShiftSpace(std::vector<std::vector<std::uint8_t>>{{1}}), Error);
  EXPECT_THROW(ShiftSpace({{1, 2}, {1, 1}}), Error);
  EXPECT_TRUE(golden_mean().irreducible());
  EXPECT_FALSE(ShiftSpace({{1, 0}, {0, 1}}).irreducible());
}

TEST(ShiftSpace, ExtensionsAreAdmissible) {
  const ShiftSpace s({{0, 1, 0}, {0, 0, 1}, {1, 0, 1}});
  for (Symbol a = 0; a < 3; ++a) {
    const SymbolicPoint p = s.point_through({a}, 0);
    EXPECT_TRUE(s.valid(p));
    EXPECT_EQ(p.at(0), a);
  }
  const ShiftSpace g = golden_mean();
  const SymbolicPoint p = g.point_through({0, 1, 0, 1}, -2);
  EXPECT_TRUE(g.valid(p));
  EXPECT_EQ(p.window(-2, 2), (Word{0, 1, 0, 1}));
}

TEST(ShiftSpace, PathsRespectTransitions) {
  const ShiftSpace g = golden_mean();
  const Path p = g.path(1, 1, 0);
  ASSERT_TRUE(p.found);
  EXPECT_EQ(p.symbols, Word{0});
  EXPECT_FALSE(g.path(1, 1, 1).found);
  EXPECT_TRUE(g.path(1, 1, 3).found);
}

TEST(ShiftProperties, GroupLawMetricAndAdmissibility) {
  std::mt19937_64 rng(11);
  for (const ShiftSpace& s : {ShiftSpace::full(2), golden_mean(), ShiftSpace::full(3)}) {
    for (int trial = 0; trial < 200; ++trial) {
      const SymbolicPoint x = random_point(s, rng);
      const SymbolicPoint y = random_point(s, rng);
      const SymbolicPoint z = random_point(s, rng);
      std::uniform_int_distribution<int> k(-50, 50);
      const int j = k(rng);
      const int l = k(rng);
      EXPECT_EQ(s.apply(x, j + l), s.apply(s.apply(x, j), l));
      EXPECT_TRUE(s.valid(s.apply(x, j)));
      EXPECT_EQ(s.distance(x, y), s.distance(y, x));
      EXPECT_EQ(s.distance(x, x), 0.0);
      EXPECT_LE(s.distance(x, z), s.distance(x, y) + s.distance(y, z));
      if (s.distance(x, y) == 0.0) EXPECT_EQ(x, y);
    }
  }
}
