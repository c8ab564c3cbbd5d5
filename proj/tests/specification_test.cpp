#include <gtest/gtest.h>

#include <random>

#include "shadowkit/specification.hpp"

using namespace shadowkit;

namespace {

SymbolicPoint random_point(const ShiftSpace& s, std::mt19937_64& rng, std::size_t len) {
  Word w{static_cast<Symbol>(rng() % s.alphabet_size())};
  while (w.size() < len) {
    std::vector<Symbol> next;
    for (std::size_t b = 0; b < s.alphabet_size(); ++b)
      if (s.allowed(w.back(), static_cast<Symbol>(b))) next.push_back(static_cast<Symbol>(b));
    w.push_back(next[rng() % next.size()]);
  }
  return s.point_through(w, -static_cast<std::int64_t>(len / 2));
}

TorusPoint random_rational_point(std::mt19937_64& rng) {
  const long den = 1 + static_cast<long>(rng() % 97);
  return {QuadraticNumber(Rational(static_cast<long>(rng() % den), den), 0, 5),
          QuadraticNumber(Rational(static_cast<long>(rng() % den), den), 0, 5)};
}

// d(x, y) < 2^-k on a shift space iff x and y agree on [-k, k].
bool agree_centre(const SymbolicPoint& x, const SymbolicPoint& y, std::int64_t k) {
  return x.window(-k, k + 1) == y.window(-k, k + 1);
}

}  // namespace

TEST(Specification, FullShiftTwoSegments) {
  const auto s = ShiftSpace::full(2);
  const double eps = 0.125;
  const SpecificationContext<ShiftSpace> ctx(s, eps);
  EXPECT_EQ(ctx.shadow_delta(), 1.0 / 32);
  EXPECT_EQ(ctx.cover().half_width(), 6);
  const std::vector<Segment<ShiftSpace>> segs{{s.point_through({0, 0, 0, 0}, 0), 4},
                                              {s.point_through({1, 1, 1, 1}, 0), 4}};
  const auto r = specification_point(ctx, segs, 1);
  ASSERT_EQ(r.switch_times.size(), 2u);
  EXPECT_EQ(r.switch_times[0], 0);
  EXPECT_TRUE(r.gaps_ok);
  const std::int64_t m1 = ctx.schedule().threshold(1);
  const std::int64_t gap = r.switch_times[1] - r.switch_times[0] - 4;
  EXPECT_GE(gap, 0);
  EXPECT_LE(gap, m1);
  // independent re-check with window comparisons
  for (std::size_t j = 0; j < 2; ++j)
    for (std::int64_t i = 0; i <= 4; ++i)
      EXPECT_TRUE(agree_centre(s.apply(r.tracer, r.switch_times[j] + i), s.apply(segs[j].first, i), 3)) << j << " " << i;
  EXPECT_TRUE(verify_specification(s, r, segs, ctx.schedule()).ok);
}

TEST(Specification, Tampering) {
  const auto s = ShiftSpace::full(2);
  const SpecificationContext<ShiftSpace> ctx(s, 0.125);
  std::mt19937_64 rng(11);
  const std::vector<Segment<ShiftSpace>> segs{{random_point(s, rng, 20), 6}, {random_point(s, rng, 20), 5},
                                              {random_point(s, rng, 20), 7}};
  const auto r = specification_point(ctx, segs, 2);
  ASSERT_TRUE(verify_specification(s, r, segs, ctx.schedule()).ok);

  auto bad = r;
  bad.switch_times[1] += ctx.schedule().threshold(2) + 1;
  const auto rep = verify_specification(s, bad, segs, ctx.schedule());
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.first_failure(), "gap 1");

  // f(z) is a different point and 1/8 is below the shift's expansivity constant
  auto moved = r;
  moved.tracer = s.apply(r.tracer, 1);
  const auto rep2 = verify_specification(s, moved, segs, ctx.schedule());
  EXPECT_FALSE(rep2.ok);
  EXPECT_EQ(rep2.first_failure().rfind("deviation", 0), 0u);
}

TEST(Specification, SingleTrueSegment) {
  const auto s = ShiftSpace::full(2);
  std::mt19937_64 rng(5);
  const std::vector<Segment<ShiftSpace>> segs{{random_point(s, rng, 30), 10}};
  const auto r = specification_point(s, segs, 0.25, 1);
  EXPECT_EQ(r.switch_times, std::vector<std::int64_t>{0});
  for (double d : r.per_segment_max_deviation) EXPECT_LE(d, 0.125);
}

TEST(Specification, GoldenMeanRandom) {
  const ShiftSpace g({{1, 1}, {1, 0}});
  const SpecificationContext<ShiftSpace> ctx(g, 0.125, 2);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Segment<ShiftSpace>> segs;
    const std::size_t k = 1 + rng() % 4;
    for (std::size_t j = 0; j < k; ++j) segs.emplace_back(random_point(g, rng, 40), static_cast<std::int64_t>(rng() % 17));
    const int level = 1 + static_cast<int>(rng() % 2);
    const auto r = specification_point(ctx, segs, level);
    EXPECT_TRUE(verify_specification(g, r, segs, ctx.schedule()).ok);
    for (std::size_t j = 0; j + 1 < k; ++j) {
      const auto gap = r.switch_times[j + 1] - r.switch_times[j] - segs[j].second;
      EXPECT_GE(gap, ctx.schedule().threshold(level - 1));
      EXPECT_LE(gap, ctx.schedule().threshold(level));
    }
  }
}

TEST(Specification, IdenticalInputsIdenticalResults) {
  const auto s = ShiftSpace::full(2);
  const SpecificationContext<ShiftSpace> ctx(s, 0.125);
  std::mt19937_64 rng(2);
  const std::vector<Segment<ShiftSpace>> segs{{random_point(s, rng, 20), 3}, {random_point(s, rng, 20), 9}};
  const auto a = specification_point(ctx, segs, 2);
  const auto b = specification_point(ctx, segs, 2);
  EXPECT_EQ(a.tracer, b.tracer);
  EXPECT_EQ(a.switch_times, b.switch_times);
}

TEST(Specification, ReducibleShiftRejected) {
  const ShiftSpace s({{1, 0}, {0, 1}});
  try {
    const SpecificationContext<ShiftSpace> ctx(s, 0.125);
    FAIL() << "expected not-transitive";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_transitive);
  }
}

TEST(Specification, CatMapRandomSegments) {
  const auto cat = ToralAutomorphism::cat_map();
  const SpecificationContext<ToralAutomorphism> ctx(cat, 0.05, 2);
  EXPECT_EQ(ctx.cover().side_count(), 256);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<Segment<ToralAutomorphism>> segs;
    for (int j = 0; j < 3; ++j)
      segs.emplace_back(random_rational_point(rng), static_cast<std::int64_t>(rng() % 11));
    const int level = 1 + trial % 2;
    const auto r = specification_point(ctx, segs, level);
    const auto rep = verify_specification(cat, r, segs, ctx.schedule());
    EXPECT_TRUE(rep.ok) << rep.first_failure();
    // independent: exact squared distance to the nearest translate
    for (std::size_t j = 0; j < segs.size(); ++j) {
      auto z = cat.apply(r.tracer, r.switch_times[j]);
      auto x = segs[j].first;
      for (std::int64_t i = 0; i <= segs[j].second; ++i) {
        EXPECT_LT(cat.distance(z, x), 0.05);
        z = cat.apply(z, 1);
        x = cat.apply(x, 1);
      }
    }
  }
  EXPECT_EQ(ctx.schedule().threshold(0), 0);
  EXPECT_LE(ctx.schedule().threshold(1), ctx.schedule().threshold(2));
}

TEST(Specification, CatMapTamperedTracer) {
  const auto cat = ToralAutomorphism::cat_map();
  const SpecificationContext<ToralAutomorphism> ctx(cat, 0.05, 1);
  std::mt19937_64 rng(29);
  const std::vector<Segment<ToralAutomorphism>> segs{{random_rational_point(rng), 8},
                                                     {random_rational_point(rng), 8}};
  auto r = specification_point(ctx, segs, 1);
  r.tracer = cat.apply(r.tracer, 1);
  EXPECT_FALSE(verify_specification(cat, r, segs, ctx.schedule()).ok);
}
