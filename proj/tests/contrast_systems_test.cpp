#include <gtest/gtest.h>

#include <random>

#include "shadowkit/system.hpp"

using namespace shadowkit;

TEST(Permutation, OddPowerOfTransposition) {
  const FinitePermutation p({1, 0, 2});
  EXPECT_EQ(p.apply({0}, 3).i, 1);
  EXPECT_EQ(p.apply({2}, 3).i, 2);
  EXPECT_EQ(p.apply({0}, -1).i, 1);
  EXPECT_THROW(FinitePermutation({0, 0, 1}), Error);
  EXPECT_THROW(p.apply({3}, 1), Error);
}

TEST(Rotation, IsAnIsometry) {
  const CircleRotation r(Rational(377, 610));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<long> n(0, 999);
  for (int i = 0; i < 200; ++i) {
    const CirclePoint x = r.make_point(Rational(n(rng), 1000));
    const CirclePoint y = r.make_point(Rational(n(rng), 1000));
    EXPECT_EQ(r.exact_distance(r.apply(x, 1), r.apply(y, 1)), r.exact_distance(x, y));
    EXPECT_EQ(r.apply(r.apply(x, 17), -17), x);
  }
  EXPECT_EQ(r.exact_distance(r.make_point(Rational(1, 10)), r.make_point(Rational(9, 10))), Rational(1, 5));
  EXPECT_THROW(CircleRotation(Rational(3, 2)), Error);
}

TEST(SystemDescriptor, DispatchesByKind) {
  const SystemDescriptor sys = ToralAutomorphism::cat_map();
  EXPECT_EQ(kind_of(sys), SystemKind::toral);
  const Point x = std::get<ToralAutomorphism>(sys).make_point(Rational(1, 3), Rational(1, 5));
  const Point y = apply(sys, apply(sys, x, 7), -7);
  EXPECT_EQ(distance(sys, x, y), 0.0);
  EXPECT_THROW(apply(sys, Point{PermPoint{0}}, 1), Error);
}
