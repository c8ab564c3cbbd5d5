#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "shadowkit/shadowing.hpp"

using namespace shadowkit;

namespace {

SymbolicPoint from_window(const ShiftSpace& s, const Word& w) { return s.point_through(w, -4); }

}  // namespace

TEST(ShadowCalibration, ShiftLevels) {
  const auto s = ShiftSpace::full(2);
  EXPECT_EQ(delta_for_epsilon(s, 0.125), 0.0625);
  EXPECT_EQ(delta_for_epsilon(s, 0.2), 0.0625);
  EXPECT_EQ(delta_for_epsilon(s, 1.0), 0.5);
  EXPECT_EQ(delta_for_epsilon(s, 5.0), 0.5);
  EXPECT_THROW(delta_for_epsilon(s, 0.0), Error);
}

TEST(ShadowCalibration, CatMapConstant) {
  // Oracle: lambda_u = (3+sqrt5)/2, lambda_s = 1/lambda_u, orthogonal eigenlines.
  const double lu = (3.0 + std::sqrt(5.0)) / 2.0;
  const double c = 1.0 / (1.0 - 1.0 / lu) + lu / (lu - 1.0);
  const auto cat = ToralAutomorphism::cat_map();
  EXPECT_NEAR(shadowing_constant(cat), c, 1e-12);
  EXPECT_NEAR(shadowing_constant(cat), 1.0 + std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(delta_for_epsilon(cat, 0.01), 0.01 / c, 1e-15);
}

TEST(ShadowCalibration, NonHyperbolicKindsRejected) {
  const CircleRotation r(Rational(1, 3));
  EXPECT_THROW(delta_for_epsilon(r, 0.1), Error);
  const FinitePermutation p({1, 0, 2});
  try {
    delta_for_epsilon(p, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported_system);
  }
}

TEST(ShadowShift, TrueOrbitTracedByItself) {
  const auto s = ShiftSpace::full(2);
  const SymbolicPoint x = canonical({{0, 1}, {1, 1, 0}, {1}, 1});
  const auto po = from_true_orbit(s, x, 0, 10);
  const auto r = shadow(s, po, 0.01);
  EXPECT_EQ(r.tracer, x);
  EXPECT_EQ(r.max_deviation, 0.0);
}

TEST(ShadowShift, ExhaustiveWindowOracleFullShift) {
  // Every length-3 pseudo-orbit whose points are extensions of width-9 windows
  // [-4, 4] with gap <= 2^-4 is traced within 2^-3, and the tracer's symbols on
  // [-4, 6] form one of the windows consistent with the pseudo-orbit.
  const auto s = ShiftSpace::full(2);
  const double eps = 0.125;
  const double delta = delta_for_epsilon(s, eps);
  std::size_t checked = 0;
  for (unsigned w0 = 0; w0 < 512; ++w0) {
    Word a(9);
    for (int i = 0; i < 9; ++i) a[static_cast<std::size_t>(i)] = static_cast<Symbol>((w0 >> i) & 1U);
    for (unsigned t1 = 0; t1 < 4; ++t1) {
      // w1 on [-4,4]: positions -3..3 forced to a's -2..4
      Word b(9);
      b[0] = static_cast<Symbol>(t1 & 1U);
      for (int i = 1; i < 8; ++i) b[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i + 1)];
      b[8] = static_cast<Symbol>((t1 >> 1) & 1U);
      for (unsigned t2 = 0; t2 < 4; t2 += 3) {  // two of the four outer choices for y_2
        Word c(9);
        c[0] = static_cast<Symbol>(t2 & 1U);
        for (int i = 1; i < 8; ++i) c[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i + 1)];
        c[8] = static_cast<Symbol>((t2 >> 1) & 1U);
        const auto po = make_pseudo_orbit(s, 0, {from_window(s, a), from_window(s, b), from_window(s, c)});
        ASSERT_TRUE(is_pseudo_orbit(s, po, delta));
        const auto r = shadow(s, po, eps);
        ASSERT_LT(r.max_deviation, eps);
        ASSERT_TRUE(verify_shadowing(s, po, r, eps));
        // the tracer reproduces y_m on [-3, 3] shifted by m
        for (std::int64_t m = 0; m < 3; ++m)
          for (std::int64_t i = -3; i <= 3; ++i) ASSERT_EQ(r.tracer.at(m + i), po.at(m).at(i));
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 512u * 4u * 2u);
}

TEST(ShadowShift, GoldenMeanSpliceAdmissible) {
  const ShiftSpace g({{1, 1}, {1, 0}});
  const double eps = 0.125;
  const double delta = delta_for_epsilon(g, eps);
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    Word w;
    w.push_back(static_cast<Symbol>(rng() & 1U));
    while (w.size() < 12) {
      const Symbol last = w.back();
      w.push_back(last == 1 ? 0 : static_cast<Symbol>(rng() & 1U));
    }
    const auto x = g.point_through(w, -6);
    const auto po = perturb(g, from_true_orbit(g, x, -2, 20), delta, rng());
    const auto r = shadow(g, po, eps);
    EXPECT_TRUE(g.valid(r.tracer));
    EXPECT_TRUE(verify_shadowing(g, po, r, eps));
    for (std::int64_t m = po.first; m <= po.last(); ++m)
      for (std::int64_t i = -3; i <= 3; ++i) ASSERT_EQ(r.tracer.at(m + i), po.at(m).at(i));
  }
}

TEST(ShadowShift, GapTooLarge) {
  const auto s = ShiftSpace::full(2);
  const auto po = make_pseudo_orbit(s, 0, {periodic_point({0}, 0), periodic_point({1}, 0)});
  try {
    shadow(s, po, 0.125);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::calibration_violated);
  }
}

TEST(ShadowToral, FixedPointOrbit) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto o = cat.make_point(Rational(0), Rational(0));
  const auto r = shadow(cat, from_true_orbit(cat, o, 0, 30), 1e-3);
  EXPECT_EQ(r.tracer, o);
  EXPECT_EQ(r.max_deviation, 0.0);
}

TEST(ShadowToral, SingleJumpMatchesGridOptimum) {
  const auto cat = ToralAutomorphism::cat_map();
  const Rational size = rational_from_double(1e-6);
  const std::array<Rational, 2> e{size * Rational(3, 5), size * Rational(4, 5)};
  std::vector<TorusPoint> pts{cat.make_point(Rational(0), Rational(0))};
  for (int n = 0; n < 99; ++n) {
    TorusPoint next = cat.step(pts.back());
    if (n == 50) next = cat.make_point(e[0], e[1]);
    pts.push_back(next);
  }
  const auto po = make_pseudo_orbit(cat, 0, pts);
  const double eps = 1e-4;
  const auto r = shadow(cat, po, eps);
  EXPECT_TRUE(verify_shadowing(cat, po, r, eps));
  EXPECT_LE(r.max_deviation, shadowing_constant(cat) * 1e-6);

  // Oracle: in eigen-coordinates the deviation of the orbit of (u lambda_u^{-51}, s)
  // at step n is |(lu^{n-51} (u - alpha [n>=51])) v_u + (ls^n s - ls^{n-51} beta [n>=51]) v_s|;
  // brute-force the minimax over a grid of (u, s) in a box of side 4e-6.
  const double lu = (3.0 + std::sqrt(5.0)) / 2.0, ls = 1.0 / lu;
  const double nu = std::sqrt(1.0 + (lu - 2.0) * (lu - 2.0)), ns = std::sqrt(1.0 + (ls - 2.0) * (ls - 2.0));
  const Splitting sp = cat.splitting();
  const auto ab = ToralAutomorphism::eigen_coordinates(
      sp, {QuadraticNumber(e[0], cat.radicand()), QuadraticNumber(e[1], cat.radicand())});
  const double alpha = ab[0].to_double() * nu, beta = ab[1].to_double() * ns;  // unit-vector coordinates
  const auto model = [&](double u, double s) {
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const double cu = std::pow(lu, n - 51) * (u - (n >= 51 ? alpha : 0.0));
      const double cs = std::pow(ls, n) * s - (n >= 51 ? std::pow(ls, n - 51) * beta : 0.0);
      worst = std::max(worst, std::hypot(cu, cs));  // unit eigenvectors are orthogonal
    }
    return worst;
  };
  const double h = 1e-8;
  double best = 1e300, best_u = 0.0;
  for (int i = -200; i <= 200; ++i) {
    for (int j = -200; j <= 200; j += 10) {
      const double v = model(i * h, j * h);
      if (v < best) best = v, best_u = i * h;
    }
  }
  // formula's unstable coordinate of z_0 - y_0, scaled by lambda_u^{51}
  const auto w = cat.difference(cat.apply(r.tracer, 0), po.at(0));
  const auto zc = ToralAutomorphism::eigen_coordinates(sp, w);
  const double u_formula = zc[0].to_double() * nu * std::pow(lu, 51);
  EXPECT_LE(std::fabs(u_formula - best_u), h);
  EXPECT_NEAR(zc[1].to_double(), 0.0, 1e-30);
  EXPECT_LE(model(u_formula, 0.0), best + 1e-12);
}

TEST(ShadowToral, RandomPseudoOrbitsWithinEpsilon) {
  const auto cat = ToralAutomorphism::cat_map();
  const double eps = 0.01;
  const double delta = delta_for_epsilon(cat, eps);
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = cat.make_point(Rational(static_cast<long>(rng() % 997), 997), Rational(static_cast<long>(rng() % 991), 991));
    const auto po = perturb(cat, from_true_orbit(cat, x, 0, 15), delta, rng());
    const auto r = shadow(cat, po, eps);
    ASSERT_LT(r.max_deviation, eps);
    ASSERT_TRUE(verify_shadowing(cat, po, r, eps));
  }
}

TEST(ShadowToral, DeviationIsLinearInJumps) {
  const auto cat = ToralAutomorphism::cat_map();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::array<Rational, 2>> jumps;
    for (int n = 0; n < 40; ++n)
      jumps.push_back({Rational(static_cast<long>(rng() % 2001) - 1000, 1000000000),
                       Rational(static_cast<long>(rng() % 2001) - 1000, 1000000000)});
    const auto build = [&](long scale) {
      std::vector<TorusPoint> pts{cat.make_point(Rational(1, 3), Rational(2, 7))};
      for (const auto& j : jumps) {
        const TorusPoint img = cat.step(pts.back());
        pts.push_back(cat.reduce({img.coords[0] + QuadraticNumber(j[0] * scale, 5), img.coords[1] + QuadraticNumber(j[1] * scale, 5)}));
      }
      return make_pseudo_orbit(cat, 0, pts);
    };
    const auto r1 = shadow(cat, build(1), 1e-4);
    const auto r2 = shadow(cat, build(2), 1e-4);
    EXPECT_LE(r2.max_deviation, 2.0 * r1.max_deviation * (1.0 + 1e-9) + 1e-15);
  }
}

TEST(ShadowToral, NegativeIndexRange) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto po = perturb(cat, from_true_orbit(cat, cat.make_point(Rational(1, 9), Rational(1, 4)), -20, 20), 1e-5, 1);
  const auto r = shadow(cat, po, shadowing_constant(cat) * 1e-5 * 1.01);
  EXPECT_TRUE(verify_shadowing(cat, po, r, r.epsilon_used));
}

TEST(Falsify, RotationDriftCertified) {
  const CircleRotation r(Rational(377, 610));
  const auto res = falsify_shadowing(r, 0.1, 1000, 17, 1e-3);
  ASSERT_TRUE(res.found);
  EXPECT_LE(res.grid_spacing, 0.1 / 4);
  EXPECT_TRUE(verify_certificate(r, res));
  // a truncated orbit no longer carries the certified indices
  auto bad = res;
  bad.orbit->points.resize(2);
  EXPECT_FALSE(verify_certificate(r, bad));
}

TEST(Falsify, ShortHorizonNotFound) {
  const CircleRotation r(Rational(377, 610));
  EXPECT_FALSE(falsify_shadowing(r, 0.1, 50, 17, 1e-3).found);
  EXPECT_FALSE(falsify_shadowing(r, 0.75, 1000, 17, 1e-3).found);
}

TEST(Falsify, PermutationAndHyperbolicNotFound) {
  const FinitePermutation p({1, 2, 0, 4, 3});
  EXPECT_FALSE(falsify_shadowing(p, 0.5, 100, 1).found);
  EXPECT_TRUE(falsify_shadowing(p, 0.5, 100, 1, 1.0).found);
  EXPECT_FALSE(falsify_shadowing(ToralAutomorphism::cat_map(), 0.1, 100, 1).found);
  EXPECT_FALSE(falsify_shadowing(ShiftSpace::full(2), 0.1, 100, 1).found);
}
