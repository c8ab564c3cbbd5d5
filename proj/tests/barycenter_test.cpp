#include <gtest/gtest.h>

#include <set>

#include "shadowkit/barycenter.hpp"

using namespace shadowkit;

namespace {

// |det(A^k - I)| by plain integer arithmetic.
long det_oracle(long a, long b, long c, long d, int k) {
  long p = 1, q = 0, r = 0, s = 1;
  for (int i = 0; i < k; ++i) {
    const long np = p * a + q * c, nq = p * b + q * d, nr = r * a + s * c, ns = r * b + s * d;
    p = np, q = nq, r = nr, s = ns;
  }
  return std::labs((p - 1) * (s - 1) - q * r);
}

HyperbolicPeriodicPoint<ToralAutomorphism> origin(const ToralAutomorphism& t) {
  return hyperbolic_point(t, t.make_point(0, 0));
}

HyperbolicPeriodicPoint<ToralAutomorphism> first_of_period(const ToralAutomorphism& t, int k) {
  for (const auto& hp : periodic_points(t, k))
    if (hp.period == k) return hp;
  throw std::runtime_error("none");
}

}  // namespace

TEST(PeriodicPoints, CatMapCountsMatchDeterminant) {
  const auto cat = ToralAutomorphism::cat_map();
  const long expected[] = {1, 5, 16, 45, 121, 320};
  for (int k = 1; k <= 6; ++k) {
    const auto pts = periodic_points(cat, k);
    EXPECT_EQ(static_cast<long>(pts.size()), det_oracle(2, 1, 1, 1, k));
    EXPECT_EQ(static_cast<long>(pts.size()), expected[k - 1]);
    std::set<std::string> seen;
    for (const auto& hp : pts) {
      EXPECT_EQ(cat.apply(hp.point, k), hp.point);
      EXPECT_EQ(k % hp.period, 0);
      EXPECT_TRUE(seen.insert(hp.point.coords[0].to_string() + "," + hp.point.coords[1].to_string()).second);
      EXPECT_EQ(hp.index, 1);
    }
  }
}

TEST(PeriodicPoints, OtherMatrices) {
  for (const auto& m : std::vector<std::array<long, 4>>{{3, 1, 2, 1}, {1, 1, 1, 0}, {0, 1, 1, 3}, {5, 2, 2, 1}}) {
    const ToralAutomorphism t(m[0], m[1], m[2], m[3]);
    for (int k = 1; k <= 5; ++k) {
      const auto pts = periodic_points(t, k);
      EXPECT_EQ(static_cast<long>(pts.size()), det_oracle(m[0], m[1], m[2], m[3], k));
      for (const auto& hp : pts) EXPECT_EQ(t.apply(hp.point, k), hp.point);
    }
  }
}

TEST(PeriodicPoints, ShiftWordsAndMinimalPeriods) {
  const auto s = ShiftSpace::full(2);
  const auto pts = periodic_points(s, 2);
  ASSERT_EQ(pts.size(), 4u);
  std::multiset<std::int64_t> periods;
  for (const auto& hp : pts) periods.insert(hp.period);
  EXPECT_EQ(periods, (std::multiset<std::int64_t>{1, 1, 2, 2}));
  const ShiftSpace g({{1, 1}, {1, 0}});
  // trace of T^k: Lucas numbers
  const std::size_t lucas[] = {1, 3, 4, 7, 11, 18, 29};
  for (int k = 1; k <= 7; ++k) EXPECT_EQ(periodic_points(g, k).size(), lucas[k - 1]);
  EXPECT_THROW(periodic_points(s, 40), Error);
}

TEST(PeriodicPoints, LocalSizes) {
  const auto cat = ToralAutomorphism::cat_map();
  EXPECT_DOUBLE_EQ(origin(cat).local_size, 0.1);
  const auto q = first_of_period(cat, 2);
  // period-2 orbit points are sqrt(5)/5 apart
  EXPECT_NEAR(q.local_size, std::sqrt(5.0) / 50, 1e-12);
  EXPECT_NEAR(pair_local_size(cat, origin(cat), q), std::sqrt(5.0) / 50, 1e-12);
}

TEST(Heteroclinic, CatMapHomoclinicToOrigin) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto p = origin(cat);
  const auto h = heteroclinic_point(cat, p, p);
  EXPECT_FALSE(h.point == p.point);
  EXPECT_EQ(std::max(std::labs(h.translate[0]), std::labs(h.translate[1])), 1);
  const Splitting sp = cat.splitting();
  // d(f^{-n} z, p) = |t| lambda_u^{-n} |v_u| once it is below 1/2, and the same forward
  const double tu = std::fabs(h.t.to_double()) * std::hypot(sp.v_u[0].to_double(), sp.v_u[1].to_double());
  const double ts = std::fabs(h.s.to_double()) * std::hypot(sp.v_s[0].to_double(), sp.v_s[1].to_double());
  const double lu = sp.lambda_u.to_double();
  double prev_b = 1.0, prev_f = 1.0;
  for (int n = 0; n <= 60; ++n) {
    const double back = tu * std::pow(lu, -n);
    const double fwd = ts * std::pow(lu, -n);
    if (back < 0.5) {
      EXPECT_NEAR(cat.distance(cat.apply(h.point, -n), p.point), back, 1e-12 + 1e-9 * back);
      EXPECT_LT(cat.distance(cat.apply(h.point, -n), p.point), prev_b);
      prev_b = back;
    }
    if (fwd < 0.5) {
      EXPECT_NEAR(cat.distance(cat.apply(h.point, n), p.point), fwd, 1e-12 + 1e-9 * fwd);
      EXPECT_LT(cat.distance(cat.apply(h.point, n), p.point), prev_f);
      prev_f = fwd;
    }
  }
}

TEST(Heteroclinic, ShiftSplices) {
  const auto s = ShiftSpace::full(2);
  const auto p = hyperbolic_point(s, periodic_point({0}));
  const auto q = hyperbolic_point(s, periodic_point({1}));
  const auto h = heteroclinic_point(s, p, q);
  EXPECT_EQ(h.point.window(-5, 5), (Word{0, 0, 0, 0, 0, 1, 1, 1, 1, 1}));
  for (int n = 1; n < 20; ++n) {
    EXPECT_LE(s.distance(s.apply(h.point, -n), p.point), std::ldexp(1.0, -n));
    EXPECT_LE(s.distance(s.apply(h.point, n), q.point), std::ldexp(1.0, -n));
  }

  const ShiftSpace g({{1, 1}, {1, 0}});
  const auto pg = hyperbolic_point(g, periodic_point({0}));
  const auto qg = hyperbolic_point(g, periodic_point({0, 1}));
  const auto hg = heteroclinic_point(g, pg, qg);
  EXPECT_TRUE(g.valid(hg.point));
  const Word w = hg.point.window(-10, 10);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) EXPECT_FALSE(w[i] == 1 && w[i + 1] == 1);

  // p = 1 fixed has no admissible symbol 1 -> 1: golden mean has no such point
  const ShiftSpace split({{1, 1}, {0, 1}});
  const auto a = hyperbolic_point(split, periodic_point({1}));
  const auto b = hyperbolic_point(split, periodic_point({0}));
  try {
    heteroclinic_point(split, a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_related);
  }
}

TEST(Barycenter, FullShiftLeastN1) {
  const auto s = ShiftSpace::full(2);
  const auto p = hyperbolic_point(s, periodic_point({0}));
  const auto q = hyperbolic_point(s, periodic_point({1}));
  const auto r = barycenter_point(s, p, q, 0.125, 20, 20);
  EXPECT_EQ(r.N1, 4);
  EXPECT_EQ(r.X, 8);
  EXPECT_EQ(r.N, 8);
  EXPECT_EQ(r.x, s.apply(r.heteroclinic, -4));
  // N_1 = 3 would leave d(f^{-3} z, p) = 1/8, not below epsilon
  EXPECT_DOUBLE_EQ(s.distance(s.apply(r.heteroclinic, -3), p.point), 0.125);
  EXPECT_TRUE(verify_barycenter(s, r));
}

TEST(Barycenter, DegenerateSamePoint) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto p = origin(cat);
  HeteroclinicPoint<ToralAutomorphism> h{p.point, QuadraticNumber(Rational(0), 5), QuadraticNumber(Rational(0), 5)};
  const auto r = barycenter_from(cat, p, p, h, 0.05, 10, 10);
  EXPECT_EQ(r.x, p.point);
  EXPECT_EQ(r.X, 2 * r.N1);
}

TEST(Barycenter, CatMapCases) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto p = origin(cat);
  const auto q2 = first_of_period(cat, 2);
  for (double eps : {0.1, 0.05}) {
    for (const auto& [a, b] : {std::pair{p, p}, std::pair{p, q2}, std::pair{q2, p}}) {
      const auto r = barycenter_point(cat, a, b, eps, 50, 50);
      EXPECT_EQ(r.N1 % std::lcm(a.period, b.period), 0);
      EXPECT_EQ(r.X, 2 * r.N1);
      // independent pass with exact squared distances
      const Rational e2 = rational_from_double(eps) * rational_from_double(eps);
      for (int i = -50; i <= 0; ++i)
        EXPECT_LT(compare(cat.distance_squared(cat.apply(r.x, i), cat.apply(a.point, i)), QuadraticNumber(e2, 5)), 0);
      for (int i = 0; i <= 50; ++i)
        EXPECT_LT(compare(cat.distance_squared(cat.apply(r.x, i + r.X), cat.apply(b.point, i)), QuadraticNumber(e2, 5)),
                  0);
      // N_1 is least: one period less breaks a one-sided condition somewhere
      if (r.N1 > std::lcm(a.period, b.period)) {
        const std::int64_t smaller = r.N1 - std::lcm(a.period, b.period);
        bool broken = false;
        for (std::int64_t j = smaller; j < r.N1 && !broken; ++j) {
          broken = cat.distance(cat.apply(r.heteroclinic, j), cat.apply(b.point, j)) >= eps ||
                   cat.distance(cat.apply(r.heteroclinic, -j), cat.apply(a.point, -j)) >= eps;
        }
        EXPECT_TRUE(broken);
      }
    }
  }
}

TEST(Extraction, RoundTripCatMap) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto p = origin(cat);
  const auto r = barycenter_point(cat, p, p, 0.1, 50, 50);
  const auto w = witness_from(r, 30);
  const auto ex = extract_heteroclinic(cat, w);
  EXPECT_EQ(ex.X, r.X);
  EXPECT_EQ(ex.depth, 30);
  EXPECT_TRUE(ex.certified);
  EXPECT_TRUE(ex.within_local_size);
  const auto star = nearest_heteroclinic(cat, p, p, ex.z, ex.X);
  EXPECT_EQ(star, ex.z);
}

TEST(Extraction, PerturbedWitnessesStayClose) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto p = origin(cat);
  const double eps = 0.1;
  const auto r = barycenter_point(cat, p, p, eps, 50, 50);
  const Splitting sp = cat.splitting();
  BarycenterWitness<ToralAutomorphism> w;
  w.epsilon = eps;
  w.p = p;
  w.q = p;
  w.N = r.N;
  // push x along the stable line by lambda_s^m / 1000: the past stays within eps
  for (int m = 1; m <= 30; ++m) {
    QuadraticNumber c(Rational(1, 1000), 5);
    for (int i = 0; i < m; ++i) c = c * sp.lambda_s;
    w.pairs.emplace_back(cat.reduce({r.x.coords[0] + c * sp.v_s[0], r.x.coords[1] + c * sp.v_s[1]}), r.X);
  }
  const auto ex = extract_heteroclinic(cat, w);
  EXPECT_EQ(ex.depth, 30);
  EXPECT_TRUE(ex.certified);
  const auto star = nearest_heteroclinic(cat, p, p, ex.z, ex.X);
  QuadraticNumber bound(Rational(2) * rational_from_double(eps), 5);
  for (int i = 0; i < 30; ++i) bound = bound / sp.lambda_u;
  EXPECT_LT(compare(cat.distance_squared(ex.z, star), bound * bound), 0);
  EXPECT_GT(cat.distance(ex.z, star), 0.0);
}

TEST(Extraction, TieChoosesSmallerX) {
  const auto s = ShiftSpace::full(2);
  const auto p = hyperbolic_point(s, periodic_point({0}));
  const auto q = hyperbolic_point(s, periodic_point({1}));
  const auto r = barycenter_point(s, p, q, 0.125, 10, 10);
  BarycenterWitness<ShiftSpace> w;
  w.epsilon = 0.125;
  w.p = p;
  w.q = q;
  w.pairs = {{r.x, r.X}, {s.apply(r.x, 1), r.X - 1}, {r.x, r.X}, {s.apply(r.x, 1), r.X - 1}};
  const auto ex = extract_heteroclinic(s, w);
  EXPECT_EQ(ex.X, r.X - 1);
  EXPECT_EQ(ex.depth, 4);
  // the extracted point is 0^inf then 1^inf
  EXPECT_EQ(ex.z.left_tail, Word{0});
  EXPECT_EQ(ex.z.right_tail, Word{1});
  EXPECT_THROW(extract_heteroclinic(s, BarycenterWitness<ShiftSpace>{}), Error);
}

TEST(Index, SameForAllCatPoints) {
  const auto cat = ToralAutomorphism::cat_map();
  const auto pts = periodic_points(cat, 3);
  for (const auto& a : pts) {
    EXPECT_EQ(index_of(cat, a), 1);
    EXPECT_TRUE(check_same_index(cat, a, pts.front()));
  }
  try {
    ToralAutomorphism(2, 0, 0, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::not_hyperbolic || e.code() == ErrorCode::invalid_system);
  }
}
