#pragma once

// Periodic points, heteroclinic connections and the barycenter construction
// x = f^{-N_1}(z), X = N = 2 N_1, together with the converse extraction of a
// heteroclinic point from barycenter witnesses.

#include <algorithm>
#include <map>
#include <numeric>

#include "shadowkit/metric.hpp"
#include "shadowkit/system.hpp"

namespace shadowkit {

inline constexpr int max_toral_period = 16;
inline constexpr int max_shift_period = 20;
inline constexpr std::size_t periodic_point_budget = 1'000'000;
inline constexpr int default_translate_radius = 64;

template <class Sys>
struct HyperbolicPeriodicPoint {
  using point_type = typename Sys::point_type;

  point_type point;
  std::int64_t period = 1;  // minimal
  double local_size = 0.0;  // epsilon(p)
  int index = 1;

  friend bool operator==(const HyperbolicPeriodicPoint&, const HyperbolicPeriodicPoint&) = default;
};

/// z with f^j(z) -> orbit of p as j -> -inf and f^j(z) -> orbit of q as j -> +inf,
/// aligned so that the convergence is to f^j(p) and f^j(q) themselves.
template <class Sys>
struct HeteroclinicPoint;

template <>
struct HeteroclinicPoint<ToralAutomorphism> {
  TorusPoint point;
  QuadraticNumber t;  // z = p + t v_u in the plane
  QuadraticNumber s;  // z = q + k + s v_s in the plane
  std::array<long, 2> translate{0, 0};
};

template <>
struct HeteroclinicPoint<ShiftSpace> {
  SymbolicPoint point;
  std::int64_t bridge_begin = 0;  // z_i = p_i for i < bridge_begin
  std::int64_t bridge_end = 0;    // z_i = q_i for i >= bridge_end
};

template <class Sys>
struct BarycenterResult {
  using point_type = typename Sys::point_type;

  point_type x;
  std::int64_t X = 0;
  std::int64_t N = 0;
  std::int64_t N1 = 0;
  double epsilon = 0.0;
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  HyperbolicPeriodicPoint<Sys> p;
  HyperbolicPeriodicPoint<Sys> q;
  point_type heteroclinic;
};

template <class Sys>
struct BarycenterWitness {
  using point_type = typename Sys::point_type;

  std::vector<std::pair<point_type, std::int64_t>> pairs;  // (z_m, X_m), m = 1..n
  double epsilon = 0.0;
  HyperbolicPeriodicPoint<Sys> p;
  HyperbolicPeriodicPoint<Sys> q;
  std::int64_t N = 0;
};

template <class Sys>
struct ExtractedHeteroclinic {
  typename Sys::point_type z;
  std::int64_t X = 0;
  std::int64_t depth = 0;        // m of the returned witness
  bool certified = false;        // the finite stable/unstable checks at the witness epsilon
  bool within_local_size = false;  // epsilon <= min(eps(p), eps(q))
};

// ---- periodic points ---------------------------------------------------------

namespace detail {

inline std::int64_t minimal_period(const ToralAutomorphism& t, const TorusPoint& x, std::int64_t k) {
  TorusPoint y = x;
  for (std::int64_t d = 1; d <= k; ++d) {
    y = t.step(y);
    if (k % d == 0 && y == x) return d;
  }
  fail(ErrorCode::internal_invariant, "point is not periodic with the requested period");
}

inline std::vector<TorusPoint> orbit(const ToralAutomorphism& t, const TorusPoint& x, std::int64_t period) {
  std::vector<TorusPoint> out{x};
  for (std::int64_t i = 1; i < period; ++i) out.push_back(t.step(out.back()));
  return out;
}

inline std::vector<SymbolicPoint> orbit(const ShiftSpace& s, const SymbolicPoint& x, std::int64_t period) {
  std::vector<SymbolicPoint> out{x};
  for (std::int64_t i = 1; i < period; ++i) out.push_back(s.apply(out.back(), 1));
  return out;
}

/// 1/10 of the least distance between distinct points of the union of the
/// orbits, at least 1/100; at most 1/10 (a lone fixed point).
inline double toral_local_size(const ToralAutomorphism& t, const std::vector<TorusPoint>& pts) {
  double least = 1.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (!(pts[i] == pts[j])) least = std::min(least, t.distance(pts[i], pts[j]));
  return std::max(0.01, least / 10);
}

inline bool rational_less(const TorusPoint& a, const TorusPoint& b) {
  for (int c = 0; c < 2; ++c) {
    const int r = compare(a.coords[c], b.coords[c]);
    if (r != 0) return r < 0;
  }
  return false;
}

}  // namespace detail

/// All x with f^k(x) = x, sorted by coordinates. Their number is |det(A^k - I)|.
inline std::vector<HyperbolicPeriodicPoint<ToralAutomorphism>> periodic_points(const ToralAutomorphism& t, int k) {
  if (k < 1) fail(ErrorCode::precondition, "period must be at least 1");
  if (k > max_toral_period) fail(ErrorCode::budget_exceeded, "period above the enumeration bound");
  Mat2 b = t.matrix_power(k);
  b.a -= 1;
  b.d -= 1;
  const Integer det = b.det();
  const Integer count = abs(det);
  if (count > periodic_point_budget) fail(ErrorCode::budget_exceeded, "too many periodic points");
  // Column-reduce B to lower triangular [[g, 0], [h21, h22]]; Z^2 / B Z^2 is then
  // represented by 0 <= v1 < g, 0 <= v2 < |h22|.
  Integer g, sx, sy;
  mpz_gcdext(g.get_mpz_t(), sx.get_mpz_t(), sy.get_mpz_t(), b.a.get_mpz_t(), b.b.get_mpz_t());
  const Integer h22 = abs(det / g);
  std::vector<HyperbolicPeriodicPoint<ToralAutomorphism>> out;
  const long d = t.radicand();
  for (Integer v1 = 0; v1 < g; ++v1) {
    for (Integer v2 = 0; v2 < h22; ++v2) {
      // x = B^{-1} v = adj(B) v / det
      const Rational x0 = Rational(b.d * v1 - b.b * v2, det);
      const Rational x1 = Rational(-b.c * v1 + b.a * v2, det);
      TorusPoint p = t.reduce({QuadraticNumber(x0, d), QuadraticNumber(x1, d)});
      HyperbolicPeriodicPoint<ToralAutomorphism> hp;
      hp.period = detail::minimal_period(t, p, k);
      hp.point = std::move(p);
      hp.index = t.index();
      out.push_back(std::move(hp));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return detail::rational_less(a.point, b.point); });
  for (auto& hp : out) hp.local_size = detail::toral_local_size(t, detail::orbit(t, hp.point, hp.period));
  return out;
}

/// Every admissible cycle of length k read periodically, in lexicographic order.
inline std::vector<HyperbolicPeriodicPoint<ShiftSpace>> periodic_points(const ShiftSpace& s, int k) {
  if (k < 1) fail(ErrorCode::precondition, "period must be at least 1");
  if (k > max_shift_period) fail(ErrorCode::budget_exceeded, "period above the enumeration bound");
  std::vector<HyperbolicPeriodicPoint<ShiftSpace>> out;
  Word w;
  const std::size_t r = s.alphabet_size();
  const auto rec = [&](auto&& self) -> void {
    if (w.size() == static_cast<std::size_t>(k)) {
      if (!s.allowed(w.back(), w.front())) return;
      if (out.size() >= periodic_point_budget) fail(ErrorCode::budget_exceeded, "too many periodic points");
      HyperbolicPeriodicPoint<ShiftSpace> hp;
      hp.point = periodic_point(w, 0);
      hp.period = static_cast<std::int64_t>(hp.point.right_tail.size());
      hp.local_size = 0.5;
      hp.index = 1;
      out.push_back(std::move(hp));
      return;
    }
    for (std::size_t c = 0; c < r; ++c) {
      if (!w.empty() && !s.allowed(w.back(), static_cast<Symbol>(c))) continue;
      w.push_back(static_cast<Symbol>(c));
      self(self);
      w.pop_back();
    }
  };
  rec(rec);
  return out;
}

/// Wraps a given periodic point, computing its minimal period and local size.
inline HyperbolicPeriodicPoint<ToralAutomorphism> hyperbolic_point(const ToralAutomorphism& t, const TorusPoint& p,
                                                                   int max_period = max_toral_period) {
  t.require_valid(p);
  TorusPoint y = p;
  for (int d = 1; d <= max_period; ++d) {
    y = t.step(y);
    if (y == p) {
      HyperbolicPeriodicPoint<ToralAutomorphism> hp{p, d, 0.0, t.index()};
      hp.local_size = detail::toral_local_size(t, detail::orbit(t, p, d));
      return hp;
    }
  }
  fail(ErrorCode::precondition, "point is not periodic within the period bound");
}

inline HyperbolicPeriodicPoint<ShiftSpace> hyperbolic_point(const ShiftSpace& s, const SymbolicPoint& p) {
  s.require_valid(p);
  if (!p.core.empty() || p.left_tail != p.right_tail) fail(ErrorCode::precondition, "point is not periodic");
  return {p, static_cast<std::int64_t>(p.right_tail.size()), 0.5, 1};
}

/// Local size used for statements about the pair (p, q).
inline double pair_local_size(const ToralAutomorphism& t, const HyperbolicPeriodicPoint<ToralAutomorphism>& p,
                              const HyperbolicPeriodicPoint<ToralAutomorphism>& q) {
  auto pts = detail::orbit(t, p.point, p.period);
  const auto more = detail::orbit(t, q.point, q.period);
  pts.insert(pts.end(), more.begin(), more.end());
  return detail::toral_local_size(t, pts);
}

inline double pair_local_size(const ShiftSpace&, const HyperbolicPeriodicPoint<ShiftSpace>&,
                              const HyperbolicPeriodicPoint<ShiftSpace>&) {
  return 0.5;
}

// ---- index ---------------------------------------------------------------------

inline int index_of(const ToralAutomorphism& t, const HyperbolicPeriodicPoint<ToralAutomorphism>&) { return t.index(); }

/// Shift spaces have no intrinsic stable dimension; 1 by convention.
inline int index_of(const ShiftSpace&, const HyperbolicPeriodicPoint<ShiftSpace>&) { return 1; }

template <class Sys>
bool check_same_index(const Sys& sys, const HyperbolicPeriodicPoint<Sys>& p, const HyperbolicPeriodicPoint<Sys>& q) {
  return index_of(sys, p) == index_of(sys, q);
}

// ---- heteroclinic points -----------------------------------------------------------

/// First intersection of the unstable line through p with a stable line through a
/// lattice translate of q, scanning translates by max-norm shells, lexicographic
/// within a shell. Intersections lying on the orbit of p or q are skipped.
inline HeteroclinicPoint<ToralAutomorphism> heteroclinic_point(const ToralAutomorphism& t,
                                                               const HyperbolicPeriodicPoint<ToralAutomorphism>& p,
                                                               const HyperbolicPeriodicPoint<ToralAutomorphism>& q,
                                                               int radius = default_translate_radius) {
  const Splitting sp = t.splitting();
  const long d = t.radicand();
  for (long r = 0; r <= radius; ++r) {
    for (long kx = -r; kx <= r; ++kx) {
      for (long ky = -r; ky <= r; ++ky) {
        if (std::max(std::labs(kx), std::labs(ky)) != r) continue;
        const std::array<QuadraticNumber, 2> w{q.point.coords[0] + QuadraticNumber(Rational(kx), d) - p.point.coords[0],
                                               q.point.coords[1] + QuadraticNumber(Rational(ky), d) - p.point.coords[1]};
        const auto ab = ToralAutomorphism::eigen_coordinates(sp, w);
        // p + alpha v_u = q + k - beta v_s
        if (ab[0].sign() == 0 || ab[1].sign() == 0) continue;
        HeteroclinicPoint<ToralAutomorphism> h;
        h.t = ab[0];
        h.s = -ab[1];
        h.translate = {kx, ky};
        h.point = t.reduce({p.point.coords[0] + h.t * sp.v_u[0], p.point.coords[1] + h.t * sp.v_u[1]});
        return h;
      }
    }
  }
  fail(ErrorCode::horizon_exceeded, "no intersection among the scanned lattice translates");
}

/// p's past, a bridge word, then q's future, with the shortest admissible bridge.
inline HeteroclinicPoint<ShiftSpace> heteroclinic_point(const ShiftSpace& s, const HyperbolicPeriodicPoint<ShiftSpace>& p,
                                                        const HyperbolicPeriodicPoint<ShiftSpace>& q) {
  const Symbol from = p.point.at(-1);
  const auto r = static_cast<std::int64_t>(s.alphabet_size());
  const std::int64_t limit = r * r + r * q.period + 1;
  for (std::int64_t len = 0; len <= limit; ++len) {
    const Symbol to = q.point.at(len);
    if (!s.reachable(from, to)) continue;
    const Path path = s.path(from, to, static_cast<std::size_t>(len + 1));
    if (!path.found) continue;
    HeteroclinicPoint<ShiftSpace> h;
    h.point = splice(p.point, 0, path.symbols, q.point);
    h.bridge_begin = 0;
    h.bridge_end = len;
    return h;
  }
  fail(ErrorCode::not_related, "the orbit of q cannot be reached from the orbit of p");
}

// ---- barycenter construction ---------------------------------------------------------

namespace detail {

/// Least T >= 0 such that d(f^j z, f^j q) < eps is certified for every j >= T
/// (forward = true), or d(f^{-j} z, f^{-j} p) < eps for every j >= T.
inline std::int64_t certified_tail(const ToralAutomorphism& t, const HeteroclinicPoint<ToralAutomorphism>& h,
                                   double eps, bool forward) {
  // Lift deviations are c lambda^j v; once their norm is below min(eps, 1/2)
  // they equal the torus distance and keep shrinking.
  const Splitting sp = t.splitting();
  const long d = t.radicand();
  const Rational bound = std::min(rational_from_double(eps), Rational(1, 2));
  const QuadraticNumber limit(bound * bound, d);
  const auto& v = forward ? sp.v_s : sp.v_u;
  const QuadraticNumber norm2 = v[0] * v[0] + v[1] * v[1];
  const QuadraticNumber factor = forward ? sp.lambda_s * sp.lambda_s : (sp.lambda_u * sp.lambda_u).inverse();
  QuadraticNumber c2 = forward ? h.s * h.s : h.t * h.t;
  c2 = c2 * norm2;
  for (std::int64_t j = 0; j < 100000; ++j) {
    if (c2 < limit) return j;
    c2 = c2 * factor;
  }
  fail(ErrorCode::horizon_exceeded, "heteroclinic deviation does not contract");
}

inline std::int64_t certified_tail(const ShiftSpace&, const HeteroclinicPoint<ShiftSpace>& h,
                                   const HyperbolicPeriodicPoint<ShiftSpace>& p,
                                   const HyperbolicPeriodicPoint<ShiftSpace>& q, double eps, bool forward) {
  // d(f^j z, f^j q) = 2^{-(j - R)} for j > R, R the last index where z and q differ;
  // symmetrically on the past with the first index where z and p differ.
  std::int64_t k = 0;  // least k with 2^-k < eps
  while (std::ldexp(1.0, -static_cast<int>(k)) >= eps) ++k;
  const std::int64_t span = p.period * q.period + h.bridge_end - h.bridge_begin + 2;
  if (forward) {
    std::optional<std::int64_t> last;
    for (std::int64_t i = h.bridge_end - 1; i >= h.bridge_begin - span; --i)
      if (h.point.at(i) != q.point.at(i)) {
        last = i;
        break;
      }
    if (!last) return 0;
    return std::max<std::int64_t>(0, *last + k);
  }
  std::optional<std::int64_t> first;
  for (std::int64_t i = h.bridge_begin; i <= h.bridge_end + span; ++i)
    if (h.point.at(i) != p.point.at(i)) {
      first = i;
      break;
    }
  if (!first) return 0;
  return std::max<std::int64_t>(0, k - *first);
}

template <class Sys>
std::int64_t tail(const Sys& sys, const HeteroclinicPoint<Sys>& h, const HyperbolicPeriodicPoint<Sys>& p,
                  const HyperbolicPeriodicPoint<Sys>& q, double eps, bool forward) {
  if constexpr (std::is_same_v<Sys, ShiftSpace>) {
    return certified_tail(sys, h, p, q, eps, forward);
  } else {
    (void)p;
    (void)q;
    return certified_tail(sys, h, eps, forward);
  }
}

}  // namespace detail

/// Independent check of every inequality of a barycenter result, by iterating x.
template <class Sys>
bool verify_barycenter(const Sys& sys, const BarycenterResult<Sys>& r) {
  if (r.X < 0 || r.X > r.N) return false;
  auto xi = r.x;
  auto pi = r.p.point;
  for (std::int64_t i = 0; i >= -r.n1; --i) {
    if (!within(sys, xi, pi, r.epsilon, true)) return false;
    xi = sys.apply(xi, -1);
    pi = sys.apply(pi, -1);
  }
  auto xq = sys.apply(r.x, r.X);
  auto qi = r.q.point;
  for (std::int64_t i = 0; i <= r.n2; ++i) {
    if (!within(sys, xq, qi, r.epsilon, true)) return false;
    xq = sys.apply(xq, 1);
    qi = sys.apply(qi, 1);
  }
  return true;
}

/// Barycenter from a given heteroclinic connection.
template <class Sys>
BarycenterResult<Sys> barycenter_from(const Sys& sys, const HyperbolicPeriodicPoint<Sys>& p,
                                      const HyperbolicPeriodicPoint<Sys>& q, const HeteroclinicPoint<Sys>& h,
                                      double eps, std::int64_t n1, std::int64_t n2) {
  if (!(eps > 0.0)) fail(ErrorCode::precondition, "epsilon must be positive");
  if (n1 < 0 || n2 < 0) fail(ErrorCode::precondition, "window lengths must be non-negative");
  const std::int64_t step = std::lcm(p.period, q.period);
  // largest j that violates each one-sided condition, below the certified tail
  const auto worst = [&](bool forward) {
    const std::int64_t stop = detail::tail(sys, h, p, q, eps, forward);
    std::int64_t bad = -1;
    auto z = h.point;
    auto ref = forward ? q.point : p.point;
    for (std::int64_t j = 0; j < stop; ++j) {
      if (!within(sys, z, ref, eps, true)) bad = j;
      z = sys.apply(z, forward ? 1 : -1);
      ref = sys.apply(ref, forward ? 1 : -1);
    }
    return bad;
  };
  const std::int64_t need = std::max({worst(true) + 1, worst(false) + 1, std::int64_t{1}});
  const std::int64_t n1_star = (need + step - 1) / step * step;

  BarycenterResult<Sys> out;
  out.N1 = n1_star;
  out.N = 2 * n1_star;
  out.X = out.N;
  out.x = sys.apply(h.point, -n1_star);
  out.epsilon = eps;
  out.n1 = n1;
  out.n2 = n2;
  out.p = p;
  out.q = q;
  out.heteroclinic = h.point;
  if (!verify_barycenter(sys, out)) fail(ErrorCode::internal_invariant, "barycenter inequalities failed");
  return out;
}

template <class Sys>
BarycenterResult<Sys> barycenter_point(const Sys& sys, const HyperbolicPeriodicPoint<Sys>& p,
                                       const HyperbolicPeriodicPoint<Sys>& q, double eps, std::int64_t n1,
                                       std::int64_t n2) {
  return barycenter_from(sys, p, q, heteroclinic_point(sys, p, q), eps, n1, n2);
}

// ---- extraction --------------------------------------------------------------------------

/// Witness at depths 1..depth cut from a barycenter result.
template <class Sys>
BarycenterWitness<Sys> witness_from(const BarycenterResult<Sys>& r, std::int64_t depth) {
  BarycenterWitness<Sys> w;
  for (std::int64_t m = 1; m <= depth; ++m) w.pairs.emplace_back(r.x, r.X);
  w.epsilon = r.epsilon;
  w.p = r.p;
  w.q = r.q;
  w.N = r.N;
  return w;
}

/// d(f^j z, f^j p) <= eps for -m <= j <= 0 and d(f^{j+X} z, f^j q) <= eps for 0 <= j <= m.
template <class Sys>
bool check_witness_pair(const Sys& sys, const typename Sys::point_type& z, std::int64_t x, std::int64_t m,
                        const HyperbolicPeriodicPoint<Sys>& p, const HyperbolicPeriodicPoint<Sys>& q, double eps) {
  auto zi = z;
  auto pi = p.point;
  for (std::int64_t j = 0; j >= -m; --j) {
    if (!within(sys, zi, pi, eps, false)) return false;
    zi = sys.apply(zi, -1);
    pi = sys.apply(pi, -1);
  }
  auto zq = sys.apply(z, x);
  auto qi = q.point;
  for (std::int64_t j = 0; j <= m; ++j) {
    if (!within(sys, zq, qi, eps, false)) return false;
    zq = sys.apply(zq, 1);
    qi = sys.apply(qi, 1);
  }
  return true;
}

/// Most frequent X among the witnesses (ties to the smaller X) and the deepest
/// witness carrying it.
template <class Sys>
ExtractedHeteroclinic<Sys> extract_heteroclinic(const Sys& sys, const BarycenterWitness<Sys>& w) {
  if (w.pairs.empty()) fail(ErrorCode::empty_input, "empty barycenter witness");
  std::map<std::int64_t, std::int64_t> freq;
  for (const auto& pr : w.pairs) ++freq[pr.second];
  std::int64_t best = freq.begin()->first;
  for (const auto& [x, c] : freq)
    if (c > freq[best]) best = x;
  std::size_t deepest = 0;
  for (std::size_t m = 0; m < w.pairs.size(); ++m)
    if (w.pairs[m].second == best) deepest = m;
  ExtractedHeteroclinic<Sys> out;
  out.z = w.pairs[deepest].first;
  out.X = best;
  out.depth = static_cast<std::int64_t>(deepest) + 1;
  out.certified = check_witness_pair(sys, out.z, out.X, out.depth, w.p, w.q, w.epsilon);
  out.within_local_size = w.epsilon <= std::min(w.p.local_size, w.q.local_size);
  return out;
}

/// The exact heteroclinic point z* on the unstable line through p, with
/// f^X(z*) on the stable line through q, closest to the given z: the two
/// lines are taken through the lifts of z - p and f^X(z) - q of least norm.
inline TorusPoint nearest_heteroclinic(const ToralAutomorphism& t, const HyperbolicPeriodicPoint<ToralAutomorphism>& p,
                                       const HyperbolicPeriodicPoint<ToralAutomorphism>& q, const TorusPoint& z,
                                       std::int64_t x) {
  const Splitting sp = t.splitting();
  const auto d = t.difference(z, p.point);
  const auto e = t.difference(t.apply(z, x), q.point);
  const auto ab = ToralAutomorphism::eigen_coordinates(sp, d);
  const auto eu = ToralAutomorphism::eigen_coordinates(sp, e);
  QuadraticNumber lam = QuadraticNumber(Rational(1), t.radicand());
  for (std::int64_t i = 0; i < x; ++i) lam = lam * sp.lambda_u;
  const QuadraticNumber tt = ab[0] - eu[0] / lam;
  return t.reduce({p.point.coords[0] + tt * sp.v_u[0], p.point.coords[1] + tt * sp.v_u[1]});
}

}  // namespace shadowkit
