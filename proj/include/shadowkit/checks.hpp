#pragma once

// Check runners behind the command-line tool. Each run produces report records;
// replay_verify re-derives every passing record from its own payload, trusting
// nothing but the system description and the stored inputs.

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <random>

#include "shadowkit/barycenter.hpp"
#include "shadowkit/report.hpp"
#include "shadowkit/specification.hpp"

namespace shadowkit {

inline constexpr std::int64_t default_orbit_length = 64;
inline constexpr std::int64_t default_falsify_horizon = 4096;
inline constexpr int shift_seed_word = 41;
inline constexpr long torus_seed_denominator = 1000;
inline constexpr long segment_denominator = 97;

struct ReplayOutcome {
  bool ok = true;
  std::size_t verified = 0;  // passing records re-derived
  std::size_t skipped = 0;   // fail/error records, not re-derivable by design
  std::vector<std::string> failures;
};

namespace detail {

// ---- seeded inputs ---------------------------------------------------------------

inline SymbolicPoint random_shift_point(const ShiftSpace& s, std::mt19937_64& rng,
                                        std::size_t len = shift_seed_word) {
  Word w{static_cast<Symbol>(rng() % s.alphabet_size())};
  while (w.size() < len) {
    std::vector<Symbol> next;
    for (std::size_t b = 0; b < s.alphabet_size(); ++b)
      if (s.allowed(w.back(), static_cast<Symbol>(b))) next.push_back(static_cast<Symbol>(b));
    w.push_back(next[rng() % next.size()]);
  }
  return s.point_through(w, -static_cast<std::int64_t>(len / 2));
}

inline TorusPoint random_torus_point(const ToralAutomorphism& t, std::mt19937_64& rng, long max_den) {
  const long den = 1 + static_cast<long>(rng() % static_cast<std::uint64_t>(max_den));
  const long a = static_cast<long>(rng() % static_cast<std::uint64_t>(den));
  const long b = static_cast<long>(rng() % static_cast<std::uint64_t>(den));
  return t.make_point(Rational(a, den), Rational(b, den));
}

inline CirclePoint random_circle_point(const CircleRotation& r, std::mt19937_64& rng) {
  return r.make_point(Rational(static_cast<long>(rng() % 1000), 1000));
}

template <class Sys>
typename Sys::point_type random_point(const Sys& sys, std::mt19937_64& rng, long max_den) {
  if constexpr (std::is_same_v<Sys, ShiftSpace>) {
    (void)max_den;
    return random_shift_point(sys, rng);
  } else if constexpr (std::is_same_v<Sys, ToralAutomorphism>) {
    return random_torus_point(sys, rng, max_den);
  } else if constexpr (std::is_same_v<Sys, CircleRotation>) {
    (void)max_den;
    return random_circle_point(sys, rng);
  } else {
    (void)rng;
    (void)max_den;
    fail(ErrorCode::unsupported_system, "no random inputs for this system kind");
  }
}

/// The pseudo-orbit of a shadowing instance, rebuilt from its seed alone.
template <class Sys>
PseudoOrbit<Sys> shadowing_input(const Sys& sys, std::uint64_t seed, std::int64_t length, double delta) {
  std::mt19937_64 rng(seed);
  const auto base = random_point(sys, rng, torus_seed_denominator);
  if constexpr (std::is_same_v<Sys, ShiftSpace> || std::is_same_v<Sys, ToralAutomorphism> ||
                std::is_same_v<Sys, CircleRotation>) {
    return perturb(sys, from_true_orbit(sys, base, 0, length - 1), delta, rng());
  } else {
    fail(ErrorCode::unsupported_system, "no perturbation for this system kind");
  }
}

template <class Sys>
std::vector<Segment<Sys>> random_segments(const Sys& sys, std::uint64_t seed, std::int64_t max_k,
                                          std::int64_t max_len) {
  std::mt19937_64 rng(seed);
  const auto k = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(max_k));
  std::vector<Segment<Sys>> segs;
  for (std::int64_t j = 0; j < k; ++j) {
    auto x = random_point(sys, rng, segment_denominator);
    segs.emplace_back(std::move(x), static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(max_len + 1)));
  }
  return segs;
}

template <class Sys>
std::vector<Segment<Sys>> read_segments(const Sys& sys, const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::io, "cannot read '" + path + "'");
  std::vector<Segment<Sys>> segs;
  std::string line;
  int n = 0;
  while (std::getline(f, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto bar = line.find('|');
    if (bar == std::string::npos)
      fail(ErrorCode::syntax, path + " line " + std::to_string(n) + ": expected 'point | length'");
    try {
      segs.emplace_back(decode_point(sys, trim(line.substr(0, bar))), std::stoll(trim(line.substr(bar + 1))));
    } catch (const Error& e) {
      throw Error(e.code(), path + " line " + std::to_string(n) + ": " + bare_message(e));
    } catch (const std::exception&) {
      fail(ErrorCode::syntax, path + " line " + std::to_string(n) + ": bad segment length");
    }
  }
  if (segs.empty()) fail(ErrorCode::empty_input, "no segments in '" + path + "'");
  return segs;
}

// ---- payload helpers -----------------------------------------------------------------

template <class P>
Json encode_all(const std::vector<P>& pts) {
  Json a = Json::array();
  for (const auto& p : pts) a.push_back(encode(p));
  return a;
}

template <class P>
Json encode_segments(const std::vector<std::pair<P, std::int64_t>>& segs) {
  Json a = Json::array();
  for (const auto& [x, n] : segs) a.push_back(Json{{"point", encode(x)}, {"length", n}});
  return a;
}

template <class Sys>
std::vector<Segment<Sys>> decode_segments(const Sys& sys, const Json& a) {
  std::vector<Segment<Sys>> segs;
  for (const auto& s : a) segs.emplace_back(decode_point(sys, s.at("point").get<std::string>()), s.at("length").get<std::int64_t>());
  return segs;
}

inline Json error_payload(const Error& e) {
  return Json{{"errorCode", std::string(to_string(e.code()))}, {"message", bare_message(e)}};
}

/// Nearest double to q (GMP's own conversion truncates).
inline double to_double(const Rational& q) {
  const double lo = q.get_d();
  const double hi = std::nextafter(lo, sgn(q) < 0 ? -HUGE_VAL : HUGE_VAL);
  if (!std::isfinite(hi)) return lo;
  const Rational dl = abs(Rational(lo) - q);
  const Rational dh = abs(Rational(hi) - q);
  return dh < dl ? hi : lo;
}

inline bool same_cycle(const Word& a, const Word& b) {
  if (a.size() != b.size() || a.empty()) return false;
  for (std::size_t r = 0; r < a.size(); ++r) {
    bool eq = true;
    for (std::size_t i = 0; i < a.size() && eq; ++i) eq = a[(i + r) % a.size()] == b[i];
    if (eq) return true;
  }
  return false;
}

/// z runs from the cycle of p on the left to the cycle of q on the right.
inline bool on_splice_family(const SymbolicPoint& z, const SymbolicPoint& p, const SymbolicPoint& q) {
  return same_cycle(z.left_tail, p.right_tail) && same_cycle(z.right_tail, q.right_tail);
}

inline Integer abs_int(Integer v) { return v < 0 ? Integer(-v) : v; }

/// |det(A^k - I)| for the toral matrix.
inline Integer toral_fixed_count(const ToralAutomorphism& t, std::int64_t k) {
  Mat2 m = power(t.matrix(), static_cast<std::uint64_t>(k));
  m.a -= 1;
  m.d -= 1;
  return abs_int(m.det());
}

/// trace(T^k) for the transition matrix.
inline Integer shift_fixed_count(const ShiftSpace& s, std::int64_t k) {
  const std::size_t r = s.alphabet_size();
  using M = std::vector<std::vector<Integer>>;
  M id(r, std::vector<Integer>(r, 0)), base(r, std::vector<Integer>(r, 0));
  for (std::size_t i = 0; i < r; ++i) {
    id[i][i] = 1;
    for (std::size_t j = 0; j < r; ++j) base[i][j] = s.transition()[i][j];
  }
  const auto mul = [r](const M& x, const M& y) {
    M z(r, std::vector<Integer>(r, 0));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t l = 0; l < r; ++l)
        if (x[i][l] != 0)
          for (std::size_t j = 0; j < r; ++j) z[i][j] += x[i][l] * y[l][j];
    return z;
  };
  M acc = id;
  for (std::int64_t i = 0; i < k; ++i) acc = mul(acc, base);
  Integer tr = 0;
  for (std::size_t i = 0; i < r; ++i) tr += acc[i][i];
  return tr;
}

class Stopwatch {
 public:
  explicit Stopwatch(bool on) : on_(on), start_(std::chrono::steady_clock::now()) {}
  void stamp(Json& record) const {
    if (!on_) return;
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_);
    record["timingMillis"] = static_cast<std::int64_t>(ms.count());
  }

 private:
  bool on_;
  std::chrono::steady_clock::time_point start_;
};

inline double required_rational(const CheckConfig& c, const std::string& key) {
  const auto v = c.rational(key);
  if (!v) fail(ErrorCode::syntax, "check." + key + " is required for check.kind = " + c.kind);
  return to_double(*v);
}

inline std::string required_text(const CheckConfig& c, const std::string& key) {
  if (!c.has(key)) fail(ErrorCode::syntax, "check." + key + " is required for check.kind = " + c.kind);
  return c.text(key);
}

inline std::vector<double> epsilons(const CheckConfig& c) {
  std::vector<double> out;
  for (const auto& q : c.rationals("epsilon")) out.push_back(to_double(q));
  return out;
}

/// Runs body, turning a library error into an error record (or a pass record
/// when it is the error the configuration expects).
template <class Body>
void guarded(Json& record, const std::string& expect_error, Body&& body) {
  try {
    body();
    if (!expect_error.empty()) {
      record["outcome"] = "fail";
      record["witnessPayload"]["expectedError"] = expect_error;
      record["witnessPayload"]["message"] = "the expected error did not occur";
    }
  } catch (const Error& e) {
    Json payload = record["witnessPayload"].is_object() ? record["witnessPayload"] : Json::object();
    const Json err = error_payload(e);
    if (!expect_error.empty() && err["errorCode"] == expect_error) {
      record["outcome"] = "pass";
      payload["expectedError"] = expect_error;
      payload["message"] = err["message"];
    } else {
      record["outcome"] = "error";
      payload["errorCode"] = err["errorCode"];
      payload["message"] = err["message"];
    }
    record["witnessPayload"] = std::move(payload);
  }
}

// ---- shadowing -----------------------------------------------------------------------

template <class Sys>
bool shadowing_checks(const Sys& sys, const PseudoOrbit<Sys>& po, const ShadowingResult<Sys>& r, double eps) {
  return r.max_deviation < eps && verify_shadowing(sys, po, r, eps);
}

template <class Sys>
void run_shadowing(const Sys& sys, const RunConfig& cfg, std::vector<Json>& out) {
  const auto& c = cfg.check;
  const auto delta_cfg = c.rational("delta");
  const auto margin = c.rational("epsilon_margin");
  std::vector<double> eps_list = epsilons(c);
  if (eps_list.empty()) {
    if (!delta_cfg || !margin) fail(ErrorCode::syntax, "shadowing needs check.epsilon, or check.delta with check.epsilon_margin");
    if constexpr (std::is_same_v<Sys, ToralAutomorphism>) {
      eps_list.push_back(shadowing_constant(sys) * to_double(*delta_cfg) * (1.0 + to_double(*margin)));
    } else {
      fail(ErrorCode::unsupported_system, "check.epsilon_margin needs a toral system");
    }
  }
  const std::int64_t count = c.integer("count", 1);
  const std::int64_t fixed = c.integer("length", default_orbit_length);
  const std::int64_t max_len = c.integer("max_length", 0);
  if (fixed < 1 || max_len < 0 || count < 0) fail(ErrorCode::syntax, "lengths must be positive");
  const bool profile = !cfg.output.plot.empty();
  for (const double eps : eps_list) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(c.integer("seed", 0)));
    for (std::int64_t i = 0; i < count; ++i) {
      const std::uint64_t seed = rng();
      const std::int64_t length = max_len > 0 ? 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(max_len)) : fixed;
      const Stopwatch clock(cfg.output.timing);
      Json params{{"epsilon", eps}, {"delta", nullptr}, {"length", length}, {"instance", i}};
      Json rec = make_record("shadowing", sys, params, seed);
      guarded(rec, c.text("expect_error"), [&] {
        const double delta = delta_cfg ? to_double(*delta_cfg) : delta_for_epsilon(sys, eps);
        rec["parameters"]["delta"] = delta;
        const auto po = shadowing_input(sys, seed, length, delta);
        const auto r = shadow(sys, po, eps);
        Json w{{"tracer", encode(r.tracer)},
               {"maxDeviation", r.max_deviation},
               {"gap", po.points.size() > 1 ? compute_gap(sys, po.points) : 0.0}};
        if (profile) {
          w["first"] = r.first;
          w["deviations"] = r.per_index_deviations;
        }
        rec["witnessPayload"] = std::move(w);
        rec["outcome"] = shadowing_checks(sys, po, r, eps) ? "pass" : "fail";
      });
      clock.stamp(rec);
      out.push_back(std::move(rec));
    }
  }
}

template <class Sys>
bool replay_shadowing(const Sys& sys, const Json& rec) {
  const auto& p = rec.at("parameters");
  const auto& w = rec.at("witnessPayload");
  const double eps = p.at("epsilon").get<double>();
  const auto po = shadowing_input(sys, rec.at("seed").get<std::uint64_t>(), p.at("length").get<std::int64_t>(),
                                  p.at("delta").get<double>());
  if (po.points.size() > 1 && compute_gap(sys, po.points) != w.at("gap").get<double>()) return false;
  ShadowingResult<Sys> r;
  r.tracer = decode_point(sys, w.at("tracer").get<std::string>());
  detail::fill_deviations(sys, po, r);
  return r.max_deviation == w.at("maxDeviation").get<double>() && shadowing_checks(sys, po, r, eps);
}

// ---- specification ---------------------------------------------------------------------

template <class Sys>
constexpr bool has_specification = std::is_same_v<Sys, ShiftSpace> || std::is_same_v<Sys, ToralAutomorphism>;

template <class Sys>
Json thresholds_of(const SpecificationContext<Sys>& ctx, int levels) {
  Json a = Json::array();
  for (int n = 0; n <= levels; ++n) a.push_back(ctx.schedule().threshold(n));
  return a;
}

template <class Sys>
bool specification_checks(const Sys& sys, const SpecificationContext<Sys>& ctx, const SpecificationResult<Sys>& r,
                          const std::vector<Segment<Sys>>& segs) {
  const auto rep = verify_specification(sys, r, segs, ctx.schedule());
  if (!rep.ok) return false;
  // the gaps c_{j+1} - c_j - n_j, recomputed from the switch times
  const std::int64_t lo = ctx.schedule().threshold(r.level - 1);
  const std::int64_t hi = ctx.schedule().threshold(r.level);
  for (std::size_t j = 0; j + 1 < segs.size(); ++j) {
    const std::int64_t gap = r.switch_times[j + 1] - r.switch_times[j] - segs[j].second;
    if (gap < lo || gap > hi) return false;
  }
  return r.switch_times.empty() || r.switch_times.front() == 0;
}

template <class Sys>
Json specification_payload(const SpecificationContext<Sys>& ctx, const SpecificationResult<Sys>& r,
                           const std::vector<Segment<Sys>>& segs, int levels) {
  Json w;
  w["segments"] = encode_segments(segs);
  w["tracer"] = encode(r.tracer);
  w["switchTimes"] = r.switch_times;
  w["period"] = r.period;
  w["level"] = r.level;
  w["lowerGap"] = r.lower_gap;
  w["upperGap"] = r.upper_gap;
  w["thresholds"] = thresholds_of(ctx, levels);
  w["connectorTimes"] = r.connector_times;
  w["startCells"] = r.start_cells;
  w["endCells"] = r.end_cells;
  w["gapsOk"] = r.gaps_ok;
  w["deviations"] = r.per_segment_max_deviation;
  return w;
}

template <class Sys>
void run_spec(const Sys& sys, const RunConfig& cfg, std::vector<Json>& out) {
  if constexpr (!has_specification<Sys>) {
    (void)sys;
    (void)out;
    fail(ErrorCode::unsupported_system, "specification needs an SFT or an exact toral system");
  } else {
    const auto& c = cfg.check;
    const auto eps_list = epsilons(c);
    if (eps_list.empty()) fail(ErrorCode::syntax, "check.epsilon is required for check.kind = spec");
    std::vector<std::int64_t> level_list = c.integers("level");
    if (level_list.empty()) level_list.push_back(1);
    const std::int64_t max_level = *std::max_element(level_list.begin(), level_list.end());
    const int levels = static_cast<int>(std::max(c.integer("levels", max_level), max_level));
    const std::int64_t horizon = c.integer("horizon", default_horizon);
    const auto budget = static_cast<std::size_t>(c.integer("budget", static_cast<std::int64_t>(default_cell_budget)));
    const std::string expect = c.text("expect_error");
    const bool from_file = c.has("segment_file");
    const std::int64_t count = from_file || !expect.empty() ? 1 : c.integer("count", 1);
    const std::int64_t max_k = c.integer("segments", 4);
    const std::int64_t max_len = c.integer("max_length", 16);
    if (max_k < 1 || max_len < 0) fail(ErrorCode::syntax, "check.segments must be >= 1 and check.max_length >= 0");
    std::vector<Segment<Sys>> file_segments;
    if (from_file) {
      const std::string path = c.text("segment_file");
      file_segments = read_segments(sys, path.front() == '/' ? path : cfg.base_dir + "/" + path);
    }

    for (const double eps : eps_list) {
      std::unique_ptr<SpecificationContext<Sys>> ctx;
      std::optional<Error> ctx_error;
      try {
        ctx = std::make_unique<SpecificationContext<Sys>>(sys, eps, levels, horizon, budget);
      } catch (const Error& e) {
        ctx_error = e;
      }
      std::mt19937_64 rng(static_cast<std::uint64_t>(c.integer("seed", 0)));
      for (const std::int64_t level : level_list) {
        for (std::int64_t i = 0; i < count; ++i) {
          const std::uint64_t seed = rng();
          const Stopwatch clock(cfg.output.timing);
          Json params{{"epsilon", eps}, {"level", level}, {"levels", levels}, {"horizon", horizon},
                      {"budget", budget}, {"instance", i}};
          Json rec = make_record("spec", sys, params, seed);
          const auto segs = from_file ? file_segments : random_segments(sys, seed, max_k, max_len);
          rec["witnessPayload"] = Json{{"segments", encode_segments(segs)}};
          guarded(rec, expect, [&] {
            if (ctx_error) throw *ctx_error;
            const auto r = specification_point(*ctx, segs, static_cast<int>(level));
            rec["witnessPayload"] = specification_payload(*ctx, r, segs, levels);
            rec["outcome"] = specification_checks(sys, *ctx, r, segs) ? "pass" : "fail";
          });
          clock.stamp(rec);
          out.push_back(std::move(rec));
        }
      }
    }
  }
}

/// Contexts are the expensive part of a replay; records sharing (system, epsilon,
/// levels, horizon, budget) share one.
class ContextCache {
 public:
  template <class Sys>
  const SpecificationContext<Sys>& get(const Sys& sys, const Json& p) {
    const double eps = p.at("epsilon").get<double>();
    const int levels = p.at("levels").get<int>();
    const auto horizon = p.at("horizon").get<std::int64_t>();
    const auto budget = p.at("budget").get<std::size_t>();
    const std::string key = sys.describe() + "|" + double_text(eps) + "|" + std::to_string(levels) + "|" +
                            std::to_string(horizon) + "|" + std::to_string(budget);
    auto& slot = map<Sys>()[key];
    if (!slot) slot = std::make_unique<SpecificationContext<Sys>>(sys, eps, levels, horizon, budget);
    return *slot;
  }

 private:
  template <class Sys>
  std::map<std::string, std::unique_ptr<SpecificationContext<Sys>>>& map() {
    if constexpr (std::is_same_v<Sys, ShiftSpace>) return shift_;
    else return toral_;
  }

  std::map<std::string, std::unique_ptr<SpecificationContext<ShiftSpace>>> shift_;
  std::map<std::string, std::unique_ptr<SpecificationContext<ToralAutomorphism>>> toral_;
};

template <class Sys>
bool replay_spec(const Sys& sys, const Json& rec, ContextCache& cache) {
  if constexpr (!has_specification<Sys>) {
    (void)sys;
    (void)rec;
    (void)cache;
    return false;
  } else {
    const auto& p = rec.at("parameters");
    const auto& w = rec.at("witnessPayload");
    if (w.contains("expectedError")) {
      try {
        const auto& ctx = cache.get(sys, p);
        specification_point(ctx, decode_segments(sys, w.at("segments")), p.at("level").get<int>());
      } catch (const Error& e) {
        return to_string(e.code()) == w.at("expectedError").get<std::string>();
      }
      return false;
    }
    const auto& ctx = cache.get(sys, p);
    const auto segs = decode_segments(sys, w.at("segments"));
    if (w.at("thresholds") != thresholds_of(ctx, p.at("levels").get<int>())) return false;
    SpecificationResult<Sys> r;
    r.tracer = decode_point(sys, w.at("tracer").get<std::string>());
    r.switch_times = w.at("switchTimes").get<std::vector<std::int64_t>>();
    r.period = w.at("period").get<std::int64_t>();
    r.level = p.at("level").get<int>();
    r.epsilon = p.at("epsilon").get<double>();
    r.lower_gap = w.at("lowerGap").get<std::int64_t>();
    r.upper_gap = w.at("upperGap").get<std::int64_t>();
    r.connector_times = w.at("connectorTimes").get<std::vector<std::int64_t>>();
    if (r.switch_times.size() != segs.size()) return false;
    return specification_checks(sys, ctx, r, segs);
  }
}

// ---- periodic points, heteroclinic points, barycenters --------------------------------------

template <class Sys>
constexpr bool has_periodic = std::is_same_v<Sys, ShiftSpace> || std::is_same_v<Sys, ToralAutomorphism>;

template <class Sys>
HyperbolicPeriodicPoint<Sys> periodic_from_text(const Sys& sys, const std::string& text) {
  return hyperbolic_point(sys, decode_point(sys, text));
}

template <class Sys>
Integer expected_periodic_count(const Sys& sys, std::int64_t k) {
  if constexpr (std::is_same_v<Sys, ShiftSpace>) return shift_fixed_count(sys, k);
  else return toral_fixed_count(sys, k);
}

/// Every listed point is fixed by f^k, the points are distinct, and there are as many
/// as the integer matrix predicts.
template <class Sys>
bool periodic_checks(const Sys& sys, std::int64_t k, const std::vector<typename Sys::point_type>& pts,
                     const Integer& expected) {
  if (Integer(static_cast<long>(pts.size())) != expected) return false;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(sys.apply(pts[i], k) == pts[i])) return false;
    for (std::size_t j = 0; j < i; ++j)
      if (pts[i] == pts[j]) return false;
  }
  return true;
}

template <class Sys>
void run_periodic(const Sys& sys, const RunConfig& cfg, std::vector<Json>& out) {
  if constexpr (!has_periodic<Sys>) {
    (void)sys;
    (void)cfg;
    (void)out;
    fail(ErrorCode::unsupported_system, "periodic points need an SFT or an exact toral system");
  } else {
    auto periods = cfg.check.integers("period");
    if (periods.empty()) fail(ErrorCode::syntax, "check.period is required for check.kind = periodic-points");
    for (const std::int64_t k : periods) {
      const Stopwatch clock(cfg.output.timing);
      Json rec = make_record("periodic-points", sys, Json{{"period", k}}, 0);
      guarded(rec, cfg.check.text("expect_error"), [&] {
        if (k < 1) fail(ErrorCode::precondition, "period must be >= 1");
        const auto hp = periodic_points(sys, static_cast<int>(k));
        std::vector<typename Sys::point_type> pts;
        Json minimal = Json::array();
        for (const auto& h : hp) {
          pts.push_back(h.point);
          minimal.push_back(h.period);
        }
        const Integer expected = expected_periodic_count(sys, k);
        rec["witnessPayload"] = Json{{"count", pts.size()},
                                     {"expected", expected.get_str()},
                                     {"points", encode_all(pts)},
                                     {"minimalPeriods", minimal}};
        rec["outcome"] = periodic_checks(sys, k, pts, expected) ? "pass" : "fail";
      });
      clock.stamp(rec);
      out.push_back(std::move(rec));
    }
  }
}

template <class Sys>
bool replay_periodic(const Sys& sys, const Json& rec) {
  if constexpr (!has_periodic<Sys>) {
    (void)sys;
    (void)rec;
    return false;
  } else {
    const std::int64_t k = rec.at("parameters").at("period").get<std::int64_t>();
    const auto& w = rec.at("witnessPayload");
    std::vector<typename Sys::point_type> pts;
    for (const auto& s : w.at("points")) pts.push_back(decode_point(sys, s.get<std::string>()));
    const Integer expected = expected_periodic_count(sys, k);
    return w.at("expected").get<std::string>() == expected.get_str() && periodic_checks(sys, k, pts, expected);
  }
}

/// z converges to the orbit of p backwards and to that of q forwards: the distances
/// d(f^{-k pi(p)} z, p) and d(f^{k pi(q)} z, q) strictly decrease over the probe
/// window and end below a fixed bound.
template <class Sys>
bool heteroclinic_checks(const Sys& sys, const typename Sys::point_type& z, const HyperbolicPeriodicPoint<Sys>& p,
                         const HyperbolicPeriodicPoint<Sys>& q) {
  constexpr std::int64_t first = 20;
  constexpr std::int64_t last = 40;
  constexpr double bound = 1e-6;
  for (const bool forward : {false, true}) {
    const auto& ref = forward ? q : p;
    const std::int64_t step = (forward ? 1 : -1) * ref.period;
    auto zk = sys.apply(z, first * step);
    double prev = HUGE_VAL;
    for (std::int64_t k = first; k <= last; ++k) {
      const double d = sys.distance(zk, ref.point);
      if (!(d < prev)) return false;
      prev = d;
      zk = sys.apply(zk, step);
    }
    if (!(prev < bound)) return false;
  }
  return true;
}

template <class Sys>
void run_heteroclinic(const Sys& sys, const RunConfig& cfg, std::vector<Json>& out) {
  if constexpr (!has_periodic<Sys>) {
    (void)sys;
    (void)cfg;
    (void)out;
    fail(ErrorCode::unsupported_system, "heteroclinic points need an SFT or an exact toral system");
  } else {
    const Stopwatch clock(cfg.output.timing);
    const std::string ptext = required_text(cfg.check, "p");
    const std::string qtext = required_text(cfg.check, "q");
    Json rec = make_record("heteroclinic", sys, Json{{"p", ptext}, {"q", qtext}}, 0);
    guarded(rec, cfg.check.text("expect_error"), [&] {
      const auto p = periodic_from_text(sys, ptext);
      const auto q = periodic_from_text(sys, qtext);
      const auto h = heteroclinic_point(sys, p, q);
      Json w{{"z", encode(h.point)}, {"pPeriod", p.period}, {"qPeriod", q.period}};
      if constexpr (std::is_same_v<Sys, ShiftSpace>) {
        w["bridgeBegin"] = h.bridge_begin;
        w["bridgeEnd"] = h.bridge_end;
      } else {
        w["translate"] = h.translate;
      }
      rec["witnessPayload"] = std::move(w);
      rec["outcome"] = heteroclinic_checks(sys, h.point, p, q) ? "pass" : "fail";
    });
    clock.stamp(rec);
    out.push_back(std::move(rec));
  }
}

template <class Sys>
bool replay_heteroclinic(const Sys& sys, const Json& rec) {
  if constexpr (!has_periodic<Sys>) {
    (void)sys;
    (void)rec;
    return false;
  } else {
    const auto& prm = rec.at("parameters");
    const auto p = periodic_from_text(sys, prm.at("p").get<std::string>());
    const auto q = periodic_from_text(sys, prm.at("q").get<std::string>());
    const auto& w = rec.at("witnessPayload");
    if (w.contains("expectedError")) {
      try {
        heteroclinic_point(sys, p, q);
      } catch (const Error& e) {
        return to_string(e.code()) == w.at("expectedError").get<std::string>();
      }
      return false;
    }
    return heteroclinic_checks(sys, decode_point(sys, w.at("z").get<std::string>()), p, q);
  }
}

/// Extraction bound of the round trip: 2 eps |lambda_u|^{-depth}.
inline double extraction_bound(const ToralAutomorphism& t, double eps, std::int64_t depth) {
  return 2.0 * eps * std::pow(std::fabs(t.splitting().lambda_u.to_double()), -static_cast<double>(depth));
}

template <class Sys>
Json extraction_payload(const Sys& sys, const BarycenterResult<Sys>& r, std::int64_t depth, bool& ok) {
  const auto ex = extract_heteroclinic(sys, witness_from(r, depth));
  Json e{{"depth", ex.depth},
         {"X", ex.X},
         {"z", encode(ex.z)},
         {"certified", ex.certified},
         {"withinLocalSize", ex.within_local_size}};
  ok = ex.certified;
  if constexpr (std::is_same_v<Sys, ToralAutomorphism>) {
    const auto star = nearest_heteroclinic(sys, r.p, r.q, ex.z, ex.X);
    const double bound = extraction_bound(sys, r.epsilon, ex.depth);
    const bool close = within(sys, ex.z, star, bound, false);
    e["nearest"] = encode(star);
    e["distance"] = sys.distance(ex.z, star);
    e["bound"] = bound;
    e["withinBound"] = close;
    ok = ok && close;
  } else {
    const bool family = on_splice_family(ex.z, r.p.point, r.q.point);
    e["onSpliceFamily"] = family;
    ok = ok && family;
  }
  return e;
}

template <class Sys>
bool barycenter_checks(const Sys& sys, const BarycenterResult<Sys>& r) {
  const std::int64_t step = std::lcm(r.p.period, r.q.period);
  return r.N1 >= step && r.N1 % step == 0 && r.X == 2 * r.N1 && r.N == r.X && verify_barycenter(sys, r);
}

template <class Sys>
void run_barycenter(const Sys& sys, const RunConfig& cfg, std::vector<Json>& out) {
  if constexpr (!has_periodic<Sys>) {
    (void)sys;
    (void)cfg;
    (void)out;
    fail(ErrorCode::unsupported_system, "barycenters need an SFT or an exact toral system");
  } else {
    const auto& c = cfg.check;
    const auto eps_list = epsilons(c);
    if (eps_list.empty()) fail(ErrorCode::syntax, "check.epsilon is required for check.kind = barycenter");
    const std::string ptext = required_text(c, "p");
    const std::string qtext = required_text(c, "q");
    const std::int64_t n1 = c.integer("n1", 50);
    const std::int64_t n2 = c.integer("n2", 50);
    const std::int64_t depth = c.integer("depth", 0);
    for (const double eps : eps_list) {
      const Stopwatch clock(cfg.output.timing);
      Json params{{"epsilon", eps}, {"p", ptext}, {"q", qtext}, {"n1", n1}, {"n2", n2}, {"depth", depth}};
      Json rec = make_record("barycenter", sys, params, 0);
      guarded(rec, c.text("expect_error"), [&] {
        const auto p = periodic_from_text(sys, ptext);
        const auto q = periodic_from_text(sys, qtext);
        const auto r = barycenter_point(sys, p, q, eps, n1, n2);
        Json w{{"x", encode(r.x)},
               {"X", r.X},
               {"N", r.N},
               {"N1", r.N1},
               {"pPeriod", p.period},
               {"qPeriod", q.period},
               {"localSize", pair_local_size(sys, p, q)},
               {"sameIndex", check_same_index(sys, p, q)},
               {"heteroclinic", encode(r.heteroclinic)}};
        bool ok = barycenter_checks(sys, r);
        if (depth > 0) {
          bool ex_ok = false;
          w["extraction"] = extraction_payload(sys, r, depth, ex_ok);
          ok = ok && ex_ok;
        }
        rec["witnessPayload"] = std::move(w);
        rec["outcome"] = ok ? "pass" : "fail";
      });
      clock.stamp(rec);
      out.push_back(std::move(rec));
    }
  }
}

template <class Sys>
bool replay_barycenter(const Sys& sys, const Json& rec) {
  if constexpr (!has_periodic<Sys>) {
    (void)sys;
    (void)rec;
    return false;
  } else {
    const auto& prm = rec.at("parameters");
    const auto& w = rec.at("witnessPayload");
    BarycenterResult<Sys> r;
    r.p = periodic_from_text(sys, prm.at("p").get<std::string>());
    r.q = periodic_from_text(sys, prm.at("q").get<std::string>());
    if (w.contains("expectedError")) {
      try {
        barycenter_point(sys, r.p, r.q, prm.at("epsilon").get<double>(), prm.at("n1").get<std::int64_t>(),
                         prm.at("n2").get<std::int64_t>());
      } catch (const Error& e) {
        return to_string(e.code()) == w.at("expectedError").get<std::string>();
      }
      return false;
    }
    r.x = decode_point(sys, w.at("x").get<std::string>());
    r.X = w.at("X").get<std::int64_t>();
    r.N = w.at("N").get<std::int64_t>();
    r.N1 = w.at("N1").get<std::int64_t>();
    r.epsilon = prm.at("epsilon").get<double>();
    r.n1 = prm.at("n1").get<std::int64_t>();
    r.n2 = prm.at("n2").get<std::int64_t>();
    r.heteroclinic = decode_point(sys, w.at("heteroclinic").get<std::string>());
    if (!barycenter_checks(sys, r)) return false;
    if (!w.contains("extraction")) return true;
    const auto& e = w.at("extraction");
    const auto z = decode_point(sys, e.at("z").get<std::string>());
    const auto m = e.at("depth").get<std::int64_t>();
    const auto X = e.at("X").get<std::int64_t>();
    if (!check_witness_pair(sys, z, X, m, r.p, r.q, r.epsilon)) return false;
    if constexpr (std::is_same_v<Sys, ToralAutomorphism>) {
      const auto star = nearest_heteroclinic(sys, r.p, r.q, z, X);
      return encode(star) == e.at("nearest").get<std::string>() &&
             within(sys, z, star, extraction_bound(sys, r.epsilon, m), false);
    } else {
      return on_splice_family(z, r.p.point, r.q.point);
    }
  }
}

// ---- negative control ---------------------------------------------------------------------

template <class Sys>
bool falsify_checks(const Sys& sys, const FalsifyResult<Sys>& res) {
  if constexpr (std::is_same_v<Sys, CircleRotation>) {
    return verify_certificate(sys, res);
  } else if constexpr (std::is_same_v<Sys, FinitePermutation>) {
    // a tracer must start at y_0 (discrete metric, epsilon <= 1) and then miss y_1
    if (!res.found || !res.orbit || res.orbit->points.size() < 2 || res.epsilon > 1.0) return false;
    return !(sys.apply(res.orbit->points[0], 1) == res.orbit->points[1]) && is_pseudo_orbit(sys, *res.orbit, res.delta);
  } else {
    (void)sys;
    (void)res;
    return false;
  }
}

template <class Sys>
void run_falsify(const Sys& sys, const RunConfig& cfg, std::vector<Json>& out) {
  const auto& c = cfg.check;
  const auto eps_list = epsilons(c);
  if (eps_list.empty()) fail(ErrorCode::syntax, "check.epsilon is required for check.kind = falsify-shadowing");
  const auto delta_cfg = c.rational("delta");
  const double delta = delta_cfg ? to_double(*delta_cfg) : -1.0;
  const std::int64_t horizon = c.integer("horizon", default_falsify_horizon);
  const std::int64_t length = c.integer("length", 0);
  const auto seed = static_cast<std::uint64_t>(c.integer("seed", 0));
  for (const double eps : eps_list) {
    const Stopwatch clock(cfg.output.timing);
    Json params{{"epsilon", eps}, {"delta", delta}, {"horizon", horizon}, {"length", length}};
    Json rec = make_record("falsify-shadowing", sys, params, seed);
    guarded(rec, c.text("expect_error"), [&] {
      const auto res = falsify_shadowing(sys, eps, horizon, seed, delta, length);
      Json w{{"found", res.found}, {"note", res.note}, {"delta", res.delta}, {"gridSpacing", res.grid_spacing}};
      if (res.orbit) {
        w["orbitFirst"] = res.orbit->first;
        w["orbit"] = encode_all(res.orbit->points);
        w["certificate"] = res.certificate;
      }
      rec["witnessPayload"] = std::move(w);
      rec["outcome"] = res.found && falsify_checks(sys, res) ? "pass" : "fail";
    });
    clock.stamp(rec);
    out.push_back(std::move(rec));
  }
}

template <class Sys>
bool replay_falsify(const Sys& sys, const Json& rec) {
  const auto& w = rec.at("witnessPayload");
  if (!w.at("found").get<bool>() || !w.contains("orbit")) return false;
  FalsifyResult<Sys> res;
  res.found = true;
  res.epsilon = rec.at("parameters").at("epsilon").get<double>();
  res.delta = w.at("delta").get<double>();
  res.grid_spacing = w.at("gridSpacing").get<double>();
  std::vector<typename Sys::point_type> pts;
  for (const auto& s : w.at("orbit")) pts.push_back(decode_point(sys, s.get<std::string>()));
  res.orbit = make_pseudo_orbit(sys, w.at("orbitFirst").get<std::int64_t>(), std::move(pts));
  res.certificate = w.at("certificate").get<std::vector<std::int64_t>>();
  return falsify_checks(sys, res);
}

}  // namespace detail

/// Runs the configured check and returns its report records in a fixed order.
/// Configuration problems throw; failures of individual instances become records.
inline std::vector<Json> run_check(const RunConfig& cfg) {
  if (cfg.check.kind == "replay") fail(ErrorCode::syntax, "replay is run on a report, not through run_check");
  const SystemDescriptor sys = make_system(cfg.system);
  std::vector<Json> out;
  std::visit(
      [&](const auto& s) {
        const std::string& kind = cfg.check.kind;
        if (kind == "shadowing") detail::run_shadowing(s, cfg, out);
        else if (kind == "spec") detail::run_spec(s, cfg, out);
        else if (kind == "barycenter") detail::run_barycenter(s, cfg, out);
        else if (kind == "heteroclinic") detail::run_heteroclinic(s, cfg, out);
        else if (kind == "periodic-points") detail::run_periodic(s, cfg, out);
        else if (kind == "falsify-shadowing") detail::run_falsify(s, cfg, out);
        else fail(ErrorCode::syntax, "unknown check kind '" + kind + "'");
      },
      sys);
  return out;
}

/// Re-derives every passing record. A record whose schema version or system
/// digest does not match raises schema-mismatch; any other discrepancy is
/// reported as a failure.
inline ReplayOutcome replay_verify(const std::vector<Json>& records) {
  ReplayOutcome res;
  detail::ContextCache cache;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Json& rec = records[i];
    const std::string where = "record " + std::to_string(i + 1);
    if (!rec.is_object() || !rec.contains("schemaVersion") || rec.at("schemaVersion") != schema_version)
      fail(ErrorCode::schema_mismatch, where + ": unsupported schema version");
    for (const char* key : {"checkKind", "system", "systemDigest", "parameters", "outcome", "witnessPayload", "seed"})
      if (!rec.contains(key)) fail(ErrorCode::schema_mismatch, where + ": missing field '" + key + "'");
    const SystemDescriptor sys = system_from_description(rec.at("system").get<std::string>());
    if (system_digest(sys) != rec.at("systemDigest").get<std::string>())
      fail(ErrorCode::schema_mismatch, where + ": system digest does not match the description");
    if (rec.at("outcome") != "pass") {
      ++res.skipped;
      continue;
    }
    const std::string kind = rec.at("checkKind").get<std::string>();
    bool ok = false;
    try {
      ok = std::visit(
          [&](const auto& s) -> bool {
            using S = std::decay_t<decltype(s)>;
            if (kind == "shadowing") {
              if constexpr (std::is_same_v<S, ShiftSpace> || std::is_same_v<S, ToralAutomorphism> ||
                            std::is_same_v<S, CircleRotation>)
                return detail::replay_shadowing(s, rec);
              return false;
            }
            if (kind == "spec") return detail::replay_spec(s, rec, cache);
            if (kind == "barycenter") return detail::replay_barycenter(s, rec);
            if (kind == "heteroclinic") return detail::replay_heteroclinic(s, rec);
            if (kind == "periodic-points") return detail::replay_periodic(s, rec);
            if (kind == "falsify-shadowing") return detail::replay_falsify(s, rec);
            fail(ErrorCode::schema_mismatch, "unknown check kind '" + kind + "'");
          },
          sys);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::schema_mismatch) throw;
      res.failures.push_back(where + " (" + kind + "): " + e.what());
      res.ok = false;
      continue;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::schema_mismatch, where + ": " + e.what());
    }
    ++res.verified;
    if (!ok) {
      res.ok = false;
      res.failures.push_back(where + " (" + kind + "): re-verification failed");
    }
  }
  return res;
}

}  // namespace shadowkit
