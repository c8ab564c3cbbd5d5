#pragma once

// Transitive specification from shadowing: glue k orbit segments with
// connectors taken from the transition-time schedule, shadow the resulting
// periodic pseudo-orbit, and check that one true orbit follows every segment.

#include <memory>
#include <sstream>

#include "shadowkit/schedule.hpp"
#include "shadowkit/shadowing.hpp"

namespace shadowkit {

template <class Sys>
struct SpecificationTraits;

template <>
struct SpecificationTraits<ShiftSpace> {
  using cover_type = ShiftCover;
  using schedule_type = ShiftSchedule;
};

template <>
struct SpecificationTraits<ToralAutomorphism> {
  using cover_type = ToralCover;
  using schedule_type = ToralSchedule;
};

/// A segment {f^i(x)}_{i=0}^{n}.
template <class Sys>
using Segment = std::pair<typename Sys::point_type, std::int64_t>;

/// Everything that depends only on (system, epsilon): the calibrated cover and
/// its schedule. Building it is the expensive part, so callers reuse it.
template <class Sys>
class SpecificationContext {
 public:
  using cover_type = typename SpecificationTraits<Sys>::cover_type;
  using schedule_type = typename SpecificationTraits<Sys>::schedule_type;

  SpecificationContext(const Sys& sys, double epsilon, int levels = default_levels,
                       std::int64_t horizon = default_horizon, std::size_t cell_budget = default_cell_budget)
      : sys_(std::make_unique<Sys>(sys)), epsilon_(epsilon) {
    if (!(epsilon > 0.0)) fail(ErrorCode::precondition, "epsilon must be positive");
    shadow_delta_ = delta_for_epsilon(*sys_, epsilon / 2);
    target_delta_ = std::min(shadow_delta_, epsilon / 2);
    cover_ = std::make_unique<cover_type>(build_cover(*sys_, target_delta_, cell_budget));
    schedule_ = std::make_unique<schedule_type>(*cover_, levels, horizon);
  }

  const Sys& system() const { return *sys_; }
  double epsilon() const { return epsilon_; }
  /// Gap the shadowing step at epsilon/2 tolerates.
  double shadow_delta() const { return shadow_delta_; }
  double target_delta() const { return target_delta_; }
  const cover_type& cover() const { return *cover_; }
  const schedule_type& schedule() const { return *schedule_; }

 private:
  std::unique_ptr<Sys> sys_;
  double epsilon_;
  double shadow_delta_ = 0.0;
  double target_delta_ = 0.0;
  std::unique_ptr<cover_type> cover_;
  std::unique_ptr<schedule_type> schedule_;
};

template <class Sys>
struct SpecificationResult {
  using point_type = typename Sys::point_type;

  point_type tracer;
  std::vector<std::int64_t> switch_times;     // c_1 = 0 < c_2 < ... < c_k
  std::int64_t period = 0;                    // length of the glued pseudo-orbit
  int level = 1;
  double epsilon = 0.0;
  std::int64_t lower_gap = 0;                 // M_{n-1}
  std::int64_t upper_gap = 0;                 // M_n
  std::vector<std::int64_t> connector_times;  // X_j, the last one closes the loop
  std::vector<std::size_t> start_cells;       // j_0
  std::vector<std::size_t> end_cells;         // j_1
  bool gaps_ok = false;
  std::vector<double> per_segment_max_deviation;
};

struct SpecificationCheck {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct SpecificationReport {
  bool ok = true;
  std::vector<SpecificationCheck> checks;

  /// Name of the first failing check, empty when everything passed.
  std::string first_failure() const {
    for (const auto& c : checks)
      if (!c.ok) return c.name;
    return {};
  }
};

namespace detail {

inline std::string gap_detail(std::int64_t gap, std::int64_t lo, std::int64_t hi) {
  std::ostringstream os;
  os << "gap " << gap << " in [" << lo << ", " << hi << "]";
  return os.str();
}

}  // namespace detail

/// Recomputes every specification inequality from scratch by iterating the
/// tracer with the plain system arithmetic. No schedule state is trusted
/// except the two thresholds, which are re-read from the schedule.
template <class Sys, class Schedule>
SpecificationReport verify_specification(const Sys& sys, const SpecificationResult<Sys>& r,
                                         const std::vector<Segment<Sys>>& segments, const Schedule& schedule) {
  SpecificationReport rep;
  const auto add = [&](std::string name, bool ok, std::string detail = {}) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
    if (!ok) rep.ok = false;
  };
  const std::size_t k = segments.size();
  if (k == 0 || r.switch_times.size() != k) {
    add("shape", false, "switch times do not match the segments");
    return rep;
  }
  add("c_1 = 0", r.switch_times.front() == 0);
  for (std::size_t j = 1; j < k; ++j)
    add("c_" + std::to_string(j + 1) + " > c_" + std::to_string(j), r.switch_times[j] > r.switch_times[j - 1]);
  const int n = r.level;
  if (n < 1 || n > schedule.levels()) {
    add("level", false, "level outside the schedule");
    return rep;
  }
  const std::int64_t lo = schedule.threshold(n - 1);
  const std::int64_t hi = schedule.threshold(n);
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const std::int64_t gap = r.switch_times[j + 1] - r.switch_times[j] - segments[j].second;
    add("gap " + std::to_string(j + 1), gap >= lo && gap <= hi, detail::gap_detail(gap, lo, hi));
  }
  if (!rep.ok) return rep;

  // one forward pass over the tracer orbit
  auto z = r.tracer;
  std::int64_t t = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const auto& [x, len] = segments[j];
    if (len < 0) {
      add("segment " + std::to_string(j + 1), false, "negative length");
      continue;
    }
    for (; t < r.switch_times[j]; ++t) z = sys.apply(z, 1);
    auto zi = z;
    auto xi = x;
    bool ok = true;
    std::int64_t bad = -1;
    for (std::int64_t i = 0; i <= len; ++i) {
      if (!within(sys, zi, xi, r.epsilon, true)) {
        ok = false;
        bad = i;
        break;
      }
      if (i < len) {
        zi = sys.apply(zi, 1);
        xi = sys.apply(xi, 1);
      }
    }
    add("deviation " + std::to_string(j + 1), ok, ok ? std::string{} : "fails at i = " + std::to_string(bad));
  }
  return rep;
}

/// Builds a point whose orbit epsilon-follows every segment, switching at times
/// c_j with gaps in [M_{n-1}, M_n].
template <class Sys>
SpecificationResult<Sys> specification_point(const SpecificationContext<Sys>& ctx,
                                             const std::vector<Segment<Sys>>& segments, int level) {
  const Sys& sys = ctx.system();
  const auto& cover = ctx.cover();
  const auto& schedule = ctx.schedule();
  if (segments.empty()) fail(ErrorCode::empty_input, "no segments");
  if (level < 1 || level > schedule.levels()) fail(ErrorCode::precondition, "level outside the schedule");
  const std::size_t k = segments.size();

  SpecificationResult<Sys> out;
  out.level = level;
  out.epsilon = ctx.epsilon();
  out.lower_gap = schedule.threshold(level - 1);
  out.upper_gap = schedule.threshold(level);
  for (const auto& [x, len] : segments) {
    if (len < 0) fail(ErrorCode::precondition, "segment length must be >= 0");
    out.start_cells.push_back(cover.cell_of(x));
    out.end_cells.push_back(cover.cell_of(sys.apply(x, len)));
  }

  std::vector<Segment<Sys>> connectors;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t to = out.start_cells[(j + 1) % k];
    const std::size_t from = out.end_cells[j];
    const std::int64_t x = schedule.time(level, to, from);
    connectors.emplace_back(schedule.witness(level, to, from), x);
    out.connector_times.push_back(x);
  }

  const auto glued = concatenate(sys, segments, connectors);
  const auto sh = shadow(sys, glued.orbit, ctx.epsilon() / 2);
  out.tracer = sh.tracer;
  out.switch_times.assign(glued.switch_times.begin(), glued.switch_times.begin() + static_cast<std::ptrdiff_t>(k));
  out.period = glued.switch_times.back();
  out.gaps_ok = true;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const std::int64_t gap = out.connector_times[j];
    if (gap < out.lower_gap || gap > out.upper_gap) out.gaps_ok = false;
  }

  // deviation profile, as reported (the pass/fail logic lives in verify)
  auto z = out.tracer;
  std::int64_t t = 0;
  for (std::size_t j = 0; j < k; ++j) {
    for (; t < out.switch_times[j]; ++t) z = sys.apply(z, 1);
    auto zi = z;
    auto xi = segments[j].first;
    double worst = 0.0;
    for (std::int64_t i = 0; i <= segments[j].second; ++i) {
      worst = std::max(worst, sys.distance(zi, xi));
      if (i < segments[j].second) {
        zi = sys.apply(zi, 1);
        xi = sys.apply(xi, 1);
      }
    }
    out.per_segment_max_deviation.push_back(worst);
  }

  const auto rep = verify_specification(sys, out, segments, schedule);
  if (!rep.ok || !out.gaps_ok) fail(ErrorCode::internal_invariant, "specification check failed: " + rep.first_failure());
  return out;
}

template <class Sys>
SpecificationResult<Sys> specification_point(const Sys& sys, const std::vector<Segment<Sys>>& segments, double epsilon,
                                             int level) {
  const SpecificationContext<Sys> ctx(sys, epsilon, std::max(level, 1));
  return specification_point(ctx, segments, level);
}

}  // namespace shadowkit
