#pragma once

// Runtime-dispatched system descriptor and point, for configuration-driven use.
// The algorithms themselves are written against the concrete system classes.

#include <cstdint>
#include <string>
#include <variant>

#include "shadowkit/rotation.hpp"
#include "shadowkit/symbolic.hpp"
#include "shadowkit/toral.hpp"

namespace shadowkit {

enum class SystemKind { sft, toral, rotation, permutation };

inline std::string to_string(SystemKind k) {
  switch (k) {
    case SystemKind::sft: return "sft";
    case SystemKind::toral: return "toral";
    case SystemKind::rotation: return "rotation";
    case SystemKind::permutation: return "permutation";
  }
  return "?";
}

using SystemDescriptor =
    std::variant<ShiftSpace, ToralAutomorphism, FloatToralAutomorphism, CircleRotation, FinitePermutation>;

using Point = std::variant<SymbolicPoint, TorusPoint, FloatTorusPoint, CirclePoint, PermPoint>;

inline SystemKind kind_of(const SystemDescriptor& sys) {
  switch (sys.index()) {
    case 0: return SystemKind::sft;
    case 1:
    case 2: return SystemKind::toral;
    case 3: return SystemKind::rotation;
    default: return SystemKind::permutation;
  }
}

inline std::string describe(const SystemDescriptor& sys) {
  return std::visit([](const auto& s) { return s.describe(); }, sys);
}

namespace detail {
template <class Sys>
const typename Sys::point_type& point_as(const Point& x) {
  const auto* p = std::get_if<typename Sys::point_type>(&x);
  if (!p) fail(ErrorCode::malformed_point, "point does not belong to this kind of system");
  return *p;
}
}  // namespace detail

inline Point apply(const SystemDescriptor& sys, const Point& x, std::int64_t k) {
  return std::visit(
      [&](const auto& s) -> Point {
        using S = std::decay_t<decltype(s)>;
        return s.apply(detail::point_as<S>(x), k);
      },
      sys);
}

inline double distance(const SystemDescriptor& sys, const Point& x, const Point& y) {
  return std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        return s.distance(detail::point_as<S>(x), detail::point_as<S>(y));
      },
      sys);
}

}  // namespace shadowkit
