#pragma once

// Lossless text encodings of points, in the formats used by the reports:
//   sft          left~core~right@offset   (symbols 0-9a-z)
//   toral exact  a+b√D,a+b√D              (rationals a, b per coordinate)
//   toral float  v±e,v±e,...              (common error bound e)
//   rotation     p/q
//   permutation  i

#include <cstdio>
#include <iomanip>
#include <sstream>

#include "shadowkit/system.hpp"

namespace shadowkit {

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline Symbol symbol_of(char c) {
  if (c >= '0' && c <= '9') return static_cast<Symbol>(c - '0');
  if (c >= 'a' && c <= 'z') return static_cast<Symbol>(10 + c - 'a');
  fail(ErrorCode::malformed_point, std::string("bad symbol '") + c + "'");
}

inline std::string word_text(const Word& w) {
  std::string s;
  for (Symbol c : w) s += symbol_char(c);
  return s;
}

inline Word word_of(const std::string& s) {
  Word w;
  for (char c : s) w.push_back(symbol_of(c));
  return w;
}

/// Shortest decimal that reads back to the same double.
inline std::string double_text(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

inline std::string encode(const SymbolicPoint& p) {
  return detail::word_text(p.left_tail) + "~" + detail::word_text(p.core) + "~" + detail::word_text(p.right_tail) +
         "@" + std::to_string(p.offset);
}

inline std::string encode(const TorusPoint& p) { return p.coords[0].to_string() + "," + p.coords[1].to_string(); }

inline std::string encode(const FloatTorusPoint& p) {
  std::string s;
  for (std::size_t i = 0; i < p.coords.size(); ++i) {
    if (i) s += ',';
    s += detail::double_text(p.coords[i]) + "±" + detail::double_text(p.error);
  }
  return s;
}

inline std::string encode(const CirclePoint& p) { return p.x.get_str(); }
inline std::string encode(const PermPoint& p) { return std::to_string(p.i); }

inline SymbolicPoint decode_point(const ShiftSpace& s, const std::string& text) {
  const auto at = text.rfind('@');
  const auto parts = detail::split(text.substr(0, at), '~');
  if (at == std::string::npos || parts.size() != 3) fail(ErrorCode::malformed_point, "expected left~core~right@offset");
  SymbolicPoint p{detail::word_of(parts[0]), detail::word_of(parts[1]), detail::word_of(parts[2]), 0};
  try {
    p.offset = std::stoll(text.substr(at + 1));
  } catch (const std::exception&) {
    fail(ErrorCode::malformed_point, "bad offset in '" + text + "'");
  }
  s.require_valid(p);
  return canonical(std::move(p));
}

inline TorusPoint decode_point(const ToralAutomorphism& t, const std::string& text) {
  const auto parts = detail::split(text, ',');
  if (parts.size() != 2) fail(ErrorCode::malformed_point, "expected two coordinates");
  TorusPoint p{{QuadraticNumber::parse(detail::trim(parts[0]), t.radicand()),
                QuadraticNumber::parse(detail::trim(parts[1]), t.radicand())}};
  t.require_valid(p);
  return p;
}

inline FloatTorusPoint decode_point(const FloatToralAutomorphism& t, const std::string& text) {
  FloatTorusPoint p;
  const std::string pm = "±";
  for (const auto& part : detail::split(text, ',')) {
    const auto at = part.find(pm);
    p.coords.push_back(std::stod(part.substr(0, at)));
    if (at != std::string::npos) p.error = std::max(p.error, std::stod(part.substr(at + pm.size())));
  }
  if (!t.valid(p)) fail(ErrorCode::malformed_point, "point has the wrong dimension or leaves [0,1)");
  return p;
}

inline CirclePoint decode_point(const CircleRotation& r, const std::string& text) {
  const Rational x = parse_rational(detail::trim(text));
  if (sgn(x) < 0 || x >= 1) fail(ErrorCode::malformed_point, "circle point outside [0,1)");
  return r.make_point(x);
}

inline PermPoint decode_point(const FinitePermutation& p, const std::string& text) {
  PermPoint x{std::stoll(detail::trim(text))};
  if (!p.valid(x)) fail(ErrorCode::malformed_point, "index outside the permuted set");
  return x;
}

inline std::string encode(const Point& x) {
  return std::visit([](const auto& p) { return encode(p); }, x);
}

inline Point decode_point(const SystemDescriptor& sys, const std::string& text) {
  return std::visit([&](const auto& s) -> Point { return decode_point(s, text); }, sys);
}

}  // namespace shadowkit
