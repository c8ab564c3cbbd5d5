#pragma once

// Line-oriented run configuration:
//
//   # comment
//   system.kind = toral
//   system.matrix = 2 1 ; 1 1
//   check.kind = shadowing
//   check.epsilon = 1/4, 1/16
//
// Sections are system, check and output. Numbers are exact ("p/q" or finite
// decimals). Lists are comma separated. Errors name the offending line.

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "shadowkit/codec.hpp"

namespace shadowkit {

struct SystemConfig {
  SystemKind kind = SystemKind::sft;
  bool float_mode = false;
  IntMatrix matrix;
  std::vector<std::vector<std::uint8_t>> transition;
  Rational angle;
  std::vector<std::int64_t> permutation;
};

struct CheckConfig {
  std::string kind;
  std::map<std::string, std::string> values;  // raw text, validated at parse time

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string text(const std::string& key, const std::string& fallback = {}) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
  std::vector<Rational> rationals(const std::string& key) const {
    std::vector<Rational> out;
    if (!has(key)) return out;
    for (const auto& part : detail::split(text(key), ',')) out.push_back(parse_rational(detail::trim(part)));
    return out;
  }
  std::optional<Rational> rational(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return parse_rational(text(key));
  }
  std::vector<std::int64_t> integers(const std::string& key) const {
    std::vector<std::int64_t> out;
    if (!has(key)) return out;
    for (const auto& part : detail::split(text(key), ',')) out.push_back(std::stoll(detail::trim(part)));
    return out;
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? std::stoll(text(key)) : fallback;
  }
};

struct OutputConfig {
  std::string path;  // empty: stdout
  std::string format = "jsonl";
  std::string plot;  // optional CSV of deviation profiles
  bool timing = false;
};

struct RunConfig {
  SystemConfig system;
  CheckConfig check;
  OutputConfig output;
  std::string base_dir;  // for relative file references
};

namespace detail {

enum class ValueType { text, integer, integers, rational, rationals };

inline const std::map<std::string, ValueType>& check_keys() {
  static const std::map<std::string, ValueType> keys{
      {"kind", ValueType::text},          {"epsilon", ValueType::rationals},  {"delta", ValueType::rational},
      {"level", ValueType::integers},     {"levels", ValueType::integer},     {"length", ValueType::integer},
      {"count", ValueType::integer},      {"seed", ValueType::integer},       {"horizon", ValueType::integer},
      {"budget", ValueType::integer},     {"segments", ValueType::integer},   {"max_length", ValueType::integer},
      {"segment_file", ValueType::text},  {"p", ValueType::text},             {"q", ValueType::text},
      {"n1", ValueType::integer},         {"n2", ValueType::integer},         {"depth", ValueType::integer},
      {"period", ValueType::integers},    {"expect_error", ValueType::text},  {"report", ValueType::text},
      {"epsilon_margin", ValueType::rational},
  };
  return keys;
}

inline const std::vector<std::string>& check_kinds() {
  static const std::vector<std::string> kinds{"shadowing", "spec",           "barycenter",       "heteroclinic",
                                              "periodic-points", "falsify-shadowing", "replay"};
  return kinds;
}

inline std::vector<std::vector<long>> parse_matrix(const std::string& text) {
  std::vector<std::vector<long>> rows;
  for (const auto& row : split(text, ';')) {
    std::istringstream is(row);
    std::vector<long> r;
    std::string tok;
    while (is >> tok) {
      std::size_t used = 0;
      long v = 0;
      try {
        v = std::stol(tok, &used);
      } catch (const std::exception&) {
        fail(ErrorCode::syntax, "bad matrix entry '" + tok + "'");
      }
      if (used != tok.size()) fail(ErrorCode::syntax, "bad matrix entry '" + tok + "'");
      r.push_back(v);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

/// "11;10" or "1 1 ; 1 0".
inline std::vector<std::vector<std::uint8_t>> parse_transition(const std::string& text) {
  std::vector<std::vector<std::uint8_t>> rows;
  for (const auto& row : split(text, ';')) {
    std::vector<std::uint8_t> r;
    for (char c : row) {
      if (c == ' ' || c == '\t') continue;
      if (c != '0' && c != '1') fail(ErrorCode::syntax, "transition entries must be 0 or 1");
      r.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void validate_value(ValueType type, const std::string& value) {
  const auto check_int = [](const std::string& s) {
    std::size_t used = 0;
    try {
      std::stoll(s, &used);
    } catch (const std::exception&) {
      fail(ErrorCode::syntax, "expected an integer, got '" + s + "'");
    }
    if (used != s.size()) fail(ErrorCode::syntax, "expected an integer, got '" + s + "'");
  };
  switch (type) {
    case ValueType::text: return;
    case ValueType::integer: check_int(value); return;
    case ValueType::integers:
      for (const auto& part : split(value, ',')) check_int(trim(part));
      return;
    case ValueType::rational: parse_rational(value); return;
    case ValueType::rationals:
      for (const auto& part : split(value, ',')) parse_rational(trim(part));
      return;
  }
}

/// Message of an Error without its leading "code: " prefix.
inline std::string bare_message(const Error& e) {
  const std::string w = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return w.rfind(prefix, 0) == 0 ? w.substr(prefix.size()) : w;
}

}  // namespace detail

inline SystemDescriptor make_system(const SystemConfig& c) {
  switch (c.kind) {
    case SystemKind::sft: return ShiftSpace(c.transition);
    case SystemKind::toral:
      if (!c.float_mode && c.matrix.size() == 2) return ToralAutomorphism(c.matrix);
      return FloatToralAutomorphism(c.matrix);
    case SystemKind::rotation: return CircleRotation(c.angle);
    case SystemKind::permutation: return FinitePermutation(c.permutation);
  }
  fail(ErrorCode::invalid_system, "unknown system kind");
}

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_kind = false, have_matrix = false, have_transition = false, have_angle = false, have_perm = false;
  int kind_line = 0;
  const auto at = [&](int n, const Error& e) { return Error(e.code(), "line " + std::to_string(n) + ": " + detail::bare_message(e)); };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    try {
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(ErrorCode::syntax, "expected 'section.key = value'");
      const std::string lhs = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      const auto dot = lhs.find('.');
      if (dot == std::string::npos) fail(ErrorCode::syntax, "key needs a section: '" + lhs + "'");
      const std::string section = lhs.substr(0, dot);
      const std::string key = lhs.substr(dot + 1);
      if (value.empty()) fail(ErrorCode::syntax, "empty value for '" + lhs + "'");
      if (section == "system") {
        if (key == "kind") {
          if (value == "sft") cfg.system.kind = SystemKind::sft;
          else if (value == "toral") cfg.system.kind = SystemKind::toral;
          else if (value == "rotation") cfg.system.kind = SystemKind::rotation;
          else if (value == "permutation") cfg.system.kind = SystemKind::permutation;
          else fail(ErrorCode::syntax, "unknown system kind '" + value + "'");
          have_kind = true;
          kind_line = lineno;
        } else if (key == "matrix") {
          cfg.system.matrix = detail::parse_matrix(value);
          have_matrix = true;
        } else if (key == "transition") {
          cfg.system.transition = detail::parse_transition(value);
          have_transition = true;
        } else if (key == "angle" || key == "alpha") {
          cfg.system.angle = parse_rational(value);
          have_angle = true;
        } else if (key == "permutation") {
          cfg.system.permutation.clear();
          std::istringstream is(value);
          std::string tok;
          while (is >> tok) {
            detail::validate_value(detail::ValueType::integer, tok);
            cfg.system.permutation.push_back(std::stoll(tok));
          }
          have_perm = true;
        } else if (key == "mode") {
          if (value != "exact" && value != "float") fail(ErrorCode::syntax, "mode must be exact or float");
          cfg.system.float_mode = value == "float";
        } else {
          fail(ErrorCode::unknown_key, "unknown key 'system." + key + "'");
        }
      } else if (section == "check") {
        const auto& keys = detail::check_keys();
        const auto it = keys.find(key);
        if (it == keys.end()) fail(ErrorCode::unknown_key, "unknown key 'check." + key + "'");
        detail::validate_value(it->second, value);
        if (key == "kind") {
          const auto& kinds = detail::check_kinds();
          if (std::find(kinds.begin(), kinds.end(), value) == kinds.end())
            fail(ErrorCode::syntax, "unknown check kind '" + value + "'");
          cfg.check.kind = value;
        }
        cfg.check.values[key] = value;
      } else if (section == "output") {
        if (key == "path") cfg.output.path = value;
        else if (key == "plot") cfg.output.plot = value;
        else if (key == "format") {
          if (value != "jsonl" && value != "csv") fail(ErrorCode::syntax, "format must be jsonl or csv");
          cfg.output.format = value;
        } else if (key == "timing") {
          if (value != "true" && value != "false") fail(ErrorCode::syntax, "timing must be true or false");
          cfg.output.timing = value == "true";
        } else {
          fail(ErrorCode::unknown_key, "unknown key 'output." + key + "'");
        }
      } else {
        fail(ErrorCode::unknown_key, "unknown section '" + section + "'");
      }
    } catch (const Error& e) {
      throw at(lineno, e);
    }
  }
  if (cfg.check.kind.empty()) fail(ErrorCode::syntax, "missing check.kind");
  if (cfg.check.kind == "replay") return cfg;
  try {
    if (!have_kind) fail(ErrorCode::syntax, "missing system.kind");
    const auto need = [](bool present, const char* what) {
      if (!present) fail(ErrorCode::syntax, std::string("missing ") + what);
    };
    switch (cfg.system.kind) {
      case SystemKind::sft: need(have_transition, "system.transition"); break;
      case SystemKind::toral: need(have_matrix, "system.matrix"); break;
      case SystemKind::rotation: need(have_angle, "system.angle"); break;
      case SystemKind::permutation: need(have_perm, "system.permutation"); break;
    }
    make_system(cfg.system);  // invariant checks
  } catch (const Error& e) {
    throw at(kind_line, e);
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  RunConfig cfg = parse_config(ss.str());
  const auto slash = path.find_last_of('/');
  cfg.base_dir = slash == std::string::npos ? "." : path.substr(0, slash);
  return cfg;
}

}  // namespace shadowkit
