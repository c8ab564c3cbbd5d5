#pragma once

// Report records: one JSON object per line, keys in a fixed order so that equal
// runs give byte-identical files. CSV carries the shared scalar columns.

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "shadowkit/config.hpp"

namespace shadowkit {

using Json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

/// 64-bit FNV-1a of the canonical system description, as 16 hex digits.
inline std::string system_digest(const std::string& description) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : description) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string system_digest(const SystemDescriptor& sys) { return system_digest(describe(sys)); }

/// Inverse of describe(): "sft:11;10", "toral:2 1;1 1", "toral-float:...",
/// "rotation:p/q", "permutation:1 0 2".
inline SystemDescriptor system_from_description(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail(ErrorCode::schema_mismatch, "bad system description '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);
  SystemConfig c;
  if (kind == "sft") {
    c.kind = SystemKind::sft;
    c.transition = detail::parse_transition(body);
  } else if (kind == "toral" || kind == "toral-float") {
    c.kind = SystemKind::toral;
    c.float_mode = kind == "toral-float";
    c.matrix = detail::parse_matrix(body);
  } else if (kind == "rotation") {
    c.kind = SystemKind::rotation;
    c.angle = parse_rational(body);
  } else if (kind == "permutation") {
    c.kind = SystemKind::permutation;
    std::istringstream is(body);
    std::int64_t v;
    while (is >> v) c.permutation.push_back(v);
  } else {
    fail(ErrorCode::schema_mismatch, "unknown system kind '" + kind + "'");
  }
  return make_system(c);
}

/// Record skeleton with the fields every record carries.
inline Json make_record(const std::string& check_kind, const SystemDescriptor& sys, Json parameters,
                        std::uint64_t seed) {
  Json r;
  r["schemaVersion"] = schema_version;
  r["checkKind"] = check_kind;
  r["system"] = describe(sys);
  r["systemDigest"] = system_digest(sys);
  r["parameters"] = std::move(parameters);
  r["outcome"] = "error";
  r["witnessPayload"] = Json::object();
  r["timingMillis"] = 0;
  r["seed"] = seed;
  return r;
}

inline std::string to_jsonl(const std::vector<Json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<Json> parse_jsonl(const std::string& text) {
  std::vector<Json> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::schema_mismatch, "line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline std::string scalar_text(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace detail

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"schemaVersion", "checkKind", "systemDigest", "outcome",
                                             "timingMillis",  "seed",      "parameters"};
  return cols;
}

/// One row per record; cell text equals the JSONL value (strings unquoted).
inline std::string to_csv(const std::vector<Json>& records) {
  std::string out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& r : records) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ',';
      out += detail::csv_field(detail::scalar_text(r.at(cols[i])));
    }
    out += '\n';
  }
  return out;
}

/// (record, index, deviation) rows from every payload that carries a deviation profile.
inline std::string to_plot_csv(const std::vector<Json>& records) {
  std::string out = "record,checkKind,index,deviation\n";
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& w = records[k].at("witnessPayload");
    if (!w.contains("deviations")) continue;
    const std::int64_t first = w.value("first", std::int64_t{0});
    const auto& d = w.at("deviations");
    for (std::size_t i = 0; i < d.size(); ++i)
      out += std::to_string(k) + "," + records[k].at("checkKind").get<std::string>() + "," +
             std::to_string(first + static_cast<std::int64_t>(i)) + "," + detail::double_text(d[i].get<double>()) +
             "\n";
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot write '" + path + "'");
  f << text;
}

}  // namespace shadowkit
