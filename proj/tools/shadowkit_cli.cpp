// shadowkit: runs a configured check and writes its report, or replays a report.
//
//   shadowkit check-shadowing --config configs/shadowing_full_shift.conf --out run.jsonl
//   shadowkit replay run.jsonl
//
// Exit codes: 0 all pass, 1 any fail, 2 any error, 3 usage or configuration error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "shadowkit/checks.hpp"

namespace {

using namespace shadowkit;

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_error = 2;
constexpr int exit_usage = 3;

struct Options {
  std::string config;
  std::string out;
  std::string format;
  std::string plot;
  std::string report;
  std::int64_t seed = 0;
  bool seed_given = false;
  bool timing = false;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    write_text(path, text);
  }
}

int outcome_code(const std::vector<Json>& records) {
  bool any_fail = false;
  for (const auto& r : records) {
    const auto& o = r.at("outcome");
    if (o == "error") return exit_error;
    if (o != "pass") any_fail = true;
  }
  return any_fail ? exit_fail : exit_pass;
}

int run(const std::string& kind, const Options& opt) {
  RunConfig cfg;
  try {
    cfg = load_config(opt.config);
  } catch (const Error& e) {
    std::cerr << opt.config << ": " << e.what() << "\n";
    return exit_usage;
  }
  if (cfg.check.kind != kind) {
    std::cerr << opt.config << ": check.kind is '" << cfg.check.kind << "', expected '" << kind << "'\n";
    return exit_usage;
  }
  if (opt.seed_given) cfg.check.values["seed"] = std::to_string(opt.seed);
  if (!opt.out.empty()) cfg.output.path = opt.out;
  if (!opt.format.empty()) cfg.output.format = opt.format;
  if (!opt.plot.empty()) cfg.output.plot = opt.plot;
  if (opt.timing) cfg.output.timing = true;

  std::vector<Json> records;
  try {
    records = run_check(cfg);
  } catch (const Error& e) {
    std::cerr << opt.config << ": " << e.what() << "\n";
    return e.code() == ErrorCode::syntax || e.code() == ErrorCode::unknown_key || e.code() == ErrorCode::io
               ? exit_usage
               : exit_error;
  }
  try {
    emit(cfg.output.path, cfg.output.format == "csv" ? to_csv(records) : to_jsonl(records));
    if (!cfg.output.plot.empty()) write_text(cfg.output.plot, to_plot_csv(records));
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_usage;
  }
  return outcome_code(records);
}

int replay(const Options& opt) {
  std::string report = opt.report;
  if (report.empty() && !opt.config.empty()) {
    try {
      const RunConfig cfg = load_config(opt.config);
      if (cfg.check.kind != "replay" || !cfg.check.has("report")) {
        std::cerr << opt.config << ": a replay config needs check.kind = replay and check.report\n";
        return exit_usage;
      }
      report = cfg.check.text("report");
      if (report.front() != '/') report = cfg.base_dir + "/" + report;
    } catch (const Error& e) {
      std::cerr << opt.config << ": " << e.what() << "\n";
      return exit_usage;
    }
  }
  if (report.empty()) {
    std::cerr << "replay needs a report file or --config\n";
    return exit_usage;
  }
  ReplayOutcome res;
  try {
    res = replay_verify(parse_jsonl(read_file(report)));
  } catch (const Error& e) {
    std::cerr << report << ": " << e.what() << "\n";
    return e.code() == ErrorCode::io ? exit_usage : exit_error;
  }
  for (const auto& f : res.failures) std::cerr << f << "\n";
  std::ostringstream line;
  line << "replay " << (res.ok ? "ok" : "FAILED") << ": " << res.verified << " verified, " << res.skipped
       << " skipped, " << res.failures.size() << " failed\n";
  emit(opt.out, line.str());
  return res.ok ? exit_pass : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Executable shadowing, specification and barycenter checks"};
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::pair<std::string, std::string>> checks{
      {"check-shadowing", "shadowing"},   {"spec", "spec"},
      {"barycenter", "barycenter"},       {"heteroclinic", "heteroclinic"},
      {"periodic-points", "periodic-points"}, {"falsify-shadowing", "falsify-shadowing"}};
  std::vector<std::pair<CLI::App*, std::string>> commands;
  for (const auto& [name, kind] : checks) {
    CLI::App* sub = app.add_subcommand(name, "run a " + kind + " check");
    sub->add_option("--config", opt.config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "report path (default stdout)");
    sub->add_option("--seed", opt.seed, "override check.seed");
    sub->add_option("--format", opt.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
    sub->add_option("--plot", opt.plot, "CSV of deviation profiles");
    sub->add_flag("--timing", opt.timing, "record wall-clock times (reports stop being byte-reproducible)");
    commands.emplace_back(sub, kind);
  }
  CLI::App* rep = app.add_subcommand("replay", "re-verify every passing record of a JSONL report");
  rep->add_option("report", opt.report, "JSONL report")->check(CLI::ExistingFile);
  rep->add_option("--config", opt.config, "replay configuration (check.report names the file)")
      ->check(CLI::ExistingFile);
  rep->add_option("--out", opt.out, "summary path (default stdout)");
  rep->add_option("--seed", opt.seed, "accepted for uniformity; replay takes seeds from the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }
  for (const auto& [sub, kind] : commands) {
    if (sub->parsed()) {
      opt.seed_given = sub->count("--seed") > 0;
      return run(kind, opt);
    }
  }
  return replay(opt);
}
