// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: one subcommand per experiment suite plus `report`.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "brw/experiment.hpp"

namespace fs = std::filesystem;
using brw::Json;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::optional<std::string> out;
  bool allow_partial = false;
};

Json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw brw::SchemaError("/", "cannot read config file " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw brw::SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
}

bool compatible(std::string_view cmd, brw::Suite s) {
  if (cmd == "max-law") {
    return s == brw::Suite::MaxLaw || s == brw::Suite::SlowMaxLaw ||
           s == brw::Suite::MeanExploratory;
  }
  return brw::to_string(s) == cmd;
}

int run_suite(const std::string& cmd, const Flags& f) {
  Json doc = load(f.config);
  Json& cfg = doc.contains("config") && doc.contains("versions") ? doc["config"] : doc;
  bool chosen_by_regime = false;
  if (cfg.is_object() && !cfg.contains("suite")) {
    cfg["suite"] = cmd;
    chosen_by_regime = cmd == "max-law";
  }
  brw::ExperimentConfig c = brw::parse_config(doc);
  if (!compatible(cmd, c.suite)) {
    std::cerr << "error: config suite '" << brw::to_string(c.suite)
              << "' does not match subcommand '" << cmd << "'\n";
    return 2;
  }
  if (chosen_by_regime) {
    try {
      const brw::RegimeSpec spec = brw::classify_regime(c.law1(), c.law2(), c.t);
      c.suite = spec.regime == brw::Regime::Fast   ? brw::Suite::MaxLaw
                : spec.regime == brw::Regime::Slow ? brw::Suite::SlowMaxLaw
                                                   : brw::Suite::MeanExploratory;
    } catch (const brw::Error&) {
      // Left as max-law; the suite reports the solver failure.
    }
  }
  if (f.seed) c.master_seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  if (f.allow_partial) c.allow_partial = true;
  c.threads = f.threads;

  const brw::RunReport rep = brw::run(c);
  if (cmd == "params") {
    std::cout << brw::params_report(c).dump(2) << '\n';
  }
  for (const brw::Check& ch : rep.checks) {
    std::cerr << brw::to_string(ch.status) << "  " << ch.name << "  " << ch.detail << '\n';
  }
  std::cerr << "suite " << brw::to_string(rep.suite) << ": " << brw::to_string(rep.overall())
            << " (" << rep.output_dir.string() << ")\n";
  return rep.exit_status();
}

int report(const std::string& dir) {
  std::vector<fs::path> verdicts;
  if (fs::exists(fs::path(dir) / "verdict.json")) verdicts.push_back(fs::path(dir) / "verdict.json");
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.path().filename() == "verdict.json" && e.path().parent_path() != fs::path(dir)) {
        verdicts.push_back(e.path());
      }
    }
  }
  if (verdicts.empty()) {
    std::cerr << "error: no verdict.json under " << dir << '\n';
    return 2;
  }
  std::sort(verdicts.begin(), verdicts.end());
  bool failed = false;
  for (const fs::path& p : verdicts) {
    std::ifstream in(p);
    const Json v = Json::parse(in);
    std::cout << v.at("suite").get<std::string>() << ": " << v.at("status").get<std::string>()
              << "  [" << p.parent_path().string() << "]\n";
    for (const Json& ch : v.at("checks")) {
      std::cout << "  " << ch.at("status").get<std::string>() << "  "
                << ch.at("name").get<std::string>() << "  " << ch.at("detail").get<std::string>()
                << '\n';
    }
    failed = failed || v.at("status") == "fail";
  }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-speed branching random walk experiments"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  std::string out;

  const std::vector<std::string> suites = {"params", "simulate", "max-law", "clt",
                                           "decoration", "spine-check"};
  for (const std::string& name : suites) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " suite");
    sub->add_option("--config", flags.config, "JSON config or manifest")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override master_seed");
    sub->add_option("--threads", flags.threads, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output directory (overrides output_dir)");
    sub->add_flag("--allow-partial", flags.allow_partial,
                  "downgrade partial-result errors to warnings");
  }
  CLI::App* rep = app.add_subcommand("report", "summarize verdict files");
  std::string report_dir = "out";
  rep->add_option("--out", report_dir, "directory holding verdict.json files");
  rep->add_option("--config", flags.config, "unused; accepted for symmetry");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rep->parsed()) return report(report_dir);
    for (const std::string& name : suites) {
      CLI::App* sub = app.get_subcommand(name);
      if (!sub->parsed()) continue;
      if (sub->count("--seed") > 0) flags.seed = seed;
      if (sub->count("--out") > 0) flags.out = out;
      return run_suite(name, flags);
    }
  } catch (const brw::SchemaError& e) {
    std::cerr << "config error at " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
