// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "brw/engine.hpp"
#include "brw/error.hpp"
#include "brw/extremes.hpp"
#include "brw/laws.hpp"
#include "brw/martingales.hpp"
#include "brw/params.hpp"

namespace brw {

using Json = nlohmann::ordered_json;

/// A configuration field failed validation; `path` is a JSON pointer.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Suite { Params, Simulate, MaxLaw, Clt, Decoration, SpineCheck, SlowMaxLaw, MeanExploratory };
std::string_view to_string(Suite s);
std::optional<Suite> suite_from_string(std::string_view s);

enum class MaxLawMethod { Conditional, Simulate };

struct MaxLawOptions {
  MaxLawMethod method = MaxLawMethod::Conditional;
  long split_generation = 12;   ///< exact tree depth before the tail recursion takes over
  long w_horizon = 16;          ///< generation of the martingale samples
  std::size_t w_replicates = 0; ///< 0 selects `replicates`
  std::size_t bootstrap_reps = 200;
  CenteringForm centering = CenteringForm::Theorem;
  double tail_step = 0.025;
};

struct DecorationConfig {
  DecorationMethod method = DecorationMethod::Conditioned;
  double depth_window = 0.0;  ///< 0 selects 15 / theta
  std::size_t max_attempts = 100'000'000;
};

struct SpineConfig {
  std::size_t selection_trials = 100'000;
  long walk_horizon = 10;
};

struct ExperimentConfig {
  Suite suite = Suite::Params;
  std::vector<Json> laws;  ///< resolved law documents (one or two)
  double t = 0.5;
  std::vector<long> horizons;
  std::size_t replicates = 1;
  std::uint64_t master_seed = 0;
  Pruning pruning;
  std::string output_dir = "out";
  bool allow_partial = false;
  std::optional<double> theta;
  std::optional<Json> test_function;  ///< resolved test-function document
  MaxLawOptions max_law;
  DecorationConfig decoration;
  SpineConfig spine;
  /// Worker threads; never part of the manifest since results do not depend on it.
  unsigned threads = 1;

  ReproductionLaw law1() const;
  ReproductionLaw law2() const;
  /// The configured test function, or ramp(-1, 1, 1).
  TestFunction f() const;
};

/// Builds a law from its document; `path` prefixes error locations.
ReproductionLaw parse_law(const Json& doc, const std::string& path);
/// The law document with every default made explicit.
Json resolve_law(const Json& doc, const std::string& path);

/// Validates a config document (a manifest is accepted too: its "config"
/// member is used). Throws SchemaError naming the offending field.
ExperimentConfig parse_config(const Json& doc);
/// Resolved configuration; parse_config(to_json(c)) reproduces c.
Json to_json(const ExperimentConfig& c);

enum class CheckStatus { Pass, Warn, Fail };
std::string_view to_string(CheckStatus s);

struct Check {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  double value = 0.0;
  std::string detail;
};

struct RunReport {
  Suite suite = Suite::Params;
  std::vector<Check> checks;
  Json solver;   ///< solved parameters and other derived numbers
  Json results;  ///< suite-specific summary
  std::filesystem::path output_dir;

  CheckStatus overall() const;
  int exit_status() const { return overall() == CheckStatus::Fail ? 1 : 0; }
  Json verdict() const;
};

/// Runs one suite, writing manifest.json, the suite CSVs and verdict.json
/// into the output directory.
RunReport run(const ExperimentConfig& config);

/// The parameter report printed by the params subcommand.
Json params_report(const ExperimentConfig& config);

inline constexpr std::string_view kVersion = "1.0.0";

}  // namespace brw
