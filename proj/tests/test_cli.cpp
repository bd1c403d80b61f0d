// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "brw/csv.hpp"
#include "brw/experiment.hpp"

using namespace brw;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}


Json config(const std::string& suite, const std::string& out) {
  Json j = Json::parse(R"({"laws":[{"family":"binary_gaussian","sigma":1},
                                   {"family":"binary_gaussian","sigma":2}],
                           "t":0.5,"horizons":[6,8],"replicates":40,"master_seed":7})");
  j["suite"] = suite;
  j["output_dir"] = out;
  return j;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("brwlab-test-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(INFINITY) == "inf");
}

TEST_CASE("schema errors name the field") {
  Json j = config("params", "x");
  j["horizons"] = Json::array();
  try {
    parse_config(j);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.path() == "/horizons");
  }
  j["horizons"] = {8, 6};
  CHECK_THROWS_AS(parse_config(j), SchemaError);
  j = config("params", "x");
  j["replicates"] = 0;
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("/replicates"), SchemaError);
  j = config("params", "x");
  j["laws"][1]["sigma"] = -1;
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("/laws/1/sigma"), SchemaError);
  j = config("params", "x");
  j["colour"] = "red";
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("/colour"), SchemaError);
  j = config("nonsense", "x");
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("/suite"), SchemaError);
  j = config("params", "x");
  j["laws"][0] = {{"family", "finite_atomic"}, {"atoms", {{{"probability", 0.5}, {"points", {1.0}}}}}};
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("/laws/0"), SchemaError);
}

TEST_CASE("config round trip") {
  Json j = config("max-law", "x");
  j["pruning"] = {{"kind", "window"}, {"width", 9.5}};
  j["theta"] = 0.25;
  j["test_function"] = {{"family", "cosine_bump"}, {"centre", 0.0}, {"half_width", 2.0}};
  const ExperimentConfig c = parse_config(j);
  const Json r = to_json(c);
  CHECK(to_json(parse_config(r)) == r);
  CHECK(r["laws"][1]["displacement"]["variance"] == 4.0);
}

TEST_CASE("params suite") {
  const fs::path out = scratch("params");
  const ExperimentConfig c = parse_config(config("params", out.string()));
  const RunReport rep = run(c);
  CHECK(rep.exit_status() == 0);
  const Json p = params_report(c);
  CHECK(p["regime"] == "fast");
  CHECK(p["theta_mixed"].get<double>() == doctest::Approx(0.74466).epsilon(1e-5));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "verdict.json"));
}

TEST_CASE("determinism across threads and manifest replay") {
  for (const char* suite : {"simulate", "max-law", "clt", "decoration", "spine-check"}) {
    CAPTURE(suite);
    Json j = config(suite, scratch(std::string(suite) + "-1").string());
    j["max_law"] = {{"split_generation", 4}, {"w_horizon", 6}, {"bootstrap_reps", 5}};
    j["spine"] = {{"selection_trials", 200}, {"walk_horizon", 4}};
    if (std::string(suite) == "decoration") j["horizons"] = {3, 4};
    if (std::string(suite) == "spine-check") j["horizons"] = {2, 3};
    ExperimentConfig c = parse_config(j);
    c.threads = 1;
    const RunReport a = run(c);
    const fs::path out8 = scratch(std::string(suite) + "-8");
    c.output_dir = out8.string();
    c.threads = 8;
    run(c);
    // Replay from the first manifest into a third directory.
    std::ifstream in(a.output_dir / "manifest.json");
    ExperimentConfig replay = parse_config(Json::parse(in));
    const fs::path out3 = scratch(std::string(suite) + "-replay");
    replay.output_dir = out3.string();
    run(replay);
    std::size_t csvs = 0;
    for (const auto& e : fs::directory_iterator(a.output_dir)) {
      if (e.path().extension() != ".csv") continue;
      ++csvs;
      const std::string ref = slurp(e.path());
      CHECK(ref.find('\r') == std::string::npos);
      CHECK(slurp(out8 / e.path().filename()) == ref);
      CHECK(slurp(out3 / e.path().filename()) == ref);
    }
    CHECK(csvs >= 1);
  }
}
