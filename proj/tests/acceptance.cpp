// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "brw/csv.hpp"
#include "brw/engine.hpp"
#include "brw/experiment.hpp"
#include "brw/martingales.hpp"
#include "brw/params.hpp"
#include "brw/spine.hpp"
#include "brw/stats.hpp"

using namespace brw;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const fs::path kRoot = "acceptance_out";

Json law_doc(double sigma) { return {{"family", "binary_gaussian"}, {"sigma", sigma}}; }

Json suite_doc(const std::string& suite, double s1, double s2, std::vector<long> horizons,
               std::size_t replicates, const std::string& dir) {
  Json j;
  j["suite"] = suite;
  j["laws"] = {law_doc(s1), law_doc(s2)};
  j["t"] = 0.5;
  j["horizons"] = horizons;
  j["replicates"] = replicates;
  j["master_seed"] = 20260101;
  j["output_dir"] = (kRoot / dir).string();
  return j;
}

// Summarizes a suite report; passes when no check failed.
Outcome from_report(const RunReport& rep, double budget_s, double elapsed) {
  Outcome o;
  o.pass = rep.overall() != CheckStatus::Fail;
  std::ostringstream os;
  for (const Check& c : rep.checks) {
    os << "\n      [" << to_string(c.status) << "] " << c.name << ": " << c.detail;
  }
  if (elapsed > budget_s) {
    o.pass = false;
    os << "\n      runtime " << elapsed << " s over the " << budget_s << " s budget";
  }
  o.detail = os.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion1() {
  const double target_star = std::sqrt(2.0 * std::numbers::ln2);
  const double target_mixed = std::sqrt(2.0 * std::numbers::ln2 / 2.5);
  const double star = solve_theta_star(ReproductionLaw::binary_gaussian(1.0)).value();
  const double mixed = solve_theta_mixed(ReproductionLaw::binary_gaussian(1.0),
                                         ReproductionLaw::binary_gaussian(2.0), 0.5);
  auto reg = [](double a, double b) {
    return classify_regime(ReproductionLaw::binary_gaussian(a), ReproductionLaw::binary_gaussian(b), 0.5)
        .regime;
  };
  const bool regimes =
      reg(1, 2) == Regime::Fast && reg(2, 1) == Regime::Slow && reg(1, 1) == Regime::Mean;
  Outcome o;
  o.pass = std::fabs(star - target_star) < 1e-9 && std::fabs(mixed - target_mixed) < 1e-9 && regimes;
  char buf[256];
  std::snprintf(buf, sizeof buf, "theta* err %.2e, mixed err %.2e, regimes %s",
                std::fabs(star - target_star), std::fabs(mixed - target_mixed),
                regimes ? "ok" : "wrong");
  o.detail = buf;
  return o;
}

Outcome criterion2() {
  // Both readings of the {+-1} law: a deterministic pair, and two independent +-1 children.
  const std::vector<ReproductionLaw> laws = {
      ReproductionLaw::finite_atomic({{1.0, {1.0, -1.0}}}),
      ReproductionLaw::finite_atomic(
          {{0.25, {1.0, 1.0}}, {0.25, {1.0, -1.0}}, {0.25, {-1.0, 1.0}}, {0.25, {-1.0, -1.0}}})};
  const std::vector<PathFunctional> gs = {PathFunctional::constant(1.0),
                                          PathFunctional::endpoint_box(0.0, INFINITY),
                                          PathFunctional::endpoint_box(1.0, 1.0)};
  double worst = 0.0;
  for (const auto& law : laws) {
    for (const auto& g : gs) {
      const auto [l, r] = many_to_one_exact(law, 1.0, 3, g);
      worst = std::max(worst, std::fabs(l - r));
    }
  }
  return {worst <= 1e-12, "largest |lhs - rhs| " + format_double(worst)};
}

Outcome criterion3() {
  const ReproductionLaw law = ReproductionLaw::binary_gaussian(1.0);
  const double star = solve_theta_star(law).value();
  const TiltParams half = kappa_derivatives(law, 0.5);
  const TiltParams crit = kappa_derivatives(law, star);
  const std::size_t reps = 10000;
  Outcome o{true, ""};
  for (long n : {4L, 8L, 16L}) {
    std::vector<double> w(reps);
    std::vector<double> z(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      SimulationPlan plan;
      plan.model = law;
      plan.n = n;
      plan.master_seed = 31337;
      plan.replicate = r;
      LeafReducer rw(n, 0.5, half.kappa, half.kappa_prime);
      LeafReducer rz(n, star, crit.kappa, crit.kappa_prime, std::nullopt, true);
      for_each_leaf_block(plan, [&](std::span<const double> leaves) {
        rw.consume(leaves);
        rz.consume(leaves);
      });
      w[r] = rw.additive();
      z[r] = rz.derivative();
    }
    const MeanEstimate mw = mean_estimate(w);
    const MeanEstimate mz = mean_estimate(z);
    const double zw = std::fabs(mw.mean - 1.0) / mw.std_error;
    const double zz = std::fabs(mz.mean) / mz.std_error;
    o.pass = o.pass && zw <= 4.0 && zz <= 4.0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "\n      n=%ld: mean W %.5f (%.2f se), mean Z %.5f (%.2f se)", n,
                  mw.mean, zw, mz.mean, zz);
    o.detail += buf;
  }
  return o;
}

Outcome criterion4(double& elapsed_budget) {
  elapsed_budget = 300.0;
  Json j = suite_doc("clt", 1.0, 1.0, {12, 24}, 5000, "c4-clt");
  j["theta"] = 0.5;
  const auto t0 = std::chrono::steady_clock::now();
  const RunReport rep = run(parse_config(j));
  const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return from_report(rep, elapsed_budget, el);
}

Outcome criterion5() {
  Json j = suite_doc("spine-check", 1.0, 1.0, {4}, 2000, "c5-spine");
  j["theta"] = 0.5;
  j["spine"] = {{"selection_trials", 100000}, {"walk_horizon", 10}};
  const auto t0 = std::chrono::steady_clock::now();
  const RunReport rep = run(parse_config(j));
  const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return from_report(rep, 120.0, el);
}

Outcome run_suite(const Json& j, double budget) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunReport rep = run(parse_config(j));
  const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return from_report(rep, budget, el);
}

Outcome criterion9() {
  // Small instances of every stochastic suite, each run with 1 and 8 threads.
  Outcome o{true, ""};
  const std::vector<std::pair<std::string, Json>> cases = {
      {"simulate", suite_doc("simulate", 1.0, 1.2, {10, 12}, 200, "")},
      {"max-law", suite_doc("max-law", 1.0, 1.2, {40, 60}, 400, "")},
      {"clt", suite_doc("clt", 1.0, 1.0, {6, 8}, 200, "")},
      {"decoration", suite_doc("decoration", 1.0, 1.2, {6, 8}, 200, "")},
      {"spine-check", suite_doc("spine-check", 1.0, 1.0, {3}, 200, "")},
  };
  for (const auto& [name, doc] : cases) {
    Json j = doc;
    if (name == "max-law") j["max_law"] = {{"w_horizon", 10}, {"bootstrap_reps", 20}};
    if (name == "spine-check") j["spine"] = {{"selection_trials", 2000}, {"walk_horizon", 5}};
    ExperimentConfig c = parse_config(j);
    const fs::path d1 = kRoot / ("c9-" + name + "-t1");
    const fs::path d8 = kRoot / ("c9-" + name + "-t8");
    c.output_dir = d1.string();
    c.threads = 1;
    run(c);
    c.output_dir = d8.string();
    c.threads = 8;
    run(c);
    std::size_t files = 0;
    std::size_t differ = 0;
    for (const auto& e : fs::directory_iterator(d1)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (slurp(e.path()) != slurp(d8 / e.path().filename())) ++differ;
    }
    if (files == 0 || differ != 0) o.pass = false;
    o.detail += "\n      " + name + ": " + std::to_string(files) + " CSVs, " +
                std::to_string(differ) + " differ";
  }
  return o;
}

Outcome criterion10() {
  const ReproductionLaw law = ReproductionLaw::binary_gaussian(1.0);
  const double theta = solve_theta_star(law).value();
  const long n = 14;
  const std::size_t seeds = 10000;
  std::vector<double> pruned(seeds);
  std::vector<double> full(seeds);
  std::size_t differ = 0;
  for (std::size_t s = 0; s < seeds; ++s) {
    SimulationPlan plan;
    plan.model = law;
    plan.n = n;
    plan.master_seed = 4242;
    plan.replicate = s;
    full[s] = max_of(simulate(plan).final);
    plan.pruning = Pruning::window(10.0 / theta);
    pruned[s] = max_of(simulate(plan).final);
    if (pruned[s] != full[s]) ++differ;
  }
  const double ks = ks_distance(EmpiricalCdf(pruned), EmpiricalCdf(full));
  return {ks < 0.01, "KS " + format_double(ks) + ", seeds with a different max: " +
                         std::to_string(differ)};
}

}  // namespace

int main() {
  fs::create_directories(kRoot);
  int failures = 0;
  auto report = [&](int id, const std::string& title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %s  (%.1f s)%s%s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(),
                el, o.detail.empty() || o.detail[0] == '\n' ? "" : "\n      ", o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "critical parameters", [] {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = criterion1();
    if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() > 1.0) {
      o.pass = false;
    }
    return o;
  });
  report(2, "many-to-one exactness", criterion2);
  report(3, "martingale identities", criterion3);
  report(4, "additive martingale CLT", [] {
    double budget = 0.0;
    return criterion4(budget);
  });
  report(5, "spinal decomposition", criterion5);
  report(6, "fast-regime max law", [] {
    Json j = suite_doc("max-law", 1.0, 1.2, {400, 800}, 10000, "c6-fast");
    return run_suite(j, 900.0);
  });
  report(7, "decoration law", [] {
    Json j = suite_doc("decoration", 1.0, 1.2, {16, 20}, 10000, "c7-decoration");
    return run_suite(j, 600.0);
  });
  report(8, "slow-regime max law", [] {
    Json j = suite_doc("slow-max-law", 2.0, 1.0, {400, 800}, 10000, "c8-slow");
    return run_suite(j, 900.0);
  });
  report(9, "determinism across thread counts", criterion9);
  report(10, "window pruning validity", criterion10);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
