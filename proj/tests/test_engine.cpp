// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "brw/engine.hpp"
#include "brw/error.hpp"
#include "brw/max_recursion.hpp"
#include "brw/stats.hpp"

using namespace brw;

namespace {
SimulationPlan plan_for(ReproductionLaw law, long n, std::uint64_t seed = 1) {
  SimulationPlan p;
  p.model = std::move(law);
  p.n = n;
  p.master_seed = seed;
  return p;
}
}  // namespace

TEST_CASE("trivial trees") {
  const SimulationResult a = simulate(plan_for(ReproductionLaw::single_child_at(1.0), 7));
  CHECK(a.final.positions == std::vector<double>{7.0});
  CHECK(max_of(a.final) == 7.0);
  const auto zero = ReproductionLaw::deterministic(2, PointMasses{{{0.0, 1.0}}});
  const SimulationResult b = simulate(plan_for(zero, 10));
  CHECK(b.final.size() == 1024);
  CHECK(max_of(b.final) == 0.0);
  CHECK(b.summaries.size() == 11);
  const auto pm = ReproductionLaw::finite_atomic({{1.0, {1.0, -1.0}}});
  CHECK(max_of(simulate(plan_for(pm, 3)).final) == 3.0);
}

TEST_CASE("plan validation and budget") {
  SimulationPlan p = plan_for(ReproductionLaw::binary_gaussian(), 0);
  CHECK_THROWS_AS(simulate(p), ParameterError);
  p.n = 30;
  p.memory_budget = 1 << 20;
  CHECK_THROWS_AS(simulate(p), BudgetExceeded);
  p.n = 5;
  p.pruning = Pruning::window(-1.0);
  CHECK_THROWS_AS(simulate(p), ParameterError);
}

TEST_CASE("poisson extinction is reported") {
  const auto law = ReproductionLaw::poisson(0.5, Gaussian{});
  bool died = false;
  for (std::uint64_t s = 0; s < 20 && !died; ++s) {
    try {
      simulate(plan_for(law, 40, s));
    } catch (const ExtinctionError&) {
      died = true;
    }
  }
  CHECK(died);
}

TEST_CASE("window pruning keeps the maximum") {
  int same = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    SimulationPlan p = plan_for(ReproductionLaw::binary_gaussian(), 12, s);
    const double full = max_of(simulate(p).final);
    p.pruning = Pruning::window(12.0);
    same += max_of(simulate(p).final) == full;
  }
  CHECK(same >= 990);
}

TEST_CASE("top-k pruning") {
  SimulationPlan p = plan_for(ReproductionLaw::binary_gaussian(), 12, 3);
  p.pruning = Pruning::top_k(50);
  const SimulationResult r = simulate(p);
  CHECK(r.final.size() == 50);
  CHECK(r.final.pruned);
}

TEST_CASE("results do not depend on threads or streaming") {
  SimulationPlan p = plan_for(ReproductionLaw::binary_gaussian(1.3), 15, 99);
  const SimulationResult a = simulate(p);
  p.threads = 4;
  const SimulationResult b = simulate(p);
  CHECK(a.final.positions == b.final.positions);
  std::vector<double> streamed;
  for_each_leaf_block(p, [&](std::span<const double> xs) { streamed.insert(streamed.end(), xs.begin(), xs.end()); });
  CHECK(streamed == a.final.positions);
}

TEST_CASE("pruning does not change survivors' draws") {
  SimulationPlan p = plan_for(ReproductionLaw::binary_gaussian(), 10, 5);
  const double full = max_of(simulate(p).final);
  p.pruning = Pruning::top_k(1);
  // Greedy top-1 follows a single line, so its max can only be lower.
  CHECK(max_of(simulate(p).final) <= full);
}

TEST_CASE("extremal points") {
  PopulationSnapshot s;
  s.positions = {7.0};
  const PointSample e = extremal_points(s, 5.0, 0.0);
  CHECK(e.points == std::vector<double>{2.0});
  CHECK(extremal_points(s, 5.0, 3.0).points.empty());
  CHECK_THROWS_AS(extremal_points(s, 5.0, INFINITY), DomainError);
}

TEST_CASE("binary position files") {
  std::stringstream ss;
  const std::vector<double> xs{1.5, -2.25, 1e300};
  write_positions(ss, xs);
  CHECK(ss.str().size() == 8 + 3 * 8);
  CHECK(read_positions(ss) == xs);
}

TEST_CASE("annotations follow the definitions") {
  SimulationPlan p = plan_for(ReproductionLaw::binary_gaussian(), 1, 2);
  const double theta = 0.5;
  p.annotations = AnnotationParams::defaults(ReproductionLaw::binary_gaussian(), theta);
  const SimulationResult r = simulate(p);
  const AnnotationParams& ap = *p.annotations;
  const auto& x = r.final.positions;
  const double sib = std::log(std::exp(theta * x[0]) + std::exp(theta * x[1])) - ap.a;
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.final.annotations[i].sibling_weight_excess == doctest::Approx(sib).epsilon(1e-12));
    CHECK(r.final.annotations[i].path_max_excess ==
          doctest::Approx(x[i] - ap.kappa_prime - ap.L).epsilon(1e-12));
  }
}

TEST_CASE("tail recursion matches simulation") {
  const auto law = ReproductionLaw::binary_gaussian();
  const auto tails = tail_sequence(law, 8);
  std::vector<double> m;
  for (std::uint64_t s = 0; s < 4000; ++s) m.push_back(max_of(simulate(plan_for(law, 8, s)).final));
  const EmpiricalCdf cdf(m);
  const double ks = ks_distance(cdf, [&](double z) { return 1.0 - tails[8](z); });
  CHECK(ks < 0.03);
  // Conditional sampler from generation 4.
  SimulationPlan p = plan_for(law, 8);
  const ConditionalMaxSampler cs(p, 4);
  std::vector<double> c;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    SimulationPlan h = plan_for(law, 4, 10000 + s);
    c.push_back(cs.sample(simulate(h).final.positions, Stream(s).uniform()));
  }
  CHECK(ks_distance(EmpiricalCdf(c), cdf) < 0.04);
}
