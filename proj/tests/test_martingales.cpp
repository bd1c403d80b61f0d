// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "brw/error.hpp"
#include "brw/martingales.hpp"
#include "brw/params.hpp"
#include "brw/stats.hpp"

using namespace brw;

namespace {
SimulationPlan plan_for(ReproductionLaw law, long n, std::uint64_t seed) {
  SimulationPlan p;
  p.model = std::move(law);
  p.n = n;
  p.master_seed = seed;
  return p;
}
}  // namespace

TEST_CASE("additive martingale on trivial laws") {
  const auto one = ReproductionLaw::single_child_at(1.0);
  const SimulationResult a = simulate(plan_for(one, 9, 1));
  CHECK(additive_martingale(a.final, 0.8, kappa(one, 0.8)).value == doctest::Approx(1.0).epsilon(1e-14));
  const auto zero = ReproductionLaw::deterministic(2, PointMasses{{{0.0, 1.0}}});
  const SimulationResult b = simulate(plan_for(zero, 10, 1));
  CHECK(additive_martingale(b.final, 1.3, kappa(zero, 1.3)).value == doctest::Approx(1.0).epsilon(1e-13));
  PopulationSnapshot pruned = b.final;
  pruned.pruned = true;
  CHECK_THROWS_AS(additive_martingale(pruned, 1.3, 0.0), MartingaleBiasError);
}

TEST_CASE("martingale means") {
  const auto law = ReproductionLaw::binary_gaussian();
  const double k = kappa(law, 0.5);
  std::vector<double> w;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    w.push_back(additive_martingale(simulate(plan_for(law, 8, s)).final, 0.5, k).value);
  }
  const MeanEstimate m = mean_estimate(w);
  CHECK(std::fabs(m.mean - 1.0) < 4 * m.std_error);

  std::vector<double> z;
  for (std::uint64_t s = 0; s < 100000; ++s) {
    z.push_back(derivative_martingale(simulate(plan_for(law, 1, s)).final, law).value);
  }
  const MeanEstimate mz = mean_estimate(z);
  CHECK(std::fabs(mz.mean) < 4 * mz.std_error);
  CHECK_THROWS_AS(derivative_martingale(simulate(plan_for(ReproductionLaw::single_child_at(1.0), 2, 0)).final,
                                        ReproductionLaw::single_child_at(1.0)),
                  Error);
}

TEST_CASE("clt functional identities") {
  const auto law = ReproductionLaw::binary_gaussian();
  const TiltParams tp = kappa_derivatives(law, 0.5);
  const SimulationResult r = simulate(plan_for(law, 10, 3));
  const double w = additive_martingale(r.final, 0.5, tp.kappa).value;
  CltSpec one{TestFunction::constant(1.0), tp.kappa_double_prime};
  CHECK(clt_functional(r.final, 0.5, tp.kappa, tp.kappa_prime, one).value == w);
  CltSpec zero{TestFunction::constant(0.0), tp.kappa_double_prime};
  CHECK(clt_functional(r.final, 0.5, tp.kappa, tp.kappa_prime, zero).value == 0.0);
}

TEST_CASE("truncated clt functional") {
  const auto law = ReproductionLaw::binary_gaussian();
  const double theta = 0.5;
  const TiltParams tp = kappa_derivatives(law, theta);
  SimulationPlan p = plan_for(law, 8, 4);
  p.annotations = AnnotationParams::defaults(law, theta);
  const SimulationResult r = simulate(p);
  const CltSpec spec{TestFunction::ramp(-1, 1), tp.kappa_double_prime};
  const Truncation inf{INFINITY, p.annotations->a, p.annotations->L};
  CHECK(truncated_clt_functional(r.final, theta, tp.kappa, tp.kappa_prime, spec, inf).value ==
        clt_functional(r.final, theta, tp.kappa, tp.kappa_prime, spec).value);
  const Truncation none{-1e300, p.annotations->a, p.annotations->L};
  CHECK(truncated_clt_functional(r.final, theta, tp.kappa, tp.kappa_prime, spec, none).value == 0.0);
  const SimulationResult bare = simulate(plan_for(law, 4, 4));
  CHECK_THROWS_AS(truncated_clt_functional(bare.final, theta, tp.kappa, tp.kappa_prime, spec, inf),
                  ContractError);
  const Truncation wrong{1.0, p.annotations->a * 2, p.annotations->L};
  CHECK_THROWS_AS(truncated_clt_functional(r.final, theta, tp.kappa, tp.kappa_prime, spec, wrong),
                  ContractError);
}

TEST_CASE("truncation by hand on a two-generation tree") {
  // Atoms {1, -8}, theta = 0.1, A = 1.8: every sibling sum qualifies and the
  // path condition removes only the (+1, +1) leaf.
  const auto law = ReproductionLaw::finite_atomic({{1.0, {1.0, -8.0}}});
  const double theta = 0.1;
  const TiltParams tp = kappa_triple(law, theta);
  SimulationPlan p = plan_for(law, 2, 0);
  p.annotations = AnnotationParams::defaults(law, theta);
  const AnnotationParams ap = *p.annotations;
  const SimulationResult r = simulate(p);
  const CltSpec spec{TestFunction::ramp(-20, 5), 1.0};
  const double A = 1.8;
  double expected = 0.0;
  int excluded = 0;
  const double pts[2] = {1.0, -8.0};
  const double sib = std::log(std::exp(theta * 1.0) + std::exp(-8.0 * theta)) - ap.a;
  for (double l1 : pts) {
    for (double l2 : pts) {
      const double v = l1 + l2;
      const double path = std::max(l1 - tp.kappa_prime - ap.L, v - 2 * tp.kappa_prime - 2 * ap.L);
      const bool member = path <= A && sib < std::log(A);
      if (!member) {
        ++excluded;
        continue;
      }
      expected += std::exp(theta * v - 2 * tp.kappa) * spec.f((v - 2 * tp.kappa_prime) / std::sqrt(2.0));
    }
  }
  CHECK(excluded == 1);
  const double got =
      truncated_clt_functional(r.final, theta, tp.kappa, tp.kappa_prime, spec, {A, ap.a, ap.L}).value;
  CHECK(got == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("gaussian quadrature") {
  CHECK(gaussian_expectation(TestFunction::constant(2.5), 3.0) == doctest::Approx(2.5).epsilon(1e-13));
  // E ramp(-1, 1)(N): E clamp((N+1)/2, 0, 1) = 1/2 by symmetry.
  CHECK(gaussian_expectation(TestFunction::ramp(-1, 1), 1.0) == doctest::Approx(0.5).epsilon(1e-6));
  const GaussHermite gh = gauss_hermite(5);
  double s = 0;
  for (double w : gh.weights) s += w;
  CHECK(s == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
}

TEST_CASE("leaf reducer matches snapshot functions") {
  const auto law = ReproductionLaw::binary_gaussian();
  const TiltParams tp = kappa_derivatives(law, 0.5);
  SimulationPlan p = plan_for(law, 17, 8);
  const SimulationResult r = simulate(p);
  LeafReducer red(17, 0.5, tp.kappa, tp.kappa_prime, TestFunction::ramp(-1, 1));
  for_each_leaf_block(p, [&](std::span<const double> xs) { red.consume(xs); });
  CHECK(red.additive() == additive_martingale(r.final, 0.5, tp.kappa).value);
  CHECK(red.clt() == clt_functional(r.final, 0.5, tp.kappa, tp.kappa_prime,
                                    {TestFunction::ramp(-1, 1), 1.0}).value);
}
