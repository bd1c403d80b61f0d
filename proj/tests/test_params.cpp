// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "brw/error.hpp"
#include "brw/params.hpp"

using namespace brw;

namespace {
ReproductionLaw bg(double s) { return ReproductionLaw::binary_gaussian(s); }
}  // namespace

TEST_CASE("critical tilt") {
  CHECK(std::fabs(*solve_theta_star(bg(1.0)) - std::sqrt(2 * std::log(2.0))) < 1e-9);
  const auto lap = ReproductionLaw::deterministic(2, Laplace{1.0});
  CHECK(*solve_theta_star(lap) == doctest::Approx(0.6036).epsilon(2e-4));
  CHECK_FALSE(solve_theta_star(ReproductionLaw::finite_atomic({{1.0, {1.0, -1.0}}})).has_value());
}

TEST_CASE("mixed tilt") {
  CHECK(std::fabs(solve_theta_mixed(bg(1), bg(2), 0.5) - std::sqrt(2 * std::log(2.0) / 2.5)) < 1e-9);
  CHECK(solve_theta_mixed(bg(1), bg(1), 0.3) == doctest::Approx(*solve_theta_star(bg(1))).epsilon(1e-12));
  CHECK(solve_theta_mixed(bg(1), bg(1.2), 0.5) == doctest::Approx(1.06598).epsilon(1e-5));
  const double th = solve_theta_mixed(bg(1), bg(2), 0.5);
  CHECK(std::fabs(0.5 * critical_gap(bg(1), th) + 0.5 * critical_gap(bg(2), th)) < 1e-10);
}

TEST_CASE("regimes") {
  CHECK(classify_regime(bg(1), bg(2), 0.5).regime == Regime::Fast);
  CHECK(classify_regime(bg(2), bg(1), 0.5).regime == Regime::Slow);
  CHECK(classify_regime(bg(1), bg(1), 0.5).regime == Regime::Mean);
  const RegimeSpec f = classify_regime(bg(1), bg(2), 0.5);
  const TiltParams t1 = kappa_triple(f.law1, *f.theta_mixed);
  CHECK(t1.kappa > *f.theta_mixed * t1.kappa_prime);
  CHECK_THROWS_AS(classify_regime(ReproductionLaw::finite_atomic({{1.0, {1.0, -1.0}}}), bg(1), 0.5),
                  UnsupportedConfiguration);
}

TEST_CASE("centering") {
  CHECK(centering(classify_regime(bg(1), bg(2), 0.5), 100) == doctest::Approx(183.073).epsilon(1e-5));
  CHECK(centering(classify_regime(bg(2), bg(1), 0.5), 100) == doctest::Approx(161.660).epsilon(1e-5));
  for (const auto& spec : {classify_regime(bg(1), bg(2), 0.5), classify_regime(bg(2), bg(1), 0.5),
                           classify_regime(bg(1), bg(1), 0.5)}) {
    double lo = 1e300;
    double hi = -1e300;
    for (long n : {10L, 100L, 1000L, 10000L}) {
      const double d = centering(spec, n) - centering(spec, n, CenteringForm::Alternative);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    CHECK(hi - lo < 10.0);
  }
  const RegimeSpec s = classify_regime(bg(1), bg(2), 0.5);
  CHECK_THROWS_AS(centering(s, 1), DomainError);
  CHECK(s.split_generation(7) == 3);
  const RegimeSpec r = classify_regime(bg(1), bg(2), 0.3);
  CHECK(r.split_generation(10) == 3);
}

TEST_CASE("speed") {
  CHECK(speed(bg(1)) == doctest::Approx(std::sqrt(2 * std::log(2.0))).epsilon(1e-10));
  CHECK(speed(bg(3)) == doctest::Approx(3 * std::sqrt(2 * std::log(2.0))).epsilon(1e-10));
  CHECK(speed(ReproductionLaw::single_child_at(1.0)) == doctest::Approx(1.0).epsilon(1e-6));
}
