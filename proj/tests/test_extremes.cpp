// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "brw/error.hpp"
#include "brw/extremes.hpp"
#include "brw/params.hpp"

using namespace brw;

namespace {
ReproductionLaw two_outcomes() {
  return ReproductionLaw::finite_atomic({{0.5, {0.0, 0.0}}, {0.5, {1.0, 0.0}}});
}
}  // namespace

TEST_CASE("ramp function") {
  const RampFunction r = RampFunction::make(-1.5, -0.5, 1.0);
  CHECK(r(-2) == 0.0);
  CHECK(r(-1) == doctest::Approx(0.5));
  CHECK(r(0) == 1.0);
  CHECK_THROWS_AS(RampFunction::make(1, 0, 1), ParameterError);
  CHECK_THROWS_AS(RampFunction::make(0, 1, 0), ParameterError);
}

TEST_CASE("decoration of a two-outcome law") {
  // theta = 3 puts kappa'(theta) strictly between 0 and 1.
  const double theta = 3.0;
  const TiltParams tp = kappa_triple(two_outcomes(), theta);
  REQUIRE(tp.kappa_prime > 0.0);
  REQUIRE(tp.kappa_prime < 1.0);
  for (DecorationMethod m : {DecorationMethod::Rejection, DecorationMethod::Conditioned}) {
    DecorationOptions o;
    o.method = m;
    const DecorationResult r = sample_decoration(two_outcomes(), theta, 1, 500, 17, o);
    REQUIRE(r.samples.size() == 500);
    for (const PointSample& s : r.samples) CHECK(s.points == std::vector<double>{0.0, -1.0});
    const double se = std::sqrt(0.25 / r.attempts);
    CHECK(std::fabs(r.acceptance_rate - 0.5) < 4 * se);
    CHECK(r.rate_ci.lo <= r.acceptance_rate);
    CHECK(r.rate_ci.hi >= r.acceptance_rate);
    const LaplaceEstimate e = empirical_laplace(r.samples, RampFunction::make(-1.5, -0.5, 1.0));
    CHECK(e.estimate == doctest::Approx(std::exp(-1.5)).epsilon(1e-14));
    CHECK(e.std_error == doctest::Approx(0.0));
  }
}

TEST_CASE("decoration preconditions and budget") {
  CHECK_THROWS_AS(sample_decoration(ReproductionLaw::binary_gaussian(), 0.5, 5, 10, 1), ParameterError);
  DecorationOptions o;
  o.max_attempts = 10;
  o.method = DecorationMethod::Rejection;
  try {
    sample_decoration(ReproductionLaw::binary_gaussian(1.2), 1.06598, 12, 1000, 1, o);
    FAIL("expected a partial result");
  } catch (const PartialResult& e) {
    CHECK(e.accepted() < 1000);
  }
}

TEST_CASE("conditioned and rejection decorations agree") {
  const auto law = ReproductionLaw::binary_gaussian(1.2);
  const double theta = solve_theta_mixed(ReproductionLaw::binary_gaussian(1.0), law, 0.5);
  DecorationOptions rej;
  rej.method = DecorationMethod::Rejection;
  DecorationOptions con;
  con.method = DecorationMethod::Conditioned;
  const long n = 6;
  const DecorationResult a = sample_decoration(law, theta, n, 3000, 1, rej);
  const DecorationResult b = sample_decoration(law, theta, n, 3000, 2, con);
  auto over = [](const DecorationResult& r) {
    std::vector<double> v;
    for (const auto& s : r.samples) v.push_back(s.overshoot);
    return EmpiricalCdf(v);
  };
  auto second = [](const DecorationResult& r) {
    std::vector<double> v;
    for (const auto& s : r.samples) v.push_back(s.points.size() > 1 ? s.points[1] : s.lower_edge);
    return EmpiricalCdf(v);
  };
  CHECK(ks_distance(over(a), over(b)) < 0.05);
  CHECK(ks_distance(second(a), second(b)) < 0.05);
  const double se = std::hypot(a.acceptance_rate * (1 - a.acceptance_rate) / a.attempts,
                               b.acceptance_rate * (1 - b.acceptance_rate) / b.attempts);
  CHECK(std::fabs(a.acceptance_rate - b.acceptance_rate) < 4 * std::sqrt(se));
  for (const auto& s : b.samples) {
    CHECK(s.points.front() == 0.0);
    CHECK(s.points.back() >= -15.0 / theta);
  }
  // Every node below the root through the biased proposal.
  DecorationOptions biased = con;
  biased.plain_draw_floor = 2.0;
  const DecorationResult d = sample_decoration(law, theta, n, 3000, 3, biased);
  CHECK(ks_distance(over(a), over(d)) < 0.05);
  CHECK(ks_distance(second(a), second(d)) < 0.05);
  auto counts = [](const DecorationResult& r) {
    std::vector<double> v;
    for (const auto& s : r.samples) v.push_back(static_cast<double>(s.points.size()));
    return EmpiricalCdf(v);
  };
  CHECK(ks_distance(counts(a), counts(b)) < 0.05);
  CHECK(ks_distance(counts(a), counts(d)) < 0.05);
  // Thread count never changes the samples.
  con.threads = 4;
  const DecorationResult c = sample_decoration(law, theta, n, 3000, 2, con);
  CHECK(c.attempts == b.attempts);
  CHECK(c.samples.back().points == b.samples.back().points);
}

TEST_CASE("conditioned decoration of a finite atomic law") {
  const auto law = ReproductionLaw::finite_atomic({{0.5, {0.3, -0.7}},
                                                   {0.3, {1.0}},
                                                   {0.2, {0.5, 0.2, -1.2}}});
  const double theta = 3.5;
  const TiltParams tp = kappa_triple(law, theta);
  REQUIRE(theta * tp.kappa_prime > tp.kappa);
  DecorationOptions rej;
  rej.method = DecorationMethod::Rejection;
  DecorationOptions con;
  con.method = DecorationMethod::Conditioned;
  con.plain_draw_floor = 2.0;
  const long n = 5;
  const DecorationResult a = sample_decoration(law, theta, n, 4000, 5, rej);
  const DecorationResult b = sample_decoration(law, theta, n, 4000, 6, con);
  auto stat = [](const DecorationResult& r, int which) {
    std::vector<double> v;
    for (const auto& s : r.samples) {
      v.push_back(which == 0   ? s.overshoot
                  : which == 1 ? static_cast<double>(s.points.size())
                               : (s.points.size() > 1 ? s.points[1] : s.lower_edge));
    }
    return EmpiricalCdf(v);
  };
  for (int w = 0; w < 3; ++w) {
    CAPTURE(w);
    CHECK(ks_distance(stat(a, w), stat(b, w)) < 0.05);
  }
  const double se = std::sqrt(a.acceptance_rate * (1 - a.acceptance_rate) / a.attempts +
                              b.acceptance_rate * (1 - b.acceptance_rate) / b.attempts);
  CHECK(std::fabs(a.acceptance_rate - b.acceptance_rate) < 4 * se);
}

TEST_CASE("laplace functional") {
  PointSample s;
  s.points = {0.0, -1.0, -3.0};
  s.lower_edge = -5.0;
  const std::vector<PointSample> v{s, s};
  CHECK(empirical_laplace(v, RampFunction::make(0.5, 1.0, 2.0)).estimate == 1.0);
  CHECK(empirical_laplace(v, RampFunction::make(-0.2, -0.1, 700.0)).estimate == doctest::Approx(0.0).epsilon(1e-300));
  PointSample t = s;
  t.points = {0.0, -4.0};
  const std::vector<PointSample> w{t};
  CHECK(empirical_laplace(w, RampFunction::make(-2.0, -1.9, 700.0)).estimate < 1e-300);
  CHECK_THROWS_AS(empirical_laplace(v, RampFunction::make(-6.0, 0.0, 1.0)), CoverageError);
  CHECK_THROWS_AS(empirical_laplace(std::vector<PointSample>{}, RampFunction::make(0, 1, 1)), DomainError);
}

TEST_CASE("gumbel mixture") {
  const std::vector<double> zero{0.0, 0.0};
  CHECK(gumbel_mixture_cdf(zero, 1.0, 1.0, -3.0) == 1.0);
  const std::vector<double> one{1.0};
  CHECK(gumbel_mixture_cdf(one, 1.0, 1.0, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  const std::vector<double> w{0.3, 1.0, 2.5};
  double prev = 0.0;
  for (double y = -5; y <= 10; y += 0.25) {
    const double f = gumbel_mixture_cdf(w, 0.8, 1.3, y);
    CHECK(f >= prev);
    CHECK(gumbel_mixture_cdf(w, 1.6, 1.3, y) <= f);
    prev = f;
  }
  CHECK(prev > 0.999);
}

TEST_CASE("shift constant fit") {
  Stream rng(21);
  std::vector<double> y(10000);
  for (double& x : y) x = -std::log(-std::log(rng.uniform()) / 0.7);
  const std::vector<double> w(500, 1.0);
  const EmpiricalCdf cdf(y);
  FitOptions o;
  o.bootstrap_reps = 50;
  const FitResult f = fit_shift_constant(cdf, w, 1.0, o);
  CHECK(f.lambda_hat >= 0.63);
  CHECK(f.lambda_hat <= 0.77);
  CHECK(f.bootstrap_ci.lo <= f.lambda_hat);
  CHECK(f.bootstrap_ci.hi >= f.lambda_hat);
  CHECK(f.ks_at_fit < 0.02);

  // Equal w: a Gumbel location fit, mu = log(lambda) / theta.
  const double theta = 1.7;
  double best_mu = 0.0;
  double best = 2.0;
  for (double mu = -2.0; mu <= 2.0; mu += 1e-4) {
    const double d = ks_distance(cdf, [&](double t) { return std::exp(-std::exp(-theta * (t - mu))); });
    if (d < best) {
      best = d;
      best_mu = mu;
    }
  }
  const FitResult g = fit_shift_constant(cdf, std::vector<double>(10, 1.0), theta, {0});
  CHECK(std::fabs(std::log(g.lambda_hat) / theta - best_mu) < 2e-3);
  CHECK(g.ks_at_fit == doctest::Approx(best).epsilon(1e-3));

  CHECK_THROWS_AS(fit_shift_constant(cdf, std::vector<double>{}, 1.0), DomainError);
  CHECK_THROWS_AS(fit_shift_constant(cdf, std::vector<double>{-1.0}, 1.0), DomainError);
}
