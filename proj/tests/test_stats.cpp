// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "brw/error.hpp"
#include "brw/rng.hpp"
#include "brw/stats.hpp"
#include "brw/summation.hpp"

using namespace brw;

namespace {
std::vector<double> normals(std::uint64_t seed, std::size_t n) {
  Stream rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}
double phi(double y) { return 0.5 * std::erfc(-y / std::sqrt(2.0)); }
}  // namespace

TEST_CASE("empirical cdf") {
  const EmpiricalCdf c({3.0, 1.0, 2.0, 2.0});
  CHECK(c(2.0) == 0.75);
  CHECK(c.left_limit(2.0) == 0.25);
  CHECK(c(0.0) == 0.0);
  CHECK(c.quantile(0.5) == 2.0);
  CHECK_THROWS_AS(EmpiricalCdf({}), DomainError);
  CHECK_THROWS_AS(EmpiricalCdf({NAN}), DomainError);
}

TEST_CASE("ks distance") {
  const EmpiricalCdf a({0.0});
  const EmpiricalCdf b({1.0});
  CHECK(ks_distance(a, a) == 0.0);
  CHECK(ks_distance(a, b) == 1.0);
  int ok = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    ok += ks_distance(EmpiricalCdf(normals(s, 100000)), phi) < 1.63 / std::sqrt(1e5);
  }
  CHECK(ok >= 97);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const EmpiricalCdf x(normals(3 * s, 200));
    const EmpiricalCdf y(normals(3 * s + 1, 300));
    const EmpiricalCdf z(normals(3 * s + 2, 250));
    CHECK(ks_distance(x, y) == ks_distance(y, x));
    CHECK(ks_distance(x, z) <= ks_distance(x, y) + ks_distance(y, z) + 1e-15);
  }
}

TEST_CASE("tail slope") {
  Stream rng(5);
  std::vector<double> e(100000);
  for (double& x : e) x = rng.exponential() / 2.0;
  const EmpiricalCdf c(e);
  const SlopeEstimate s = tail_slope(c, c.quantile(0.5), c.quantile(0.99));
  CHECK(s.slope >= -2.1);
  CHECK(s.slope <= -1.9);
  std::vector<double> u(1000);
  for (double& x : u) x = rng.uniform();
  CHECK(std::isfinite(tail_slope(EmpiricalCdf(u), 0.0, 0.5).slope));
  CHECK_THROWS_AS(tail_slope(EmpiricalCdf(std::vector<double>(100, 1.0)), 1.0, 2.0), InsufficientData);
}

TEST_CASE("bootstrap") {
  auto mean = [](std::span<const double> xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / xs.size();
  };
  const std::vector<double> c(50, 3.0);
  const Interval i = bootstrap_ci(mean, c, 100);
  CHECK(i.lo == 3.0);
  CHECK(i.hi == 3.0);
  const std::vector<double> g = normals(9, 10000);
  const Interval w = bootstrap_ci(mean, g, 1000, 0.9, 1);
  const double width = w.hi - w.lo;
  CHECK(width > 2 * 1.645 / 100 / 1.2);
  CHECK(width < 2 * 1.645 / 100 * 1.2);
  const Interval w8 = bootstrap_ci(mean, g, 1000, 0.9, 1, 8);
  CHECK(w8.lo == w.lo);
  CHECK(w8.hi == w.hi);
  CHECK_THROWS_AS(bootstrap_ci(mean, g, 0), ParameterError);
}

TEST_CASE("binomial interval and summation") {
  const Interval w = wilson_interval(50, 100);
  CHECK(w.lo < 0.5);
  CHECK(w.hi > 0.5);
  BlockedSum a;
  BlockedSum b;
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(i % 2 ? 1e15 : -1e15 + 1.0);
  a.add(xs);
  for (std::size_t i = 0; i < xs.size(); i += 37) {
    b.add(std::span<const double>(xs.data() + i, std::min<std::size_t>(37, xs.size() - i)));
  }
  CHECK(a.value() == b.value());
  CHECK(a.value() == 5000.0);
}
