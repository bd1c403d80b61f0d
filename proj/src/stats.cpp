// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/stats.hpp"

#include <algorithm>
#include <cmath>

#include "brw/error.hpp"
#include "brw/parallel.hpp"
#include "brw/rng.hpp"
#include "brw/summation.hpp"

namespace brw {

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw DomainError("empirical CDF of an empty sample");
  for (double x : sorted_) {
    if (std::isnan(x)) throw DomainError("empirical CDF of a sample containing NaN");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double y) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), y);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::left_limit(double y) const {
  const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), y);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  const double pos = p * static_cast<double>(sorted_.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted_.size()) return sorted_.back();
  const double f = pos - static_cast<double>(i);
  return sorted_[i] + f * (sorted_[i + 1] - sorted_[i]);
}

double ks_distance(const EmpiricalCdf& a, const EmpiricalCdf& b) {
  const auto& x = a.sorted();
  const auto& y = b.sorted();
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_distance(const EmpiricalCdf& a, const std::function<double(double)>& cdf) {
  const auto& x = a.sorted();
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    const double v = x[i];
    const double below = static_cast<double>(i) / n;
    while (i < x.size() && x[i] == v) ++i;
    const double at = static_cast<double>(i) / n;
    const double f = cdf(v);
    d = std::max({d, std::fabs(f - below), std::fabs(f - at)});
  }
  return d;
}

SlopeEstimate tail_slope(const EmpiricalCdf& cdf, double y_lo, double y_hi,
                         std::size_t grid_points) {
  if (!(y_lo < y_hi)) throw DomainError("tail slope needs y_lo < y_hi");
  if (grid_points < 3) throw DomainError("tail slope needs at least 3 grid points");
  const auto& s = cdf.sorted();
  const auto above = static_cast<std::size_t>(s.end() - std::upper_bound(s.begin(), s.end(), y_lo));
  if (above < 50) {
    throw InsufficientData("tail slope needs at least 50 samples above y_lo (have " +
                           std::to_string(above) + ")");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double y = y_lo + (y_hi - y_lo) * static_cast<double>(k) /
                                static_cast<double>(grid_points - 1);
    const double surv = 1.0 - cdf(y);
    if (surv <= 0.0) continue;
    xs.push_back(y);
    ys.push_back(std::log(surv));
  }
  if (xs.size() < 3) throw InsufficientData("tail slope: fewer than 3 grid points with mass");
  const double m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - my - slope * (xs[i] - mx);
    rss += r * r;
  }
  return {slope, std::sqrt(rss / (m - 2.0) / sxx), xs.size()};
}

Interval bootstrap_ci(const std::function<double(std::span<const double>)>& statistic,
                      std::span<const double> samples, std::size_t reps, double level,
                      std::uint64_t seed, unsigned threads) {
  if (reps == 0) throw ParameterError("bootstrap needs at least one replicate");
  if (samples.empty()) throw DomainError("bootstrap of an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("bootstrap level must lie in (0, 1)");
  std::vector<double> stats(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    Stream rng(derive_key(seed, r));
    std::vector<double> resample(samples.size());
    for (double& x : resample) x = samples[rng.below(samples.size())];
    stats[r] = statistic(resample);
  });
  const EmpiricalCdf dist(std::move(stats));
  return {dist.quantile(0.5 * (1.0 - level)), dist.quantile(0.5 * (1.0 + level))};
}

MeanEstimate mean_estimate(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("mean of an empty sample");
  BlockedSum s;
  s.add(xs);
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  BlockedSum ss;
  for (double x : xs) ss.add((x - mean) * (x - mean));
  const double var = xs.size() > 1 ? ss.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n), xs.size()};
}

double interquartile_range(const EmpiricalCdf& cdf) {
  return cdf.quantile(0.75) - cdf.quantile(0.25);
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw DomainError("binomial interval needs at least one trial");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace brw
