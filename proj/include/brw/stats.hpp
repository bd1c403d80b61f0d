// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace brw {

/// Right-continuous empirical distribution function.
class EmpiricalCdf {
 public:
  /// Throws DomainError on an empty or non-finite sample.
  explicit EmpiricalCdf(std::vector<double> samples);

  /// Fraction of samples <= y.
  double operator()(double y) const;
  /// Fraction of samples < y.
  double left_limit(double y) const;
  /// Linear-interpolation quantile (the usual "type 7").
  double quantile(double p) const;

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// Sup-norm distance between two empirical CDFs, in [0, 1].
double ks_distance(const EmpiricalCdf& a, const EmpiricalCdf& b);
/// Sup-norm distance to a continuous CDF, checked on both sides of every jump.
double ks_distance(const EmpiricalCdf& a, const std::function<double(double)>& cdf);

struct SlopeEstimate {
  double slope = 0.0;
  double std_error = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log(1 - F(y)) on an even grid over [y_lo, y_hi].
/// Throws InsufficientData with fewer than 50 samples above y_lo.
SlopeEstimate tail_slope(const EmpiricalCdf& cdf, double y_lo, double y_hi,
                         std::size_t grid_points = 25);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap. Replicate r resamples with the stream
/// derive_key(seed, r), so the result does not depend on `threads`.
Interval bootstrap_ci(const std::function<double(std::span<const double>)>& statistic,
                      std::span<const double> samples, std::size_t reps = 1000,
                      double level = 0.9, std::uint64_t seed = 0, unsigned threads = 1);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Sample mean with its standard error (compensated sums).
MeanEstimate mean_estimate(std::span<const double> xs);

double interquartile_range(const EmpiricalCdf& cdf);

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// Estimated shift constant of a Gumbel mixture fit.
struct FitResult {
  double lambda_hat = 0.0;
  double ks_at_fit = 0.0;
  Interval bootstrap_ci;
  double theta = 0.0;
  long n = 0;
  std::size_t w_sample_count = 0;
};

}  // namespace brw
