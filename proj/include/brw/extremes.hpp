// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "brw/laws.hpp"
#include "brw/max_recursion.hpp"
#include "brw/point_sample.hpp"
#include "brw/stats.hpp"

namespace brw {

/// phi(x) = 0 for x <= a, linear up to c on [a, b], c for x >= b.
struct RampFunction {
  double a = 0.0;
  double b = 1.0;
  double c = 1.0;

  /// Throws ParameterError unless a < b and c > 0.
  static RampFunction make(double a, double b, double c);
  double operator()(double x) const;
};

enum class DecorationMethod {
  /// Plain walks of depth n, kept when M_n >= kappa'(theta) n.
  Rejection,
  /// Exact conditional construction: every kept node is conditioned on its
  /// subtree reaching the threshold (or only the window below it), using
  /// hitting probabilities from the tail recursion.
  Conditioned,
};

struct DecorationOptions {
  double depth_window = 0.0;  ///< 0 selects 15 / theta
  DecorationMethod method = DecorationMethod::Rejection;
  std::size_t max_attempts = 1'000'000;  ///< root-level trials
  /// Conditioned method: nodes whose condition has at least this model
  /// probability redraw plainly; rarer ones use the biased proposal.
  double plain_draw_floor = 1.0 / 200.0;
  unsigned threads = 1;
  TailOptions tail;
  std::size_t memory_budget = std::size_t{1} << 24;
};

struct DecorationResult {
  std::vector<PointSample> samples;  ///< in trial order
  std::size_t attempts = 0;          ///< root trials up to the last accepted one
  double acceptance_rate = 0.0;
  Interval rate_ci;                  ///< 95% Wilson interval
  double threshold = 0.0;            ///< kappa'(theta) n
  double depth_window = 0.0;
};

/// Samples of sum delta_{V(u) - M_n} given M_n >= kappa'(theta) n, keeping
/// points within depth_window of the max. Throws ParameterError unless
/// theta kappa'(theta) > kappa(theta), PartialResult when the trial budget
/// runs out first.
DecorationResult sample_decoration(const ReproductionLaw& law2, double theta, long n,
                                   std::size_t target_accepts, std::uint64_t seed,
                                   const DecorationOptions& options = {});

struct LaplaceEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Mean of exp(-sum_i phi(x_i)). Throws CoverageError when phi can see below
/// the recorded window of some sample.
LaplaceEstimate empirical_laplace(std::span<const PointSample> samples, const RampFunction& phi);

/// (1/m) sum_j exp(-lambda w_j exp(-theta y)).
double gumbel_mixture_cdf(std::span<const double> w_samples, double lambda, double theta, double y);

struct FitOptions {
  std::size_t bootstrap_reps = 200;
  double level = 0.9;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  long n = 0;  ///< recorded in the result
};

/// lambda minimizing sup_y |F_n(y) - gumbel_mixture_cdf(w, lambda, theta, y)|.
/// Throws DomainError on empty or negative w, FitAmbiguity when the profile
/// has separated near-equal minima.
FitResult fit_shift_constant(const EmpiricalCdf& max_cdf, std::span<const double> w_samples,
                             double theta, const FitOptions& options = {});

}  // namespace brw
