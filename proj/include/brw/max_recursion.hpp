// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "brw/engine.hpp"
#include "brw/laws.hpp"

namespace brw {

// Tail of the maximum of a branching random walk started from one particle
// at 0, computed on a uniform grid by the generation recursion
//   Q_{j+1}(z) = 1 - E prod_l (1 - Q_j(z - l)),   Q_0(z) = 1{z <= 0}.

struct TailOptions {
  double step = 0.025;        ///< grid spacing h
  double floor = 1e-100;      ///< tail values below this are dropped
  double kernel_sds = 12.0;   ///< Gaussian kernel half-width in standard deviations
};

/// z -> Q(z) on the grid z = (first + i) h; Q = 1 left of the grid and 0
/// right of it. Off-grid values use log-linear interpolation.
class TailFunction {
 public:
  TailFunction() = default;
  TailFunction(double h, std::int64_t first, std::vector<double> values)
      : h_(h), first_(first), q_(std::move(values)) {}

  double operator()(double z) const;
  double step() const { return h_; }
  std::int64_t first_index() const { return first_; }
  const std::vector<double>& values() const { return q_; }
  /// Below this z the tail equals 1.
  double lower() const { return static_cast<double>(first_ - 1) * h_; }
  /// Above this z the tail is below the floor.
  double upper() const { return static_cast<double>(first_ + static_cast<std::int64_t>(q_.size())) * h_; }
  /// Value at grid index i (absolute).
  double at(std::int64_t i) const;

 private:
  double h_ = 1.0;
  std::int64_t first_ = 0;
  std::vector<double> q_;
};

class TailRecursion {
 public:
  explicit TailRecursion(TailOptions options = {});

  /// Adds one generation on top (the new root reproduces with `law`).
  void step(const ReproductionLaw& law);
  const TailFunction& current() const { return q_; }
  long depth() const { return depth_; }
  const TailOptions& options() const { return opt_; }

 private:
  TailOptions opt_;
  TailFunction q_;
  long depth_ = 0;
};

/// Tails Q_0, ..., Q_depth of a homogeneous law.
std::vector<TailFunction> tail_sequence(const ReproductionLaw& law, long depth,
                                        TailOptions options = {});

/// Samples M_n given the exact population at generation k: conditionally on
/// F_k, P(M_n <= z) = prod_u (1 - Q(z - V(u))) where Q is the tail of the
/// remaining n - k generations.
class ConditionalMaxSampler {
 public:
  /// `plan` supplies the model and the horizon n; k <= n.
  ConditionalMaxSampler(const SimulationPlan& plan, long k, TailOptions options = {});

  double cdf(std::span<const double> positions, double z) const;
  /// The z with cdf(z) = u, found by bisection (u in (0, 1]).
  double sample(std::span<const double> positions, double u) const;
  const TailFunction& tail() const { return tail_; }
  long split() const { return k_; }

 private:
  TailFunction tail_;
  long k_;
};

}  // namespace brw
