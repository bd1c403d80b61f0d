// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brw/engine.hpp"
#include "brw/laws.hpp"
#include "brw/rng.hpp"

namespace brw {

struct SpineWalk {
  std::vector<double> positions;  ///< S_0 = 0, ..., S_n
  double theta = 0.0;
};

/// S_0 = 0 followed by n i.i.d. tilted steps.
SpineWalk sample_spine_walk(const ReproductionLaw& law, double theta, long n, Stream& rng);

/// One spine reproduction: size-biased offspring and the chosen child.
struct SpineStep {
  std::vector<double> offspring;  ///< non-increasing
  std::size_t chosen = 0;
};
SpineStep sample_spine_step(const ReproductionLaw& law, double theta, Stream& rng);

struct SpinedTree {
  PopulationSnapshot snapshot;
  std::size_t spine_index = 0;  ///< index of xi_n in snapshot
  SpineWalk spine_positions;    ///< V(xi_0), ..., V(xi_n)
};

/// Tree under the size-biased measure: the spine reproduces with the
/// size-biased law and passes the spine to a child chosen with probability
/// proportional to exp(theta l); everyone else reproduces plainly. Pruning
/// never removes the spine. Randomness: off-spine particles use their label
/// keys; the spine uses the keys of `rng`'s label line.
SpinedTree sample_spined_tree(const ReproductionLaw& law, double theta, long n, Stream& rng,
                              const Pruning& pruning = Pruning::none(),
                              std::size_t memory_budget = std::size_t{1} << 26);

/// Registered path functionals g(S_1, ..., S_n).
class PathFunctional {
 public:
  enum class Family { Constant, EndpointBox, PathBox, EndpointGaussianBump };

  static PathFunctional constant(double c);
  /// 1{lo <= S_n <= hi}.
  static PathFunctional endpoint_box(double lo, double hi);
  /// 1{lo <= S_k <= hi for all 1 <= k <= n}.
  static PathFunctional path_box(double lo, double hi);
  /// exp(-((S_n - centre) / scale)^2).
  static PathFunctional endpoint_gaussian_bump(double centre, double scale);

  /// `path` holds S_1, ..., S_n.
  double operator()(std::span<const double> path) const;
  std::string id() const;

 private:
  PathFunctional(Family f, double a, double b) : family_(f), a_(a), b_(b) {}
  Family family_;
  double a_;
  double b_;
};

struct ManyToOneResult {
  double lhs = 0.0;  ///< Monte Carlo estimate of E sum_{|u|=n} g(V(u_1), ..., V(u_n))
  double rhs = 0.0;  ///< Monte Carlo estimate of E exp(-theta S_n + n kappa) g(S_1, ..., S_n)
  double lhs_std_error = 0.0;
  double rhs_std_error = 0.0;
  double pooled_std_error = 0.0;
  std::optional<double> lhs_exact;  ///< enumeration (FiniteAtomic, n <= 4)
  std::optional<double> rhs_exact;
};

/// Both sides of the many-to-one identity from independent samples; exact
/// sums are added for small FiniteAtomic cases.
ManyToOneResult many_to_one_check(const ReproductionLaw& law, double theta, long n,
                                  const PathFunctional& g, std::size_t reps,
                                  std::uint64_t seed, unsigned threads = 1,
                                  std::size_t memory_budget = std::size_t{1} << 22);

/// Exact sides by enumeration; DomainError unless FiniteAtomic with n <= 4.
std::pair<double, double> many_to_one_exact(const ReproductionLaw& law, double theta, long n,
                                            const PathFunctional& g);

}  // namespace brw
