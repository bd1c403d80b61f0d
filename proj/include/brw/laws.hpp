// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "brw/rng.hpp"

namespace brw {

// Reproduction laws: the point process of child displacements produced by
// one particle, its log-Laplace transform and the samplers built on it.

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
};

/// Symmetric Laplace law with density exp(-|x|/scale) / (2 scale).
struct Laplace {
  double scale = 1.0;
};

/// Finitely supported displacement law; pairs are (value, probability).
struct PointMasses {
  std::vector<std::pair<double, double>> atoms;
};

using Displacement = std::variant<Gaussian, Laplace, PointMasses>;

/// One outcome of a finite atomic point process.
struct Atom {
  double probability = 0.0;
  std::vector<double> points;
};

enum class CountFamily { Deterministic, Poisson, FiniteAtomic };

/// Open interval (lo, hi) of tilts on which kappa is finite.
struct TiltInterval {
  double lo;
  double hi;
  bool contains(double theta) const { return theta > lo && theta < hi; }
};

class ReproductionLaw {
 public:
  /// `count` children with i.i.d. displacements.
  static ReproductionLaw deterministic(unsigned count, Displacement displacement);
  /// Poisson(`mean`) children with i.i.d. displacements.
  static ReproductionLaw poisson(double mean, Displacement displacement);
  /// Explicit list of outcomes; probabilities must sum to 1 within 1e-12.
  static ReproductionLaw finite_atomic(std::vector<Atom> atoms);

  static ReproductionLaw binary_gaussian(double sigma = 1.0, double mean = 0.0);
  static ReproductionLaw single_child_at(double position);

  CountFamily family() const { return family_; }
  /// Fixed count k or Poisson mean; unused for FiniteAtomic.
  double count_param() const { return count_; }
  /// Displacement law of the i.i.d. families.
  const Displacement& displacement() const { return displacement_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  bool iid_displacements() const { return family_ != CountFamily::FiniteAtomic; }
  bool gaussian_displacements() const {
    return iid_displacements() && std::holds_alternative<Gaussian>(displacement_);
  }
  /// Displacement law has a density (Gaussian or Laplace).
  bool continuous_displacements() const {
    return iid_displacements() && !std::holds_alternative<PointMasses>(displacement_);
  }

  TiltInterval finiteness() const;
  double mean_offspring() const;
  /// Law with every displacement multiplied by c > 0.
  ReproductionLaw scaled(double c) const;
  std::string describe() const;

 private:
  ReproductionLaw() = default;
  void validate() const;

  CountFamily family_ = CountFamily::Deterministic;
  double count_ = 1.0;
  Displacement displacement_ = Gaussian{};
  std::vector<Atom> atoms_;
};

struct TiltParams {
  double theta = 0.0;
  double kappa = 0.0;
  double kappa_prime = 0.0;
  double kappa_double_prime = 0.0;
};

/// log E[sum_l exp(theta l)]; +infinity outside the finiteness interval.
double kappa(const ReproductionLaw& law, double theta);

/// kappa, kappa' and kappa'' without the (as1) check. kappa'' may be zero.
/// Outside the finiteness interval every field except theta is +infinity.
TiltParams kappa_triple(const ReproductionLaw& law, double theta);

/// kappa and its tilted first/second moments. Throws DomainError outside the
/// finiteness interval and ParameterError when kappa'' <= 0.
TiltParams kappa_derivatives(const ReproductionLaw& law, double theta);

double sample_displacement(const Displacement& d, Stream& rng);
/// Displacement drawn from the law tilted by exp(theta x).
double sample_tilted_displacement(const Displacement& d, double theta, Stream& rng);

/// One offspring event, sorted non-increasing (ties keep draw order).
std::vector<double> sample_offspring(const ReproductionLaw& law, Stream& rng);

/// One draw of the point process biased by sum_l exp(theta l - kappa(theta)).
std::vector<double> sample_size_biased_offspring(const ReproductionLaw& law,
                                                 double theta, Stream& rng);

/// One step of the random walk associated with the many-to-one formula.
double sample_tilted_step(const ReproductionLaw& law, double theta, Stream& rng);

enum class Verdict { HoldsAnalytically, HoldsNumerically, Assumed, Violated };
std::string_view to_string(Verdict v);

struct AssumptionCheck {
  std::string name;
  Verdict verdict = Verdict::Assumed;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  /// Verdict of the named check; throws DomainError for unknown names.
  Verdict verdict(std::string_view name) const;
};

/// Standing assumptions: "survival", "as1", "as3", "as4", "as6", "as7", "as8".
AssumptionReport check_assumptions(const ReproductionLaw& law, double theta);

/// True when every point lies in a + bZ for some a, b (within `tol`).
bool is_lattice(std::span<const double> points, double tol = 1e-12);

}  // namespace brw
