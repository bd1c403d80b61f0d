// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brw/engine.hpp"
#include "brw/summation.hpp"

namespace brw {

enum class MartingaleKind { Additive, Derivative, CltFunctional, TruncatedCltFunctional };
std::string_view to_string(MartingaleKind k);

/// Registered bounded test functions for the CLT functionals.
class TestFunction {
 public:
  enum class Family { Constant, Ramp, CosineBump };

  static TestFunction constant(double c);
  /// 0 below lo, linear up to `height` at hi, then constant.
  static TestFunction ramp(double lo, double hi, double height = 1.0);
  /// height (1 + cos(pi (x - centre) / half_width)) / 2 on |x - centre| < half_width.
  static TestFunction cosine_bump(double centre, double half_width, double height = 1.0);

  double operator()(double x) const;
  /// out[i] = f(scale * (x[i] - centre)), bit-identical to the scalar call.
  void evaluate(std::span<const double> x, double centre, double scale, double* out) const;
  double sup_norm() const;
  bool non_negative() const;
  Family family() const { return family_; }
  /// Stable textual identifier, e.g. "ramp(-1,1,1)".
  std::string id() const;

 private:
  TestFunction(Family f, double p0, double p1, double p2) : family_(f), p0_(p0), p1_(p1), p2_(p2) {}
  Family family_;
  double p0_;
  double p1_;
  double p2_;
};

struct CltSpec {
  TestFunction f = TestFunction::constant(1.0);
  double gaussian_variance = 1.0;  ///< kappa''(theta)
};

struct Truncation {
  double A = 0.0;
  double a = 0.0;
  double L = 0.0;
};

struct MartingaleValue {
  MartingaleKind kind = MartingaleKind::Additive;
  long n = 0;
  double theta = 0.0;
  double value = 0.0;
  std::optional<Truncation> truncation;
  std::optional<std::string> test_function;
};

/// sum exp(theta V - n kappa). Throws MartingaleBiasError on pruned snapshots.
MartingaleValue additive_martingale(const PopulationSnapshot& snap, double theta, double kappa);

/// sum (kappa'(theta*) n - V) exp(theta* V - n kappa), with kappa' = kappa / theta*.
MartingaleValue derivative_martingale(const PopulationSnapshot& snap, double theta_star,
                                      double kappa);
/// Same, solving theta* from the law; DomainError when it does not exist.
MartingaleValue derivative_martingale(const PopulationSnapshot& snap, const ReproductionLaw& law);

/// sum exp(theta V - n kappa) f((V - n kappa') / sqrt n).
MartingaleValue clt_functional(const PopulationSnapshot& snap, double theta, double kappa,
                               double kappa_prime, const CltSpec& spec);

/// The CLT functional restricted to particles in E1(n, A) and E2(n, A).
/// Throws ContractError without matching annotations and ParameterError when
/// a + theta L + theta kappa' - kappa >= 0.
MartingaleValue truncated_clt_functional(const PopulationSnapshot& snap, double theta,
                                         double kappa, double kappa_prime, const CltSpec& spec,
                                         const Truncation& trunc);

/// Gauss-Hermite rule for the weight exp(-x^2) (Golub-Welsch).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermite gauss_hermite(int points);

/// E f(N), N ~ N(0, variance), by 41-point Gauss-Hermite quadrature.
double gaussian_expectation(const TestFunction& f, double variance);

/// Accumulates the additive, derivative and CLT sums over generation-n
/// positions fed in label order; same numbers as the snapshot functions.
class LeafReducer {
 public:
  LeafReducer(long n, double theta, double kappa, double kappa_prime,
              std::optional<TestFunction> f = std::nullopt, bool derivative = false);

  void consume(std::span<const double> positions);

  double additive() const { return w_.value(); }
  double derivative() const { return d_.value(); }
  double clt() const { return c_.value(); }
  std::size_t count() const { return count_; }

 private:
  double n_;
  double theta_;
  double shift_;
  double centre_;
  double scale_;
  std::optional<TestFunction> f_;
  bool derivative_;
  BlockedSum w_;
  BlockedSum d_;
  BlockedSum c_;
  std::size_t count_ = 0;
  std::vector<double> buf_;
  std::vector<double> aux_;
};

}  // namespace brw
