// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string_view>

#include "brw/laws.hpp"

namespace brw {

enum class Regime { Slow, Mean, Fast };
std::string_view to_string(Regime r);

/// Tolerance on |theta1* - theta2*| below which the regime is Mean.
inline constexpr double kMeanRegimeTolerance = 1e-8;

/// Two reproduction laws, the split fraction and the solved tilts.
struct RegimeSpec {
  ReproductionLaw law1;
  ReproductionLaw law2;
  double t = 0.5;
  /// Root of t g1 + (1 - t) g2 where gi(x) = x kappa_i'(x) - kappa_i(x).
  std::optional<double> theta_mixed;
  std::optional<double> theta1_star;
  std::optional<double> theta2_star;
  Regime regime = Regime::Mean;
  double x_star1 = 0.0;
  double x_star2 = 0.0;

  /// floor(t n), robust to the rounding of t.
  long split_generation(long n) const;
};

/// x kappa'(x) - kappa(x); +infinity outside the finiteness interval.
double critical_gap(const ReproductionLaw& law, double theta);

/// Root of theta kappa'(theta) = kappa(theta) on (0, theta_max), or nullopt
/// when the gap stays negative. Throws NumericalFailure on non-convergence.
std::optional<double> solve_theta_star(const ReproductionLaw& law);

/// Root of t g1(theta) + (1 - t) g2(theta) = 0. Throws NumericalFailure when
/// the combination never changes sign.
double solve_theta_mixed(const ReproductionLaw& law1, const ReproductionLaw& law2, double t);

/// Solves every tilt and tags the regime by the sign of theta1* - theta2*.
/// Throws UnsupportedConfiguration when a critical tilt does not exist.
RegimeSpec classify_regime(const ReproductionLaw& law1, const ReproductionLaw& law2, double t);

enum class CenteringForm {
  Theorem,      ///< limit-theorem form for the regime (default)
  Alternative,  ///< the common kappa'-based form with a single log n term
};

/// Linear and logarithmic coefficients of the centering sequence.
struct CenteringSequence {
  Regime regime = Regime::Mean;
  CenteringForm form = CenteringForm::Theorem;
  double t = 0.5;
  double linear_coeff_first = 0.0;
  double linear_coeff_second = 0.0;
  double log_n_coeff = 0.0;
  double log_first_coeff = 0.0;   ///< multiplies log t_n
  double log_second_coeff = 0.0;  ///< multiplies log(n - t_n)

  double operator()(long n) const;
};

CenteringSequence centering_sequence(const RegimeSpec& spec,
                                     CenteringForm form = CenteringForm::Theorem);

/// m_n for the regime of `spec`. Throws DomainError unless 1 <= t_n < n.
double centering(const RegimeSpec& spec, long n, CenteringForm form = CenteringForm::Theorem);

/// inf over theta > 0 of kappa(theta) / theta; -infinity if unbounded below.
double speed(const ReproductionLaw& law);

}  // namespace brw
