// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/params.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "brw/error.hpp"

namespace brw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxIterations = 200;

// 64 tilts in (0, hi), geometric towards both ends when hi is finite.
std::vector<double> scan_grid(double hi) {
  std::vector<double> g;
  g.reserve(64);
  if (!std::isfinite(hi)) {
    for (int i = 0; i < 64; ++i) g.push_back(1e-6 * std::pow(10.0, 12.0 * i / 63.0));
    return g;
  }
  for (int i = 0; i < 32; ++i) {
    g.push_back(hi * 1e-6 * std::pow(0.5e6, i / 31.0));
  }
  for (int i = 1; i <= 32; ++i) {
    g.push_back(hi - 0.5 * hi * std::pow(10.0, -12.0 * i / 32.0));
  }
  std::sort(g.begin(), g.end());
  return g;
}

struct RootProblem {
  std::function<double(double)> f;   // strictly increasing
  std::function<double(double)> df;  // derivative, > 0
  double domain_hi;
  double value_at_zero;
  // Magnitude of the terms in f; a value within rounding of it is not a sign.
  std::function<double(double)> scale = [](double) { return 0.0; };
};

// Returns the bracket [lo, hi] around the first sign change, or nullopt.
std::optional<std::pair<double, double>> bracket(const RootProblem& p) {
  const auto grid = scan_grid(p.domain_hi);
  double prev_x = 0.0;
  double prev_f = p.value_at_zero;
  for (double x : grid) {
    const double fx = p.f(x);
    if (!std::isfinite(fx)) break;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * p.scale(x);
    if (std::fabs(fx) <= noise) {
      if (noise == 0.0) return std::pair{x, x};
      continue;
    }
    if (prev_f < 0.0 && fx > 0.0) return std::pair{prev_x, x};
    prev_x = x;
    prev_f = fx;
  }
  return std::nullopt;
}

double safeguarded_newton(const RootProblem& p, double lo, double hi) {
  if (lo == hi) return lo;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxIterations; ++it) {
    const double fx = p.f(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (std::fabs(fx) < 1e-15 || hi - lo <= 4e-16 * std::max(1.0, std::fabs(x))) {
      return x;
    }
    const double d = p.df(x);
    double next = x - fx / d;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    x = next;
  }
  throw NumericalFailure("root solver did not converge after 200 iterations", lo, hi);
}

}  // namespace

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Slow:
      return "slow";
    case Regime::Mean:
      return "mean";
    case Regime::Fast:
      return "fast";
  }
  return "?";
}

long RegimeSpec::split_generation(long n) const {
  const double x = t * static_cast<double>(n);
  const double r = std::round(x);
  if (std::fabs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<long>(r);
  return static_cast<long>(std::floor(x));
}

double critical_gap(const ReproductionLaw& law, double theta) {
  const TiltParams tp = kappa_triple(law, theta);
  if (!std::isfinite(tp.kappa) || !std::isfinite(tp.kappa_prime)) return kInf;
  return theta * tp.kappa_prime - tp.kappa;
}

namespace {

double gap_scale(const ReproductionLaw& law, double theta) {
  const TiltParams tp = kappa_triple(law, theta);
  return std::fabs(theta * tp.kappa_prime) + std::fabs(tp.kappa);
}

}  // namespace

std::optional<double> solve_theta_star(const ReproductionLaw& law) {
  RootProblem p{
      [&](double x) { return critical_gap(law, x); },
      [&](double x) { return x * kappa_triple(law, x).kappa_double_prime; },
      law.finiteness().hi, -kappa(law, 0.0), [&](double x) { return gap_scale(law, x); }};
  const auto br = bracket(p);
  if (!br) return std::nullopt;
  return safeguarded_newton(p, br->first, br->second);
}

double solve_theta_mixed(const ReproductionLaw& law1, const ReproductionLaw& law2, double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("split fraction t must lie in (0, 1)");
  RootProblem p{
      [&](double x) { return t * critical_gap(law1, x) + (1.0 - t) * critical_gap(law2, x); },
      [&](double x) {
        return x * (t * kappa_triple(law1, x).kappa_double_prime +
                    (1.0 - t) * kappa_triple(law2, x).kappa_double_prime);
      },
      std::min(law1.finiteness().hi, law2.finiteness().hi),
      -(t * kappa(law1, 0.0) + (1.0 - t) * kappa(law2, 0.0)),
      [&](double x) { return t * gap_scale(law1, x) + (1.0 - t) * gap_scale(law2, x); }};
  const auto br = bracket(p);
  if (!br) {
    throw NumericalFailure("mixed critical equation has no sign change on (0, " +
                               std::to_string(p.domain_hi) + ")",
                           0.0, p.domain_hi);
  }
  return safeguarded_newton(p, br->first, br->second);
}

RegimeSpec classify_regime(const ReproductionLaw& law1, const ReproductionLaw& law2, double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("split fraction t must lie in (0, 1)");
  RegimeSpec spec{law1, law2, t};
  spec.theta1_star = solve_theta_star(law1);
  spec.theta2_star = solve_theta_star(law2);
  if (!spec.theta1_star || !spec.theta2_star) {
    throw UnsupportedConfiguration(
        "both laws need a critical tilt theta*; missing for " +
        std::string(!spec.theta1_star ? "law1" : "law2"));
  }
  const double diff = *spec.theta1_star - *spec.theta2_star;
  if (std::fabs(diff) < kMeanRegimeTolerance) {
    spec.regime = Regime::Mean;
  } else {
    spec.regime = diff > 0.0 ? Regime::Fast : Regime::Slow;
  }
  try {
    spec.theta_mixed = solve_theta_mixed(law1, law2, t);
  } catch (const NumericalFailure&) {
    if (spec.regime == Regime::Fast) throw;
  }
  spec.x_star1 = kappa_triple(law1, *spec.theta1_star).kappa_prime;
  spec.x_star2 = kappa_triple(law2, *spec.theta2_star).kappa_prime;

  if (spec.regime != Regime::Mean && spec.theta_mixed) {
    const bool fast_condition = critical_gap(law1, *spec.theta_mixed) < 0.0;
    if (fast_condition != (spec.regime == Regime::Fast)) {
      throw NumericalFailure(
          "regime tag disagrees with the sign of theta kappa1'(theta) - kappa1(theta)",
          *spec.theta_mixed, *spec.theta_mixed);
    }
  }
  return spec;
}

double CenteringSequence::operator()(long n) const {
  const long tn = [&] {
    RegimeSpec probe{ReproductionLaw::single_child_at(0.0), ReproductionLaw::single_child_at(0.0), t};
    return probe.split_generation(n);
  }();
  if (n < 2 || tn < 1 || n - tn < 1) {
    throw DomainError("centering needs n >= 2 and 1 <= floor(t n) < n (n = " +
                      std::to_string(n) + ")");
  }
  const double nn = static_cast<double>(n);
  const double first = static_cast<double>(tn);
  const double second = static_cast<double>(n - tn);
  double m = linear_coeff_second * nn + (linear_coeff_first - linear_coeff_second) * first;
  if (log_n_coeff != 0.0) m += log_n_coeff * std::log(nn);
  if (log_first_coeff != 0.0) m += log_first_coeff * std::log(first);
  if (log_second_coeff != 0.0) m += log_second_coeff * std::log(second);
  return m;
}

CenteringSequence centering_sequence(const RegimeSpec& spec, CenteringForm form) {
  CenteringSequence c;
  c.regime = spec.regime;
  c.form = form;
  c.t = spec.t;
  auto need_mixed = [&] {
    if (!spec.theta_mixed) throw DomainError("centering needs the mixed tilt");
    return *spec.theta_mixed;
  };
  switch (spec.regime) {
    case Regime::Fast: {
      const double th = need_mixed();
      const TiltParams a = kappa_triple(spec.law1, th);
      const TiltParams b = kappa_triple(spec.law2, th);
      if (form == CenteringForm::Theorem) {
        c.linear_coeff_first = a.kappa / th;
        c.linear_coeff_second = b.kappa / th;
      } else {
        c.linear_coeff_first = a.kappa_prime;
        c.linear_coeff_second = b.kappa_prime;
      }
      c.log_n_coeff = -1.0 / (2.0 * th);
      break;
    }
    case Regime::Slow: {
      const double t1 = *spec.theta1_star;
      const double t2 = *spec.theta2_star;
      c.linear_coeff_first = kappa_triple(spec.law1, t1).kappa_prime;
      c.linear_coeff_second = kappa_triple(spec.law2, t2).kappa_prime;
      if (form == CenteringForm::Theorem) {
        c.log_first_coeff = -3.0 / (2.0 * t1);
        c.log_second_coeff = -3.0 / (2.0 * t2);
      } else {
        c.log_n_coeff = -(3.0 / (2.0 * t1) + 3.0 / (2.0 * t2));
      }
      break;
    }
    case Regime::Mean: {
      const double th = form == CenteringForm::Theorem ? *spec.theta1_star : need_mixed();
      c.linear_coeff_first = kappa_triple(spec.law1, th).kappa_prime;
      c.linear_coeff_second = kappa_triple(spec.law2, th).kappa_prime;
      c.log_n_coeff = -3.0 / (2.0 * th);
      break;
    }
  }
  return c;
}

double centering(const RegimeSpec& spec, long n, CenteringForm form) {
  return centering_sequence(spec, form)(n);
}

double speed(const ReproductionLaw& law) {
  if (const auto ts = solve_theta_star(law)) {
    return kappa_triple(law, *ts).kappa_prime;
  }
  if (kappa(law, 0.0) < 0.0) return -kInf;
  const double hi_dom = law.finiteness().hi;
  double a = std::log(1e-8);
  double b = std::log(std::isfinite(hi_dom) ? hi_dom * (1.0 - 1e-12) : 1e8);
  auto ratio = [&](double u) {
    const double th = std::exp(u);
    return kappa(law, th) / th;
  };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = ratio(c);
  double fd = ratio(d);
  for (int it = 0; it < 300 && b - a > 1e-12; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = ratio(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = ratio(d);
    }
  }
  return std::min({ratio(a), ratio(b), fc, fd});
}

}  // namespace brw
