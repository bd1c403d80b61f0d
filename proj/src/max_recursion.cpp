// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/max_recursion.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include "brw/error.hpp"
#include "brw/kernels.hpp"

namespace brw {

namespace {

// Values this close to 1 are stored as exactly 1: the complement is below
// the resolution of any probability computed downstream.
constexpr double kOneTolerance = 1e-15;

struct Kernel {
  std::int64_t m_min = 0;
  std::vector<double> w;  // weights of displacements m h, m = m_min, m_min + 1, ...
};

Kernel density_kernel(const Displacement& d, const TailOptions& opt) {
  Kernel k;
  const double h = opt.step;
  if (const auto* g = std::get_if<Gaussian>(&d)) {
    const double sd = std::sqrt(g->variance);
    k.m_min = static_cast<std::int64_t>(std::floor((g->mean - opt.kernel_sds * sd) / h));
    const auto m_max = static_cast<std::int64_t>(std::ceil((g->mean + opt.kernel_sds * sd) / h));
    for (std::int64_t m = k.m_min; m <= m_max; ++m) {
      const double x = (static_cast<double>(m) * h - g->mean) / sd;
      k.w.push_back(std::exp(-0.5 * x * x));
    }
  } else {
    const double b = std::get<Laplace>(d).scale;
    const auto half = static_cast<std::int64_t>(std::ceil(40.0 * b / h));
    k.m_min = -half;
    for (std::int64_t m = -half; m <= half; ++m) {
      k.w.push_back(std::exp(-std::fabs(static_cast<double>(m) * h) / b));
    }
  }
  double total = 0.0;
  for (double x : k.w) total += x;
  for (double& x : k.w) x /= total;
  return k;
}

double apply_count(const ReproductionLaw& law, double q) {
  q = std::clamp(q, 0.0, 1.0);
  return -std::expm1(law.count_param() * std::log1p(-q));
}

}  // namespace

double TailFunction::at(std::int64_t i) const {
  if (i < first_) return 1.0;
  const std::int64_t j = i - first_;
  if (j >= static_cast<std::int64_t>(q_.size())) return 0.0;
  return q_[static_cast<std::size_t>(j)];
}

double TailFunction::operator()(double z) const {
  const double p = z / h_;
  const double fl = std::floor(p);
  const auto i = static_cast<std::int64_t>(fl);
  const double f = p - fl;
  const double a = at(i);
  const double b = at(i + 1);
  if (a == b) return a;
  if (a > 0.0 && b > 0.0) return std::exp(std::log(a) + f * (std::log(b) - std::log(a)));
  return a + f * (b - a);
}

TailRecursion::TailRecursion(TailOptions options) : opt_(options) {
  if (!(opt_.step > 0.0) || !(opt_.floor > 0.0) || !(opt_.kernel_sds > 0.0)) {
    throw ParameterError("tail recursion options must be positive");
  }
  q_ = TailFunction(opt_.step, 0, {0.5});
}

void TailRecursion::step(const ReproductionLaw& law) {
  const double h = opt_.step;
  std::int64_t first = 0;
  std::vector<double> out;

  if (law.family() == CountFamily::Poisson) {
    throw UnsupportedConfiguration("tail recursion needs laws without extinction");
  }
  if (law.continuous_displacements()) {
    const Kernel k = density_kernel(law.displacement(), opt_);
    const std::size_t taps = k.w.size();
    const std::size_t pad = taps - 1;
    const std::size_t size = q_.values().size();
    std::vector<double> ext(size + 2 * pad, 0.0);
    std::fill(ext.begin(), ext.begin() + static_cast<std::ptrdiff_t>(pad), 1.0);
    std::copy(q_.values().begin(), q_.values().end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));
    std::vector<double> wrev(k.w.rbegin(), k.w.rend());
    out.resize(size + pad);
    kernels::correlate(ext.data(), out.size(), wrev.data(), taps, out.data());
    first = q_.first_index() + k.m_min;
    for (double& v : out) v = apply_count(law, v);
  } else {
    // Atomic displacements: evaluate the off-grid shifts by interpolation.
    std::vector<std::pair<double, std::vector<double>>> outcomes;
    double lo_shift = 0.0;
    double hi_shift = 0.0;
    bool have = false;
    auto note = [&](double x) {
      lo_shift = have ? std::min(lo_shift, x) : x;
      hi_shift = have ? std::max(hi_shift, x) : x;
      have = true;
    };
    if (law.family() == CountFamily::FiniteAtomic) {
      for (const auto& a : law.atoms()) {
        outcomes.emplace_back(a.probability, a.points);
        for (double x : a.points) note(x);
      }
    } else {
      for (auto [v, p] : std::get<PointMasses>(law.displacement()).atoms) note(v);
    }
    first = static_cast<std::int64_t>(std::floor(q_.lower() / h + lo_shift / h)) - 1;
    const auto last = static_cast<std::int64_t>(std::ceil(q_.upper() / h + hi_shift / h)) + 1;
    out.resize(static_cast<std::size_t>(last - first + 1));
    for (std::int64_t i = first; i <= last; ++i) {
      const double z = static_cast<double>(i) * h;
      double value = 0.0;
      if (law.family() == CountFamily::FiniteAtomic) {
        double none = 0.0;
        for (const auto& [p, pts] : outcomes) {
          double prod = 1.0;
          for (double x : pts) prod *= 1.0 - q_(z - x);
          none += p * prod;
        }
        value = std::clamp(1.0 - none, 0.0, 1.0);
      } else {
        double q = 0.0;
        for (auto [v, p] : std::get<PointMasses>(law.displacement()).atoms) q += p * q_(z - v);
        value = apply_count(law, q);
      }
      out[static_cast<std::size_t>(i - first)] = value;
    }
  }

  // Trim: leading ones and trailing values below the floor.
  std::size_t lo = 0;
  while (lo < out.size() && out[lo] >= 1.0 - kOneTolerance) ++lo;
  std::size_t hi = out.size();
  while (hi > lo && out[hi - 1] < opt_.floor) --hi;
  std::vector<double> kept(out.begin() + static_cast<std::ptrdiff_t>(lo),
                           out.begin() + static_cast<std::ptrdiff_t>(hi));
  q_ = TailFunction(h, first + static_cast<std::int64_t>(lo), std::move(kept));
  ++depth_;
}

std::vector<TailFunction> tail_sequence(const ReproductionLaw& law, long depth,
                                        TailOptions options) {
  TailRecursion rec(options);
  std::vector<TailFunction> out;
  out.reserve(static_cast<std::size_t>(depth) + 1);
  out.push_back(rec.current());
  for (long j = 0; j < depth; ++j) {
    rec.step(law);
    out.push_back(rec.current());
  }
  return out;
}

ConditionalMaxSampler::ConditionalMaxSampler(const SimulationPlan& plan, long k,
                                             TailOptions options)
    : k_(k) {
  plan.validate();
  if (k < 0 || k > plan.n) throw ParameterError("conditioning generation must lie in [0, n]");
  TailRecursion rec(options);
  for (long g = plan.n - 1; g >= k; --g) rec.step(plan.law_for(g));
  tail_ = rec.current();
}

double ConditionalMaxSampler::cdf(std::span<const double> positions, double z) const {
  const double top = tail_.upper();
  double s = 0.0;
  for (double v : positions) {
    const double d = z - v;
    if (d >= top) continue;
    const double q = tail_(d);
    if (q >= 1.0) return 0.0;
    s += q < 1e-8 ? -q * (1.0 + 0.5 * q) : std::log1p(-q);
  }
  return std::exp(s);
}

double ConditionalMaxSampler::sample(std::span<const double> positions, double u) const {
  if (positions.empty()) throw DomainError("conditional max needs a non-empty population");
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("uniform must lie in (0, 1]");
  const double vmax = *std::max_element(positions.begin(), positions.end());
  double lo = vmax + tail_.lower();
  double hi = vmax + tail_.upper();
  for (int it = 0; it < 200 && hi - lo > 1e-11 * std::max(1.0, std::fabs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(positions, mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace brw
