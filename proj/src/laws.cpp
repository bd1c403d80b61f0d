// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/laws.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "brw/error.hpp"
#include "brw/params.hpp"

namespace brw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -kInf;
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Log moment generating function of a displacement law and its first two
// derivatives (tilted mean and variance).
struct LogMgf {
  double value;
  double d1;
  double d2;
};

LogMgf log_mgf(const Displacement& d, double theta) {
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) {
            return LogMgf{g.mean * theta + 0.5 * g.variance * theta * theta,
                          g.mean + g.variance * theta, g.variance};
          },
          [&](const Laplace& l) {
            const double bt = l.scale * theta;
            if (std::fabs(bt) >= 1.0) return LogMgf{kInf, kInf, kInf};
            const double one_minus = 1.0 - bt * bt;
            const double b2 = l.scale * l.scale;
            return LogMgf{-std::log1p(-bt * bt), 2.0 * b2 * theta / one_minus,
                          2.0 * b2 * (1.0 + bt * bt) / (one_minus * one_minus)};
          },
          [&](const PointMasses& pm) {
            std::vector<double> logs;
            logs.reserve(pm.atoms.size());
            for (auto [v, p] : pm.atoms) {
              if (p > 0.0) logs.push_back(std::log(p) + theta * v);
            }
            const double lse = log_sum_exp(logs);
            double m1 = 0.0;
            for (auto [v, p] : pm.atoms) {
              if (p > 0.0) m1 += v * std::exp(std::log(p) + theta * v - lse);
            }
            double m2 = 0.0;
            for (auto [v, p] : pm.atoms) {
              if (p > 0.0) {
                m2 += (v - m1) * (v - m1) * std::exp(std::log(p) + theta * v - lse);
              }
            }
            return LogMgf{lse, m1, m2};
          }},
      d);
}

void require_probabilities(std::span<const double> probs, const char* what) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DomainError(std::string(what) + ": probabilities must be finite and non-negative");
    }
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw DomainError(std::string(what) + ": probabilities sum to " +
                      std::to_string(total) + ", expected 1");
  }
}

template <class T>
std::size_t categorical(std::span<const T> weights, double total, Stream& rng) {
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= static_cast<double>(weights[i]);
    if (u <= 0.0) return i;
  }
  // Rounding can leave a sliver; return the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0) return i;
  }
  return 0;
}

void sort_non_increasing(std::vector<double>& xs) {
  std::stable_sort(xs.begin(), xs.end(), std::greater<>());
}

}  // namespace

// ---------------------------------------------------------------------------
// ReproductionLaw

ReproductionLaw ReproductionLaw::deterministic(unsigned count, Displacement d) {
  ReproductionLaw law;
  law.family_ = CountFamily::Deterministic;
  law.count_ = count;
  law.displacement_ = std::move(d);
  law.validate();
  return law;
}

ReproductionLaw ReproductionLaw::poisson(double mean, Displacement d) {
  ReproductionLaw law;
  law.family_ = CountFamily::Poisson;
  law.count_ = mean;
  law.displacement_ = std::move(d);
  law.validate();
  return law;
}

ReproductionLaw ReproductionLaw::finite_atomic(std::vector<Atom> atoms) {
  ReproductionLaw law;
  law.family_ = CountFamily::FiniteAtomic;
  law.atoms_ = std::move(atoms);
  for (auto& a : law.atoms_) sort_non_increasing(a.points);
  law.validate();
  return law;
}

ReproductionLaw ReproductionLaw::binary_gaussian(double sigma, double mean) {
  return deterministic(2, Gaussian{mean, sigma * sigma});
}

ReproductionLaw ReproductionLaw::single_child_at(double position) {
  return finite_atomic({Atom{1.0, {position}}});
}

void ReproductionLaw::validate() const {
  switch (family_) {
    case CountFamily::Deterministic:
      if (count_ < 1.0 || count_ != std::floor(count_)) {
        throw DomainError("deterministic count must be a positive integer");
      }
      break;
    case CountFamily::Poisson:
      if (!(count_ > 0.0) || !std::isfinite(count_)) {
        throw DomainError("Poisson mean must be positive and finite");
      }
      break;
    case CountFamily::FiniteAtomic: {
      if (atoms_.empty()) throw DomainError("finite atomic law needs at least one outcome");
      std::vector<double> probs;
      for (const auto& a : atoms_) {
        if (a.points.empty()) {
          throw DomainError("finite atomic outcome with no points (extinction) is not allowed");
        }
        for (double x : a.points) {
          if (!std::isfinite(x)) throw DomainError("finite atomic points must be finite");
        }
        probs.push_back(a.probability);
      }
      require_probabilities(probs, "finite atomic law");
      return;
    }
  }
  std::visit(Overloaded{
                 [](const Gaussian& g) {
                   if (!(g.variance >= 0.0) || !std::isfinite(g.mean)) {
                     throw DomainError("Gaussian displacement needs finite mean and variance >= 0");
                   }
                 },
                 [](const Laplace& l) {
                   if (!(l.scale > 0.0)) throw DomainError("Laplace scale must be positive");
                 },
                 [](const PointMasses& pm) {
                   if (pm.atoms.empty()) throw DomainError("point-mass displacement needs atoms");
                   std::vector<double> probs;
                   for (auto [v, p] : pm.atoms) {
                     if (!std::isfinite(v)) throw DomainError("point-mass values must be finite");
                     probs.push_back(p);
                   }
                   require_probabilities(probs, "point-mass displacement");
                 }},
             displacement_);
}

TiltInterval ReproductionLaw::finiteness() const {
  if (family_ != CountFamily::FiniteAtomic) {
    if (const auto* l = std::get_if<Laplace>(&displacement_)) {
      return {-1.0 / l->scale, 1.0 / l->scale};
    }
  }
  return {-kInf, kInf};
}

double ReproductionLaw::mean_offspring() const {
  if (family_ != CountFamily::FiniteAtomic) return count_;
  double m = 0.0;
  for (const auto& a : atoms_) m += a.probability * static_cast<double>(a.points.size());
  return m;
}

ReproductionLaw ReproductionLaw::scaled(double c) const {
  if (!(c > 0.0)) throw DomainError("scale factor must be positive");
  ReproductionLaw out = *this;
  if (family_ == CountFamily::FiniteAtomic) {
    for (auto& a : out.atoms_) {
      for (double& x : a.points) x *= c;
    }
    return out;
  }
  out.displacement_ = std::visit(
      Overloaded{[&](const Gaussian& g) -> Displacement {
                   return Gaussian{g.mean * c, g.variance * c * c};
                 },
                 [&](const Laplace& l) -> Displacement { return Laplace{l.scale * c}; },
                 [&](const PointMasses& pm) -> Displacement {
                   PointMasses s = pm;
                   for (auto& [v, p] : s.atoms) v *= c;
                   return s;
                 }},
      displacement_);
  return out;
}

std::string ReproductionLaw::describe() const {
  std::ostringstream os;
  os.precision(6);
  auto disp = [&] {
    std::visit(Overloaded{[&](const Gaussian& g) {
                            os << "Gaussian(mean=" << g.mean << ", var=" << g.variance << ")";
                          },
                          [&](const Laplace& l) { os << "Laplace(scale=" << l.scale << ")"; },
                          [&](const PointMasses& pm) {
                            os << "PointMasses[" << pm.atoms.size() << "]";
                          }},
               displacement_);
  };
  switch (family_) {
    case CountFamily::Deterministic:
      os << "deterministic(" << count_ << ") x ";
      disp();
      break;
    case CountFamily::Poisson:
      os << "poisson(" << count_ << ") x ";
      disp();
      break;
    case CountFamily::FiniteAtomic:
      os << "finite_atomic[" << atoms_.size() << " outcomes]";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// kappa and derivatives

TiltParams kappa_triple(const ReproductionLaw& law, double theta) {
  TiltParams out{theta, kInf, kInf, kInf};
  if (!law.finiteness().contains(theta)) return out;
  if (law.family() == CountFamily::FiniteAtomic) {
    std::vector<double> logs;
    for (const auto& a : law.atoms()) {
      if (a.probability <= 0.0) continue;
      const double lp = std::log(a.probability);
      for (double x : a.points) logs.push_back(lp + theta * x);
    }
    const double k = log_sum_exp(logs);
    double m1 = 0.0;
    for (const auto& a : law.atoms()) {
      if (a.probability <= 0.0) continue;
      for (double x : a.points) m1 += x * a.probability * std::exp(theta * x - k);
    }
    double m2 = 0.0;
    for (const auto& a : law.atoms()) {
      if (a.probability <= 0.0) continue;
      for (double x : a.points) {
        m2 += (x - m1) * (x - m1) * a.probability * std::exp(theta * x - k);
      }
    }
    out.kappa = k;
    out.kappa_prime = m1;
    out.kappa_double_prime = m2;
    return out;
  }
  const LogMgf lm = log_mgf(law.displacement(), theta);
  if (!std::isfinite(lm.value)) return out;
  out.kappa = std::log(law.count_param()) + lm.value;
  out.kappa_prime = lm.d1;
  out.kappa_double_prime = lm.d2;
  return out;
}

double kappa(const ReproductionLaw& law, double theta) {
  const double k = kappa_triple(law, theta).kappa;
  return std::isfinite(k) ? k : kInf;
}

TiltParams kappa_derivatives(const ReproductionLaw& law, double theta) {
  if (!law.finiteness().contains(theta)) {
    throw DomainError("theta = " + std::to_string(theta) +
                      " is outside the finiteness interval of kappa");
  }
  TiltParams t = kappa_triple(law, theta);
  if (!std::isfinite(t.kappa)) {
    throw DomainError("kappa is not finite at theta = " + std::to_string(theta));
  }
  if (!(t.kappa_double_prime > 0.0)) {
    throw ParameterError("kappa''(theta) = " + std::to_string(t.kappa_double_prime) +
                         " is not positive (degenerate law)");
  }
  return t;
}

// ---------------------------------------------------------------------------
// Samplers

double sample_displacement(const Displacement& d, Stream& rng) {
  return std::visit(
      Overloaded{[&](const Gaussian& g) {
                   return g.mean + std::sqrt(g.variance) * rng.normal();
                 },
                 [&](const Laplace& l) {
                   const double e = rng.exponential();
                   return (rng() >> 63) ? l.scale * e : -l.scale * e;
                 },
                 [&](const PointMasses& pm) {
                   std::vector<double> w;
                   w.reserve(pm.atoms.size());
                   for (auto [v, p] : pm.atoms) w.push_back(p);
                   return pm.atoms[categorical<double>(w, 1.0, rng)].first;
                 }},
      d);
}

double sample_tilted_displacement(const Displacement& d, double theta, Stream& rng) {
  return std::visit(
      Overloaded{[&](const Gaussian& g) {
                   return g.mean + g.variance * theta + std::sqrt(g.variance) * rng.normal();
                 },
                 [&](const Laplace& l) {
                   const double inv = 1.0 / l.scale;
                   if (std::fabs(theta) >= inv) {
                     throw DomainError("tilt outside the Laplace finiteness interval");
                   }
                   const double rate_pos = inv - theta;
                   const double rate_neg = inv + theta;
                   const double p_pos = rate_neg / (rate_pos + rate_neg);
                   const double e = rng.exponential();
                   return rng.uniform() <= p_pos ? e / rate_pos : -e / rate_neg;
                 },
                 [&](const PointMasses& pm) {
                   const LogMgf lm = log_mgf(d, theta);
                   std::vector<double> w;
                   w.reserve(pm.atoms.size());
                   for (auto [v, p] : pm.atoms) {
                     w.push_back(p > 0.0 ? std::exp(std::log(p) + theta * v - lm.value) : 0.0);
                   }
                   const double total = std::accumulate(w.begin(), w.end(), 0.0);
                   return pm.atoms[categorical<double>(w, total, rng)].first;
                 }},
      d);
}

namespace {

unsigned sample_count(const ReproductionLaw& law, Stream& rng) {
  if (law.family() == CountFamily::Deterministic) {
    return static_cast<unsigned>(law.count_param());
  }
  std::poisson_distribution<unsigned> pois(law.count_param());
  return pois(rng);
}

std::size_t sample_outcome(const ReproductionLaw& law, Stream& rng) {
  std::vector<double> w;
  w.reserve(law.atoms().size());
  for (const auto& a : law.atoms()) w.push_back(a.probability);
  return categorical<double>(w, 1.0, rng);
}

}  // namespace

std::vector<double> sample_offspring(const ReproductionLaw& law, Stream& rng) {
  if (law.family() == CountFamily::FiniteAtomic) {
    return law.atoms()[sample_outcome(law, rng)].points;
  }
  const unsigned count = sample_count(law, rng);
  std::vector<double> out(count);
  for (auto& x : out) x = sample_displacement(law.displacement(), rng);
  sort_non_increasing(out);
  return out;
}

std::vector<double> sample_size_biased_offspring(const ReproductionLaw& law, double theta,
                                                 Stream& rng) {
  const double k = kappa(law, theta);
  if (!std::isfinite(k)) {
    throw DomainError("size-biased law needs kappa(theta) finite");
  }
  if (law.family() == CountFamily::FiniteAtomic) {
    std::vector<double> w;
    w.reserve(law.atoms().size());
    for (const auto& a : law.atoms()) {
      double s = 0.0;
      for (double x : a.points) s += std::exp(theta * x - k);
      w.push_back(a.probability * s);
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    return law.atoms()[categorical<double>(w, total, rng)].points;
  }
  // Biasing by sum_i exp(theta l_i) with i.i.d. displacements: the count is
  // size-biased (k stays k, Poisson(m) becomes 1 + Poisson(m)), one uniformly
  // chosen atom is drawn from the tilted displacement law, the rest plainly.
  unsigned count = law.family() == CountFamily::Deterministic
                       ? static_cast<unsigned>(law.count_param())
                       : 1 + sample_count(law, rng);
  const auto special = rng.below(count);
  std::vector<double> out(count);
  for (unsigned i = 0; i < count; ++i) {
    out[i] = i == special ? sample_tilted_displacement(law.displacement(), theta, rng)
                          : sample_displacement(law.displacement(), rng);
  }
  sort_non_increasing(out);
  return out;
}

double sample_tilted_step(const ReproductionLaw& law, double theta, Stream& rng) {
  const double k = kappa(law, theta);
  if (!std::isfinite(k)) {
    throw DomainError("tilted step needs kappa(theta) finite");
  }
  if (law.iid_displacements()) {
    return sample_tilted_displacement(law.displacement(), theta, rng);
  }
  std::vector<double> w;
  std::vector<double> values;
  for (const auto& a : law.atoms()) {
    for (double x : a.points) {
      w.push_back(a.probability * std::exp(theta * x - k));
      values.push_back(x);
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  return values[categorical<double>(w, total, rng)];
}

// ---------------------------------------------------------------------------
// Assumptions

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::HoldsAnalytically:
      return "holds-analytically";
    case Verdict::HoldsNumerically:
      return "holds-numerically";
    case Verdict::Assumed:
      return "assumed";
    case Verdict::Violated:
      return "violated";
  }
  return "?";
}

Verdict AssumptionReport::verdict(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c.verdict;
  }
  throw DomainError("no assumption named " + std::string(name));
}

namespace {

// Continued-fraction recognition of x as p/q with q <= max_den.
bool is_rational(double x, double tol, long long max_den) {
  double r = x;
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(r);
    if (std::fabs(a) > 1e15) return false;
    const long long ai = static_cast<long long>(a);
    const long long h2 = ai * h1 + h0;
    const long long k2 = ai * k1 + k0;
    if (k2 > max_den) return false;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double approx = static_cast<double>(h1) / static_cast<double>(k1);
    if (std::fabs(approx - x) <= tol * std::max(1.0, std::fabs(x))) return true;
    const double frac = r - a;
    if (frac < 1e-300) return true;
    r = 1.0 / frac;
  }
  return false;
}

std::vector<double> support_points(const ReproductionLaw& law) {
  std::vector<double> pts;
  if (law.family() == CountFamily::FiniteAtomic) {
    for (const auto& a : law.atoms()) {
      if (a.probability > 0.0) pts.insert(pts.end(), a.points.begin(), a.points.end());
    }
  } else if (const auto* pm = std::get_if<PointMasses>(&law.displacement())) {
    for (auto [v, p] : pm->atoms) {
      if (p > 0.0) pts.push_back(v);
    }
  }
  return pts;
}

}  // namespace

bool is_lattice(std::span<const double> points, double tol) {
  std::vector<double> u(points.begin(), points.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end(),
                      [&](double a, double b) {
                        return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(a));
                      }),
          u.end());
  if (u.size() <= 2) return true;
  const double base = u[1] - u[0];
  for (std::size_t i = 2; i < u.size(); ++i) {
    if (!is_rational((u[i] - u[0]) / base, tol, 10000)) return false;
  }
  return true;
}

AssumptionReport check_assumptions(const ReproductionLaw& law, double theta) {
  AssumptionReport rep;
  auto add = [&](std::string name, Verdict v, std::string detail) {
    rep.checks.push_back({std::move(name), v, std::move(detail)});
  };
  const bool atomic = law.family() == CountFamily::FiniteAtomic;

  // Survival and supercriticality.
  switch (law.family()) {
    case CountFamily::Deterministic:
      if (law.count_param() >= 2.0) {
        add("survival", Verdict::HoldsAnalytically, "fixed count >= 2");
      } else {
        add("survival", Verdict::Violated, "exactly one child with probability 1");
      }
      break;
    case CountFamily::Poisson:
      add("survival", Verdict::Violated, "Poisson count has P(no child) > 0");
      break;
    case CountFamily::FiniteAtomic: {
      double p_one = 0.0;
      for (const auto& a : law.atoms()) {
        if (a.points.size() == 1) p_one += a.probability;
      }
      if (p_one >= 1.0 - 1e-15) {
        add("survival", Verdict::Violated, "exactly one child with probability 1");
      } else {
        add("survival", Verdict::HoldsAnalytically, "no empty outcome, P(one child) < 1");
      }
      break;
    }
  }

  const bool inside = law.finiteness().contains(theta);
  const TiltParams tp = kappa_triple(law, theta);
  const Verdict analytic = atomic ? Verdict::HoldsNumerically : Verdict::HoldsAnalytically;

  if (!inside || !std::isfinite(tp.kappa)) {
    add("as1", Verdict::Violated, "kappa not finite at theta");
    add("as3", Verdict::Violated, "kappa not finite at theta");
  } else {
    if (tp.kappa_double_prime > 0.0 && std::isfinite(tp.kappa_double_prime)) {
      add("as1", analytic, "kappa''(theta) = " + std::to_string(tp.kappa_double_prime));
    } else {
      add("as1", Verdict::Violated, "kappa''(theta) is not in (0, inf)");
    }
    // Exponential moments exist on an open neighbourhood of theta, so the
    // X log X moment is finite.
    add("as3", Verdict::HoldsAnalytically, "exponential moments finite near theta");
  }

  const auto pts = support_points(law);
  if (law.continuous_displacements()) {
    add("as4", Verdict::HoldsAnalytically, "displacement law has a density");
  } else if (is_lattice(pts)) {
    add("as4", Verdict::Violated, "all atoms lie in a + bZ");
  } else {
    add("as4", Verdict::HoldsNumerically, "atoms are not commensurable");
  }

  const auto theta_star = solve_theta_star(law);
  if (!theta_star) {
    add("as6", Verdict::Violated, "no root of theta kappa'(theta) = kappa(theta)");
    add("as7", Verdict::Violated, "requires as6");
    add("as8", Verdict::Violated, "requires as6");
  } else {
    add("as6", analytic, "theta* = " + std::to_string(*theta_star));
    const TiltParams ts = kappa_triple(law, *theta_star);
    if (ts.kappa_double_prime > 0.0 && std::isfinite(ts.kappa_double_prime)) {
      add("as7", analytic, "kappa''(theta*) = " + std::to_string(ts.kappa_double_prime));
    } else {
      add("as7", Verdict::Violated, "kappa''(theta*) is not in (0, inf)");
    }
    add("as8", Verdict::HoldsAnalytically, "theta* is interior to the finiteness interval");
  }
  return rep;
}

}  // namespace brw
