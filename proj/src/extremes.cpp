// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <string>
#include <numbers>

#include "brw/engine.hpp"
#include "brw/error.hpp"
#include "brw/kernels.hpp"
#include "brw/parallel.hpp"
#include "brw/rng.hpp"
#include "brw/summation.hpp"

namespace brw {

RampFunction RampFunction::make(double a, double b, double c) {
  if (!(a < b) || !(c > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw ParameterError("ramp needs finite a < b and c > 0");
  }
  return {a, b, c};
}

double RampFunction::operator()(double x) const {
  if (x <= a) return 0.0;
  if (x >= b) return c;
  return c * (x - a) / (b - a);
}

namespace {

// Trials are evaluated in fixed waves so that the accounting below never
// depends on the thread count.
constexpr std::size_t kWave = 64;

PointSample decoration_from(std::vector<double> leaves, double threshold, double window, long n) {
  PointSample s;
  s.origin = SampleOrigin::Decoration;
  s.lower_edge = -window;
  s.reference = threshold;
  s.n = n;
  s.population = leaves.size();
  const double top = *std::max_element(leaves.begin(), leaves.end());
  s.overshoot = top - threshold;
  for (double v : leaves) {
    const double d = v - top;
    if (d >= -window) s.points.push_back(d);
  }
  std::sort(s.points.begin(), s.points.end(), std::greater<>());
  return s;
}

struct Trial {
  bool accepted = false;
  std::size_t root_attempts = 1;
  PointSample sample;
};

Trial rejection_trial(const ReproductionLaw& law, long n, std::uint64_t seed, std::size_t index,
                      double threshold, double window, std::size_t budget) {
  SimulationPlan plan;
  plan.model = law;
  plan.n = n;
  plan.master_seed = seed;
  plan.replicate = index;
  plan.memory_budget = budget;
  SimulationResult r = simulate(plan);
  Trial t;
  if (max_of(r.final) >= threshold) {
    t.accepted = true;
    t.sample = decoration_from(std::move(r.final.positions), threshold, window, n);
  }
  return t;
}

enum class Mark { None, Reach, Window };

// Per-child probabilities: r = P(subtree max >= c), w = P(subtree max >= c - window).
struct ChildProbs {
  double r = 0.0;
  double w = 0.0;
};

// log P(no child reaches) and log P(no child reaches the window level).
struct LogMiss {
  double reach = 0.0;
  double window = 0.0;
};

LogMiss log_miss(const std::vector<ChildProbs>& p) {
  LogMiss m;
  for (const ChildProbs& c : p) {
    m.reach += std::log1p(-c.r);
    m.window += std::log1p(-c.w);
  }
  return m;
}

// P(condition | offspring) for a node marked `cond`.
double condition_probability(Mark cond, const std::vector<ChildProbs>& p) {
  const LogMiss m = log_miss(p);
  if (cond == Mark::Reach) return -std::expm1(m.reach);
  // No child reaches, and some child reaches the window level.
  if (m.reach == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::exp(m.reach) * -std::expm1(m.window - m.reach);
}

// Index of the first success of independent Bernoulli(q_i), given at least one.
std::size_t first_success(const std::vector<double>& q, Stream& rng) {
  std::vector<double> weight(q.size());
  double survive = 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    weight[i] = q[i] * survive;
    total += weight[i];
    survive *= 1.0 - q[i];
  }
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (u <= weight[i] && weight[i] > 0.0) return i;
    u -= weight[i];
  }
  for (std::size_t i = q.size(); i-- > 0;) {
    if (weight[i] > 0.0) return i;
  }
  throw ContractError("first success drawn from an impossible event");
}

// Child marks drawn from their independent law given the node's condition.
std::vector<Mark> conditioned_marks(Mark cond, const std::vector<ChildProbs>& p, Stream& rng) {
  const std::size_t k = p.size();
  std::vector<Mark> marks(k, Mark::None);
  // Window mark given "not reach".
  auto window_given_miss = [&](std::size_t i) { return p[i].r < 1.0 ? (p[i].w - p[i].r) / (1.0 - p[i].r) : 0.0; };
  if (cond == Mark::Reach) {
    std::vector<double> q(k);
    for (std::size_t i = 0; i < k; ++i) q[i] = p[i].r;
    const std::size_t j = first_success(q, rng);
    for (std::size_t i = 0; i < k; ++i) {
      const double u = rng.uniform();
      if (i < j) {
        marks[i] = u <= window_given_miss(i) ? Mark::Window : Mark::None;
      } else if (i == j) {
        marks[i] = Mark::Reach;
      } else {
        marks[i] = u <= p[i].r ? Mark::Reach : (u <= p[i].w ? Mark::Window : Mark::None);
      }
    }
  } else {
    std::vector<double> q(k);
    for (std::size_t i = 0; i < k; ++i) q[i] = window_given_miss(i);
    const std::size_t j = first_success(q, rng);
    for (std::size_t i = 0; i < k; ++i) {
      const double u = rng.uniform();
      if (i == j || (i > j && u <= q[i])) marks[i] = Mark::Window;
    }
  }
  return marks;
}

double gaussian_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Builds the tree below one node conditioned on its subtree maximum being
// >= c (Reach) or in [c - window, c) (Window). Each child is marked by the
// subtree it will carry, and unmarked children are dropped since none of
// their descendants can come within the window of the maximum.
//
// The root redraws its offspring until the condition holds; the number of
// draws is the trial count behind the acceptance rate. Deeper nodes draw
// (offspring, marks) from their exact conditional law: offspring are
// proposed with one child biased by its mark weight and accepted with
// probability P(condition | offspring) / (sum of weights), which is at least
// 1 / (number of children).
class ConditionedBuilder {
 public:
  ConditionedBuilder(const ReproductionLaw& law, long n, double c, double window,
                     const std::vector<TailFunction>& tails, std::size_t node_cap,
                     double plain_floor)
      : law_(law), n_(n), c_(c), h_(c - window), tails_(tails), cap_(node_cap),
        plain_floor_(plain_floor) {
    if (law.family() == CountFamily::Poisson) {
      throw UnsupportedConfiguration("conditioned decoration needs laws without extinction");
    }
    cell_ = tails.size() > 1 ? 4.0 * tails[1].step() : 0.1;
  }

  /// Returns the number of root offspring draws (1 below the root).
  std::size_t build(double x, long g, std::uint64_t key, Mark cond, std::vector<double>& leaves) {
    if (g == n_) {
      leaves.push_back(x);
      return 0;
    }
    const long remaining = n_ - g - 1;
    Stream rng(key);
    std::vector<double> off;
    std::vector<Mark> marks;
    std::size_t attempts = 1;
    if (g == 0) {
      attempts = root_offspring(x, remaining, cond, rng, off, marks);
    } else if (node_probability(x, remaining, cond) >= plain_floor_) {
      // Plain redraws are exact too, and cheaper while the condition is likely.
      root_offspring(x, remaining, cond, rng, off, marks);
    } else if (law_.family() == CountFamily::FiniteAtomic) {
      atomic_offspring(x, remaining, cond, rng, off, marks);
    } else {
      iid_offspring(x, remaining, cond, rng, off, marks);
    }
    for (std::size_t i = 0; i < off.size(); ++i) {
      if (marks[i] != Mark::None) build(x + off[i], g + 1, child_key(key, i), marks[i], leaves);
    }
    return attempts;
  }

 private:
  // P(max of a `remaining`-generation subtree started at y is >= level).
  double hit(double y, long remaining, double level) const {
    if (remaining == 0) return y >= level ? 1.0 : 0.0;
    return tails_[static_cast<std::size_t>(remaining)](level - y);
  }

  // Model probability of the node's own condition, from one generation up.
  double node_probability(double x, long remaining, Mark cond) const {
    const ChildProbs p = probs(x, remaining + 1);
    return cond == Mark::Reach ? p.r : p.w - p.r;
  }

  ChildProbs probs(double y, long remaining) const { return {hit(y, remaining, c_), hit(y, remaining, h_)}; }

  std::vector<ChildProbs> probs_of(double x, const std::vector<double>& off, long remaining) const {
    std::vector<ChildProbs> p(off.size());
    for (std::size_t i = 0; i < off.size(); ++i) p[i] = probs(x + off[i], remaining);
    return p;
  }

  [[noreturn]] void cap_exceeded(double x, long remaining, Mark cond) const {
    throw SamplingFailure("conditioned decoration node exceeded its attempt cap (generation " +
                              std::to_string(n_ - remaining - 1) + ", " +
                              (cond == Mark::Reach ? "reach" : "window") + " condition, " +
                              std::to_string(c_ - x) + " below the threshold)",
                          static_cast<double>(cap_));
  }

  std::size_t root_offspring(double x, long remaining, Mark cond, Stream& rng,
                             std::vector<double>& off, std::vector<Mark>& marks) const {
    std::size_t attempts = 0;
    for (;;) {
      if (++attempts > cap_) cap_exceeded(x, remaining, cond);
      off = sample_offspring(law_, rng);
      marks.assign(off.size(), Mark::None);
      bool any_reach = false;
      bool any_window = false;
      for (std::size_t i = 0; i < off.size(); ++i) {
        const ChildProbs p = probs(x + off[i], remaining);
        if (p.w <= 0.0) continue;
        const double u = rng.uniform();
        if (u <= p.r) {
          marks[i] = Mark::Reach;
          any_reach = true;
        } else if (u <= p.w) {
          marks[i] = Mark::Window;
          any_window = true;
        }
      }
      if (cond == Mark::Reach ? any_reach : (!any_reach && any_window)) return attempts;
    }
  }

  void atomic_offspring(double x, long remaining, Mark cond, Stream& rng, std::vector<double>& off,
                        std::vector<Mark>& marks) const {
    const auto& atoms = law_.atoms();
    std::vector<double> weight(atoms.size());
    double total = 0.0;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      weight[a] = atoms[a].probability * condition_probability(cond, probs_of(x, atoms[a].points, remaining));
      total += weight[a];
    }
    if (!(total > 0.0)) cap_exceeded(x, remaining, cond);
    double u = rng.uniform() * total;
    std::size_t pick = atoms.size() - 1;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      if (u <= weight[a] && weight[a] > 0.0) {
        pick = a;
        break;
      }
      u -= weight[a];
    }
    while (weight[pick] <= 0.0) --pick;
    off = atoms[pick].points;
    std::stable_sort(off.begin(), off.end(), std::greater<>());
    marks = conditioned_marks(cond, probs_of(x, off, remaining), rng);
  }

  // Mark weight of one child at displacement l: r for Reach, w - r for Window.
  double child_weight(Mark cond, const ChildProbs& p) const { return cond == Mark::Reach ? p.r : p.w - p.r; }

  void iid_offspring(double x, long remaining, Mark cond, Stream& rng, std::vector<double>& off,
                     std::vector<Mark>& marks) const {
    const auto k = static_cast<std::size_t>(law_.count_param());
    const Displacement& d = law_.displacement();
    const WeightedSampler biased = weighted_sampler(x, remaining, cond);
    for (std::size_t attempt = 1;; ++attempt) {
      if (attempt > cap_) cap_exceeded(x, remaining, cond);
      const auto j = std::min(k - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(k)));
      off.assign(k, 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        off[i] = i == j ? biased.draw(rng, cap_, [&] { cap_exceeded(x, remaining, cond); })
                        : sample_displacement(d, rng);
      }
      const std::vector<ChildProbs> p = probs_of(x, off, remaining);
      double sum = 0.0;
      for (const ChildProbs& c : p) sum += child_weight(cond, c);
      const double accept = sum > 0.0 ? condition_probability(cond, p) / sum : 0.0;
      if (rng.uniform() <= accept) break;
    }
    // Offspring events are kept sorted non-increasing, like sample_offspring.
    std::stable_sort(off.begin(), off.end(), std::greater<>());
    marks = conditioned_marks(cond, probs_of(x, off, remaining), rng);
  }

  // Draws l with density proportional to child_weight(l) p(l). The weight is
  // A(l) - B(l) with A, B nondecreasing, so A(right) - B(left) bounds it on a
  // cell; a cell is picked by bound times mass and the draw thinned to the
  // exact weight.
  struct WeightedSampler {
    std::vector<double> edges;
    std::vector<double> bound;
    std::vector<double> cumulative;
    std::vector<std::pair<double, double>> atoms;  // point masses: (value, weight)
    std::function<double(double)> weight;
    std::function<double(double)> density;  // continuous laws, up to a constant

    template <class OnCap>
    double draw(Stream& rng, std::size_t cap, OnCap&& on_cap) const {
      if (!atoms.empty()) {
        double u = rng.uniform() * cumulative.back();
        for (std::size_t i = 0; i < atoms.size(); ++i) {
          if (u <= cumulative[i] && atoms[i].second > 0.0) return atoms[i].first;
        }
        return atoms.back().first;
      }
      for (std::size_t attempt = 1;; ++attempt) {
        if (attempt > cap) on_cap();
        const double u = rng.uniform() * cumulative.back();
        const auto cell = static_cast<std::size_t>(
            std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        const std::size_t c = std::min(cell, bound.size() - 1);
        const double a = edges[c];
        const double b = edges[c + 1];
        const double l = a + (b - a) * rng.uniform();
        // Thin to the density within the cell, then to the weight.
        const double peak = std::max({density(a), density(b), (a <= peak_at && peak_at <= b) ? density(peak_at) : 0.0});
        if (rng.uniform() * peak > density(l)) continue;
        if (rng.uniform() * bound[c] <= weight(l)) return l;
      }
    }
    double peak_at = 0.0;
  };

  WeightedSampler weighted_sampler(double x, long remaining, Mark cond) const {
    WeightedSampler s;
    s.weight = [this, x, remaining, cond](double l) { return child_weight(cond, probs(x + l, remaining)); };
    const Displacement& d = law_.displacement();
    if (const auto* pm = std::get_if<PointMasses>(&d)) {
      double total = 0.0;
      for (const auto& [v, p] : pm->atoms) {
        const double w = p * s.weight(v);
        s.atoms.emplace_back(v, w);
        total += w;
        s.cumulative.push_back(total);
      }
      if (!(total > 0.0)) cap_exceeded(x, remaining, cond);
      return s;
    }
    double lo = 0.0;
    double hi = 0.0;
    std::function<double(double)> cdf;
    std::function<double(double)> sf;
    if (const auto* g = std::get_if<Gaussian>(&d)) {
      const double sd = std::sqrt(g->variance);
      const double mean = g->mean;
      lo = mean - 12.0 * sd;
      hi = mean + 12.0 * sd;
      cdf = [mean, sd](double v) { return gaussian_cdf((v - mean) / sd); };
      sf = [mean, sd](double v) { return gaussian_cdf((mean - v) / sd); };
      s.density = [mean, sd](double v) {
        const double z = (v - mean) / sd;
        return std::exp(-0.5 * z * z);
      };
      s.peak_at = mean;
    } else {
      const double b = std::get<Laplace>(d).scale;
      lo = -40.0 * b;
      hi = 40.0 * b;
      cdf = [b](double v) { return v < 0.0 ? 0.5 * std::exp(v / b) : 1.0 - 0.5 * std::exp(-v / b); };
      sf = [cdf](double v) { return cdf(-v); };
      s.density = [b](double v) { return std::exp(-std::fabs(v) / b); };
      s.peak_at = 0.0;
    }
    const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / cell_));
    s.edges.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) s.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells);
    // Bounds from the monotone parts at the cell edges.
    std::vector<ChildProbs> at(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) at[i] = probs(x + s.edges[i], remaining);
    s.bound.resize(cells);
    s.cumulative.resize(cells);
    double total = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      const double upper = cond == Mark::Reach ? at[i + 1].r : at[i + 1].w - at[i].r;
      s.bound[i] = std::clamp(upper, 0.0, 1.0);
      const double a = s.edges[i];
      const double b = s.edges[i + 1];
      // Mass from the nearer tail keeps precision far from the centre.
      const double mass = std::max(0.0, a >= s.peak_at ? sf(a) - sf(b) : cdf(b) - cdf(a));
      total += s.bound[i] * mass;
      s.cumulative[i] = total;
    }
    if (!(total > 0.0)) cap_exceeded(x, remaining, cond);
    return s;
  }

  const ReproductionLaw& law_;
  long n_;
  double c_;
  double h_;
  const std::vector<TailFunction>& tails_;
  std::size_t cap_;
  double plain_floor_;
  double cell_ = 0.1;
};

}  // namespace

DecorationResult sample_decoration(const ReproductionLaw& law2, double theta, long n,
                                   std::size_t target_accepts, std::uint64_t seed,
                                   const DecorationOptions& options) {
  if (n < 1) throw DomainError("decoration needs n >= 1");
  if (target_accepts == 0) throw ParameterError("decoration needs a positive target");
  const TiltParams tp = kappa_triple(law2, theta);
  if (!std::isfinite(tp.kappa) || !(theta > 0.0)) {
    throw DomainError("kappa(theta) is not finite");
  }
  if (!(theta * tp.kappa_prime - tp.kappa > 0.0)) {
    throw ParameterError("decoration needs theta kappa'(theta) > kappa(theta)");
  }
  const double window = options.depth_window > 0.0 ? options.depth_window : 15.0 / theta;
  const double threshold = tp.kappa_prime * static_cast<double>(n);

  DecorationResult res;
  res.threshold = threshold;
  res.depth_window = window;

  std::vector<TailFunction> tails;
  if (options.method == DecorationMethod::Conditioned && n > 1) {
    tails = tail_sequence(law2, n - 1, options.tail);
  }

  std::size_t trials_seen = 0;
  std::size_t next = 0;
  while (res.samples.size() < target_accepts) {
    std::vector<Trial> wave(kWave);
    const std::size_t base = next;
    if (options.method == DecorationMethod::Rejection) {
      parallel_for(kWave, options.threads, [&](std::size_t i) {
        wave[i] = rejection_trial(law2, n, seed, base + i, threshold, window,
                                  options.memory_budget);
      });
    } else {
      parallel_for(kWave, options.threads, [&](std::size_t i) {
        ConditionedBuilder b(law2, n, threshold, window, tails, options.max_attempts,
                             options.plain_draw_floor);
        std::vector<double> leaves;
        Trial& t = wave[i];
        t.root_attempts = b.build(0.0, 0, derive_key(seed, base + i), Mark::Reach, leaves);
        t.accepted = true;
        t.sample = decoration_from(std::move(leaves), threshold, window, n);
      });
    }
    next += kWave;
    for (Trial& t : wave) {
      if (trials_seen + t.root_attempts > options.max_attempts) {
        const std::size_t acc = res.samples.size();
        const double rate =
            trials_seen > 0 ? static_cast<double>(acc) / static_cast<double>(trials_seen) : 0.0;
        throw PartialResult("decoration trial budget exhausted", acc, rate);
      }
      trials_seen += t.root_attempts;
      if (t.accepted) {
        if (t.sample.points.empty() || t.sample.points.front() != 0.0) {
          throw ContractError("decoration sample without an atom at 0");
        }
        res.samples.push_back(std::move(t.sample));
        if (res.samples.size() == target_accepts) break;
      }
    }
  }
  res.attempts = trials_seen;
  res.acceptance_rate = static_cast<double>(res.samples.size()) / static_cast<double>(trials_seen);
  res.rate_ci = wilson_interval(res.samples.size(), trials_seen);
  return res;
}

LaplaceEstimate empirical_laplace(std::span<const PointSample> samples, const RampFunction& phi) {
  if (samples.empty()) throw DomainError("Laplace functional of an empty sample list");
  std::vector<double> values;
  values.reserve(samples.size());
  std::size_t most = 0;
  for (const PointSample& s : samples) {
    if (phi.a < s.lower_edge) {
      throw CoverageError("test function sees below the recorded window of a sample");
    }
    NeumaierSum acc;
    for (double x : s.points) acc.add(phi(x));
    values.push_back(std::exp(-acc.value()));
    most = std::max(most, s.points.size());
  }
  const MeanEstimate m = mean_estimate(values);
  const double floor = std::exp(-phi.c * static_cast<double>(most));
  if (m.mean < floor * (1.0 - 1e-12) || m.mean > 1.0 + 1e-12) throw ContractError("Laplace estimate outside [exp(-c k), 1]");
  return {m.mean, m.std_error};
}

double gumbel_mixture_cdf(std::span<const double> w_samples, double lambda, double theta,
                          double y) {
  if (w_samples.empty()) throw DomainError("mixture needs at least one w sample");
  if (!(lambda > 0.0) || !(theta > 0.0)) throw ParameterError("lambda and theta must be positive");
  const double s = lambda * std::exp(-theta * y);
  NeumaierSum acc;
  for (double w : w_samples) acc.add(std::exp(-s * w));
  return acc.value() / static_cast<double>(w_samples.size());
}

namespace {

constexpr double kLogLambdaLo = -30.0;
constexpr double kLogLambdaHi = 30.0;
constexpr double kScanStep = 0.25;

// G(u) = mean_j exp(-e^u w_j) tabulated on an even grid in u = log s.
class LaplaceTable {
 public:
  LaplaceTable(std::span<const double> w, double u_lo, double u_hi) {
    du_ = 0.01;
    const double span = u_hi - u_lo;
    if (span / du_ > 2e5) du_ = span / 2e5;
    u0_ = u_lo;
    const auto size = static_cast<std::size_t>(std::ceil(span / du_)) + 2;
    g_.resize(size);
    std::vector<double> buf(w.size());
    for (std::size_t k = 0; k < size; ++k) {
      const double s = std::exp(u0_ + static_cast<double>(k) * du_);
      kernels::exp_affine(w.data(), w.size(), -s, 0.0, buf.data());
      BlockedSum acc;
      acc.add(buf);
      g_[k] = acc.value() / static_cast<double>(w.size());
    }
  }

  double operator()(double u) const {
    const double p = (u - u0_) / du_;
    if (p <= 0.0) return g_.front();
    const double fl = std::floor(p);
    const auto i = static_cast<std::size_t>(fl);
    if (i + 1 >= g_.size()) return g_.back();
    const double f = p - fl;
    return g_[i] + f * (g_[i + 1] - g_[i]);
  }

 private:
  double u0_ = 0.0;
  double du_ = 0.01;
  std::vector<double> g_;
};

// Distinct values of a sorted sample with F(y-) and F(y).
struct Steps {
  std::vector<double> y;
  std::vector<double> below;
  std::vector<double> upto;

  explicit Steps(const std::vector<double>& sorted) {
    const double m = static_cast<double>(sorted.size());
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      y.push_back(sorted[i]);
      below.push_back(static_cast<double>(i) / m);
      upto.push_back(static_cast<double>(j) / m);
      i = j;
    }
  }
};

double ks_at(const Steps& st, const LaplaceTable& g, double log_lambda, double theta) {
  double d = 0.0;
  for (std::size_t i = 0; i < st.y.size(); ++i) {
    const double v = g(log_lambda - theta * st.y[i]);
    d = std::max({d, std::fabs(st.upto[i] - v), std::fabs(st.below[i] - v)});
  }
  return d;
}

double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double x1 = b - r * (b - a);
  double x2 = a + r * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > 1e-7) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

struct ProfileFit {
  double log_lambda = 0.0;
  double ks = 1.0;
};

ProfileFit fit_profile(const Steps& st, const LaplaceTable& g, double theta, double lo, double hi,
                       double step, bool check_ambiguity) {
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> grid(count);
  std::vector<double> prof(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = lo + static_cast<double>(i) * step;
    prof[i] = ks_at(st, g, grid[i], theta);
  }
  const std::size_t best =
      static_cast<std::size_t>(std::min_element(prof.begin(), prof.end()) - prof.begin());
  if (check_ambiguity) {
    for (std::size_t j = 0; j < count; ++j) {
      const bool local = (j == 0 || prof[j] <= prof[j - 1]) &&
                         (j + 1 == count || prof[j] <= prof[j + 1]);
      if (!local || j == best || (j > best ? j - best : best - j) <= 2) continue;
      if (prof[j] > 1.1 * prof[best]) continue;
      const std::size_t a = std::min(j, best);
      const std::size_t b = std::max(j, best);
      const double hump = *std::max_element(prof.begin() + static_cast<std::ptrdiff_t>(a),
                                            prof.begin() + static_cast<std::ptrdiff_t>(b) + 1);
      if (hump > 1.1 * std::max(prof[j], prof[best]) + 1e-12) {
        throw FitAmbiguity("the KS profile over log lambda has separated near-equal minima");
      }
    }
  }
  const double a = grid[best > 0 ? best - 1 : 0];
  const double b = grid[std::min(best + 1, count - 1)];
  ProfileFit out;
  out.log_lambda = golden_min([&](double u) { return ks_at(st, g, u, theta); }, a, b);
  out.ks = ks_at(st, g, out.log_lambda, theta);
  if (prof[best] < out.ks) {
    out.log_lambda = grid[best];
    out.ks = prof[best];
  }
  return out;
}

}  // namespace

FitResult fit_shift_constant(const EmpiricalCdf& max_cdf, std::span<const double> w_samples,
                             double theta, const FitOptions& options) {
  if (w_samples.empty()) throw DomainError("shift-constant fit needs w samples");
  if (!(theta > 0.0)) throw ParameterError("theta must be positive");
  for (double w : w_samples) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("w samples must be finite and >= 0");
  }
  const std::vector<double>& ys = max_cdf.sorted();
  const double y_lo = ys.front();
  const double y_hi = ys.back();
  const LaplaceTable table(w_samples, kLogLambdaLo - theta * y_hi - 1.0,
                           kLogLambdaHi - theta * y_lo + 1.0);
  const Steps steps(ys);
  const ProfileFit fit =
      fit_profile(steps, table, theta, kLogLambdaLo, kLogLambdaHi, kScanStep, true);

  FitResult res;
  res.lambda_hat = std::exp(fit.log_lambda);
  res.ks_at_fit = fit.ks;
  res.theta = theta;
  res.n = options.n;
  res.w_sample_count = w_samples.size();

  if (options.bootstrap_reps > 0) {
    const double centre = fit.log_lambda;
    auto refit = [&](std::span<const double> resample) {
      std::vector<double> sorted(resample.begin(), resample.end());
      std::sort(sorted.begin(), sorted.end());
      const Steps st(sorted);
      const ProfileFit f = fit_profile(st, table, theta, centre - 2.0, centre + 2.0, 0.1, false);
      return std::exp(f.log_lambda);
    };
    res.bootstrap_ci = bootstrap_ci(refit, ys, options.bootstrap_reps, options.level,
                                    options.seed, options.threads);
    res.bootstrap_ci.lo = std::min(res.bootstrap_ci.lo, res.lambda_hat);
    res.bootstrap_ci.hi = std::max(res.bootstrap_ci.hi, res.lambda_hat);
  } else {
    res.bootstrap_ci = {res.lambda_hat, res.lambda_hat};
  }
  return res;
}

}  // namespace brw
