// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/spine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "brw/error.hpp"
#include "brw/parallel.hpp"
#include "brw/stats.hpp"

namespace brw {

SpineWalk sample_spine_walk(const ReproductionLaw& law, double theta, long n, Stream& rng) {
  if (n < 0) throw DomainError("spine walk length must be >= 0");
  SpineWalk w;
  w.theta = theta;
  w.positions.reserve(static_cast<std::size_t>(n) + 1);
  w.positions.push_back(0.0);
  for (long k = 0; k < n; ++k) {
    w.positions.push_back(w.positions.back() + sample_tilted_step(law, theta, rng));
  }
  return w;
}

SpineStep sample_spine_step(const ReproductionLaw& law, double theta, Stream& rng) {
  SpineStep st;
  st.offspring = sample_size_biased_offspring(law, theta, rng);
  double top = -std::numeric_limits<double>::infinity();
  for (double l : st.offspring) top = std::max(top, theta * l);
  std::vector<double> w(st.offspring.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(theta * st.offspring[i] - top);
    total += w[i];
  }
  double u = rng.uniform() * total;
  st.chosen = w.size() - 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    u -= w[i];
    if (u <= 0.0) {
      st.chosen = i;
      break;
    }
  }
  return st;
}

namespace {

PopulationSnapshot slice(const PopulationSnapshot& s, std::size_t b, std::size_t e) {
  PopulationSnapshot out;
  out.generation = s.generation;
  out.positions.assign(s.positions.begin() + static_cast<std::ptrdiff_t>(b),
                       s.positions.begin() + static_cast<std::ptrdiff_t>(e));
  out.keys.assign(s.keys.begin() + static_cast<std::ptrdiff_t>(b),
                  s.keys.begin() + static_cast<std::ptrdiff_t>(e));
  return out;
}

void append(PopulationSnapshot& dst, const PopulationSnapshot& src) {
  dst.positions.insert(dst.positions.end(), src.positions.begin(), src.positions.end());
  dst.keys.insert(dst.keys.end(), src.keys.begin(), src.keys.end());
}

}  // namespace

SpinedTree sample_spined_tree(const ReproductionLaw& law, double theta, long n, Stream& rng,
                              const Pruning& pruning, std::size_t memory_budget) {
  if (n < 0) throw DomainError("horizon must be >= 0");
  if (!std::isfinite(kappa(law, theta))) throw DomainError("spined tree needs kappa(theta) finite");
  SpinedTree t;
  t.spine_positions.theta = theta;
  t.spine_positions.positions = {0.0};
  PopulationSnapshot& snap = t.snapshot;
  snap.positions = {0.0};
  snap.keys = {rng()};
  std::size_t spine = 0;
  for (long g = 0; g < n; ++g) {
    PopulationSnapshot before = slice(snap, 0, spine);
    PopulationSnapshot after = slice(snap, spine + 1, snap.size());
    if (!before.positions.empty()) reproduce(law, before);
    if (!after.positions.empty()) reproduce(law, after);

    const std::uint64_t key = snap.keys[spine];
    const double x = snap.positions[spine];
    Stream sr(key);
    const SpineStep st = sample_spine_step(law, theta, sr);

    PopulationSnapshot next;
    next.generation = g + 1;
    append(next, before);
    for (std::size_t s = 0; s < st.offspring.size(); ++s) {
      next.positions.push_back(x + st.offspring[s]);
      next.keys.push_back(child_key(key, s));
    }
    append(next, after);
    next.pruned = snap.pruned;
    spine = before.size() + st.chosen;
    const std::uint64_t spine_key = next.keys[spine];
    t.spine_positions.positions.push_back(next.positions[spine]);

    if (prune(next, pruning, spine) > 0) {
      spine = static_cast<std::size_t>(
          std::find(next.keys.begin(), next.keys.end(), spine_key) - next.keys.begin());
    }
    if (next.size() > memory_budget) {
      throw BudgetExceeded("spined tree exceeds the memory budget",
                           static_cast<std::size_t>(g + 1), next.size());
    }
    snap = std::move(next);
  }
  t.spine_index = spine;
  return t;
}

PathFunctional PathFunctional::constant(double c) { return {Family::Constant, c, 0.0}; }

PathFunctional PathFunctional::endpoint_box(double lo, double hi) {
  if (!(lo <= hi)) throw ParameterError("box needs lo <= hi");
  return {Family::EndpointBox, lo, hi};
}

PathFunctional PathFunctional::path_box(double lo, double hi) {
  if (!(lo <= hi)) throw ParameterError("box needs lo <= hi");
  return {Family::PathBox, lo, hi};
}

PathFunctional PathFunctional::endpoint_gaussian_bump(double centre, double scale) {
  if (!(scale > 0.0)) throw ParameterError("bump scale must be positive");
  return {Family::EndpointGaussianBump, centre, scale};
}

double PathFunctional::operator()(std::span<const double> path) const {
  const double end = path.empty() ? 0.0 : path.back();
  switch (family_) {
    case Family::Constant:
      return a_;
    case Family::EndpointBox:
      return end >= a_ && end <= b_ ? 1.0 : 0.0;
    case Family::PathBox:
      for (double s : path) {
        if (s < a_ || s > b_) return 0.0;
      }
      return 1.0;
    case Family::EndpointGaussianBump: {
      const double u = (end - a_) / b_;
      return std::exp(-u * u);
    }
  }
  return 0.0;
}

std::string PathFunctional::id() const {
  std::ostringstream s;
  s.precision(17);
  switch (family_) {
    case Family::Constant:
      s << "constant(" << a_ << ")";
      break;
    case Family::EndpointBox:
      s << "endpoint-box(" << a_ << "," << b_ << ")";
      break;
    case Family::PathBox:
      s << "path-box(" << a_ << "," << b_ << ")";
      break;
    case Family::EndpointGaussianBump:
      s << "endpoint-bump(" << a_ << "," << b_ << ")";
      break;
  }
  return s.str();
}

namespace {

// Sum of g over the generation-n particles of the tree below `key`.
double tree_sum(const ReproductionLaw& law, std::uint64_t key, long depth, long n,
                std::vector<double>& path, const PathFunctional& g) {
  if (depth == n) return g(path);
  Stream rng(key);
  const std::vector<double> off = sample_offspring(law, rng);
  const double x = path.empty() ? 0.0 : path.back();
  double s = 0.0;
  for (std::size_t i = 0; i < off.size(); ++i) {
    path.push_back(x + off[i]);
    s += tree_sum(law, child_key(key, i), depth + 1, n, path, g);
    path.pop_back();
  }
  return s;
}

double exact_lhs(const ReproductionLaw& law, long depth, long n, std::vector<double>& path,
                 const PathFunctional& g) {
  if (depth == n) return g(path);
  const double x = path.empty() ? 0.0 : path.back();
  double s = 0.0;
  for (const Atom& a : law.atoms()) {
    double inner = 0.0;
    for (double l : a.points) {
      path.push_back(x + l);
      inner += exact_lhs(law, depth + 1, n, path, g);
      path.pop_back();
    }
    s += a.probability * inner;
  }
  return s;
}

double exact_rhs(const std::vector<std::pair<double, double>>& steps, double theta, double kap,
                 long depth, long n, std::vector<double>& path, double prob,
                 const PathFunctional& g) {
  if (depth == n) {
    const double end = path.empty() ? 0.0 : path.back();
    return prob * std::exp(-theta * end + static_cast<double>(n) * kap) * g(path);
  }
  const double x = path.empty() ? 0.0 : path.back();
  double s = 0.0;
  for (const auto& [l, p] : steps) {
    path.push_back(x + l);
    s += exact_rhs(steps, theta, kap, depth + 1, n, path, prob * p, g);
    path.pop_back();
  }
  return s;
}

}  // namespace

std::pair<double, double> many_to_one_exact(const ReproductionLaw& law, double theta, long n,
                                            const PathFunctional& g) {
  if (law.family() != CountFamily::FiniteAtomic || n > 4 || n < 0) {
    throw DomainError("exact many-to-one needs a FiniteAtomic law and n <= 4");
  }
  const double kap = kappa(law, theta);
  if (!std::isfinite(kap)) throw DomainError("kappa(theta) is not finite");
  std::vector<double> path;
  const double lhs = exact_lhs(law, 0, n, path, g);
  std::vector<std::pair<double, double>> steps;
  for (const Atom& a : law.atoms()) {
    for (double l : a.points) steps.emplace_back(l, a.probability * std::exp(theta * l - kap));
  }
  path.clear();
  const double rhs = exact_rhs(steps, theta, kap, 0, n, path, 1.0, g);
  return {lhs, rhs};
}

ManyToOneResult many_to_one_check(const ReproductionLaw& law, double theta, long n,
                                  const PathFunctional& g, std::size_t reps, std::uint64_t seed,
                                  unsigned threads, std::size_t memory_budget) {
  if (reps < 2) throw ParameterError("many-to-one check needs at least 2 replicates");
  if (n < 0) throw DomainError("horizon must be >= 0");
  const double kap = kappa(law, theta);
  if (!std::isfinite(kap)) throw DomainError("kappa(theta) is not finite");
  const double expected = std::pow(law.mean_offspring(), static_cast<double>(n));
  if (expected > static_cast<double>(memory_budget)) {
    throw BudgetExceeded("expected generation-n population exceeds the memory budget",
                         static_cast<std::size_t>(n), static_cast<std::size_t>(expected));
  }
  std::vector<double> lhs(reps);
  std::vector<double> rhs(reps);
  const std::uint64_t lhs_base = derive_key(seed, 0);
  const std::uint64_t rhs_base = derive_key(seed, 1);
  parallel_for(reps, threads, [&](std::size_t r) {
    std::vector<double> path;
    lhs[r] = tree_sum(law, derive_key(lhs_base, r), 0, n, path, g);
    Stream rng(derive_key(rhs_base, r));
    const SpineWalk w = sample_spine_walk(law, theta, n, rng);
    const std::span<const double> steps(w.positions.data() + 1, w.positions.size() - 1);
    rhs[r] = std::exp(-theta * w.positions.back() + static_cast<double>(n) * kap) * g(steps);
  });
  const MeanEstimate l = mean_estimate(lhs);
  const MeanEstimate rr = mean_estimate(rhs);
  ManyToOneResult res;
  res.lhs = l.mean;
  res.rhs = rr.mean;
  res.lhs_std_error = l.std_error;
  res.rhs_std_error = rr.std_error;
  res.pooled_std_error = std::hypot(l.std_error, rr.std_error);
  if (law.family() == CountFamily::FiniteAtomic && n <= 4) {
    const auto [a, b] = many_to_one_exact(law, theta, n, g);
    res.lhs_exact = a;
    res.rhs_exact = b;
  }
  return res;
}

}  // namespace brw
