// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "brw/error.hpp"
#include "brw/kernels.hpp"
#include "brw/parallel.hpp"
#include "brw/rng.hpp"

namespace brw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Parents handled by one work item; a multiple of the kernel batch.
constexpr std::size_t kChunk = 8192;
// Largest buffer (in elements) kept for reuse between generations.
constexpr std::size_t kSpareLimit = std::size_t{1} << 22;
// Expected leaves per subtree when streaming a large tree.
constexpr double kSubtreeLeaves = 32768.0;

bool fast_gaussian(const ReproductionLaw& law) {
  return law.family() == CountFamily::Deterministic && law.gaussian_displacements() &&
         law.count_param() <= kernels::kMaxChildren;
}

struct ChildBlock {
  std::vector<double> positions;
  std::vector<std::uint64_t> keys;
  std::vector<std::uint32_t> counts;  // children per parent
};

void generic_children(const ReproductionLaw& law, const PopulationSnapshot& snap,
                      std::size_t begin, std::size_t end, bool keep_keys, ChildBlock& out) {
  out.counts.resize(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    Stream rng(snap.keys[i]);
    const std::vector<double> offspring = sample_offspring(law, rng);
    out.counts[i - begin] = static_cast<std::uint32_t>(offspring.size());
    for (std::size_t s = 0; s < offspring.size(); ++s) {
      out.positions.push_back(snap.positions[i] + offspring[s]);
      if (keep_keys) out.keys.push_back(child_key(snap.keys[i], s));
    }
  }
}

double log_sum_exp_scaled(const double* xs, std::size_t n, double theta) {
  double m = -kInf;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, theta * xs[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(theta * xs[i] - m);
  return m + std::log(s);
}

void annotate_children(const PopulationSnapshot& parents, std::span<const std::uint32_t> counts,
                       std::span<const double> child_positions,
                       std::vector<Annotation>& child_annotations) {
  const AnnotationParams& ap = *parents.annotation_params;
  const double k = static_cast<double>(parents.generation);
  const double line = (ap.kappa_prime + ap.L) * (k + 1.0);
  child_annotations.resize(child_positions.size());
  std::vector<double> rel;
  std::size_t c = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double x = parents.positions[i];
    const Annotation& pa = parents.annotations[i];
    rel.assign(counts[i], 0.0);
    for (std::uint32_t s = 0; s < counts[i]; ++s) rel[s] = child_positions[c + s] - x;
    const double sib = log_sum_exp_scaled(rel.data(), rel.size(), ap.theta) - ap.a * (k + 1.0);
    for (std::uint32_t s = 0; s < counts[i]; ++s) {
      child_annotations[c + s] = {std::max(pa.path_max_excess, child_positions[c + s] - line),
                                  std::max(pa.sibling_weight_excess, sib)};
    }
    c += counts[i];
  }
}

template <class T>
void compact(std::vector<T>& v, const std::vector<char>& keep) {
  if (v.empty()) return;
  std::size_t w = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (keep[i]) v[w++] = v[i];
  }
  v.resize(w);
}

}  // namespace

std::string Pruning::describe() const {
  switch (kind) {
    case PruningKind::None:
      return "none";
    case PruningKind::TopK:
      return "top-k(" + std::to_string(k) + ")";
    case PruningKind::Window:
      return "window(" + std::to_string(width) + ")";
  }
  return "?";
}

AnnotationParams AnnotationParams::defaults(const ReproductionLaw& law, double theta) {
  const TiltParams tp = kappa_triple(law, theta);
  const double slack = tp.kappa - theta * tp.kappa_prime;
  if (!(slack > 0.0)) {
    throw ParameterError("truncation constants need kappa(theta) > theta kappa'(theta)");
  }
  return {theta, tp.kappa_prime, slack / (4.0 * theta), slack / 4.0};
}

void SimulationPlan::validate() const {
  if (n < 1) throw ParameterError("horizon n must be >= 1");
  if (pruning.kind == PruningKind::Window && !(pruning.width > 0.0)) {
    throw ParameterError("window width must be > 0");
  }
  if (pruning.kind == PruningKind::TopK && pruning.k < 1) {
    throw ParameterError("top-k pruning needs k >= 1");
  }
  if (memory_budget < 1) throw ParameterError("memory budget must be >= 1");
  if (const auto* spec = std::get_if<RegimeSpec>(&model)) {
    const long tn = spec->split_generation(n);
    if (tn < 0 || tn > n) throw ParameterError("split generation outside [0, n]");
  }
}

long SimulationPlan::switch_generation() const {
  if (const auto* spec = std::get_if<RegimeSpec>(&model)) return spec->split_generation(n);
  return n;
}

const ReproductionLaw& SimulationPlan::law_for(long g) const {
  if (const auto* spec = std::get_if<RegimeSpec>(&model)) {
    return g < spec->split_generation(n) ? spec->law1 : spec->law2;
  }
  return std::get<ReproductionLaw>(model);
}

std::uint64_t SimulationPlan::root_key() const { return derive_key(master_seed, replicate); }

PopulationSnapshot initial_snapshot(const SimulationPlan& plan) {
  PopulationSnapshot s;
  s.generation = 0;
  s.positions = {0.0};
  s.keys = {plan.root_key()};
  if (plan.annotations) {
    s.annotation_params = plan.annotations;
    s.annotations = {{-kInf, -kInf}};
  }
  return s;
}

void reproduce(const ReproductionLaw& law, PopulationSnapshot& snap, unsigned threads,
               bool keep_keys) {
  const std::size_t parents = snap.size();
  if (snap.keys.size() != parents) throw ContractError("snapshot has no particle keys");
  const bool annotate = snap.annotation_params.has_value();
  const std::size_t chunks = (parents + kChunk - 1) / kChunk;

  // Buffers cycle between the snapshot and these spares, so repeated calls
  // reuse memory instead of faulting in fresh pages every generation.
  thread_local std::vector<double> spare_positions;
  thread_local std::vector<std::uint64_t> spare_keys;
  std::vector<double> positions = std::move(spare_positions);
  std::vector<std::uint64_t> keys = std::move(spare_keys);
  positions.clear();
  keys.clear();
  std::vector<std::uint32_t> counts;

  if (fast_gaussian(law)) {
    const auto k = static_cast<unsigned>(law.count_param());
    const auto& g = std::get<Gaussian>(law.displacement());
    const double sd = std::sqrt(g.variance);
    positions.resize(parents * k);
    if (keep_keys) keys.resize(parents * k);
    parallel_for(chunks, threads, [&](std::size_t c) {
      const std::size_t b = c * kChunk;
      const std::size_t len = std::min(kChunk, parents - b);
      kernels::gaussian_offspring(snap.keys.data() + b, snap.positions.data() + b, len, k,
                                  g.mean, sd, positions.data() + b * k,
                                  keep_keys ? keys.data() + b * k : nullptr);
    });
    if (annotate) counts.assign(parents, k);
  } else {
    std::vector<ChildBlock> blocks(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
      const std::size_t b = c * kChunk;
      generic_children(law, snap, b, std::min(parents, b + kChunk), keep_keys, blocks[c]);
    });
    std::size_t total = 0;
    for (const auto& bl : blocks) total += bl.positions.size();
    positions.reserve(total);
    if (keep_keys) keys.reserve(total);
    if (annotate) counts.reserve(parents);
    for (auto& bl : blocks) {
      positions.insert(positions.end(), bl.positions.begin(), bl.positions.end());
      if (keep_keys) keys.insert(keys.end(), bl.keys.begin(), bl.keys.end());
      if (annotate) counts.insert(counts.end(), bl.counts.begin(), bl.counts.end());
    }
  }

  if (annotate) {
    std::vector<Annotation> ann;
    annotate_children(snap, counts, positions, ann);
    snap.annotations = std::move(ann);
  }
  std::swap(snap.positions, positions);
  std::swap(snap.keys, keys);
  if (positions.capacity() <= kSpareLimit) spare_positions = std::move(positions);
  if (keys.capacity() <= kSpareLimit) spare_keys = std::move(keys);
  snap.generation += 1;
}

std::size_t prune(PopulationSnapshot& snap, const Pruning& pruning,
                  std::optional<std::size_t> protect) {
  const std::size_t size = snap.size();
  if (pruning.kind == PruningKind::None || size == 0) return 0;
  std::vector<char> keep(size, 1);
  if (pruning.kind == PruningKind::Window) {
    const double floor = max_of(snap) - pruning.width;
    for (std::size_t i = 0; i < size; ++i) keep[i] = snap.positions[i] >= floor;
  } else {
    if (size <= pruning.k) return 0;
    std::vector<std::size_t> order(size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto higher = [&](std::size_t a, std::size_t b) {
      if (snap.positions[a] != snap.positions[b]) return snap.positions[a] > snap.positions[b];
      return a < b;
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pruning.k),
                     order.end(), higher);
    std::fill(keep.begin(), keep.end(), 0);
    for (std::size_t j = 0; j < pruning.k; ++j) keep[order[j]] = 1;
  }
  if (protect && *protect < size) keep[*protect] = 1;
  const auto kept = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 1));
  if (kept == size) return 0;
  compact(snap.positions, keep);
  compact(snap.keys, keep);
  compact(snap.annotations, keep);
  snap.pruned = true;
  return size - kept;
}

SimulationResult simulate(const SimulationPlan& plan) {
  plan.validate();
  SimulationResult res;
  PopulationSnapshot snap = initial_snapshot(plan);
  res.summaries.push_back({0, 1, 0.0, 0.0});
  for (long g = 0; g < plan.n; ++g) {
    const ReproductionLaw& law = plan.law_for(g);
    if (plan.pruning.kind == PruningKind::None && law.family() == CountFamily::Deterministic &&
        static_cast<double>(snap.size()) * law.count_param() >
            static_cast<double>(plan.memory_budget)) {
      throw BudgetExceeded("population would exceed the memory budget of " +
                               std::to_string(plan.memory_budget) + " particles",
                           static_cast<std::size_t>(g + 1),
                           static_cast<std::size_t>(static_cast<double>(snap.size()) *
                                                    law.count_param()));
    }
    reproduce(law, snap, plan.threads);
    if (snap.size() == 0) {
      throw ExtinctionError("population died out at generation " + std::to_string(g + 1));
    }
    prune(snap, plan.pruning);
    if (snap.size() > plan.memory_budget) {
      throw BudgetExceeded("population exceeds the memory budget of " +
                               std::to_string(plan.memory_budget) + " particles",
                           static_cast<std::size_t>(g + 1), snap.size());
    }
    const auto [mn, mx] = std::minmax_element(snap.positions.begin(), snap.positions.end());
    res.summaries.push_back({g + 1, snap.size(), *mx, *mn});
  }
  res.final = std::move(snap);
  return res;
}

void for_each_leaf_block(const SimulationPlan& plan,
                         const std::function<void(std::span<const double>)>& sink) {
  plan.validate();
  if (plan.pruning.kind != PruningKind::None) {
    throw ParameterError("leaf streaming needs an unpruned plan");
  }
  // Split generation: subtrees rooted there hold about kSubtreeLeaves leaves.
  long split = plan.n;
  double expected = 1.0;
  while (split > 0) {
    const double m = plan.law_for(split - 1).mean_offspring();
    if (expected * m > kSubtreeLeaves) break;
    expected *= m;
    --split;
  }
  SimulationPlan head = plan;
  head.annotations.reset();
  PopulationSnapshot top = initial_snapshot(head);
  for (long g = 0; g < split; ++g) {
    reproduce(plan.law_for(g), top, plan.threads);
    if (top.size() == 0) throw ExtinctionError("population died out");
    if (top.size() > plan.memory_budget) {
      throw BudgetExceeded("streaming head exceeds the memory budget",
                           static_cast<std::size_t>(g + 1), top.size());
    }
  }
  if (split == plan.n) {
    sink(top.positions);
    return;
  }
  PopulationSnapshot sub;
  for (std::size_t i = 0; i < top.size(); ++i) {
    sub.generation = split;
    sub.positions.assign(1, top.positions[i]);
    sub.keys.assign(1, top.keys[i]);
    for (long g = split; g < plan.n; ++g) {
      reproduce(plan.law_for(g), sub, 1, g + 1 < plan.n);
      if (sub.size() > plan.memory_budget) {
        throw BudgetExceeded("subtree exceeds the memory budget",
                             static_cast<std::size_t>(g + 1), sub.size());
      }
    }
    if (!sub.positions.empty()) sink(sub.positions);
  }
}

double max_of(const PopulationSnapshot& snap) {
  if (snap.positions.empty()) throw DomainError("max of an empty population");
  return *std::max_element(snap.positions.begin(), snap.positions.end());
}

PointSample extremal_points(const PopulationSnapshot& snap, double m_n, double cutoff) {
  if (!std::isfinite(cutoff)) throw DomainError("extremal cutoff must be finite");
  PointSample ps;
  ps.origin = SampleOrigin::ExtremalProcess;
  ps.lower_edge = cutoff;
  ps.reference = m_n;
  ps.n = snap.generation;
  ps.population = snap.size();
  for (double v : snap.positions) {
    const double c = v - m_n;
    if (c >= cutoff) ps.points.push_back(c);
  }
  std::sort(ps.points.begin(), ps.points.end(), std::greater<>());
  return ps;
}

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

}  // namespace

void write_positions(std::ostream& out, std::span<const double> positions) {
  const std::uint64_t n = to_le(positions.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (double x : positions) {
    const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(x));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

std::vector<double> read_positions(std::istream& in) {
  std::uint64_t n = 0;
  if (!in.read(reinterpret_cast<char*>(&n), sizeof n)) {
    throw DomainError("positions dump: missing length prefix");
  }
  n = to_le(n);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
      throw DomainError("positions dump: truncated payload");
    }
    out.push_back(std::bit_cast<double>(to_le(bits)));
  }
  return out;
}

}  // namespace brw
