// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "brw/laws.hpp"
#include "brw/params.hpp"
#include "brw/point_sample.hpp"

namespace brw {

enum class PruningKind { None, TopK, Window };

struct Pruning {
  PruningKind kind = PruningKind::None;
  std::size_t k = 0;   ///< TopK
  double width = 0.0;  ///< Window: keep particles within `width` of the current max

  static Pruning none() { return {}; }
  static Pruning top_k(std::size_t k) { return {PruningKind::TopK, k, 0.0}; }
  static Pruning window(double w) { return {PruningKind::Window, 0, w}; }
  std::string describe() const;
};

/// Constants of the truncation sets. The sibling and path excesses below are
/// measured with these values.
struct AnnotationParams {
  double theta = 0.0;
  double kappa_prime = 0.0;
  double L = 0.0;
  double a = 0.0;

  /// a = (kappa - theta kappa') / 4, L = a / theta.
  static AnnotationParams defaults(const ReproductionLaw& law, double theta);
};

struct Annotation {
  /// max over 1 <= k <= g of V(u_k) - kappa' k - L k (-inf at the root).
  double path_max_excess;
  /// max over 0 <= k < g of log sum_i exp(theta (V(u_k i) - V(u_k))) - a (k + 1).
  double sibling_weight_excess;
};

struct PopulationSnapshot {
  long generation = 0;
  std::vector<double> positions;
  std::vector<std::uint64_t> keys;
  std::vector<Annotation> annotations;  ///< empty unless annotation_params is set
  std::optional<AnnotationParams> annotation_params;
  bool pruned = false;

  std::size_t size() const { return positions.size(); }
};

struct GenerationSummary {
  long generation = 0;
  std::size_t population = 0;
  double max = 0.0;
  double min = 0.0;
};

struct SimulationPlan {
  /// A homogeneous law or a two-speed specification.
  std::variant<ReproductionLaw, RegimeSpec> model = ReproductionLaw::binary_gaussian();
  long n = 1;
  Pruning pruning;
  std::optional<AnnotationParams> annotations;
  std::uint64_t master_seed = 0;
  std::uint64_t replicate = 0;
  std::size_t memory_budget = std::size_t{1} << 26;
  unsigned threads = 1;

  /// Throws ParameterError on an invalid horizon or pruning parameter.
  void validate() const;
  /// Generation at which law2 takes over (n for a homogeneous model).
  long switch_generation() const;
  /// Law used by the particles of generation g to produce generation g + 1.
  const ReproductionLaw& law_for(long g) const;
  std::uint64_t root_key() const;
};

struct SimulationResult {
  PopulationSnapshot final;
  std::vector<GenerationSummary> summaries;  ///< generations 0..n
};

/// Generation-0 snapshot: one particle at 0.
PopulationSnapshot initial_snapshot(const SimulationPlan& plan);

/// Replaces `snap` by its children (no pruning). Every child is its parent's
/// position plus one offspring displacement, in label order.
void reproduce(const ReproductionLaw& law, PopulationSnapshot& snap, unsigned threads = 1,
               bool keep_keys = true);

/// Applies a pruning policy; `protect` is an index that must survive.
/// Returns the number of particles removed.
std::size_t prune(PopulationSnapshot& snap, const Pruning& pruning,
                  std::optional<std::size_t> protect = std::nullopt);

/// Runs a plan to its horizon. Throws BudgetExceeded, ExtinctionError.
SimulationResult simulate(const SimulationPlan& plan);

/// Runs an unpruned plan without storing generation n: the final positions
/// are handed to `sink` in label order, in several consecutive spans when the
/// tree is large. Memory stays proportional to the budget of one subtree.
void for_each_leaf_block(const SimulationPlan& plan,
                         const std::function<void(std::span<const double>)>& sink);

double max_of(const PopulationSnapshot& snap);

/// Centered positions V - m_n that are >= cutoff, non-increasing.
PointSample extremal_points(const PopulationSnapshot& snap, double m_n, double cutoff);

/// Little-endian u64 count followed by the positions as f64.
void write_positions(std::ostream& out, std::span<const double> positions);
std::vector<double> read_positions(std::istream& in);

}  // namespace brw
