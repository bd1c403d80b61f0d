// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "brw/error.hpp"
#include "brw/spine.hpp"
#include "brw/stats.hpp"

using namespace brw;

namespace {
ReproductionLaw pm_one() { return ReproductionLaw::finite_atomic({{1.0, {1.0, -1.0}}}); }
}  // namespace

TEST_CASE("spine walks") {
  Stream rng(1);
  const SpineWalk w = sample_spine_walk(ReproductionLaw::single_child_at(1.0), 0.7, 5, rng);
  CHECK(w.positions == std::vector<double>{0, 1, 2, 3, 4, 5});
  std::vector<double> s;
  for (int i = 0; i < 10000; ++i) {
    s.push_back(sample_spine_walk(ReproductionLaw::binary_gaussian(), 1.0, 20, rng).positions.back() / 20.0);
  }
  const MeanEstimate m = mean_estimate(s);
  CHECK(std::fabs(m.mean - 1.0) < 4 * m.std_error);
  std::vector<double> s1;
  for (int i = 0; i < 100000; ++i) s1.push_back(sample_spine_walk(pm_one(), 1.0, 1, rng).positions.back());
  const MeanEstimate m1 = mean_estimate(s1);
  CHECK(std::fabs(m1.mean - std::tanh(1.0)) < 4 * m1.std_error);
}

TEST_CASE("spine child selection") {
  Stream rng(2);
  int up = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    const SpineStep st = sample_spine_step(pm_one(), 1.0, rng);
    up += st.offspring[st.chosen] > 0;
  }
  const double p = std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0));
  CHECK(std::fabs(up / double(trials) - p) < 4 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("spined tree") {
  Stream rng(3);
  const SpinedTree t = sample_spined_tree(ReproductionLaw::single_child_at(0.0), 1.0, 6, rng);
  CHECK(t.snapshot.size() == 1);
  CHECK(t.spine_index == 0);
  Stream r2(4);
  const SpinedTree g = sample_spined_tree(ReproductionLaw::binary_gaussian(), 0.5, 8, r2);
  CHECK(g.snapshot.size() == 256);
  CHECK(g.snapshot.positions[g.spine_index] == g.spine_positions.positions.back());
  Stream r3(5);
  const SpinedTree pr = sample_spined_tree(ReproductionLaw::binary_gaussian(), 0.5, 8, r3, Pruning::top_k(3));
  CHECK(pr.snapshot.size() <= 3);
  CHECK(pr.snapshot.positions[pr.spine_index] == pr.spine_positions.positions.back());

  std::vector<double> a;
  std::vector<double> b;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    Stream x(derive_key(10, i));
    a.push_back(sample_spined_tree(ReproductionLaw::binary_gaussian(), 0.5, 6, x).spine_positions.positions.back());
    Stream y(derive_key(11, i));
    b.push_back(sample_spine_walk(ReproductionLaw::binary_gaussian(), 0.5, 6, y).positions.back());
  }
  CHECK(ks_distance(EmpiricalCdf(a), EmpiricalCdf(b)) < 0.02);
}

TEST_CASE("many-to-one") {
  const auto law = pm_one();
  for (const PathFunctional& g : {PathFunctional::constant(1.0), PathFunctional::endpoint_box(0.0, INFINITY),
                                  PathFunctional::path_box(-1.5, 2.5)}) {
    const auto [l, r] = many_to_one_exact(law, 1.0, 3, g);
    CHECK(std::fabs(l - r) <= 1e-12 * std::max(1.0, std::fabs(l)));
  }
  CHECK(many_to_one_exact(law, 1.0, 3, PathFunctional::constant(1.0)).first == doctest::Approx(8.0));
  const ManyToOneResult z = many_to_one_check(ReproductionLaw::single_child_at(1.0), 1.0, 3,
                                              PathFunctional::endpoint_box(-INFINITY, 0.0), 100, 1);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
  const ManyToOneResult g = many_to_one_check(ReproductionLaw::binary_gaussian(), 1.0, 8,
                                              PathFunctional::endpoint_gaussian_bump(8.0, 1.0), 20000, 2);
  CHECK(std::fabs(g.lhs - g.rhs) <= 4 * g.pooled_std_error);
  CHECK_THROWS_AS(many_to_one_exact(ReproductionLaw::binary_gaussian(), 1.0, 3, PathFunctional::constant(1)),
                  DomainError);
}
