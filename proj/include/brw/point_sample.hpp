// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace brw {

enum class SampleOrigin { ExtremalProcess, Decoration };

/// One realization of a finite point process, stored non-increasing.
struct PointSample {
  std::vector<double> points;
  SampleOrigin origin = SampleOrigin::ExtremalProcess;
  /// Lowest value a point may take; deeper points were not recorded.
  double lower_edge = 0.0;
  /// Extremal process: the centering m_n. Decoration: the threshold.
  double reference = 0.0;
  long n = 0;
  /// Decoration: M_n minus the threshold.
  double overshoot = 0.0;
  /// Generation-n population the sample was read from (0 if unknown).
  std::size_t population = 0;
  double weight = 1.0;
};

}  // namespace brw
