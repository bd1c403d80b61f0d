// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

namespace brw::kernels {

// Batched inner loops compiled with vector math. Work is done in fixed
// batches of kBatch lanes (padding the last one), so every element goes
// through the same instruction sequence and the output does not depend on
// how a caller splits its arrays.

inline constexpr std::size_t kBatch = 64;
inline constexpr unsigned kMaxChildren = 64;

/// Children of `count` parents for a fixed count `k` of Gaussian(mean, sd^2)
/// displacements. Normals come from the parent's counter stream (Box-Muller
/// on draws 1, 2, 3, ...) and each parent's children are written sorted
/// non-increasing at child_positions[i*k .. i*k+k). child_keys may be null.
void gaussian_offspring(const std::uint64_t* keys, const double* positions, std::size_t count,
                        unsigned k, double mean, double sd, double* child_positions,
                        std::uint64_t* child_keys);

/// out[i] = exp(a * x[i] + b).
void exp_affine(const double* x, std::size_t count, double a, double b, double* out);

/// out[i] = sum_t in[i + t] * w[t] for i in [0, out_count).
void correlate(const double* in, std::size_t out_count, const double* w, std::size_t taps,
               double* out);

}  // namespace brw::kernels
