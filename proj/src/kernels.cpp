// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "brw/rng.hpp"

namespace brw::kernels {

namespace {

// One Box-Muller pair per lane from draws j and j + 1 of each key.
void normal_pairs(const std::uint64_t* keys, std::uint64_t j, double* z0, double* z1) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  alignas(64) double u1[kBatch];
  alignas(64) double u2[kBatch];
  for (std::size_t i = 0; i < kBatch; ++i) {
    u1[i] = to_unit_open_low(stream_draw(keys[i], j));
    u2[i] = to_unit_open_low(stream_draw(keys[i], j + 1));
  }
  // Separate loops: a fused sin/cos pair would be lowered to a scalar sincos.
  for (std::size_t i = 0; i < kBatch; ++i) u1[i] = std::sqrt(-2.0 * std::log(u1[i]));
  for (std::size_t i = 0; i < kBatch; ++i) z0[i] = u1[i] * std::cos(two_pi * u2[i]);
  for (std::size_t i = 0; i < kBatch; ++i) z1[i] = u1[i] * std::sin(two_pi * u2[i]);
}

}  // namespace

void gaussian_offspring(const std::uint64_t* keys, const double* positions, std::size_t count,
                        unsigned k, double mean, double sd, double* child_positions,
                        std::uint64_t* child_keys) {
  std::array<std::uint64_t, kMaxChildren> salt{};
  for (unsigned s = 0; s < k; ++s) salt[s] = mix64(kChildSalt * (s + 1));
  const unsigned pairs = (k + 1) / 2;

  alignas(64) std::uint64_t key[kBatch];
  alignas(64) double z[kMaxChildren + 1][kBatch];
  for (std::size_t base = 0; base < count; base += kBatch) {
    const std::size_t len = std::min(kBatch, count - base);
    std::copy_n(keys + base, len, key);
    std::fill(key + len, key + kBatch, 0);
    for (unsigned p = 0; p < pairs; ++p) normal_pairs(key, 2 * p + 1, z[2 * p], z[2 * p + 1]);

    for (std::size_t i = 0; i < len; ++i) {
      double* out = child_positions + (base + i) * k;
      const double x = positions[base + i] + mean;
      if (k == 2) {
        const double a = z[0][i];
        const double b = z[1][i];
        out[0] = x + sd * std::max(a, b);
        out[1] = x + sd * std::min(a, b);
        continue;
      }
      for (unsigned s = 0; s < k; ++s) out[s] = x + sd * z[s][i];
      std::stable_sort(out, out + k, std::greater<>());
    }
    if (child_keys != nullptr) {
      for (unsigned s = 0; s < k; ++s) {
        for (std::size_t i = 0; i < len; ++i) {
          child_keys[(base + i) * k + s] = mix64(key[i] ^ salt[s]);
        }
      }
    }
  }
}

void exp_affine(const double* x, std::size_t count, double a, double b, double* out) {
  alignas(64) double buf[kBatch];
  for (std::size_t base = 0; base < count; base += kBatch) {
    const std::size_t len = std::min(kBatch, count - base);
    std::copy_n(x + base, len, buf);
    std::fill(buf + len, buf + kBatch, 0.0);
    for (std::size_t i = 0; i < kBatch; ++i) buf[i] = std::exp(a * buf[i] + b);
    std::copy_n(buf, len, out + base);
  }
}

void correlate(const double* in, std::size_t out_count, const double* w, std::size_t taps,
               double* out) {
  for (std::size_t i = 0; i < out_count; ++i) {
    const double* row = in + i;
    double acc = 0.0;
    for (std::size_t t = 0; t < taps; ++t) acc += row[t] * w[t];
    out[i] = acc;
  }
}

}  // namespace brw::kernels
