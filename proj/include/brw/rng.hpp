// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace brw {

// Counter-based randomness. Every particle owns a 64-bit key derived from its
// parent key and its child slot, so the numbers a particle draws depend only
// on its genealogical label and never on scheduling or on which other
// particles were pruned.

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kChildSalt = 0xd1b54a32d192ed03ULL;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key of child `slot` of the particle with key `parent`.
constexpr std::uint64_t child_key(std::uint64_t parent, std::uint64_t slot) {
  return mix64(parent ^ mix64(kChildSalt * (slot + 1)));
}

/// Key for an independent named sub-stream (replicate r of a run, etc.).
constexpr std::uint64_t derive_key(std::uint64_t base, std::uint64_t index) {
  return mix64(mix64(base) ^ (index * 0xa0761d6478bd642fULL + 0xe7037ed1a0b428dbULL));
}

/// The j-th raw draw (j >= 1) of the stream with key `key`.
constexpr std::uint64_t stream_draw(std::uint64_t key, std::uint64_t j) {
  return mix64(key + kGolden * j);
}

/// Map 64 random bits to the half-open interval (0, 1].
constexpr double to_unit_open_low(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// A counter-based random stream. Cheap to construct; satisfies
/// UniformRandomBitGenerator so it also drives <random> distributions.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() { return stream_draw(key_, ++counter_); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  /// Uniform on (0, 1].
  double uniform() { return to_unit_open_low((*this)()); }

  /// Standard normal by Box-Muller; the second variate of each pair is kept.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Exponential with rate 1.
  double exponential() { return -std::log(uniform()); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace brw
