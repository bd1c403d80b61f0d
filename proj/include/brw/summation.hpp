// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace brw {

/// Neumaier's improved Kahan summation.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Compensated sum over a sequence, split into fixed blocks of kBlock terms.
/// Inside a block the terms are spread over kLanes independent Neumaier
/// accumulators by position; blocks are then combined in order. The result
/// depends only on the sequence, not on how it is fed in.
class BlockedSum {
 public:
  static constexpr std::size_t kBlock = 4096;
  static constexpr std::size_t kLanes = 8;

  void add(double x) { add(std::span<const double>(&x, 1)); }

  void add(std::span<const double> xs) {
    const double* x = xs.data();
    std::size_t left = xs.size();
    while (left > 0) {
      // Scalar steps up to a lane boundary, whole lane groups, then the rest.
      while (left > 0 && pos_ % kLanes != 0) {
        step(pos_ % kLanes, *x++);
        --left;
        advance(1);
      }
      std::size_t groups = std::min(left, kBlock - pos_) / kLanes;
      while (groups > 0) {
        for (std::size_t l = 0; l < kLanes; ++l) step(l, x[l]);
        x += kLanes;
        left -= kLanes;
        --groups;
        advance(kLanes);
      }
      if (left > 0 && left < kLanes) {
        while (left > 0) {
          step(pos_ % kLanes, *x++);
          --left;
          advance(1);
        }
      }
    }
  }

  double value() const {
    NeumaierSum total = outer_;
    if (pos_ > 0) total.add(block_value());
    return total.value();
  }

 private:
  double block_value() const {
    NeumaierSum s;
    for (std::size_t l = 0; l < kLanes; ++l) s.add(sum_[l]);
    for (std::size_t l = 0; l < kLanes; ++l) s.add(comp_[l]);
    return s.value();
  }
  void step(std::size_t lane, double x) {
    const double s = sum_[lane];
    const double t = s + x;
    const double big = (s - t) + x;
    const double small = (x - t) + s;
    comp_[lane] += std::fabs(s) >= std::fabs(x) ? big : small;
    sum_[lane] = t;
  }
  void advance(std::size_t k) {
    pos_ += k;
    if (pos_ == kBlock) flush();
  }
  void flush() {
    outer_.add(block_value());
    sum_.fill(0.0);
    comp_.fill(0.0);
    pos_ = 0;
  }

  std::array<double, kLanes> sum_{};
  std::array<double, kLanes> comp_{};
  std::size_t pos_ = 0;
  NeumaierSum outer_;
};

}  // namespace brw
