// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace brw {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parameters violate a documented inequality or range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge or a root does not exist.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  double bracket_lo() const { return lo_; }
  double bracket_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// The configuration is mathematically meaningful but not supported here
/// (for instance a law without a critical tilt).
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

/// The particle-count cap of a simulation plan was exceeded.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, std::size_t generation,
                 std::size_t population)
      : Error(what), generation_(generation), population_(population) {}
  std::size_t generation() const { return generation_; }
  std::size_t population() const { return population_; }

 private:
  std::size_t generation_;
  std::size_t population_;
};

/// The population died out (only possible for laws with P(no child) > 0).
class ExtinctionError : public Error {
 public:
  using Error::Error;
};

/// A martingale functional was requested on a pruned snapshot.
class MartingaleBiasError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an API contract (missing annotations and similar).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A sampler ran out of its attempt budget.
class SamplingFailure : public Error {
 public:
  SamplingFailure(const std::string& what, double bound)
      : Error(what), bound_(bound) {}
  double attempted_bound() const { return bound_; }

 private:
  double bound_;
};

/// A Laplace functional would see points outside the sampled window.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// The fit profile has several separated minima.
class FitAmbiguity : public Error {
 public:
  using Error::Error;
};

/// Conditional sampling stopped before reaching its target.
class PartialResult : public Error {
 public:
  PartialResult(const std::string& what, std::size_t accepted, double rate)
      : Error(what), accepted_(accepted), rate_(rate) {}
  std::size_t accepted() const { return accepted_; }
  double rate_estimate() const { return rate_; }

 private:
  std::size_t accepted_;
  double rate_;
};

/// Statistical input is too thin for the requested estimate.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace brw
