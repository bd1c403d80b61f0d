// SPDX-FileCopyrightText: 2026 brwlab contributors
// SPDX-License-Identifier: Apache-2.0

#include "brw/martingales.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "brw/error.hpp"
#include "brw/kernels.hpp"
#include "brw/params.hpp"

namespace brw {

namespace {

constexpr std::size_t kReduceChunk = 4096;

void require_unpruned(const PopulationSnapshot& snap) {
  if (snap.pruned) {
    throw MartingaleBiasError("martingale functionals need an unpruned snapshot");
  }
}

bool close(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)); }

}  // namespace

std::string_view to_string(MartingaleKind k) {
  switch (k) {
    case MartingaleKind::Additive:
      return "additive";
    case MartingaleKind::Derivative:
      return "derivative";
    case MartingaleKind::CltFunctional:
      return "clt";
    case MartingaleKind::TruncatedCltFunctional:
      return "truncated-clt";
  }
  return "?";
}

TestFunction TestFunction::constant(double c) {
  if (!std::isfinite(c)) throw ParameterError("constant test function must be finite");
  return {Family::Constant, c, 0.0, 0.0};
}

TestFunction TestFunction::ramp(double lo, double hi, double height) {
  if (!(lo < hi) || !std::isfinite(height)) throw ParameterError("ramp needs lo < hi");
  return {Family::Ramp, lo, hi, height};
}

TestFunction TestFunction::cosine_bump(double centre, double half_width, double height) {
  if (!(half_width > 0.0) || !std::isfinite(height)) {
    throw ParameterError("cosine bump needs a positive half width");
  }
  return {Family::CosineBump, centre, half_width, height};
}

double TestFunction::operator()(double x) const {
  switch (family_) {
    case Family::Constant:
      return p0_;
    case Family::Ramp:
      return p2_ * std::clamp((x - p0_) / (p1_ - p0_), 0.0, 1.0);
    case Family::CosineBump: {
      const double u = (x - p0_) / p1_;
      return std::fabs(u) < 1.0 ? 0.5 * p2_ * (1.0 + std::cos(std::numbers::pi * u)) : 0.0;
    }
  }
  return 0.0;
}

void TestFunction::evaluate(std::span<const double> x, double centre, double scale,
                            double* out) const {
  const std::size_t n = x.size();
  switch (family_) {
    case Family::Constant:
      std::fill(out, out + n, p0_);
      return;
    case Family::Ramp: {
      const double lo = p0_;
      const double width = p1_ - p0_;
      const double h = p2_;
      for (std::size_t i = 0; i < n; ++i) {
        const double u = (x[i] - centre) * scale;
        out[i] = h * std::clamp((u - lo) / width, 0.0, 1.0);
      }
      return;
    }
    case Family::CosineBump:
      for (std::size_t i = 0; i < n; ++i) out[i] = (*this)((x[i] - centre) * scale);
      return;
  }
}

double TestFunction::sup_norm() const {
  return family_ == Family::Constant ? std::fabs(p0_) : std::fabs(p2_);
}

bool TestFunction::non_negative() const {
  return family_ == Family::Constant ? p0_ >= 0.0 : p2_ >= 0.0;
}

std::string TestFunction::id() const {
  std::ostringstream s;
  s.precision(17);
  switch (family_) {
    case Family::Constant:
      s << "constant(" << p0_ << ")";
      break;
    case Family::Ramp:
      s << "ramp(" << p0_ << "," << p1_ << "," << p2_ << ")";
      break;
    case Family::CosineBump:
      s << "cosine-bump(" << p0_ << "," << p1_ << "," << p2_ << ")";
      break;
  }
  return s.str();
}

LeafReducer::LeafReducer(long n, double theta, double kappa, double kappa_prime,
                         std::optional<TestFunction> f, bool derivative)
    : n_(static_cast<double>(n)),
      theta_(theta),
      shift_(-static_cast<double>(n) * kappa),
      centre_(static_cast<double>(n) * kappa_prime),
      scale_(n > 0 ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0),
      f_(std::move(f)),
      derivative_(derivative),
      buf_(kReduceChunk),
      aux_(kReduceChunk) {}

void LeafReducer::consume(std::span<const double> positions) {
  for (std::size_t b = 0; b < positions.size(); b += kReduceChunk) {
    const std::size_t len = std::min(kReduceChunk, positions.size() - b);
    const double* x = positions.data() + b;
    kernels::exp_affine(x, len, theta_, shift_, buf_.data());
    w_.add(std::span<const double>(buf_.data(), len));
    if (derivative_) {
      for (std::size_t i = 0; i < len; ++i) aux_[i] = (centre_ - x[i]) * buf_[i];
      d_.add(std::span<const double>(aux_.data(), len));
    }
    if (f_) {
      f_->evaluate(std::span<const double>(x, len), centre_, scale_, aux_.data());
      for (std::size_t i = 0; i < len; ++i) aux_[i] *= buf_[i];
      c_.add(std::span<const double>(aux_.data(), len));
    }
    count_ += len;
  }
}

MartingaleValue additive_martingale(const PopulationSnapshot& snap, double theta, double kappa) {
  require_unpruned(snap);
  LeafReducer r(snap.generation, theta, kappa, 0.0);
  r.consume(snap.positions);
  return {MartingaleKind::Additive, snap.generation, theta, r.additive(), {}, {}};
}

MartingaleValue derivative_martingale(const PopulationSnapshot& snap, double theta_star,
                                      double kappa) {
  require_unpruned(snap);
  if (!(theta_star > 0.0)) throw DomainError("derivative martingale needs theta* > 0");
  LeafReducer r(snap.generation, theta_star, kappa, kappa / theta_star, std::nullopt, true);
  r.consume(snap.positions);
  return {MartingaleKind::Derivative, snap.generation, theta_star, r.derivative(), {}, {}};
}

MartingaleValue derivative_martingale(const PopulationSnapshot& snap, const ReproductionLaw& law) {
  const auto ts = solve_theta_star(law);
  if (!ts) throw DomainError("the law has no critical tilt theta*");
  const TiltParams tp = kappa_derivatives(law, *ts);
  return derivative_martingale(snap, *ts, tp.kappa);
}

MartingaleValue clt_functional(const PopulationSnapshot& snap, double theta, double kappa,
                               double kappa_prime, const CltSpec& spec) {
  require_unpruned(snap);
  LeafReducer r(snap.generation, theta, kappa, kappa_prime, spec.f);
  r.consume(snap.positions);
  return {MartingaleKind::CltFunctional, snap.generation, theta, r.clt(), {}, spec.f.id()};
}

MartingaleValue truncated_clt_functional(const PopulationSnapshot& snap, double theta,
                                         double kappa, double kappa_prime, const CltSpec& spec,
                                         const Truncation& trunc) {
  require_unpruned(snap);
  if (!snap.annotation_params || snap.annotations.size() != snap.size()) {
    throw ContractError("truncated CLT functional needs trajectory annotations");
  }
  const AnnotationParams& ap = *snap.annotation_params;
  if (!close(ap.theta, theta) || !close(ap.kappa_prime, kappa_prime) || !close(ap.a, trunc.a) ||
      !close(ap.L, trunc.L)) {
    throw ContractError("annotations were recorded with different (theta, kappa', a, L)");
  }
  if (!(trunc.a + theta * trunc.L + theta * kappa_prime - kappa < 0.0)) {
    throw ParameterError("truncation needs a + theta L + theta kappa' - kappa < 0");
  }
  const double log_a = trunc.A > 0.0 ? std::log(trunc.A) : -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(snap.generation);
  const double centre = n * kappa_prime;
  const double scale = snap.generation > 0 ? 1.0 / std::sqrt(n) : 1.0;
  std::vector<double> w(snap.size());
  kernels::exp_affine(snap.positions.data(), snap.size(), theta, -n * kappa, w.data());
  BlockedSum sum;
  for (std::size_t i = 0; i < snap.size(); ++i) {
    const Annotation& an = snap.annotations[i];
    const bool member = trunc.A > 0.0 && an.path_max_excess <= trunc.A &&
                        an.sibling_weight_excess < log_a;
    sum.add(member ? w[i] * spec.f((snap.positions[i] - centre) * scale) : 0.0);
  }
  return {MartingaleKind::TruncatedCltFunctional, snap.generation, theta, sum.value(), trunc,
          spec.f.id()};
}

GaussHermite gauss_hermite(int points) {
  if (points < 1) throw ParameterError("Gauss-Hermite needs at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int i = 1; i < points; ++i) {
    const double b = std::sqrt(0.5 * i);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermite gh;
  const double mass = std::sqrt(std::numbers::pi);
  for (int i = 0; i < points; ++i) {
    gh.nodes.push_back(eig.eigenvalues()(i));
    const double v0 = eig.eigenvectors()(0, i);
    gh.weights.push_back(mass * v0 * v0);
  }
  return gh;
}

double gaussian_expectation(const TestFunction& f, double variance) {
  if (!(variance > 0.0)) throw ParameterError("Gaussian variance must be positive");
  static const GaussHermite gh = gauss_hermite(41);
  const double s = std::sqrt(2.0 * variance);
  NeumaierSum acc;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) acc.add(gh.weights[i] * f(s * gh.nodes[i]));
  return acc.value() / std::sqrt(std::numbers::pi);
}

}  // namespace brw
