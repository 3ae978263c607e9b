#include "osnr/problems.hpp"

#include <cmath>

#include "osnr/errors.hpp"
#include "osnr/kernels.hpp"

namespace osnr {

double OnlineVectorField::loss(const Eigen::VectorXd&) {
  raise(ErrorKind::invalid_argument, "this field does not define a round loss");
}

Eigen::VectorXd OnlineVectorField::loss_gradient(const Eigen::VectorXd& x) {
  Eigen::VectorXd F;
  Eigen::MatrixXd DF;
  eval(x, F, DF);
  if (mode() == FieldMode::gradient_field) return F;
  return 2.0 * (DF * F);
}

TargetTrackingProblem::TargetTrackingProblem(int n, int m, SeedStream& rng,
                                             double scale)
    : n_(n), m_(m), scale_(scale) {
  if (n < 1 || m < 1) {
    raise(ErrorKind::invalid_argument, "tracking: n and m must be >= 1");
  }
  sensors_.resize(n_, m_);
  for (int j = 0; j < m_; ++j) {
    for (int i = 0; i < n_; ++i) sensors_(i, j) = scale_ * rng.normal();
  }
  target_.resize(n_);
  for (int i = 0; i < n_; ++i) target_[i] = scale_ * rng.normal();
  refresh_distances();
}

TargetTrackingProblem tracking_new(int n, int m, std::uint64_t seed,
                                   double scale) {
  SeedStream rng(seed);
  return TargetTrackingProblem(n, m, rng, scale);
}

void TargetTrackingProblem::refresh_distances() {
  dist_.resize(m_);
  for (int j = 0; j < m_; ++j) {
    dist_[j] = std::sqrt(kernels::diff_nrm2_sq(
        target_.data(), sensors_.col(j).data(), static_cast<std::size_t>(n_)));
  }
}

void TargetTrackingProblem::eval(const Eigen::VectorXd& x, Eigen::VectorXd& F,
                                 Eigen::MatrixXd& DF) {
  if (x.size() != n_) {
    raise(ErrorKind::invalid_argument, "tracking eval: wrong decision dimension");
  }
  F.resize(m_);
  DF.resize(n_, m_);
  const auto n = static_cast<std::size_t>(n_);
  for (int j = 0; j < m_; ++j) {
    const double* a = sensors_.col(j).data();
    const double r = std::sqrt(kernels::diff_nrm2_sq(x.data(), a, n));
    F[j] = r - dist_[j];
    if (r < 1e-9) {
      // Singularity guard: the direction is undefined at a sensor; report a
      // zero column and count the event.
      DF.col(j).setZero();
      ++guards_;
    } else {
      kernels::scaled_diff(x.data(), a, 1.0 / r, DF.col(j).data(), n);
    }
  }
}

double TargetTrackingProblem::loss(const Eigen::VectorXd& x) {
  double acc = 0.0;
  const auto n = static_cast<std::size_t>(n_);
  for (int j = 0; j < m_; ++j) {
    const double r =
        std::sqrt(kernels::diff_nrm2_sq(x.data(), sensors_.col(j).data(), n));
    const double e = r - dist_[j];
    acc += e * e;
  }
  return acc;
}

Eigen::VectorXd TargetTrackingProblem::loss_gradient(const Eigen::VectorXd& x) {
  Eigen::VectorXd F;
  Eigen::MatrixXd DF;
  eval(x, F, DF);
  return 2.0 * (DF * F);
}

void TargetTrackingProblem::advance(SeedStream& rng) {
  const double step = scale_ / std::sqrt(static_cast<double>(t_));
  for (int i = 0; i < n_; ++i) target_[i] += step * rng.normal();
  refresh_distances();
  ++t_;
}

AffineResidualField::AffineResidualField(Eigen::MatrixXd W,
                                         Eigen::VectorXd x_star,
                                         double drift_scale)
    : w_(std::move(W)), x_star_(std::move(x_star)), drift_(drift_scale) {
  if (w_.cols() != x_star_.size()) {
    raise(ErrorKind::invalid_argument, "affine field: W and x_star disagree");
  }
  wt_ = w_.transpose();
}

void AffineResidualField::eval(const Eigen::VectorXd& x, Eigen::VectorXd& F,
                               Eigen::MatrixXd& DF) {
  F = w_ * (x - x_star_);
  DF = wt_;
}

double AffineResidualField::loss(const Eigen::VectorXd& x) {
  return (w_ * (x - x_star_)).squaredNorm();
}

void AffineResidualField::advance(SeedStream& rng) {
  if (drift_ != 0.0) {
    const double step = drift_ / std::sqrt(static_cast<double>(t_));
    for (Eigen::Index i = 0; i < x_star_.size(); ++i) {
      x_star_[i] += step * rng.normal();
    }
  }
  ++t_;
}

}  // namespace osnr
