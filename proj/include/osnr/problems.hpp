#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "osnr/rng.hpp"

namespace osnr {

enum class FieldMode {
  root_finding,    // F_t : R^n -> R^m, seek zeros
  gradient_field,  // F_t = grad g_t, m = n, DF_t = hess g_t (symmetric)
};

/// A time-varying vector field observed one round at a time. `eval` reports
/// the outcome F_t(x) together with DF_t(x), the n x m matrix whose column i
/// is the gradient of output i. `advance` moves the environment to the next
/// round using the caller-owned stream.
class OnlineVectorField {
 public:
  virtual ~OnlineVectorField() = default;

  virtual int decision_dim() const = 0;  // n
  virtual int output_dim() const = 0;    // m
  virtual FieldMode mode() const = 0;

  virtual void eval(const Eigen::VectorXd& x, Eigen::VectorXd& F,
                    Eigen::MatrixXd& DF) = 0;

  virtual bool has_loss() const { return false; }
  virtual double loss(const Eigen::VectorXd& x);

  /// Gradient of the round loss; defined whenever has_loss(). Root-finding
  /// problems with loss |F|^2 report 2 DF F; gradient fields report F.
  virtual Eigen::VectorXd loss_gradient(const Eigen::VectorXd& x);

  virtual void advance(SeedStream& rng) = 0;
  virtual int round() const = 0;  // 1-based

  /// Count of singularity guards tripped so far (see TargetTrackingProblem).
  virtual int singular_guard_count() const { return 0; }
};

/// Range-based tracking of a moving target: m fixed sensors at a_i measure
/// exact distances d_i to the target y_t. The residual field
///   F_i(x) = |x - a_i| - d_i
/// has the true target as a zero every round; DF column i is the unit vector
/// (x - a_i)/|x - a_i|. The target moves by scale * N(0,I)/sqrt(t).
class TargetTrackingProblem final : public OnlineVectorField {
 public:
  TargetTrackingProblem(int n, int m, SeedStream& rng, double scale = 20.0);

  int decision_dim() const override { return n_; }
  int output_dim() const override { return m_; }
  FieldMode mode() const override { return FieldMode::root_finding; }

  void eval(const Eigen::VectorXd& x, Eigen::VectorXd& F,
            Eigen::MatrixXd& DF) override;

  bool has_loss() const override { return true; }
  double loss(const Eigen::VectorXd& x) override;  // sum_i F_i(x)^2
  Eigen::VectorXd loss_gradient(const Eigen::VectorXd& x) override;

  void advance(SeedStream& rng) override;
  int round() const override { return t_; }
  int singular_guard_count() const override { return guards_; }

  const Eigen::MatrixXd& sensors() const { return sensors_; }  // n x m
  const Eigen::VectorXd& target() const { return target_; }
  const Eigen::VectorXd& distances() const { return dist_; }

 private:
  void refresh_distances();

  int n_, m_, t_ = 1;
  double scale_;
  Eigen::MatrixXd sensors_;
  Eigen::VectorXd target_;
  Eigen::VectorXd dist_;
  int guards_ = 0;
};

/// Convenience factory with the sampling convention a_i, y_0 ~ scale * N(0, I).
TargetTrackingProblem tracking_new(int n, int m, std::uint64_t seed,
                                   double scale = 20.0);

/// Synthetic residual field F(x) = W (x - x_star) with constant W (m x n).
/// With drift_scale > 0 the zero x_star performs a random walk with
/// per-round scale drift_scale / sqrt(t). Used by the root-demo experiment
/// and the controlled-bound studies.
class AffineResidualField final : public OnlineVectorField {
 public:
  AffineResidualField(Eigen::MatrixXd W, Eigen::VectorXd x_star,
                      double drift_scale = 0.0);

  int decision_dim() const override { return static_cast<int>(w_.cols()); }
  int output_dim() const override { return static_cast<int>(w_.rows()); }
  FieldMode mode() const override { return FieldMode::root_finding; }

  void eval(const Eigen::VectorXd& x, Eigen::VectorXd& F,
            Eigen::MatrixXd& DF) override;
  bool has_loss() const override { return true; }
  double loss(const Eigen::VectorXd& x) override;

  void advance(SeedStream& rng) override;
  int round() const override { return t_; }

  const Eigen::VectorXd& zero() const { return x_star_; }

 private:
  Eigen::MatrixXd w_;    // m x n
  Eigen::MatrixXd wt_;   // n x m, the transposed-Jacobian layout eval returns
  Eigen::VectorXd x_star_;
  double drift_;
  int t_ = 1;
};

/// A round objective subject to A x = b_t with an online right-hand side:
/// what the equality-constrained runner consumes. `rhs` reports the current
/// b_t; `advance` moves the environment (for the power-flow problem, the
/// demand walk).
class ConstrainedGradientProblem {
 public:
  virtual ~ConstrainedGradientProblem() = default;
  virtual int dim() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd rhs() const = 0;
  virtual void advance(SeedStream& rng) = 0;
  virtual int round() const = 0;
};

}  // namespace osnr
