#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "osnr/affine.hpp"
#include "osnr/algorithms.hpp"
#include "osnr/rng.hpp"

namespace osnr {

/// Constants of the regret bound L (V + C) / (1 - sqrt(1 - mu)).
/// C applies when the start point is charged one contraction before the
/// first implemented decision; C_hat = |x_1 - x_1*| charges it as played.
struct BoundParameters {
  double mu = 0.0;
  double L = 0.0;
  double C = 0.0;
  double C_hat = 0.0;
};

enum class BoundKind { discounted_start, realized_start };

double theoretical_bound(const BoundParameters& bp, double V,
                         BoundKind kind = BoundKind::discounted_start);

/// Cumulative series of one run; `final_value` is its last entry (0 when T=0).
struct RegretReport {
  std::vector<double> cumulative;
  double final_value = 0.0;
};

/// R0(t): prefix sums of |F_t(x_t)|.
RegretReport regret_zero(const TrajectoryRecord& traj);

/// R(t): prefix sums of g_t(x_t) - g_t(x_t*).
RegretReport regret_dynamic(const TrajectoryRecord& traj,
                            const std::vector<double>& oracle_losses);

/// Vio(t): prefix sums of |A x_t - b_t|.
RegretReport violation(const TrajectoryRecord& traj);

/// Cumulative movement of a point sequence (singleton zero sets only; the
/// quantity is undefined when the round optima form a manifold).
double path_variation(const std::vector<Eigen::VectorXd>& points);

/// Per-round mean and unbiased (N-1) standard deviation across seeds.
struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

enum class Metric { regret_zero, regret_dynamic, violation };

SeriesStats aggregate(const std::vector<TrajectoryRecord>& runs, Metric metric);
SeriesStats aggregate_series(const std::vector<std::vector<double>>& series);

struct OracleResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

/// Solve one frozen round, min g (optionally s.t. A x = b), to gradient norm
/// <= tol by iterated full-sketch Newton steps (reduced steps when
/// constrained), with step halving as a safeguard. Independent of any online
/// run; used only as a reference.
OracleResult round_oracle(const std::function<double(const Eigen::VectorXd&)>& value,
                          const GradFn& grad, const HessFn& hess,
                          const AffineConstraintSet* cs, const Eigen::VectorXd* b,
                          const Eigen::VectorXd& warm, double tol = 1e-10,
                          int max_iter = 100);

using FieldFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&,
                                   Eigen::MatrixXd&)>;

/// Find a zero of a residual field by full-sketch (Gauss-)Newton iterations.
Eigen::VectorXd solve_zero(const FieldFn& field, Eigen::VectorXd x,
                           double tol = 1e-10, int max_iter = 100);

struct MuEstimate {
  double mu = 0.0;
  bool degenerate = false;                 // no positive mu fits the samples
  std::vector<Eigen::VectorXd> witnesses;  // sample points that failed
};

/// Empirical strong quasar-convexity constant of the expected sketched merit
/// function around a known zero x_star: the largest mu in (0, 1] such that
///   0 >= f(x) + grad f(x)^T (x_star - x) + mu/2 |x_star - x|^2
/// holds at every sampled x in the ball of the given radius. The expectation
/// over selectors is enumerated exactly when C(m, tau) <= subset_cap and
/// Monte-Carlo sampled otherwise. A lower estimate for overlays, not ground
/// truth.
MuEstimate estimate_mu(const FieldFn& field, const Eigen::VectorXd& x_star,
                       int m, int tau, double radius, int samples,
                       SeedStream& rng, int subset_cap = 2000);

}  // namespace osnr
