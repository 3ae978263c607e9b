#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "osnr/affine.hpp"
#include "osnr/problems.hpp"

namespace osnr {

/// Sketch size, either absolute or as a fraction rho of the output
/// dimension: tau = floor(rho * m), clamped to [1, m].
struct SketchSpec {
  int tau = 0;       // > 0 takes precedence over rho
  double rho = 1.0;

  static SketchSpec by_count(int t) {
    SketchSpec s;
    s.tau = t;
    return s;
  }
  static SketchSpec by_fraction(double r) {
    SketchSpec s;
    s.rho = r;
    return s;
  }
  int resolve(int m) const;
};

enum class Algorithm { osnr, osnr_ec, ogd, onm };

std::string algorithm_name(Algorithm a);

struct RunConfig {
  int T = 0;
  SketchSpec sketch{};
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::osnr;
  double eta = 0.0;  // ogd step size; 0 selects the default 1/(15 sqrt(T))
  bool record_decisions = false;
  int steps_per_round = 1;  // > 1 available but not part of the benchmarks
};

/// Everything one seeded run produces. All per-round vectors have length T.
/// Wall-times are the only non-reproducible entries and are therefore kept
/// out of the deterministic result files.
struct TrajectoryRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::string config_echo;
  int rounds = 0;

  std::vector<double> loss;            // g_t(x_t); NaN when the problem has none
  std::vector<double> residual_norm;   // |F_t(x_t)| (reduced-gradient norm for EC)
  std::vector<double> violation_norm;  // |A x_t - b_t|; constrained runs only
  std::vector<double> b_delta_norm;    // |b_t - b_{t-1}|; constrained runs only
  std::vector<double> b_norm;          // |b_t|; constrained runs only
  std::vector<double> oracle_loss;     // observer-supplied g_t(x_t*); else empty
  std::vector<double> step_seconds;    // per-round update wall-time
  std::vector<int> gram_rank;
  std::vector<Eigen::VectorXd> decisions;  // implemented x_t when recording
  Eigen::VectorXd final_decision;          // iterate after the last update
  int singular_guards = 0;
};

/// Per-round hook invoked after the decision is implemented and the round
/// data revealed, before the update. May return the round-optimal loss
/// g_t(x_t*) for dynamic-regret accounting.
struct RoundView {
  int round = 0;
  const Eigen::VectorXd* decision = nullptr;
  double loss = 0.0;
  const Eigen::VectorXd* b = nullptr;  // constrained runs only
};
using RoundObserver = std::function<std::optional<double>(const RoundView&)>;

/// Online sketched Newton-Raphson. Per round: implement x_t, observe
/// F_t(x_t) and DF_t(x_t), sample a fresh selector, subtract the sketched
/// step, advance the environment. x_1 is the received start point; the first
/// update produces x_2.
TrajectoryRecord osnr_run(OnlineVectorField& problem, const RunConfig& cfg,
                          const Eigen::VectorXd& x0,
                          const RoundObserver& observer = {});

/// Equality-constrained variant. Per round: observe b_t, project onto
/// {A x = b_t}, take one sketched step of the reduced field evaluated at the
/// projected anchor, lift back along the null-space basis. Iterates are
/// feasible for the last observed right-hand side, so the recorded violation
/// equals |b_t - b_{t-1}|.
TrajectoryRecord osnr_ec_run(ConstrainedGradientProblem& problem,
                             const AffineConstraintSet& cs, const RunConfig& cfg,
                             const Eigen::VectorXd& x0,
                             const RoundObserver& observer = {});

/// Online gradient descent baseline: x_{t+1} = x_t - eta * grad g_t(x_t),
/// no projection.
TrajectoryRecord ogd_run(OnlineVectorField& problem, const RunConfig& cfg,
                         const Eigen::VectorXd& x0,
                         const RoundObserver& observer = {});

/// Rewrite an `onm` config to the full-information sketch: osnr with
/// tau = output_dim (osnr_ec with tau = n - k when constrained). Non-onm
/// configs pass through unchanged, so resolving is idempotent.
RunConfig resolve_onm(const RunConfig& cfg, int output_dim,
                      bool constrained = false);

double default_ogd_eta(int T);

}  // namespace osnr
