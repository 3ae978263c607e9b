#include "osnr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "osnr/errors.hpp"
#include "osnr/sketch.hpp"

namespace osnr {

namespace {

RegretReport prefix_sums(const std::vector<double>& terms) {
  RegretReport rep;
  rep.cumulative.reserve(terms.size());
  double acc = 0.0;
  for (double v : terms) {
    acc += v;
    rep.cumulative.push_back(acc);
  }
  rep.final_value = acc;
  return rep;
}

SketchSelector full_selector(int m) {
  SketchSelector sel;
  sel.m = m;
  sel.indices.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) sel.indices[static_cast<std::size_t>(i)] = i;
  return sel;
}

}  // namespace

double theoretical_bound(const BoundParameters& bp, double V, BoundKind kind) {
  if (!(bp.mu > 0.0) || !(bp.mu < 1.0)) {
    raise(ErrorKind::invalid_argument,
          "theoretical_bound: mu=" + std::to_string(bp.mu) + " outside (0, 1)");
  }
  if (!(bp.L > 0.0)) {
    raise(ErrorKind::invalid_argument, "theoretical_bound: L must be positive");
  }
  const double c = kind == BoundKind::discounted_start ? bp.C : bp.C_hat;
  return bp.L * (V + c) / (1.0 - std::sqrt(1.0 - bp.mu));
}

RegretReport regret_zero(const TrajectoryRecord& traj) {
  return prefix_sums(traj.residual_norm);
}

RegretReport regret_dynamic(const TrajectoryRecord& traj,
                            const std::vector<double>& oracle_losses) {
  if (oracle_losses.size() != traj.loss.size()) {
    raise(ErrorKind::invalid_argument,
          "regret_dynamic: oracle series length " +
              std::to_string(oracle_losses.size()) + " != trajectory length " +
              std::to_string(traj.loss.size()));
  }
  std::vector<double> gaps(traj.loss.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    gaps[i] = traj.loss[i] - oracle_losses[i];
  }
  return prefix_sums(gaps);
}

RegretReport violation(const TrajectoryRecord& traj) {
  if (traj.rounds > 0 && traj.violation_norm.empty()) {
    raise(ErrorKind::invalid_argument,
          "violation: trajectory carries no violation series (unconstrained run?)");
  }
  return prefix_sums(traj.violation_norm);
}

double path_variation(const std::vector<Eigen::VectorXd>& points) {
  if (points.empty()) {
    raise(ErrorKind::invalid_argument, "path_variation: need at least one point");
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    acc += (points[i] - points[i - 1]).norm();
  }
  return acc;
}

SeriesStats aggregate_series(const std::vector<std::vector<double>>& series) {
  if (series.empty()) {
    raise(ErrorKind::invalid_argument, "aggregate: no runs");
  }
  const std::size_t T = series[0].size();
  for (const auto& s : series) {
    if (s.size() != T) {
      raise(ErrorKind::invalid_argument, "aggregate: runs have different horizons");
    }
  }
  const double N = static_cast<double>(series.size());
  SeriesStats out;
  out.mean.assign(T, 0.0);
  out.stddev.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (const auto& s : series) sum += s[t];
    const double mean = sum / N;
    out.mean[t] = mean;
    if (series.size() > 1) {
      double sq = 0.0;
      for (const auto& s : series) {
        const double d = s[t] - mean;
        sq += d * d;
      }
      out.stddev[t] = std::sqrt(sq / (N - 1.0));
    }
  }
  return out;
}

SeriesStats aggregate(const std::vector<TrajectoryRecord>& runs, Metric metric) {
  std::vector<std::vector<double>> series;
  series.reserve(runs.size());
  for (const TrajectoryRecord& r : runs) {
    switch (metric) {
      case Metric::regret_zero:
        series.push_back(regret_zero(r).cumulative);
        break;
      case Metric::regret_dynamic:
        series.push_back(regret_dynamic(r, r.oracle_loss).cumulative);
        break;
      case Metric::violation:
        series.push_back(violation(r).cumulative);
        break;
    }
  }
  return aggregate_series(series);
}

Eigen::VectorXd solve_zero(const FieldFn& field, Eigen::VectorXd x, double tol,
                           int max_iter) {
  Eigen::VectorXd F;
  Eigen::MatrixXd DF;
  for (int it = 0; it < max_iter; ++it) {
    field(x, F, DF);
    if (F.norm() <= tol) return x;
    const SketchedStepReport rep =
        snr_step(F, DF, full_selector(static_cast<int>(F.size())));
    // Halve the step while it fails to reduce the residual.
    double scale = 1.0;
    Eigen::VectorXd cand;
    Eigen::VectorXd Fc;
    Eigen::MatrixXd DFc;
    const double f0 = F.norm();
    for (int h = 0; h < 30; ++h) {
      cand = x - scale * rep.direction;
      field(cand, Fc, DFc);
      if (Fc.norm() < f0) break;
      scale *= 0.5;
    }
    x = cand;
  }
  field(x, F, DF);
  if (F.norm() <= tol) return x;
  raise(ErrorKind::oracle_failure,
        "solve_zero: no convergence within " + std::to_string(max_iter) +
            " iterations (residual " + std::to_string(F.norm()) + ")");
}

OracleResult round_oracle(const std::function<double(const Eigen::VectorXd&)>& value,
                          const GradFn& grad, const HessFn& hess,
                          const AffineConstraintSet* cs, const Eigen::VectorXd* b,
                          const Eigen::VectorXd& warm, double tol, int max_iter) {
  if ((cs == nullptr) != (b == nullptr)) {
    raise(ErrorKind::invalid_argument,
          "round_oracle: constraints and right-hand side must come together");
  }

  Eigen::VectorXd x = cs ? project_onto(*cs, warm, *b) : warm;
  OracleResult res;
  if (cs && cs->reduced_dim() == 0) {
    res.x = x;  // single feasible point
    res.value = value(x);
    return res;
  }

  const Eigen::MatrixXd* M = cs ? &cs->null_basis() : nullptr;
  auto residual = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return cs ? Eigen::VectorXd(M->transpose() * grad(y)) : grad(y);
  };
  // Safeguard on the residual norm, not the objective: near the optimum an
  // objective of magnitude |g| cannot resolve decreases below its ulp, while
  // the (reduced) gradient norm keeps shrinking quadratically. Overshoots may
  // also leave the numeric domain (exp overflow); treat that as +inf.
  auto safe_residual_norm = [&](const Eigen::VectorXd& y) -> double {
    try {
      return residual(y).norm();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd F = residual(x);
    const double r0 = F.norm();
    if (r0 <= tol) {
      res.x = x;
      res.value = value(x);
      res.iterations = it;
      return res;
    }
    Eigen::MatrixXd H = hess(x);
    if (cs) H = M->transpose() * H * (*M);
    const SketchedStepReport rep =
        snr_step(F, H, full_selector(static_cast<int>(F.size())));
    const Eigen::VectorXd dir = cs ? Eigen::VectorXd((*M) * rep.direction)
                                   : rep.direction;
    double scale = 1.0;
    Eigen::VectorXd cand = x - dir;
    for (int h = 0; h < 30 && safe_residual_norm(cand) >= r0; ++h) {
      scale *= 0.5;
      cand = x - scale * dir;
    }
    x = cand;
  }
  raise(ErrorKind::oracle_failure,
        "round_oracle: no convergence within " + std::to_string(max_iter) +
            " iterations");
}

namespace {

// Visit every tau-subset of {0..m-1}.
void for_each_subset(int m, int tau, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(static_cast<std::size_t>(tau));
  for (int i = 0; i < tau; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    fn(idx);
    int i = tau - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - tau + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < tau; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

double subset_count(int m, int tau) {
  double c = 1.0;
  for (int i = 0; i < tau; ++i) {
    c *= static_cast<double>(m - i) / static_cast<double>(i + 1);
    if (c > 1e18) return c;
  }
  return c;
}

}  // namespace

MuEstimate estimate_mu(const FieldFn& field, const Eigen::VectorXd& x_star, int m,
                       int tau, double radius, int samples, SeedStream& rng,
                       int subset_cap) {
  if (samples < 1 || radius <= 0.0) {
    raise(ErrorKind::invalid_argument, "estimate_mu: bad sampling parameters");
  }
  const int n = static_cast<int>(x_star.size());
  const bool enumerate = subset_count(m, tau) <= static_cast<double>(subset_cap);

  MuEstimate out;
  out.mu = 1.0;
  bool any_valid = false;

  Eigen::VectorXd F;
  Eigen::MatrixXd DF;
  for (int s = 0; s < samples; ++s) {
    // Uniform in the ball of the given radius around x_star.
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u[i] = rng.normal();
    const double unorm = u.norm();
    if (unorm == 0.0) continue;
    const double r =
        radius * std::pow(static_cast<double>(rng.uniform_below(1u << 30)) / (1u << 30),
                          1.0 / static_cast<double>(n));
    const Eigen::VectorXd x = x_star + (r / unorm) * u;

    field(x, F, DF);
    double f_mean = 0.0;
    Eigen::VectorXd d_mean = Eigen::VectorXd::Zero(n);
    std::size_t count = 0;
    auto accumulate = [&](const std::vector<int>& idx) {
      SketchSelector sel;
      sel.m = m;
      sel.indices = idx;
      const SketchedStepReport rep = snr_step(F, DF, sel);
      f_mean += rep.f_value;
      d_mean += rep.direction;
      ++count;
    };
    if (enumerate) {
      for_each_subset(m, tau, accumulate);
    } else {
      for (int k = 0; k < subset_cap; ++k) {
        accumulate(sample_sketch(m, tau, rng).indices);
      }
    }
    f_mean /= static_cast<double>(count);
    d_mean /= static_cast<double>(count);

    const Eigen::VectorXd to_star = x_star - x;
    const double dist_sq = to_star.squaredNorm();
    // 0 >= f + grad^T (x*-x) + mu/2 |x*-x|^2, with f(x*) = 0.
    const double ratio = 2.0 * (-f_mean - d_mean.dot(to_star)) / dist_sq;
    if (ratio <= 0.0) {
      out.witnesses.push_back(x);
    } else {
      any_valid = true;
      out.mu = std::min(out.mu, ratio);
    }
  }

  if (!out.witnesses.empty() || !any_valid) {
    // A single failing sample means no positive mu certifies the ball.
    out.mu = 0.0;
    out.degenerate = true;
  }
  if (out.mu > 1.0) out.mu = 1.0;
  return out;
}

}  // namespace osnr
