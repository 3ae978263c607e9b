#include "osnr/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "osnr/errors.hpp"
#include "osnr/kernels.hpp"
#include "osnr/sketch.hpp"

namespace osnr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string echo(const RunConfig& cfg, int tau, int m) {
  std::ostringstream os;
  os << "algorithm=" << algorithm_name(cfg.algorithm) << " T=" << cfg.T
     << " tau=" << tau << " m=" << m << " seed=" << cfg.seed
     << " eta=" << cfg.eta << " steps_per_round=" << cfg.steps_per_round;
  return os.str();
}

void check_common(const RunConfig& cfg, Eigen::Index x0_size, int n) {
  if (cfg.T < 0) raise(ErrorKind::invalid_argument, "run: T must be >= 0");
  if (cfg.steps_per_round < 1) {
    raise(ErrorKind::invalid_argument, "run: steps_per_round must be >= 1");
  }
  if (x0_size != n) {
    raise(ErrorKind::invalid_argument,
          "run: x0 has length " + std::to_string(x0_size) + ", problem needs " +
              std::to_string(n));
  }
}

}  // namespace

int SketchSpec::resolve(int m) const {
  if (m < 1) raise(ErrorKind::invalid_argument, "sketch: output dimension < 1");
  if (tau > 0) {
    if (tau > m) {
      raise(ErrorKind::invalid_argument,
            "sketch: tau=" + std::to_string(tau) + " exceeds m=" + std::to_string(m));
    }
    return tau;
  }
  if (!(rho > 0.0) || rho > 1.0) {
    raise(ErrorKind::invalid_argument,
          "sketch: rho=" + std::to_string(rho) + " outside (0, 1]");
  }
  const int t = static_cast<int>(std::floor(rho * m));
  return std::max(t, 1);
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::osnr: return "osnr";
    case Algorithm::osnr_ec: return "osnr_ec";
    case Algorithm::ogd: return "ogd";
    case Algorithm::onm: return "onm";
  }
  return "?";
}

double default_ogd_eta(int T) { return 1.0 / (15.0 * std::sqrt(static_cast<double>(std::max(T, 1)))); }

RunConfig resolve_onm(const RunConfig& cfg, int output_dim, bool constrained) {
  if (cfg.algorithm != Algorithm::onm) return cfg;
  RunConfig out = cfg;
  out.algorithm = constrained ? Algorithm::osnr_ec : Algorithm::osnr;
  out.sketch = SketchSpec::by_count(output_dim);
  return out;
}

TrajectoryRecord osnr_run(OnlineVectorField& problem, const RunConfig& cfg,
                          const Eigen::VectorXd& x0, const RoundObserver& observer) {
  const int n = problem.decision_dim();
  const int m = problem.output_dim();
  check_common(cfg, x0.size(), n);
  const int tau = cfg.sketch.resolve(m);

  SeedStream root(cfg.seed);
  SeedStream sketch_rng = root.derive("sketch");
  SeedStream advance_rng = root.derive("advance");

  TrajectoryRecord rec;
  rec.algorithm = algorithm_name(cfg.algorithm);
  rec.seed = cfg.seed;
  rec.config_echo = echo(cfg, tau, m);
  rec.rounds = cfg.T;

  Eigen::VectorXd x = x0;
  Eigen::VectorXd F;
  Eigen::MatrixXd DF;
  for (int t = 1; t <= cfg.T; ++t) {
    try {
      problem.eval(x, F, DF);
      rec.residual_norm.push_back(
          std::sqrt(kernels::nrm2_sq(F.data(), static_cast<std::size_t>(F.size()))));
      const double loss = problem.has_loss() ? problem.loss(x) : kNaN;
      rec.loss.push_back(loss);
      if (cfg.record_decisions) rec.decisions.push_back(x);
      if (observer) {
        RoundView view;
        view.round = t;
        view.decision = &x;
        view.loss = loss;
        if (auto g = observer(view)) rec.oracle_loss.push_back(*g);
      }

      double step_secs = 0.0;
      int rank = 0;
      for (int s = 0; s < cfg.steps_per_round; ++s) {
        if (s > 0) problem.eval(x, F, DF);  // same round, refreshed iterate
        const SketchSelector sel = sample_sketch(m, tau, sketch_rng);
        const SketchedStepReport rep = snr_step(F, DF, sel);
        x -= rep.direction;
        step_secs += rep.elapsed;
        rank = rep.gram_rank;
      }
      rec.step_seconds.push_back(step_secs);
      rec.gram_rank.push_back(rank);

      problem.advance(advance_rng);
    } catch (const Error& e) {
      throw RunError(t, e.kind(), e.what());
    }
  }
  rec.final_decision = x;
  rec.singular_guards = problem.singular_guard_count();
  return rec;
}

TrajectoryRecord ogd_run(OnlineVectorField& problem, const RunConfig& cfg,
                         const Eigen::VectorXd& x0, const RoundObserver& observer) {
  const int n = problem.decision_dim();
  check_common(cfg, x0.size(), n);
  if (!problem.has_loss()) {
    raise(ErrorKind::invalid_argument, "ogd_run: problem defines no scalar loss");
  }
  const double eta = cfg.eta > 0.0 ? cfg.eta : default_ogd_eta(cfg.T);
  if (!(eta > 0.0)) raise(ErrorKind::invalid_argument, "ogd_run: eta must be > 0");

  SeedStream root(cfg.seed);
  SeedStream advance_rng = root.derive("advance");

  TrajectoryRecord rec;
  rec.algorithm = algorithm_name(Algorithm::ogd);
  rec.seed = cfg.seed;
  rec.config_echo = echo(cfg, 0, problem.output_dim()) + " eta_used=" + std::to_string(eta);
  rec.rounds = cfg.T;

  Eigen::VectorXd x = x0;
  Eigen::VectorXd F;
  Eigen::MatrixXd DF;
  for (int t = 1; t <= cfg.T; ++t) {
    try {
      problem.eval(x, F, DF);
      rec.residual_norm.push_back(
          std::sqrt(kernels::nrm2_sq(F.data(), static_cast<std::size_t>(F.size()))));
      const double loss = problem.loss(x);
      rec.loss.push_back(loss);
      if (cfg.record_decisions) rec.decisions.push_back(x);
      if (observer) {
        RoundView view;
        view.round = t;
        view.decision = &x;
        view.loss = loss;
        if (auto g = observer(view)) rec.oracle_loss.push_back(*g);
      }

      const auto t0 = std::chrono::steady_clock::now();
      const Eigen::VectorXd grad = problem.mode() == FieldMode::gradient_field
                                       ? F
                                       : Eigen::VectorXd(2.0 * (DF * F));
      if (!grad.allFinite()) {
        raise(ErrorKind::numerical_domain, "ogd_run: non-finite gradient");
      }
      kernels::axpy(-eta, grad.data(), x.data(), static_cast<std::size_t>(n));
      rec.step_seconds.push_back(seconds_since(t0));
      rec.gram_rank.push_back(0);

      problem.advance(advance_rng);
    } catch (const Error& e) {
      throw RunError(t, e.kind(), e.what());
    }
  }
  rec.final_decision = x;
  rec.singular_guards = problem.singular_guard_count();
  return rec;
}

TrajectoryRecord osnr_ec_run(ConstrainedGradientProblem& problem,
                             const AffineConstraintSet& cs, const RunConfig& cfg,
                             const Eigen::VectorXd& x0, const RoundObserver& observer) {
  const int n = problem.dim();
  check_common(cfg, x0.size(), n);
  if (cs.n() != n) {
    raise(ErrorKind::invalid_argument, "osnr_ec_run: constraint set dimension mismatch");
  }
  const int reduced = cs.reduced_dim();
  const int tau = reduced > 0 ? cfg.sketch.resolve(reduced) : 0;

  const Eigen::VectorXd b_first = problem.rhs();
  if ((cs.A() * x0 - b_first).norm() > 1e-8 * (1.0 + b_first.norm())) {
    raise(ErrorKind::precondition, "osnr_ec_run: x0 is not feasible for b_0");
  }

  SeedStream root(cfg.seed);
  SeedStream sketch_rng = root.derive("sketch");
  SeedStream advance_rng = root.derive("advance");

  TrajectoryRecord rec;
  rec.algorithm = algorithm_name(cfg.algorithm);
  rec.seed = cfg.seed;
  rec.config_echo = echo(cfg, tau, reduced);
  rec.rounds = cfg.T;

  const Eigen::MatrixXd& M = cs.null_basis();
  GradFn grad = [&problem](const Eigen::VectorXd& y) { return problem.gradient(y); };
  HessFn hess = [&problem](const Eigen::VectorXd& y) { return problem.hessian(y); };

  Eigen::VectorXd x = x0;
  Eigen::VectorXd b_prev = b_first;
  for (int t = 1; t <= cfg.T; ++t) {
    try {
      const Eigen::VectorXd b = problem.rhs();
      const double loss = problem.value(x);
      rec.loss.push_back(loss);
      rec.violation_norm.push_back((cs.A() * x - b).norm());
      rec.b_delta_norm.push_back((b - b_prev).norm());
      rec.b_norm.push_back(b.norm());
      rec.residual_norm.push_back((M.transpose() * problem.gradient(x)).norm());
      if (cfg.record_decisions) rec.decisions.push_back(x);
      if (observer) {
        RoundView view;
        view.round = t;
        view.decision = &x;
        view.loss = loss;
        view.b = &b;
        if (auto g = observer(view)) rec.oracle_loss.push_back(*g);
      }

      const auto t0 = std::chrono::steady_clock::now();
      const Eigen::VectorXd anchor = project_onto(cs, x, b);
      if (reduced > 0) {
        const ReducedField field = reduce_field(grad, hess, cs, anchor, b);
        const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(reduced);
        Eigen::VectorXd F_red = field.F(z0);
        Eigen::MatrixXd DF_red = field.DF(z0);
        int rank = 0;
        Eigen::VectorXd z = z0;
        for (int s = 0; s < cfg.steps_per_round; ++s) {
          if (s > 0) {
            F_red = field.F(z);
            DF_red = field.DF(z);
          }
          const SketchSelector sel = sample_sketch(reduced, tau, sketch_rng);
          const SketchedStepReport rep = snr_step(F_red, DF_red, sel);
          z -= rep.direction;
          rank = rep.gram_rank;
        }
        x = field.lift(z);
        rec.gram_rank.push_back(rank);
      } else {
        // Fully determined system: the projection is the whole update.
        x = anchor;
        rec.gram_rank.push_back(0);
      }
      rec.step_seconds.push_back(seconds_since(t0));

      b_prev = b;
      problem.advance(advance_rng);
    } catch (const Error& e) {
      throw RunError(t, e.kind(), e.what());
    }
  }
  rec.final_decision = x;
  return rec;
}

}  // namespace osnr
