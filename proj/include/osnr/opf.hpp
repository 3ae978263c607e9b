#pragma once

#include <Eigen/Core>
#include <vector>

#include "osnr/matpower.hpp"
#include "osnr/problems.hpp"

namespace osnr {

/// Column layout of the power-flow decision vector x = (p_G, P_L, theta_B):
/// generator injections, then line flows, then bus angles.
struct OpfLayout {
  int ng = 0, nl = 0, nb = 0;
  int p_col(int g) const { return g; }
  int flow_col(int l) const { return ng + l; }
  int theta_col(int b) const { return ng + nl + b; }
  int n() const { return ng + nl + nb; }
  int k() const { return nb + nl + 1; }  // balance + flow definitions + reference angle
};

enum class AlphaRule {
  paper,           // alpha_ij = sbar_ij^2 (ratings in p.u.)
  inverse_square,  // alpha_ij = 1 / sbar_ij^2
};

/// DC optimal power flow with the thermal limits replaced by exponential
/// line-flow penalties:
///   g(x) = sum_g a_g p_g^2 + b_g p_g + sum_l exp(alpha_l P_l^2),
/// subject to the equality constraints A x = b_t (nodal balance, flow
/// definitions, reference angle). Variables are per-unit; demands are kept in
/// MW and converted when the right-hand side is built. The demand at each
/// load bus performs the random walk d <- d + N(0, 5/t) between rounds.
class PenalizedOpfProblem final : public OnlineVectorField,
                                  public ConstrainedGradientProblem {
 public:
  PenalizedOpfProblem(const matpower::PowerCase& pc, AlphaRule rule,
                      double default_rate_mva = 1e3);

  // ConstrainedGradientProblem
  int dim() const override { return layout_.n(); }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd rhs() const override;
  void advance(SeedStream& rng) override;
  int round() const override { return t_; }

  // OnlineVectorField (gradient-field view: F = grad g, DF = hess g)
  int decision_dim() const override { return layout_.n(); }
  int output_dim() const override { return layout_.n(); }
  FieldMode mode() const override { return FieldMode::gradient_field; }
  void eval(const Eigen::VectorXd& x, Eigen::VectorXd& F,
            Eigen::MatrixXd& DF) override;
  bool has_loss() const override { return true; }
  double loss(const Eigen::VectorXd& x) override { return value(x); }

  const OpfLayout& layout() const { return layout_; }
  const Eigen::MatrixXd& constraint_matrix() const { return A_; }
  const std::vector<double>& alpha() const { return alpha_; }
  /// Current demand (MW) per bus, zeros at non-load buses.
  const std::vector<double>& demands_mw() const { return demand_mw_; }
  /// Balance-row indices whose right-hand side carries a demand.
  const std::vector<int>& load_rows() const { return load_rows_; }
  double base_mva() const { return base_mva_; }

 private:
  OpfLayout layout_;
  double base_mva_;
  int t_ = 1;
  std::vector<double> cost_a_pu_;  // a * base^2, per generator
  std::vector<double> cost_b_pu_;  // b * base
  std::vector<double> alpha_;      // per line
  std::vector<std::pair<int, int>> line_nodes_;  // bus indices, from < to
  std::vector<double> susceptance_;              // 1/x per line
  std::vector<double> demand_mw_;                // per bus
  std::vector<int> load_rows_;
  Eigen::MatrixXd A_;
};

struct OpfBuild {
  PenalizedOpfProblem problem;
  Eigen::MatrixXd A;
  Eigen::VectorXd b0;
};

/// Validate the case and assemble the penalized problem together with its
/// constraint matrix and initial right-hand side.
OpfBuild opf_build(const matpower::PowerCase& pc,
                   AlphaRule rule = AlphaRule::paper,
                   double default_rate_mva = 1e3);

}  // namespace osnr
