#include "osnr/opf.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include "osnr/errors.hpp"

namespace osnr {

PenalizedOpfProblem::PenalizedOpfProblem(const matpower::PowerCase& pc,
                                         AlphaRule rule, double default_rate_mva) {
  matpower::validate_case(pc);
  base_mva_ = pc.base_mva;

  layout_.ng = static_cast<int>(pc.gens.size());
  layout_.nl = static_cast<int>(pc.branches.size());
  layout_.nb = static_cast<int>(pc.buses.size());

  std::unordered_map<int, int> bus_index;
  for (int i = 0; i < layout_.nb; ++i) bus_index[pc.buses[i].id] = i;

  for (int g = 0; g < layout_.ng; ++g) {
    cost_a_pu_.push_back(pc.gencosts[static_cast<std::size_t>(g)].a * base_mva_ *
                         base_mva_);
    cost_b_pu_.push_back(pc.gencosts[static_cast<std::size_t>(g)].b * base_mva_);
  }

  for (const matpower::Branch& br : pc.branches) {
    int u = bus_index.at(br.from);
    int v = bus_index.at(br.to);
    double x = br.x_pu;
    // Positive flow runs from the lower-indexed endpoint to the higher one.
    if (u > v) std::swap(u, v);
    line_nodes_.emplace_back(u, v);
    susceptance_.push_back(1.0 / x);
    const double rate = br.rate_a_mva > 0.0 ? br.rate_a_mva : default_rate_mva;
    const double sbar = rate / base_mva_;
    alpha_.push_back(rule == AlphaRule::paper ? sbar * sbar : 1.0 / (sbar * sbar));
  }

  demand_mw_.assign(static_cast<std::size_t>(layout_.nb), 0.0);
  for (int i = 0; i < layout_.nb; ++i) {
    demand_mw_[static_cast<std::size_t>(i)] = pc.buses[static_cast<std::size_t>(i)].pd_mw;
    if (pc.buses[static_cast<std::size_t>(i)].pd_mw != 0.0) load_rows_.push_back(i);
  }

  // Rows: nodal balance per bus, then one flow definition per line, then the
  // reference angle. Balance at bus i: (net outflow) - (generation) = -demand.
  A_ = Eigen::MatrixXd::Zero(layout_.k(), layout_.n());
  for (int l = 0; l < layout_.nl; ++l) {
    A_(line_nodes_[static_cast<std::size_t>(l)].first, layout_.flow_col(l)) += 1.0;
    A_(line_nodes_[static_cast<std::size_t>(l)].second, layout_.flow_col(l)) -= 1.0;
  }
  for (int g = 0; g < layout_.ng; ++g) {
    A_(bus_index.at(pc.gens[static_cast<std::size_t>(g)].bus), layout_.p_col(g)) -= 1.0;
  }
  for (int l = 0; l < layout_.nl; ++l) {
    const int row = layout_.nb + l;
    A_(row, layout_.flow_col(l)) = 1.0;
    A_(row, layout_.theta_col(line_nodes_[static_cast<std::size_t>(l)].first)) =
        -susceptance_[static_cast<std::size_t>(l)];
    A_(row, layout_.theta_col(line_nodes_[static_cast<std::size_t>(l)].second)) =
        susceptance_[static_cast<std::size_t>(l)];
  }
  for (int i = 0; i < layout_.nb; ++i) {
    if (pc.buses[static_cast<std::size_t>(i)].type == matpower::BusType::ref) {
      A_(layout_.nb + layout_.nl, layout_.theta_col(i)) = 1.0;
    }
  }
}

double PenalizedOpfProblem::value(const Eigen::VectorXd& x) const {
  double g = 0.0;
  for (int i = 0; i < layout_.ng; ++i) {
    const double p = x[layout_.p_col(i)];
    g += cost_a_pu_[static_cast<std::size_t>(i)] * p * p +
         cost_b_pu_[static_cast<std::size_t>(i)] * p;
  }
  for (int l = 0; l < layout_.nl; ++l) {
    const double P = x[layout_.flow_col(l)];
    const double e = alpha_[static_cast<std::size_t>(l)] * P * P;
    if (e > 700.0) {
      raise(ErrorKind::saturation,
            "penalty overflow on line " +
                std::to_string(line_nodes_[static_cast<std::size_t>(l)].first) + "-" +
                std::to_string(line_nodes_[static_cast<std::size_t>(l)].second) +
                " (alpha P^2 = " + std::to_string(e) + ")");
    }
    g += std::exp(e);
  }
  return g;
}

Eigen::VectorXd PenalizedOpfProblem::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout_.n());
  for (int i = 0; i < layout_.ng; ++i) {
    const double p = x[layout_.p_col(i)];
    grad[layout_.p_col(i)] =
        2.0 * cost_a_pu_[static_cast<std::size_t>(i)] * p +
        cost_b_pu_[static_cast<std::size_t>(i)];
  }
  for (int l = 0; l < layout_.nl; ++l) {
    const double a = alpha_[static_cast<std::size_t>(l)];
    const double P = x[layout_.flow_col(l)];
    const double e = a * P * P;
    if (e > 700.0) {
      raise(ErrorKind::saturation,
            "penalty overflow on line " +
                std::to_string(line_nodes_[static_cast<std::size_t>(l)].first) + "-" +
                std::to_string(line_nodes_[static_cast<std::size_t>(l)].second));
    }
    grad[layout_.flow_col(l)] = 2.0 * a * P * std::exp(e);
  }
  // Angle block is identically zero: theta enters only through A x = b.
  return grad;
}

Eigen::MatrixXd PenalizedOpfProblem::hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(layout_.n(), layout_.n());
  for (int i = 0; i < layout_.ng; ++i) {
    h(layout_.p_col(i), layout_.p_col(i)) =
        2.0 * cost_a_pu_[static_cast<std::size_t>(i)];
  }
  for (int l = 0; l < layout_.nl; ++l) {
    const double a = alpha_[static_cast<std::size_t>(l)];
    const double P = x[layout_.flow_col(l)];
    const double e = a * P * P;
    if (e > 700.0) {
      raise(ErrorKind::saturation,
            "penalty overflow on line " +
                std::to_string(line_nodes_[static_cast<std::size_t>(l)].first) + "-" +
                std::to_string(line_nodes_[static_cast<std::size_t>(l)].second));
    }
    h(layout_.flow_col(l), layout_.flow_col(l)) =
        (2.0 * a + 4.0 * a * a * P * P) * std::exp(e);
  }
  return h;
}

Eigen::VectorXd PenalizedOpfProblem::rhs() const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(layout_.k());
  for (int i = 0; i < layout_.nb; ++i) {
    b[i] = -demand_mw_[static_cast<std::size_t>(i)] / base_mva_;
  }
  return b;
}

void PenalizedOpfProblem::advance(SeedStream& rng) {
  const double sigma = std::sqrt(5.0 / static_cast<double>(t_));
  for (int row : load_rows_) {
    demand_mw_[static_cast<std::size_t>(row)] += sigma * rng.normal();
  }
  ++t_;
}

void PenalizedOpfProblem::eval(const Eigen::VectorXd& x, Eigen::VectorXd& F,
                               Eigen::MatrixXd& DF) {
  F = gradient(x);
  DF = hessian(x);
}

OpfBuild opf_build(const matpower::PowerCase& pc, AlphaRule rule,
                   double default_rate_mva) {
  PenalizedOpfProblem problem(pc, rule, default_rate_mva);
  Eigen::MatrixXd A = problem.constraint_matrix();
  Eigen::VectorXd b0 = problem.rhs();
  return OpfBuild{std::move(problem), std::move(A), std::move(b0)};
}

}  // namespace osnr
