#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "osnr/affine.hpp"
#include "osnr/errors.hpp"
#include "osnr/opf.hpp"
#include "testutil.hpp"

using namespace osnr;

namespace {

matpower::PowerCase two_bus() {
  return matpower::load_case_file(testutil::fixture_path("case2.m"));
}

matpower::PowerCase nine_bus() {
  return matpower::load_case_file(testutil::fixture_path("case9.m"));
}

}  // namespace

TEST_CASE("two-bus system: 4 constraints over (p, P, theta1, theta2)") {
  OpfBuild build = opf_build(two_bus());
  CHECK(build.A.rows() == 4);  // 2 balance + 1 flow + 1 reference
  CHECK(build.A.cols() == 4);  // 1 gen + 1 line + 2 angles
  CHECK(build.problem.layout().n() == 4);

  // Feasible dispatch p = d: p = 0.5 pu, P = 0.5 pu, theta solved from the
  // flow definition with B = 1/x = 10 and theta_ref = 0.
  Eigen::VectorXd x(4);
  x << 0.5, 0.5, 0.0, -0.05;
  CHECK((build.A * x - build.b0).norm() <= 1e-12);

  // KKT oracle agrees: with n = k the feasible point is unique.
  const Eigen::VectorXd sol = build.A.fullPivLu().solve(build.b0);
  CHECK((sol - x).norm() <= 1e-10);
}

TEST_CASE("right-hand side carries negated demands on load rows") {
  OpfBuild build = opf_build(two_bus());
  const auto& pc = two_bus();
  CHECK(build.b0[0] == 0.0);
  CHECK(build.b0[1] == -pc.buses[1].pd_mw / pc.base_mva);
  CHECK(build.b0[2] == 0.0);  // flow definition row
  CHECK(build.b0[3] == 0.0);  // reference angle row
}

TEST_CASE("zero demand makes the origin feasible and penalty-stationary") {
  matpower::PowerCase pc = two_bus();
  pc.buses[1].pd_mw = 0.0;
  OpfBuild build = opf_build(pc);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  CHECK((build.A * x - build.b0).norm() == 0.0);
  const Eigen::VectorXd g = build.problem.gradient(x);
  CHECK(g[build.problem.layout().flow_col(0)] == 0.0);  // d exp(a P^2)/dP = 0 at 0
  CHECK(build.problem.value(x) == doctest::Approx(1.0));  // one line: exp(0)
}

TEST_CASE("zero flows give penalty value |L| and zero penalty gradient") {
  OpfBuild build = opf_build(nine_bus());
  const auto& layout = build.problem.layout();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.n());
  double value = build.problem.value(x);
  CHECK(value == doctest::Approx(static_cast<double>(layout.nl)));
  const Eigen::VectorXd g = build.problem.gradient(x);
  for (int l = 0; l < layout.nl; ++l) CHECK(g[layout.flow_col(l)] == 0.0);
}

TEST_CASE("quadratic generation cost differentiates as 2 a p + b") {
  // base 1 keeps per-unit equal to the raw numbers: a=1, b=0, p=3 -> 6.
  matpower::PowerCase pc;
  pc.base_mva = 1.0;
  pc.buses = {{1, matpower::BusType::ref, 0.0}, {2, matpower::BusType::pq, 1.0}};
  pc.branches = {{1, 2, 0.5, 10.0}};
  pc.gens = {{1, 0.0, 10.0}};
  pc.gencosts = {{1.0, 0.0}};
  OpfBuild build = opf_build(pc);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  x[0] = 3.0;
  CHECK(build.problem.gradient(x)[0] == doctest::Approx(6.0));
}

TEST_CASE("alpha rules follow the line ratings") {
  OpfBuild paper = opf_build(two_bus(), AlphaRule::paper);
  OpfBuild inv = opf_build(two_bus(), AlphaRule::inverse_square);
  const double sbar = 100.0 / 100.0;  // rate 100 MVA on a 100 MVA base
  CHECK(paper.problem.alpha()[0] == doctest::Approx(sbar * sbar));
  CHECK(inv.problem.alpha()[0] == doctest::Approx(1.0 / (sbar * sbar)));
}

TEST_CASE("unlimited lines fall back to the default rating") {
  matpower::PowerCase pc = two_bus();
  pc.branches[0].rate_a_mva = 0.0;
  OpfBuild build = opf_build(pc);
  const double sbar = 1e3 / 100.0;
  CHECK(build.problem.alpha()[0] == doctest::Approx(sbar * sbar));
}

TEST_CASE("gradient and hessian match central differences") {
  OpfBuild build = opf_build(nine_bus());
  const int n = build.problem.layout().n();
  SeedStream rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd x = 0.3 * testutil::random_vector(n, rng);
    const Eigen::VectorXd g = build.problem.gradient(x);
    const Eigen::MatrixXd h = build.problem.hessian(x);

    const double step = 1e-6;
    Eigen::VectorXd g_fd(n);
    Eigen::MatrixXd h_fd(n, n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp[i] += step;
      xm[i] -= step;
      g_fd[i] =
          (build.problem.value(xp) - build.problem.value(xm)) / (2.0 * step);
      h_fd.col(i) =
          (build.problem.gradient(xp) - build.problem.gradient(xm)) / (2.0 * step);
    }
    CHECK((g_fd - g).norm() <= 1e-5 * (1.0 + g.norm()));
    CHECK((h_fd - h).norm() <= 1e-4 * (1.0 + h.norm()));
  }
}

TEST_CASE("hessian is block diagonal with a zero angle block") {
  OpfBuild build = opf_build(nine_bus());
  const auto& layout = build.problem.layout();
  SeedStream rng(32);
  const Eigen::VectorXd x = 0.2 * testutil::random_vector(layout.n(), rng);
  const Eigen::MatrixXd h = build.problem.hessian(x);
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int b = 0; b < layout.nb; ++b) {
    CHECK(h.col(layout.theta_col(b)).cwiseAbs().maxCoeff() == 0.0);
  }
  for (int g = 0; g < layout.ng; ++g) {
    CHECK(h(layout.p_col(g), layout.p_col(g)) > 0.0);
  }
  for (int l = 0; l < layout.nl; ++l) {
    CHECK(h(layout.flow_col(l), layout.flow_col(l)) > 0.0);
  }
  // off-diagonal must vanish: penalties and costs are separable
  CHECK((h - Eigen::MatrixXd(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("penalty overflow guard names the line") {
  OpfBuild build = opf_build(two_bus());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  x[build.problem.layout().flow_col(0)] = 1e3;
  try {
    build.problem.value(x);
    FAIL("expected saturation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::saturation);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("demand walk has variance 5 on the first advance") {
  const int draws = 10000;
  double acc = 0.0;
  double acc_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    OpfBuild build = opf_build(two_bus());
    const double before = build.problem.demands_mw()[1];
    SeedStream rng(9000 + static_cast<std::uint64_t>(i));
    build.problem.advance(rng);
    const double delta = build.problem.demands_mw()[1] - before;
    acc += delta;
    acc_sq += delta * delta;
  }
  const double mean = acc / draws;
  const double var = acc_sq / draws - mean * mean;
  CHECK(std::abs(var - 5.0) <= 0.25);  // +- 5%
}

TEST_CASE("only load rows of the right-hand side move") {
  OpfBuild build = opf_build(nine_bus());
  const Eigen::VectorXd b0 = build.problem.rhs();
  SeedStream rng(33);
  build.problem.advance(rng);
  const Eigen::VectorXd b1 = build.problem.rhs();
  const auto& loads = build.problem.load_rows();
  for (int r = 0; r < b0.size(); ++r) {
    const bool is_load =
        std::find(loads.begin(), loads.end(), r) != loads.end();
    if (is_load) {
      CHECK(b0[r] != b1[r]);
    } else {
      CHECK(b0[r] == b1[r]);
    }
  }
}

TEST_CASE("cumulative demand variation tracks the partial-sum oracle") {
  // E sum_t |db_t| is proportional to sum_t t^{-1/2}; the T=400 over T=100
  // ratio of those partial sums is the growth oracle (about 2.08, well below
  // the linear ratio 4).
  double s100 = 0.0;
  double s400 = 0.0;
  for (int t = 1; t <= 400; ++t) {
    const double v = 1.0 / std::sqrt(static_cast<double>(t));
    if (t <= 100) s100 += v;
    s400 += v;
  }
  const double oracle_ratio = s400 / s100;

  const int walks = 300;
  double v100 = 0.0;
  double v400 = 0.0;
  for (int w = 0; w < walks; ++w) {
    OpfBuild build = opf_build(nine_bus());
    SeedStream rng(4000 + static_cast<std::uint64_t>(w));
    Eigen::VectorXd prev = build.problem.rhs();
    double acc = 0.0;
    for (int t = 1; t <= 400; ++t) {
      build.problem.advance(rng);
      const Eigen::VectorXd b = build.problem.rhs();
      acc += (b - prev).norm();
      prev = b;
      if (t == 100) v100 += acc;
    }
    v400 += acc;
  }
  const double mc_ratio = v400 / v100;
  CHECK(std::abs(mc_ratio - oracle_ratio) <= 0.05);
  CHECK(mc_ratio < 4.0);  // sublinear: far from the linear-growth ratio
}

TEST_CASE("the feasible set is nonempty every round") {
  OpfBuild build = opf_build(nine_bus());
  const AffineConstraintSet cs = build_constraints(build.A);
  SeedStream rng(34);
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd b = build.problem.rhs();
    const Eigen::VectorXd x = project_onto(cs, Eigen::VectorXd::Zero(cs.n()), b);
    CHECK((cs.A() * x - b).norm() <= 1e-8 * (1.0 + b.norm()));
    build.problem.advance(rng);
  }
}

TEST_CASE("gradient-field view is symmetric with m = n") {
  OpfBuild build = opf_build(nine_bus());
  OnlineVectorField& field = build.problem;
  CHECK(field.mode() == FieldMode::gradient_field);
  CHECK(field.output_dim() == field.decision_dim());
  SeedStream rng(35);
  const Eigen::VectorXd x = 0.2 * testutil::random_vector(field.decision_dim(), rng);
  Eigen::VectorXd F;
  Eigen::MatrixXd DF;
  field.eval(x, F, DF);
  CHECK((DF - DF.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((F - build.problem.gradient(x)).norm() == 0.0);
}
