#include "osnr/affine.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <string>
#include <utility>

#include "osnr/errors.hpp"

namespace osnr {

AffineConstraintSet build_constraints(const Eigen::MatrixXd& A) {
  const auto k = A.rows();
  const auto n = A.cols();
  if (k > n) {
    raise(ErrorKind::invalid_argument,
          "build_constraints: more constraints (" + std::to_string(k) +
              ") than variables (" + std::to_string(n) + ")");
  }
  if (!A.allFinite()) {
    raise(ErrorKind::numerical_domain, "build_constraints: non-finite A");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (k > 0 && (sv[sv.size() - 1] <= 1e-10 * sv[0] || sv[0] == 0.0)) {
    raise(ErrorKind::degenerate_constraints,
          "build_constraints: A is rank-deficient (sigma_min/sigma_max = " +
              std::to_string(sv[0] > 0 ? sv[sv.size() - 1] / sv[0] : 0.0) + ")");
  }

  AffineConstraintSet cs;
  cs.a_ = A;
  cs.aat_.compute(A * A.transpose());
  if (k > 0 && cs.aat_.info() != Eigen::Success) {
    raise(ErrorKind::degenerate_constraints,
          "build_constraints: A A^T is not positive definite");
  }

  // Full Q of A^T: the first k columns span range(A^T), the remaining n-k
  // span its orthogonal complement, i.e. the null space of A.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A.transpose());
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  cs.m_ = q.rightCols(n - k);
  return cs;
}

Eigen::VectorXd project_onto(const AffineConstraintSet& cs,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  if (x.size() != cs.n() || b.size() != cs.k()) {
    raise(ErrorKind::invalid_argument, "project_onto: dimension mismatch");
  }
  if (!x.allFinite() || !b.allFinite()) {
    raise(ErrorKind::numerical_domain, "project_onto: non-finite input");
  }
  if (cs.k() == 0) return x;
  const Eigen::VectorXd r = b - cs.A() * x;
  return x + cs.A().transpose() * cs.aat_solve(r);
}

ReducedField::ReducedField(GradFn grad, HessFn hess,
                           const AffineConstraintSet& cs, Eigen::VectorXd anchor)
    : grad_(std::move(grad)),
      hess_(std::move(hess)),
      m_(cs.null_basis()),
      anchor_(std::move(anchor)) {}

Eigen::VectorXd ReducedField::lift(const Eigen::VectorXd& z) const {
  return m_ * z + anchor_;
}

Eigen::VectorXd ReducedField::F(const Eigen::VectorXd& z) const {
  return m_.transpose() * grad_(lift(z));
}

Eigen::MatrixXd ReducedField::DF(const Eigen::VectorXd& z) const {
  return m_.transpose() * hess_(lift(z)) * m_;
}

ReducedField reduce_field(GradFn grad, HessFn hess, const AffineConstraintSet& cs,
                          const Eigen::VectorXd& anchor, const Eigen::VectorXd& b) {
  if (anchor.size() != cs.n() || b.size() != cs.k()) {
    raise(ErrorKind::invalid_argument, "reduce_field: dimension mismatch");
  }
  const double viol = (cs.A() * anchor - b).norm();
  if (viol > 1e-6 * (1.0 + b.norm())) {
    raise(ErrorKind::precondition,
          "reduce_field: anchor violates A x = b by " + std::to_string(viol));
  }
  return ReducedField(std::move(grad), std::move(hess), cs, anchor);
}

}  // namespace osnr
