#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <functional>

namespace osnr {

/// A set of linear equality constraints A x = b with constant full-row-rank
/// A. Caches the Cholesky factor of A A^T (used by every projection) and an
/// orthonormal basis M of the null space of A (columns; n x (n-k)), so the
/// constrained problem reduces to an unconstrained one over z with
/// x = M z + anchor. Immutable after build.
class AffineConstraintSet {
 public:
  const Eigen::MatrixXd& A() const { return a_; }
  const Eigen::MatrixXd& null_basis() const { return m_; }
  int k() const { return static_cast<int>(a_.rows()); }
  int n() const { return static_cast<int>(a_.cols()); }
  int reduced_dim() const { return n() - k(); }

  /// Solve (A A^T) y = r using the cached factor.
  Eigen::VectorXd aat_solve(const Eigen::VectorXd& r) const {
    return aat_.solve(r);
  }

 private:
  friend AffineConstraintSet build_constraints(const Eigen::MatrixXd& A);
  Eigen::MatrixXd a_;
  Eigen::MatrixXd m_;
  Eigen::LLT<Eigen::MatrixXd> aat_;
};

/// Validate full row rank (smallest singular value > 1e-10 * largest),
/// factor A A^T, and build the orthonormal null-space basis from a
/// Householder QR of A^T.
AffineConstraintSet build_constraints(const Eigen::MatrixXd& A);

/// Euclidean projection onto {x : A x = b}:
///   x + A^T (A A^T)^{-1} (b - A x).
/// The residual form keeps iterates feasible against accumulated round-off
/// even when A x drifted from the previous right-hand side.
Eigen::VectorXd project_onto(const AffineConstraintSet& cs,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& b);

using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using HessFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// The reduced vector field of a smooth objective g over {x : A x = b},
/// anchored at a feasible point:
///   F(z)  = M^T grad(M z + anchor)
///   DF(z) = M^T hess(M z + anchor) M.
class ReducedField {
 public:
  ReducedField(GradFn grad, HessFn hess, const AffineConstraintSet& cs,
               Eigen::VectorXd anchor);

  Eigen::VectorXd F(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd DF(const Eigen::VectorXd& z) const;
  int dim() const { return static_cast<int>(m_.cols()); }
  const Eigen::VectorXd& anchor() const { return anchor_; }
  /// Lift a reduced point back: x = M z + anchor.
  Eigen::VectorXd lift(const Eigen::VectorXd& z) const;

 private:
  GradFn grad_;
  HessFn hess_;
  Eigen::MatrixXd m_;
  Eigen::VectorXd anchor_;
};

/// Build the reduced field after checking A anchor = b within
/// 1e-6 * (1 + |b|).
ReducedField reduce_field(GradFn grad, HessFn hess,
                          const AffineConstraintSet& cs,
                          const Eigen::VectorXd& anchor,
                          const Eigen::VectorXd& b);

}  // namespace osnr
