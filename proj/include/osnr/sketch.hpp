#pragma once

#include <Eigen/Core>
#include <vector>

#include "osnr/rng.hpp"

namespace osnr {

/// A uniform sub-sampling sketch: tau distinct coordinate indices in [0, m).
/// Stands for the m x tau selection matrix S without ever materializing it;
/// every product with S is a gather or scatter over `indices`.
struct SketchSelector {
  std::vector<int> indices;
  int m = 0;

  int tau() const { return static_cast<int>(indices.size()); }
};

/// Draw tau distinct indices uniformly without replacement from {0,...,m-1}.
/// Identical (m, tau, stream state) reproduce identical selectors.
SketchSelector sample_sketch(int m, int tau, SeedStream& rng);

/// Gather: S^T v.
Eigen::VectorXd select(const Eigen::VectorXd& v, const SketchSelector& sel);
/// Scatter: S u, embedding back into R^m with zeros elsewhere.
Eigen::VectorXd embed(const Eigen::VectorXd& u, const SketchSelector& sel);

/// G = (DF S)^T (DF S) by column selection; DF is n x m with column i holding
/// the gradient of output i. Cost O(n tau^2).
Eigen::MatrixXd sketched_gram(const Eigen::MatrixXd& DF,
                              const SketchSelector& sel);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix via symmetric
/// eigendecomposition, zeroing eigenvalues below rel_tol * lambda_max.
Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& G, double rel_tol = 1e-12);

struct PsdPinv {
  Eigen::MatrixXd pinv;
  int rank = 0;
};
PsdPinv pinv_psd_ranked(const Eigen::MatrixXd& G, double rel_tol = 1e-12);

/// One sketched Newton-Raphson step evaluated at the current iterate.
/// The caller updates x <- x - direction.
struct SketchedStepReport {
  Eigen::VectorXd direction;  // (DF S) G^+ (S^T F)
  double f_value = 0.0;       // 0.5 (S^T F)^T G^+ (S^T F); equals 0.5|direction|^2
  int gram_rank = 0;
  double elapsed = 0.0;  // seconds spent in this step
};

SketchedStepReport snr_step(const Eigen::VectorXd& F_val,
                            const Eigen::MatrixXd& DF,
                            const SketchSelector& sel, double rel_tol = 1e-12);

}  // namespace osnr
