#pragma once

#include <Eigen/Core>
#include <Eigen/QR>
#include <string>

#include "osnr/rng.hpp"

namespace osnr::testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(OSNR_SOURCE_DIR) + "/fixtures/" + name;
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, SeedStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

inline Eigen::VectorXd random_vector(int n, SeedStream& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

/// Random symmetric PSD matrix B^T B with B k x k.
inline Eigen::MatrixXd random_psd(int k, SeedStream& rng) {
  const Eigen::MatrixXd b = random_matrix(k, k, rng);
  return b.transpose() * b;
}

/// Symmetric matrix with the given spectrum under a random rotation.
inline Eigen::MatrixXd with_spectrum(const Eigen::VectorXd& eigs, SeedStream& rng) {
  const int n = static_cast<int>(eigs.size());
  const Eigen::MatrixXd g = random_matrix(n, n, rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  return q * eigs.asDiagonal() * q.transpose();
}

}  // namespace osnr::testutil
