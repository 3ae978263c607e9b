#include "osnr/sketch.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <numeric>
#include <string>

#include "osnr/errors.hpp"
#include "osnr/kernels.hpp"

namespace osnr {

SketchSelector sample_sketch(int m, int tau, SeedStream& rng) {
  if (tau < 1 || tau > m) {
    raise(ErrorKind::invalid_argument,
          "sample_sketch: tau=" + std::to_string(tau) +
              " outside [1, m] with m=" + std::to_string(m));
  }
  // Partial Fisher-Yates: uniform over ordered tau-tuples, hence uniform
  // over subsets.
  std::vector<int> pool(static_cast<std::size_t>(m));
  std::iota(pool.begin(), pool.end(), 0);
  for (int j = 0; j < tau; ++j) {
    const int r =
        j + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(m - j)));
    std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(r)]);
  }
  SketchSelector sel;
  sel.m = m;
  sel.indices.assign(pool.begin(), pool.begin() + tau);
  // Canonical (sorted) form: the selector stands for a subset, and a stable
  // column order keeps full-sketch runs bit-identical to the plain
  // Newton-Raphson iteration.
  std::sort(sel.indices.begin(), sel.indices.end());
  return sel;
}

Eigen::VectorXd select(const Eigen::VectorXd& v, const SketchSelector& sel) {
  if (v.size() != sel.m) {
    raise(ErrorKind::invalid_argument, "select: vector length " +
                                           std::to_string(v.size()) +
                                           " != m=" + std::to_string(sel.m));
  }
  Eigen::VectorXd out(sel.tau());
  for (int j = 0; j < sel.tau(); ++j) out[j] = v[sel.indices[static_cast<std::size_t>(j)]];
  return out;
}

Eigen::VectorXd embed(const Eigen::VectorXd& u, const SketchSelector& sel) {
  if (u.size() != sel.tau()) {
    raise(ErrorKind::invalid_argument, "embed: vector length " +
                                           std::to_string(u.size()) +
                                           " != tau=" + std::to_string(sel.tau()));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sel.m);
  for (int j = 0; j < sel.tau(); ++j) out[sel.indices[static_cast<std::size_t>(j)]] = u[j];
  return out;
}

Eigen::MatrixXd sketched_gram(const Eigen::MatrixXd& DF,
                              const SketchSelector& sel) {
  if (DF.cols() != sel.m) {
    raise(ErrorKind::invalid_argument,
          "sketched_gram: DF has " + std::to_string(DF.cols()) +
              " columns, selector expects m=" + std::to_string(sel.m));
  }
  const auto tau = static_cast<std::size_t>(sel.tau());
  Eigen::MatrixXd G(sel.tau(), sel.tau());
  kernels::gram_selected(DF.data(), static_cast<std::size_t>(DF.rows()),
                         static_cast<std::size_t>(DF.rows()), sel.indices.data(),
                         tau, G.data());
  return G;
}

namespace {

struct PsdSpectrum {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
  double cutoff = 0.0;  // eigenvalues at or below this are treated as zero
  int rank = 0;
};

PsdSpectrum psd_spectrum(const Eigen::MatrixXd& G, double rel_tol) {
  if (G.rows() != G.cols()) {
    raise(ErrorKind::invalid_argument, "pinv_psd: matrix is not square");
  }
  if (rel_tol <= 0.0) {
    raise(ErrorKind::invalid_argument, "pinv_psd: rel_tol must be positive");
  }
  const double scale = G.size() > 0 ? G.cwiseAbs().maxCoeff() : 0.0;
  if (G.size() > 0 &&
      (G - G.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + scale)) {
    raise(ErrorKind::invalid_argument, "pinv_psd: input is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  if (eig.info() != Eigen::Success) {
    raise(ErrorKind::numerical_domain, "pinv_psd: eigendecomposition failed");
  }
  PsdSpectrum out;
  out.vectors = eig.eigenvectors();
  out.values = eig.eigenvalues();
  const Eigen::Index k = out.values.size();
  const double lam_max = k > 0 ? out.values[k - 1] : 0.0;
  if (k > 0 && out.values[0] < -rel_tol * lam_max) {
    raise(ErrorKind::numerical_domain,
          "pinv_psd: negative eigenvalue " + std::to_string(out.values[0]) +
              " beyond tolerance");
  }
  out.cutoff = rel_tol * std::max(lam_max, 0.0);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (out.values[i] > out.cutoff && out.values[i] > 0.0) ++out.rank;
  }
  return out;
}

}  // namespace

PsdPinv pinv_psd_ranked(const Eigen::MatrixXd& G, double rel_tol) {
  const PsdSpectrum sp = psd_spectrum(G, rel_tol);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sp.values.size());
  for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
    if (sp.values[i] > sp.cutoff && sp.values[i] > 0.0) inv[i] = 1.0 / sp.values[i];
  }
  PsdPinv out;
  out.pinv = sp.vectors * inv.asDiagonal() * sp.vectors.transpose();
  out.rank = sp.rank;
  return out;
}

Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& G, double rel_tol) {
  return pinv_psd_ranked(G, rel_tol).pinv;
}

SketchedStepReport snr_step(const Eigen::VectorXd& F_val,
                            const Eigen::MatrixXd& DF,
                            const SketchSelector& sel, double rel_tol) {
  const auto t0 = std::chrono::steady_clock::now();
  if (F_val.size() != DF.cols() || DF.cols() != sel.m) {
    raise(ErrorKind::invalid_argument,
          "snr_step: F has length " + std::to_string(F_val.size()) +
              ", DF is " + std::to_string(DF.rows()) + "x" +
              std::to_string(DF.cols()) + ", selector m=" + std::to_string(sel.m));
  }
  if (!F_val.allFinite() || !DF.allFinite()) {
    raise(ErrorKind::numerical_domain, "snr_step: non-finite entries in F or DF");
  }

  const Eigen::VectorXd s = select(F_val, sel);
  const Eigen::MatrixXd G = sketched_gram(DF, sel);
  const PsdSpectrum sp = psd_spectrum(G, rel_tol);

  // Apply (DF S) G^+ S^T F through the eigenbasis of G: the step is the sum
  // of near-orthogonal components (c_i / lambda_i) * (B v_i), with each
  // lambda_i taken as |B v_i|^2 so that 0.5 |direction|^2 and f_value agree
  // even when G is badly conditioned.
  const Eigen::VectorXd c = sp.vectors.transpose() * s;
  const auto n = static_cast<std::size_t>(DF.rows());
  const auto tau = static_cast<std::size_t>(sel.tau());

  SketchedStepReport rep;
  rep.direction = Eigen::VectorXd::Zero(DF.rows());
  Eigen::VectorXd u(DF.rows());
  for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
    if (!(sp.values[i] > sp.cutoff && sp.values[i] > 0.0)) continue;
    kernels::combine_selected(DF.data(), n, n, sel.indices.data(),
                              sp.vectors.col(i).data(), tau, u.data());
    const double lam = kernels::nrm2_sq(u.data(), n);
    if (lam <= 0.0) continue;
    rep.f_value += 0.5 * c[i] * c[i] / lam;
    kernels::axpy(c[i] / lam, u.data(), rep.direction.data(), n);
  }
  rep.gram_rank = sp.rank;
  rep.elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace osnr
