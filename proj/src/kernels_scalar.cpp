#include "osnr/kernels.hpp"

#include <cstring>

namespace osnr::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double nrm2_sq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double diff_nrm2_sq_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scaled_diff_scalar(const double* x, const double* y, double s, double* out,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - y[i]) * s;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{"scalar",          dot_scalar,  nrm2_sq_scalar,
                       diff_nrm2_sq_scalar, axpy_scalar, scaled_diff_scalar};
  return ops;
}

void gram_selected(const double* a, std::size_t rows, std::size_t lda,
                   const int* idx, std::size_t k, double* g) {
  const Ops& ops = active();
  for (std::size_t j = 0; j < k; ++j) {
    const double* cj = a + static_cast<std::size_t>(idx[j]) * lda;
    for (std::size_t i = j; i < k; ++i) {
      const double* ci = a + static_cast<std::size_t>(idx[i]) * lda;
      const double v = ops.dot(ci, cj, rows);
      g[i + j * k] = v;
      g[j + i * k] = v;
    }
  }
}

void combine_selected(const double* a, std::size_t rows, std::size_t lda,
                      const int* idx, const double* w, std::size_t k,
                      double* out) {
  std::memset(out, 0, rows * sizeof(double));
  const Ops& ops = active();
  for (std::size_t j = 0; j < k; ++j) {
    const double* cj = a + static_cast<std::size_t>(idx[j]) * lda;
    ops.axpy(w[j], cj, out, rows);
  }
}

}  // namespace osnr::kernels
