#pragma once

#include <cstddef>

namespace osnr::kernels {

/// Dense inner-loop primitives behind the sketched step and the tracking
/// residuals. A scalar reference implementation always exists; an AVX2+FMA
/// variant is selected at runtime when the CPU supports it. Variants agree
/// to accumulation-order rounding and are equivalence-tested against the
/// scalar reference.
struct Ops {
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*nrm2_sq)(const double* x, std::size_t n);
  double (*diff_nrm2_sq)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out = (x - y) * s
  void (*scaled_diff)(const double* x, const double* y, double s, double* out,
                      std::size_t n);
};

const Ops& scalar_ops();
/// nullptr when the build or the CPU lacks AVX2+FMA.
const Ops* avx2_ops();

/// The backend in use. Defaults to the best supported variant; the
/// OSNR_KERNELS environment variable ("scalar" | "avx2") overrides.
const Ops& active();

/// Test hook: force a backend. Returns false if unavailable.
bool set_active(const char* name);

inline double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
inline double nrm2_sq(const double* x, std::size_t n) {
  return active().nrm2_sq(x, n);
}
inline double diff_nrm2_sq(const double* x, const double* y, std::size_t n) {
  return active().diff_nrm2_sq(x, y, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
inline void scaled_diff(const double* x, const double* y, double s, double* out,
                        std::size_t n) {
  active().scaled_diff(x, y, s, out, n);
}

/// g = B^T B for B the `k` columns of the column-major `rows x *` matrix `a`
/// picked by `idx`; g is k x k column-major, filled symmetrically.
/// Cost O(rows * k^2); the selection never materializes.
void gram_selected(const double* a, std::size_t rows, std::size_t lda,
                   const int* idx, std::size_t k, double* g);

/// out = sum_j w[j] * column idx[j] of `a`; out has length `rows`.
void combine_selected(const double* a, std::size_t rows, std::size_t lda,
                      const int* idx, const double* w, std::size_t k,
                      double* out);

}  // namespace osnr::kernels
