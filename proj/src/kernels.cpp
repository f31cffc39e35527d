#include "carmm/kernels.hpp"

#include <cstdlib>
#include <mutex>

namespace carmm::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void wxpy_scalar(double a, const double* w, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * w[i] * x[i];
}

double quadform_diag_scalar(const double* w, const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i];
  return acc;
}

void gather_sum_scalar(const std::int32_t* offsets, const std::int32_t* idx, std::size_t rows,
                       const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::int32_t k = offsets[r]; k < offsets[r + 1]; ++k) acc += x[idx[k]];
    out[r] = acc;
  }
}

void spmv_scalar(const std::int32_t* offsets, const std::int32_t* idx, const double* w,
                 std::size_t rows, const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::int32_t k = offsets[r]; k < offsets[r + 1]; ++k) acc += w[k] * x[idx[k]];
    out[r] = acc;
  }
}

constexpr Ops kScalarOps = {
    "scalar",         dot_scalar,        sum_scalar, axpy_scalar,
    wxpy_scalar,      quadform_diag_scalar, gather_sum_scalar, spmv_scalar,
};

const Ops* select_backend() {
  const char* force = std::getenv("CARMM_SIMD");
#if defined(CARMM_HAVE_AVX2_TU)
  if (force != nullptr) {
    std::string s(force);
    if (s == "scalar") return &kScalarOps;
    if (s == "avx2" && cpu_has_avx2()) return &avx2_ops();
    return &kScalarOps;
  }
  if (cpu_has_avx2()) return &avx2_ops();
#else
  (void)force;
#endif
  return &kScalarOps;
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

const Ops& dispatch() {
  static const Ops* backend = select_backend();
  return *backend;
}

}  // namespace carmm::kernels
