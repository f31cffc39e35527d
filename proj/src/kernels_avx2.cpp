// AVX2+FMA kernel variants. This TU is compiled with -mavx2 -mfma; nothing
// here may run unless cpu_has_avx2() returned true.

#include "carmm/kernels.hpp"

#include <immintrin.h>

namespace carmm::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void wxpy_avx2(double a, const double* w, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, wx, vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * w[i] * x[i];
}

double quadform_diag_avx2(const double* w, const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
    acc = _mm256_fmadd_pd(wx, _mm256_loadu_pd(y + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

void gather_sum_avx2(const std::int32_t* offsets, const std::int32_t* idx, std::size_t rows,
                     const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const std::int32_t begin = offsets[r];
    const std::int32_t end = offsets[r + 1];
    std::int32_t k = begin;
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
      acc = _mm256_add_pd(acc, _mm256_i32gather_pd(x, vi, 8));
    }
    double s = hsum(acc);
    for (; k < end; ++k) s += x[idx[k]];
    out[r] = s;
  }
}

void spmv_avx2(const std::int32_t* offsets, const std::int32_t* idx, const double* w,
               std::size_t rows, const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const std::int32_t begin = offsets[r];
    const std::int32_t end = offsets[r + 1];
    std::int32_t k = begin;
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
      __m256d vx = _mm256_i32gather_pd(x, vi, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + k), vx, acc);
    }
    double s = hsum(acc);
    for (; k < end; ++k) s += w[k] * x[idx[k]];
    out[r] = s;
  }
}

constexpr Ops kAvx2Ops = {
    "avx2",      dot_avx2,           sum_avx2,        axpy_avx2,
    wxpy_avx2,   quadform_diag_avx2, gather_sum_avx2, spmv_avx2,
};

}  // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace carmm::kernels
