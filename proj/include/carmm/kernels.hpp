#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Vector kernels behind the model and sampler inner loops. Every kernel has a
// scalar reference implementation and, on x86-64, an AVX2+FMA variant compiled
// in a separate TU; dispatch() picks the best supported variant once at first
// use. Set CARMM_SIMD=scalar|avx2 to force a backend. Variants agree with the
// scalar reference up to floating-point reassociation (see test_kernels).

namespace carmm::kernels {

struct Ops {
  const char* name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i a[i]
  double (*sum)(const double* a, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y[i] += a * w[i] * x[i]   (leapfrog position update with diagonal metric)
  void (*wxpy)(double a, const double* w, const double* x, double* y, std::size_t n);
  // sum_i w[i] * x[i] * y[i]  (diagonal quadratic form)
  double (*quadform_diag)(const double* w, const double* x, const double* y, std::size_t n);
  // out[r] = sum over CSR row r of x[idx[k]]        (adjacency matvec, unit weights)
  void (*gather_sum)(const std::int32_t* offsets, const std::int32_t* idx, std::size_t rows,
                     const double* x, double* out);
  // out[r] = sum over CSR row r of w[k] * x[idx[k]] (weighted sparse matvec)
  void (*spmv)(const std::int32_t* offsets, const std::int32_t* idx, const double* w,
               std::size_t rows, const double* x, double* out);
};

// Scalar reference; always available and the oracle in equivalence tests.
const Ops& scalar_ops();

#if defined(CARMM_HAVE_AVX2_TU)
const Ops& avx2_ops();    // only valid to call on cpus with avx2+fma
bool cpu_has_avx2();
#endif

// Backend chosen for this process (env override, then best supported).
const Ops& dispatch();

inline std::string backend_name() { return dispatch().name; }

}  // namespace carmm::kernels
