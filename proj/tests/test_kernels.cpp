#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "carmm/kernels.hpp"
#include "carmm/rng.hpp"
#include "testutil.hpp"

using namespace carmm;

namespace {

// Random CSR structure with the given row count over `cols` columns.
struct Csr {
  std::vector<std::int32_t> offsets;
  std::vector<std::int32_t> idx;
  std::vector<double> w;
};

Csr random_csr(int rows, int cols, Rng& rng) {
  Csr csr;
  csr.offsets.push_back(0);
  for (int r = 0; r < rows; ++r) {
    int len = rng.uniform_int(0, 9);
    for (int k = 0; k < len; ++k) {
      csr.idx.push_back(rng.uniform_int(0, cols - 1));
      csr.w.push_back(rng.uniform(-2.0, 2.0));
    }
    csr.offsets.push_back(static_cast<std::int32_t>(csr.idx.size()));
  }
  return csr;
}

}  // namespace

TEST_CASE("reference kernels compute the expected arithmetic") {
  const auto& ops = kernels::scalar_ops();
  std::vector<double> a = {1.0, 2.0, 3.0};
  std::vector<double> b = {4.0, -1.0, 0.5};
  CHECK(ops.dot(a.data(), b.data(), 3) == doctest::Approx(1.0 * 4 - 2 + 1.5));
  CHECK(ops.sum(a.data(), 3) == doctest::Approx(6.0));

  std::vector<double> y = {1.0, 1.0, 1.0};
  ops.axpy(2.0, a.data(), y.data(), 3);
  CHECK(y[0] == doctest::Approx(3.0));
  CHECK(y[2] == doctest::Approx(7.0));

  std::vector<double> w = {2.0, 0.0, 1.0};
  CHECK(ops.quadform_diag(w.data(), a.data(), b.data(), 3) ==
        doctest::Approx(2.0 * 1 * 4 + 0 + 1 * 3 * 0.5));

  y = {0.0, 0.0, 0.0};
  ops.wxpy(3.0, w.data(), a.data(), y.data(), 3);
  CHECK(y[0] == doctest::Approx(6.0));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(y[2] == doctest::Approx(9.0));
}

TEST_CASE("dispatched backend matches the scalar reference") {
  const auto& ref = kernels::scalar_ops();
  const auto& fast = kernels::dispatch();
  INFO("backend: ", fast.name);

  Rng rng(20240811, 1);
  // sizes straddling the vector width, including remainders
  for (int n : {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 33, 100, 257}) {
    auto a = testutil::random_vector(std::max(n, 1), rng);
    auto b = testutil::random_vector(std::max(n, 1), rng);
    auto w = testutil::random_vector(std::max(n, 1), rng, 0.1, 3.0);

    CHECK(testutil::close_rel(ref.dot(a.data(), b.data(), n), fast.dot(a.data(), b.data(), n),
                              1e-13));
    CHECK(testutil::close_rel(ref.sum(a.data(), n), fast.sum(a.data(), n), 1e-13));
    CHECK(testutil::close_rel(ref.quadform_diag(w.data(), a.data(), b.data(), n),
                              fast.quadform_diag(w.data(), a.data(), b.data(), n), 1e-13));

    auto y1 = b;
    auto y2 = b;
    ref.axpy(0.7, a.data(), y1.data(), n);
    fast.axpy(0.7, a.data(), y2.data(), n);
    for (int i = 0; i < n; ++i) CHECK(testutil::close_rel(y1[i], y2[i], 1e-14));

    y1 = b;
    y2 = b;
    ref.wxpy(-1.3, w.data(), a.data(), y1.data(), n);
    fast.wxpy(-1.3, w.data(), a.data(), y2.data(), n);
    for (int i = 0; i < n; ++i) CHECK(testutil::close_rel(y1[i], y2[i], 1e-14));
  }
}

TEST_CASE("csr kernels match the scalar reference on random structures") {
  const auto& ref = kernels::scalar_ops();
  const auto& fast = kernels::dispatch();
  Rng rng(7, 2);

  for (int trial = 0; trial < 50; ++trial) {
    int rows = rng.uniform_int(1, 40);
    int cols = rng.uniform_int(1, 60);
    Csr csr = random_csr(rows, cols, rng);
    auto x = testutil::random_vector(cols, rng);

    std::vector<double> out_ref(rows), out_fast(rows);
    ref.gather_sum(csr.offsets.data(), csr.idx.data(), rows, x.data(), out_ref.data());
    fast.gather_sum(csr.offsets.data(), csr.idx.data(), rows, x.data(), out_fast.data());
    for (int r = 0; r < rows; ++r) CHECK(testutil::close_rel(out_ref[r], out_fast[r], 1e-13));

    ref.spmv(csr.offsets.data(), csr.idx.data(), csr.w.data(), rows, x.data(), out_ref.data());
    fast.spmv(csr.offsets.data(), csr.idx.data(), csr.w.data(), rows, x.data(),
              out_fast.data());
    for (int r = 0; r < rows; ++r) CHECK(testutil::close_rel(out_ref[r], out_fast[r], 1e-13));
  }
}

#if defined(CARMM_HAVE_AVX2_TU)
TEST_CASE("avx2 variant is exercised directly when the cpu supports it") {
  if (!kernels::cpu_has_avx2()) return;
  const auto& ref = kernels::scalar_ops();
  const auto& avx = kernels::avx2_ops();
  CHECK(std::string(avx.name) == "avx2");

  Rng rng(99, 3);
  auto a = testutil::random_vector(1001, rng);
  auto b = testutil::random_vector(1001, rng);
  CHECK(testutil::close_rel(ref.dot(a.data(), b.data(), 1001),
                            avx.dot(a.data(), b.data(), 1001), 1e-13));
}
#endif
