#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "carmm/compare.hpp"
#include "carmm/errors.hpp"
#include "carmm/rng.hpp"
#include "testutil.hpp"

using namespace carmm;

TEST_CASE("saturated deviance vanishes at the saturated fit") {
  std::vector<long long> y = {0, 3, 17, 2};
  std::vector<double> mu = {1e-9, 3.0, 17.0, 2.0};
  mu[0] = 1e-300;  // y = 0 term: first summand is defined as 0, second -> 0
  CHECK(saturated_deviance(y, mu, 2.0) == doctest::Approx(0.0).epsilon(1e-10));

  std::vector<long long> y2 = {4, 9};
  std::vector<double> mu2 = {4.0, 9.0};
  for (double psi : {0.5, 3.0, 50.0})
    CHECK(saturated_deviance(y2, mu2, psi) == doctest::Approx(0.0));
}

TEST_CASE("hand-evaluated zero-count case") {
  // y=0, mu=2, psi=1: 2 * [0 - (0+1) log((1+0)/(1+2))] = 2 log 3
  CHECK(saturated_deviance({0}, {2.0}, 1.0) ==
        doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("deviance is nonnegative with its minimum at mu = y") {
  Rng rng(1001, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = rng.uniform_int(1, 8);
    std::vector<long long> y(n);
    std::vector<double> mu(n);
    for (int i = 0; i < n; ++i) {
      y[i] = rng.uniform_int(0, 40);
      mu[i] = rng.uniform(0.05, 45.0);
    }
    double psi = rng.uniform(0.2, 30.0);
    CHECK(saturated_deviance(y, mu, psi) >= -1e-12);
  }

  // perturbation around the saturated point increases the deviance
  std::vector<long long> y = {5, 2, 11};
  std::vector<double> mu = {5.0, 2.0, 11.0};
  double base = saturated_deviance(y, mu, 3.0);
  for (int i = 0; i < 3; ++i) {
    for (double eps : {-0.1, 0.1}) {
      auto bumped = mu;
      bumped[i] += eps;
      CHECK(saturated_deviance(y, bumped, 3.0) > base);
    }
  }
}

TEST_CASE("dic on a degenerate posterior has zero p_d") {
  std::vector<long long> y = {3, 8};
  std::vector<std::vector<double>> mu(10, {2.5, 9.0});
  std::vector<double> psi(10, 4.0);
  DicResult r = dic(mu, psi, y);
  CHECK(r.p_d == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.dic == doctest::Approx(r.d_bar).epsilon(1e-12));
}

TEST_CASE("dic two-draw case matches the spreadsheet oracle") {
  std::vector<long long> y = {4, 1};
  std::vector<std::vector<double>> mu = {{3.0, 1.5}, {5.0, 0.5}};
  std::vector<double> psi = {2.0, 3.0};

  double d1 = saturated_deviance(y, mu[0], psi[0]);
  double d2 = saturated_deviance(y, mu[1], psi[1]);
  double d_bar = 0.5 * (d1 + d2);
  double d_at_mean = saturated_deviance(y, {4.0, 1.0}, 2.5);
  DicResult r = dic(mu, psi, y);
  CHECK(r.d_bar == doctest::Approx(d_bar).epsilon(1e-10));
  CHECK(r.d_at_mean == doctest::Approx(d_at_mean).epsilon(1e-10));
  CHECK(r.p_d == doctest::Approx(d_bar - d_at_mean).epsilon(1e-10));
  CHECK(r.dic == doctest::Approx(d_bar + (d_bar - d_at_mean)).epsilon(1e-10));
}

TEST_CASE("tap handles ties with half weight") {
  std::vector<long long> y = {3, 7};
  std::vector<std::vector<long long>> same(20, y);
  auto p = tap(y, same);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  std::vector<std::vector<long long>> below(20, {1, 2});
  p = tap(y, below);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 1.0);
}

TEST_CASE("tap matches the brute-force count oracle exactly") {
  Rng rng(1002, 0);
  const int n = 6, draws = 37;
  std::vector<long long> y(n);
  for (auto& v : y) v = rng.uniform_int(0, 10);
  std::vector<std::vector<long long>> yrep(draws, std::vector<long long>(n));
  for (auto& row : yrep)
    for (auto& v : row) v = rng.uniform_int(0, 10);

  auto p = tap(y, yrep);
  for (int i = 0; i < n; ++i) {
    long below = 0, equal = 0;
    for (int s = 0; s < draws; ++s) {
      below += yrep[s][i] < y[i] ? 1 : 0;
      equal += yrep[s][i] == y[i] ? 1 : 0;
    }
    // exact rational with denominator = draw count
    CHECK(p[i] == (below + 0.5 * equal) / draws);
  }
}

TEST_CASE("tail proportions") {
  CHECK(tail_proportions({0.5, 0.5, 0.5}, {0.05, 0.1}) == std::vector<double>{0.0, 0.0});
  auto t = tail_proportions({0.01, 0.99, 0.5, 0.5}, {0.05});
  CHECK(t[0] == doctest::Approx(0.5));
  // boundary values are included in the tail
  auto t2 = tail_proportions({0.05, 0.95}, {0.05});
  CHECK(t2[0] == doctest::Approx(1.0));
}

TEST_CASE("loo with constant log-likelihood returns the constant") {
  std::vector<std::vector<double>> loglik(30, std::vector<double>(4, -1.7));
  LooResult r = loo_elpd(loglik);
  for (double v : r.pointwise) CHECK(v == doctest::Approx(-1.7).epsilon(1e-12));
  CHECK(r.elpd_loo == doctest::Approx(-1.7 * 4).epsilon(1e-12));
  CHECK(r.looic == doctest::Approx(2 * 1.7 * 4).epsilon(1e-12));
}

TEST_CASE("loo without smoothing equals raw importance sampling") {
  // tiny case: the raw estimator reduces to the harmonic mean identity
  std::vector<std::vector<double>> loglik = {{-1.0, -2.5}, {-1.3, -2.0}, {-0.7, -2.2}};
  LooResult r = loo_elpd(loglik, /*smooth_tails=*/false);
  for (int i = 0; i < 2; ++i) {
    double denom = 0.0;
    for (int s = 0; s < 3; ++s) denom += std::exp(-loglik[s][i]);
    double oracle = std::log(3.0 / denom);
    CHECK(r.pointwise[i] == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("loo with one draw is that draw's log likelihood") {
  std::vector<std::vector<double>> loglik = {{-0.4, -1.1, -2.2}};
  LooResult r = loo_elpd(loglik, false);
  CHECK(r.elpd_loo == doctest::Approx(-0.4 - 1.1 - 2.2).epsilon(1e-12));
}

TEST_CASE("smoothed loo stays close to raw on well-behaved weights") {
  Rng rng(1003, 0);
  const int draws = 400, n = 5;
  std::vector<std::vector<double>> loglik(draws, std::vector<double>(n));
  for (auto& row : loglik)
    for (auto& v : row) v = -2.0 + 0.3 * rng.normal();
  LooResult raw = loo_elpd(loglik, false);
  LooResult smooth = loo_elpd(loglik, true);
  CHECK(smooth.elpd_loo == doctest::Approx(raw.elpd_loo).epsilon(0.02));
  for (double k : smooth.pareto_k) CHECK(std::isfinite(k));
}

TEST_CASE("elpd difference formula") {
  std::vector<double> a = {-1.0, -2.0, -3.0};
  CHECK(elpd_diff_se(a, a).mean_diff == 0.0);
  CHECK(elpd_diff_se(a, a).se == 0.0);

  std::vector<double> b = {-1.5, -2.5, -3.5};  // constant difference 0.5
  ElpdDiff d = elpd_diff_se(a, b);
  CHECK(d.mean_diff == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(d.se == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(1004, 0);
  for (int trial = 0; trial < 20; ++trial) {
    int n = rng.uniform_int(2, 30);
    auto pa = testutil::random_vector(n, rng, -5.0, 0.0);
    auto pb = testutil::random_vector(n, rng, -5.0, 0.0);
    ElpdDiff diff = elpd_diff_se(pa, pb);

    double total = 0.0, mean = 0.0;
    for (int i = 0; i < n; ++i) {
      total += pa[i] - pb[i];
      mean += (pa[i] - pb[i]) / n;
    }
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
      double dev = pa[i] - pb[i] - mean;
      var += dev * dev;
    }
    var /= (n - 1);
    CHECK(diff.mean_diff == doctest::Approx(total).epsilon(1e-12));
    CHECK(diff.se == doctest::Approx(std::sqrt(n * var)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(elpd_diff_se({1.0}, {1.0, 2.0}), LengthMismatchError);
}
