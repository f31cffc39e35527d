#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "carmm/diagnostics.hpp"
#include "carmm/errors.hpp"
#include "carmm/rng.hpp"
#include "carmm/sampler.hpp"
#include "carmm/simulate.hpp"
#include "testutil.hpp"

using namespace carmm;

namespace {

TargetDensity standard_normal(int dim) {
  TargetDensity t;
  t.dim = dim;
  t.logp = [dim](const std::vector<double>& u, std::vector<double>* grad) {
    double lp = 0.0;
    if (grad) grad->assign(dim, 0.0);
    for (int i = 0; i < dim; ++i) {
      lp -= 0.5 * u[i] * u[i];
      if (grad) (*grad)[i] = -u[i];
    }
    return lp;
  };
  return t;
}

struct ModelFixture {
  SpatialGraph graph;
  MembershipMatrix H;
  Dataset data;
  ModelSpec spec;
  StateLayout layout;
  TargetDensity target;

  explicit ModelFixture(std::uint64_t seed) {
    Rng rng(seed, 0);
    graph = make_lattice(3, 3);
    H = make_membership(6, graph, 3, rng);
    spec = ModelSpec::make(PriorKind::gmcar, false);
    TruthSpec truth = TruthSpec::no_covariates(PriorKind::gmcar);
    std::vector<double> E1 = make_offsets(graph.n, rng);
    std::vector<double> E2 = make_offsets(H.m, rng);
    data = generate_dataset(truth, graph, H, nullptr, E1, E2, rng).data;
    layout = StateLayout::make(spec, graph.n, 0);
    target.dim = layout.dim;
    target.logp = [this](const std::vector<double>& u, std::vector<double>* grad) {
      return logpost_unconstrained(u, data, spec, graph, H, nullptr, layout, grad);
    };
  }
};

double hamiltonian(const TargetDensity& target, const std::vector<double>& q,
                   const std::vector<double>& r, const std::vector<double>& inv_mass) {
  double kinetic = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) kinetic += 0.5 * inv_mass[i] * r[i] * r[i];
  return -target.logp(q, nullptr) + kinetic;
}

}  // namespace

TEST_CASE("leapfrog is reversible") {
  ModelFixture fx(31);
  Rng rng(31, 5);
  std::vector<double> q0(fx.target.dim), r0(fx.target.dim);
  for (auto& v : q0) v = rng.uniform(-0.5, 0.5);
  for (auto& v : r0) v = rng.normal();
  std::vector<double> inv_mass(fx.target.dim, 1.0), grad(fx.target.dim);

  auto q = q0;
  auto r = r0;
  const int steps = 25;
  leapfrog(fx.target, q, r, inv_mass, 0.01, steps, grad);
  for (auto& v : r) v = -v;
  leapfrog(fx.target, q, r, inv_mass, 0.01, steps, grad);
  for (auto& v : r) v = -v;

  for (int i = 0; i < fx.target.dim; ++i) {
    CHECK(q[i] == doctest::Approx(q0[i]).epsilon(1e-8));
    CHECK(r[i] == doctest::Approx(r0[i]).epsilon(1e-8));
  }
}

TEST_CASE("hamiltonian drift is tiny at small step size") {
  ModelFixture fx(32);
  Rng rng(32, 5);
  std::vector<double> q(fx.target.dim), r(fx.target.dim);
  for (auto& v : q) v = rng.uniform(-0.5, 0.5);
  for (auto& v : r) v = rng.normal();
  std::vector<double> inv_mass(fx.target.dim, 1.0), grad(fx.target.dim);

  double h0 = hamiltonian(fx.target, q, r, inv_mass);
  leapfrog(fx.target, q, r, inv_mass, 1e-3, 50, grad);
  double h1 = hamiltonian(fx.target, q, r, inv_mass);
  CHECK(std::fabs(h1 - h0) < 1e-4);
}

TEST_CASE("standard normal target: moments and acceptance") {
  FitConfig config;
  config.chains = 4;
  config.iterations = 2000;  // 1000 kept per chain
  config.leapfrog_steps = 8;
  config.seed = 11;

  TargetDensity target = standard_normal(2);
  auto chains = sample_chains(target, config);
  REQUIRE(chains.size() == 4);

  double mean0 = 0.0, mean1 = 0.0, var0 = 0.0, var1 = 0.0;
  long count = 0;
  for (const auto& c : chains) {
    REQUIRE(static_cast<int>(c.draws.size()) == config.kept());
    for (const auto& d : c.draws) {
      mean0 += d[0];
      mean1 += d[1];
      var0 += d[0] * d[0];
      var1 += d[1] * d[1];
      ++count;
    }
  }
  mean0 /= count;
  mean1 /= count;
  var0 = var0 / count - mean0 * mean0;
  var1 = var1 / count - mean1 * mean1;

  CHECK(std::fabs(mean0) < 0.05);
  CHECK(std::fabs(mean1) < 0.05);
  CHECK(std::fabs(var0 - 1.0) < 0.1);
  CHECK(std::fabs(var1 - 1.0) < 0.1);

  // detailed-balance smoke: acceptance stays near the adaptation target
  for (const auto& c : chains) CHECK(std::fabs(c.accept_rate - 0.8) < 0.1);
}

TEST_CASE("fixed seeds reproduce draws bit for bit") {
  FitConfig config;
  config.chains = 2;
  config.iterations = 200;
  config.seed = 77;
  config.leapfrog_steps = 8;

  TargetDensity target = standard_normal(3);
  auto a = sample_chains(target, config);
  auto b = sample_chains(target, config);
  REQUIRE(a.size() == b.size());
  for (std::size_t c = 0; c < a.size(); ++c) {
    REQUIRE(a[c].draws.size() == b[c].draws.size());
    for (std::size_t it = 0; it < a[c].draws.size(); ++it)
      CHECK(a[c].draws[it] == b[c].draws[it]);
  }

  config.seed = 78;
  auto d = sample_chains(target, config);
  CHECK(a[0].draws[0] != d[0].draws[0]);
}

TEST_CASE("initialize_chain respects constraints and varies by stream") {
  Rng rng1(5, 1), rng1_again(5, 1), rng2(5, 2);
  SpatialGraph g = make_lattice(2, 3);
  ModelSpec spec = ModelSpec::make(PriorKind::mcar, false);

  ParameterState a = initialize_chain(spec, g, 0, rng1);
  ParameterState a_again = initialize_chain(spec, g, 0, rng1_again);
  ParameterState b = initialize_chain(spec, g, 0, rng2);

  auto [lo, hi] = spec.alpha_box();
  CHECK(a.alpha1 > lo);
  CHECK(a.alpha1 < hi);
  CHECK(a.alpha1 == a.alpha2);  // mcar ties the alphas
  CHECK(a.tau1 > 0.0);
  CHECK(a.tau2 > 0.0);
  CHECK(a.psi1 > 0.0);
  CHECK(a.eta1 == 0.0);

  CHECK(a.alpha1 == a_again.alpha1);
  CHECK(a.phi1 == a_again.phi1);
  CHECK(a.alpha1 != b.alpha1);
}

TEST_CASE("hmc_fit produces consistent derived quantities") {
  ModelFixture fx(33);
  FitConfig config;
  config.chains = 2;
  config.iterations = 300;
  config.leapfrog_steps = 16;
  config.seed = 41;

  PosteriorSamples samples = hmc_fit(fx.data, fx.spec, fx.graph, fx.H, nullptr, config);
  REQUIRE(samples.chains == 2);
  REQUIRE(samples.kept == 150);
  REQUIRE(samples.n == 9);
  REQUIRE(samples.m == 6);

  // names: alpha1 alpha2 tau1 tau2 eta0 eta1 gamma1 gamma2 psi1 psi2
  REQUIRE(samples.scalar_count() == 10);
  CHECK(samples.names[0] == "alpha1");
  CHECK(samples.names.back() == "psi2");

  // derived rho identities at every stored iteration
  int gamma1_idx = 6, gamma2_idx = 7;
  for (const auto& chain : samples.chain) {
    for (int it = 0; it < samples.kept; ++it) {
      double gamma1 = chain.scalars[it * 10 + gamma1_idx];
      double gamma2 = chain.scalars[it * 10 + gamma2_idx];
      for (int i = 0; i < samples.n; ++i) {
        double zeta1 = gamma1 + chain.phi1[it * samples.n + i];
        CHECK(chain.rho1[it * samples.n + i] ==
              doctest::Approx(std::exp(zeta1)).epsilon(1e-12));
        double zeta2 = gamma2 + chain.phi2[it * samples.n + i];
        CHECK(chain.zeta2_exp[it * samples.n + i] ==
              doctest::Approx(std::exp(zeta2)).epsilon(1e-12));
      }
      for (int j = 0; j < samples.m; ++j) {
        double acc = 0.0;
        for (auto k = fx.H.row_offsets[j]; k < fx.H.row_offsets[j + 1]; ++k) {
          int i = fx.H.col_indices[k];
          acc += fx.H.weights[k] * (gamma2 + chain.phi2[it * samples.n + i]);
        }
        CHECK(chain.rho2[it * samples.m + j] ==
              doctest::Approx(std::exp(acc)).epsilon(1e-10));
      }
    }
  }

  // determinism of the full fit path, including threaded chains
  PosteriorSamples again = hmc_fit(fx.data, fx.spec, fx.graph, fx.H, nullptr, config);
  for (int c = 0; c < samples.chains; ++c) {
    CHECK(samples.chain[c].scalars == again.chain[c].scalars);
    CHECK(samples.chain[c].yrep1 == again.chain[c].yrep1);
    CHECK(samples.chain[c].loglik == again.chain[c].loglik);
  }
}

TEST_CASE("non-finite targets are rejected at initialization") {
  TargetDensity bad;
  bad.dim = 1;
  bad.logp = [](const std::vector<double>&, std::vector<double>* grad) {
    if (grad) grad->assign(1, 0.0);
    return -std::numeric_limits<double>::infinity();
  };
  FitConfig config;
  config.chains = 1;
  config.iterations = 10;
  CHECK_THROWS_AS(sample_chains(bad, config), NonFiniteDensityError);
}

TEST_CASE("posterior concentrates on a gaussian with known moments") {
  // one-dimensional N(3, 2^2) target
  TargetDensity t;
  t.dim = 1;
  t.logp = [](const std::vector<double>& u, std::vector<double>* grad) {
    double z = (u[0] - 3.0) / 2.0;
    if (grad) {
      grad->assign(1, 0.0);
      (*grad)[0] = -z / 2.0;
    }
    return -0.5 * z * z;
  };
  FitConfig config;
  config.chains = 4;
  config.iterations = 1500;
  config.leapfrog_steps = 8;
  config.seed = 10;
  auto chains = sample_chains(t, config);

  std::vector<std::vector<double>> draws;
  for (const auto& c : chains) {
    std::vector<double> flat;
    for (const auto& d : c.draws) flat.push_back(d[0]);
    draws.push_back(flat);
  }
  double mean = 0.0;
  long count = 0;
  for (const auto& c : draws)
    for (double v : c) {
      mean += v;
      ++count;
    }
  mean /= count;
  CHECK(mean == doctest::Approx(3.0).epsilon(0.05));
  CHECK(split_rhat(draws) < 1.01);
}
