#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "carmm/errors.hpp"
#include "carmm/model.hpp"
#include "carmm/negbin.hpp"
#include "carmm/rng.hpp"
#include "carmm/simulate.hpp"
#include "carmm/transforms.hpp"
#include "testutil.hpp"

using namespace carmm;

namespace {

struct Instance {
  SpatialGraph graph;
  MembershipMatrix H;
  Dataset data;
  ModelSpec spec;
  CovariatePreprocess pre;
  ParameterState state;
};

MembershipMatrix random_membership(int m, int n, Rng& rng) {
  std::vector<MembershipTriplet> triplets;
  for (int j = 0; j < m; ++j) {
    int support = rng.uniform_int(1, std::min(n, 6));
    for (int k = 0; k < support; ++k)
      triplets.push_back({j, rng.uniform_int(0, n - 1), rng.uniform(0.05, 1.0)});
  }
  return build_membership(triplets, m, n, true);
}

ParameterState random_state(const ModelSpec& spec, int n, int p, Rng& rng) {
  ParameterState s;
  s.phi1 = testutil::random_vector(n, rng);
  s.phi2 = testutil::random_vector(n, rng);
  auto [lo, hi] = spec.alpha_box();
  s.alpha1 = rng.uniform(lo + 0.05, hi - 0.05);
  s.alpha2 = spec.prior == PriorKind::mcar ? s.alpha1 : rng.uniform(lo + 0.05, hi - 0.05);
  s.tau1 = rng.uniform(0.5, 8.0);
  s.tau2 = rng.uniform(0.5, 8.0);
  s.eta0 = rng.uniform(-1.0, 1.0);
  s.eta1 = spec.prior == PriorKind::mcar ? 0.0 : rng.uniform(-0.7, 0.7);
  s.gamma1 = rng.uniform(-1.0, 1.0);
  s.gamma2 = rng.uniform(-1.0, 1.0);
  if (spec.use_covariates) {
    s.beta1 = testutil::random_vector(p, rng);
    s.beta2 = testutil::random_vector(p, rng);
  }
  s.psi1 = rng.uniform(1.0, 25.0);
  s.psi2 = rng.uniform(1.0, 25.0);
  return s;
}

Instance make_instance(PriorKind kind, bool covariates, int n_target, int m, Rng& rng) {
  Instance inst;
  inst.graph = testutil::random_connected_graph(n_target, rng);
  const int n = inst.graph.n;
  inst.H = random_membership(m, n, rng);
  inst.spec = ModelSpec::make(kind, covariates);

  const int p = covariates ? 2 : 0;
  if (covariates) {
    std::vector<std::vector<double>> X(n, std::vector<double>(p));
    for (auto& row : X)
      for (auto& v : row) v = rng.uniform(0.0, 1.0);
    inst.data.X = X;
    inst.pre = preprocess_covariates(X);
  }
  inst.data.y1.resize(n);
  inst.data.E1.resize(n);
  for (int i = 0; i < n; ++i) {
    inst.data.y1[i] = rng.uniform_int(0, 25);
    inst.data.E1[i] = rng.uniform(2.0, 30.0);
  }
  inst.data.y2.resize(m);
  inst.data.E2.resize(m);
  for (int j = 0; j < m; ++j) {
    inst.data.y2[j] = rng.uniform_int(0, 40);
    inst.data.E2[j] = rng.uniform(2.0, 30.0);
  }
  inst.state = random_state(inst.spec, n, p, rng);
  return inst;
}

const CovariatePreprocess* pre_of(const Instance& inst) {
  return inst.spec.use_covariates ? &inst.pre : nullptr;
}

// test-side hyperprior densities for the term-by-term oracle
double oracle_normal(double x, double sd) {
  return -0.5 * std::log(2.0 * M_PI * sd * sd) - x * x / (2.0 * sd * sd);
}
double oracle_halfnormal(double x, double s) {
  return 0.5 * std::log(2.0) - 0.5 * std::log(M_PI) - std::log(s) - x * x / (2.0 * s * s);
}
double oracle_gamma(double x, double a, double b) {
  return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(x) - b * x;
}

}  // namespace

TEST_CASE("gmcar at zero phis reduces to the normalizers") {
  SpatialGraph k3 = build_graph({{0, 1}, {1, 2}, {0, 2}}, 3);
  std::vector<double> zero(3, 0.0);
  double expected = 0.5 * (car_logdet(k3, 0.3, 2.0) + car_logdet(k3, -0.4, 5.0)) -
                    3.0 * std::log(2.0 * M_PI);
  CHECK(gmcar_logdensity(zero, zero, 0.3, -0.4, 0.0, 0.0, 2.0, 5.0, k3) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("gmcar matches the dense conditioning oracle") {
  Rng rng(501, 0);
  for (int trial = 0; trial < 60; ++trial) {
    int n = rng.uniform_int(2, 20);
    SpatialGraph g = testutil::random_connected_graph(n, rng);
    double a1 = rng.uniform(-0.9, 0.9), a2 = rng.uniform(-0.9, 0.9);
    double eta0 = rng.uniform(-1.0, 1.0), eta1 = rng.uniform(-0.8, 0.8);
    double t1 = rng.uniform(0.2, 6.0), t2 = rng.uniform(0.2, 6.0);
    auto phi1 = testutil::random_vector(n, rng);
    auto phi2 = testutil::random_vector(n, rng);

    Eigen::VectorXd v(2 * n);
    for (int i = 0; i < n; ++i) {
      v(i) = phi1[i];
      v(n + i) = phi2[i];
    }
    double oracle = testutil::dense_mvn_logpdf(
        v, testutil::dense_gmcar_precision(g, a1, a2, eta0, eta1, t1, t2));
    double got = gmcar_logdensity(phi1, phi2, a1, a2, eta0, eta1, t1, t2, g);
    CHECK(testutil::close_rel(got, oracle, 1e-9));
  }
}

TEST_CASE("scaling tau1 by 4 at the conditional mean moves only the normalizer") {
  Rng rng(502, 0);
  SpatialGraph g = testutil::random_connected_graph(9, rng);
  auto phi2 = testutil::random_vector(g.n, rng);
  double eta0 = 0.4, eta1 = 0.2;
  std::vector<double> w_phi2 = g.neighbor_sum(phi2);
  std::vector<double> phi1(g.n);
  for (int i = 0; i < g.n; ++i) phi1[i] = eta0 * phi2[i] + eta1 * w_phi2[i];

  double base = gmcar_logdensity(phi1, phi2, 0.3, 0.5, eta0, eta1, 2.0, 3.0, g);
  double scaled = gmcar_logdensity(phi1, phi2, 0.3, 0.5, eta0, eta1, 8.0, 3.0, g);
  CHECK(scaled - base == doctest::Approx(0.5 * g.n * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("mcar equals gmcar under the constraint mapping, exactly") {
  Rng rng(503, 0);
  SpatialGraph g = testutil::random_connected_graph(11, rng);
  auto phi1 = testutil::random_vector(g.n, rng);
  auto phi2 = testutil::random_vector(g.n, rng);
  double a = 0.55, t1 = 2.5, t2 = 1.5, eta0 = -0.3;
  CHECK(mcar_logdensity(phi1, phi2, a, t1, t2, eta0, g) ==
        gmcar_logdensity(phi1, phi2, a, a, eta0, 0.0, t1, t2, g));
}

TEST_CASE("mcar matches the dense Kronecker form under the Lambda mapping") {
  Rng rng(504, 0);
  for (int trial = 0; trial < 40; ++trial) {
    int n = rng.uniform_int(2, 15);
    SpatialGraph g = testutil::random_connected_graph(n, rng);
    double alpha = rng.uniform(0.05, 0.9);

    // random symmetric positive definite Lambda
    double l11 = rng.uniform(0.5, 4.0);
    double l12 = rng.uniform(-0.8, 0.8) * std::sqrt(l11);
    double l22 = l12 * l12 / l11 + rng.uniform(0.3, 3.0);
    Eigen::Matrix2d lambda;
    lambda << l11, l12, l12, l22;

    double tau1 = l11;
    double tau2 = l22 - l12 * l12 / l11;
    double eta0 = -l12 / l11;

    auto phi1 = testutil::random_vector(n, rng);
    auto phi2 = testutil::random_vector(n, rng);
    Eigen::VectorXd v(2 * n);
    for (int i = 0; i < n; ++i) {
      v(i) = phi1[i];
      v(n + i) = phi2[i];
    }
    double oracle =
        testutil::dense_mvn_logpdf(v, testutil::dense_kronecker_precision(g, alpha, lambda));
    double got = mcar_logdensity(phi1, phi2, alpha, tau1, tau2, eta0, g);
    CHECK(testutil::close_rel(got, oracle, 1e-9));
  }
}

TEST_CASE("univariate CAR full conditionals have the stated mean and precision") {
  // Brook's lemma consistency, via dense Gaussian conditioning
  Rng rng(505, 0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = rng.uniform_int(3, 14);
    SpatialGraph g = testutil::random_connected_graph(n, rng);
    double alpha = rng.uniform(0.05, 0.95);
    double tau = rng.uniform(0.3, 5.0);
    Eigen::MatrixXd P = testutil::dense_car_precision(g, alpha, tau);
    auto phi = testutil::random_vector(n, rng);

    for (int i = 0; i < n; ++i) {
      double cond_prec = P(i, i);
      double cond_mean = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) cond_mean -= P(i, j) * phi[j];
      cond_mean /= cond_prec;

      double neighbor_avg = 0.0;
      for (auto k = g.adj_offsets[i]; k < g.adj_offsets[i + 1]; ++k)
        neighbor_avg += phi[g.adj_indices[k]];
      neighbor_avg /= g.degrees[i];

      CHECK(testutil::close_rel(cond_prec, tau * g.degrees[i], 1e-10));
      CHECK(testutil::close_rel(cond_mean, alpha * neighbor_avg, 1e-10));
    }
  }
}

TEST_CASE("linear predictor identities") {
  Rng rng(506, 0);
  Instance inst = make_instance(PriorKind::gmcar, false, 8, 5, rng);
  const int n = inst.graph.n;

  SUBCASE("beta = 0 and phi = 0 give constant predictors") {
    ParameterState s = inst.state;
    std::fill(s.phi1.begin(), s.phi1.end(), 0.0);
    std::fill(s.phi2.begin(), s.phi2.end(), 0.0);
    LinearPredictors lp = linear_predictors(s, inst.H, nullptr);
    for (int i = 0; i < n; ++i) CHECK(lp.zeta1[i] == doctest::Approx(s.gamma1));
    for (double v : lp.log_rho2) CHECK(v == doctest::Approx(s.gamma2).epsilon(1e-12));
  }

  SUBCASE("identity membership copies zeta2") {
    std::vector<MembershipTriplet> triplets;
    for (int i = 0; i < n; ++i) triplets.push_back({i, i, 1.0});
    MembershipMatrix identity = build_membership(triplets, n, n, false);
    LinearPredictors lp = linear_predictors(inst.state, identity, nullptr);
    for (int i = 0; i < n; ++i)
      CHECK(lp.log_rho2[i] == doctest::Approx(lp.zeta2[i]).epsilon(1e-14));
  }

  SUBCASE("matches explicit summation") {
    LinearPredictors lp = linear_predictors(inst.state, inst.H, nullptr);
    for (int j = 0; j < inst.H.m; ++j) {
      double acc = 0.0;
      for (auto k = inst.H.row_offsets[j]; k < inst.H.row_offsets[j + 1]; ++k)
        acc += inst.H.weights[k] *
               (inst.state.gamma2 + inst.state.phi2[inst.H.col_indices[k]]);
      CHECK(testutil::close_rel(lp.log_rho2[j], acc, 1e-12));
    }
  }
}

TEST_CASE("log posterior assembles its terms on the smallest valid case") {
  // n = 1 cannot satisfy d_i >= 1; the smallest case is the 2-node path
  Rng rng(507, 0);
  SpatialGraph g = build_graph({{0, 1}}, 2);
  MembershipMatrix H = build_membership({{0, 0, 0.6}, {0, 1, 0.4}}, 1, 2, true);
  ModelSpec spec = ModelSpec::make(PriorKind::gmcar, false);

  Dataset data;
  data.y1 = {3, 0};
  data.E1 = {5.0, 2.0};
  data.y2 = {7};
  data.E2 = {4.0};

  ParameterState s = random_state(spec, 2, 0, rng);

  double zeta1_0 = s.gamma1 + s.phi1[0];
  double zeta1_1 = s.gamma1 + s.phi1[1];
  double zeta2_0 = s.gamma2 + s.phi2[0];
  double zeta2_1 = s.gamma2 + s.phi2[1];
  double log_rho2 = 0.6 * zeta2_0 + 0.4 * zeta2_1;

  double expected = negbin_logpmf(3, 5.0 * std::exp(zeta1_0), s.psi1) +
                    negbin_logpmf(0, 2.0 * std::exp(zeta1_1), s.psi1) +
                    negbin_logpmf(7, 4.0 * std::exp(log_rho2), s.psi2) +
                    gmcar_logdensity(s.phi1, s.phi2, s.alpha1, s.alpha2, s.eta0, s.eta1,
                                     s.tau1, s.tau2, g) +
                    oracle_normal(s.gamma1, 5.0) + oracle_normal(s.gamma2, 5.0) +
                    oracle_normal(s.eta0, 5.0) + oracle_normal(s.eta1, 5.0) +
                    oracle_halfnormal(s.tau1, 5.0) + oracle_halfnormal(s.tau2, 5.0) +
                    oracle_gamma(s.psi1, 2.0, 0.1) + oracle_gamma(s.psi2, 2.0, 0.1) -
                    2.0 * std::log(2.0);  // two alphas uniform over (-1, 1)

  CHECK(log_posterior(s, data, spec, g, H, nullptr) ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("shifting gamma2 against phi2 leaves the likelihood unchanged") {
  Rng rng(508, 0);
  Instance inst = make_instance(PriorKind::gmcar, false, 7, 6, rng);
  const double c = 0.8;

  ParameterState shifted = inst.state;
  shifted.gamma2 += c;
  for (auto& v : shifted.phi2) v -= c;

  auto prior_terms = [&](const ParameterState& s) {
    return gmcar_logdensity(s.phi1, s.phi2, s.alpha1, s.alpha2, s.eta0, s.eta1, s.tau1,
                            s.tau2, inst.graph) +
           oracle_normal(s.gamma2, 5.0);
  };
  double lp_diff = log_posterior(shifted, inst.data, inst.spec, inst.graph, inst.H, nullptr) -
                   log_posterior(inst.state, inst.data, inst.spec, inst.graph, inst.H, nullptr);
  double prior_diff = prior_terms(shifted) - prior_terms(inst.state);
  CHECK(lp_diff == doctest::Approx(prior_diff).epsilon(1e-9));
}

TEST_CASE("phi-block gradient of the prior is the negative precision matvec") {
  Rng rng(509, 0);
  SpatialGraph g = testutil::random_connected_graph(9, rng);
  const int n = g.n;
  double a1 = 0.35, a2 = 0.6, eta0 = 0.25, eta1 = -0.15, t1 = 2.0, t2 = 3.5;
  auto phi1 = testutil::random_vector(n, rng);
  auto phi2 = testutil::random_vector(n, rng);

  Eigen::MatrixXd P = testutil::dense_gmcar_precision(g, a1, a2, eta0, eta1, t1, t2);
  Eigen::VectorXd v(2 * n);
  for (int i = 0; i < n; ++i) {
    v(i) = phi1[i];
    v(n + i) = phi2[i];
  }
  Eigen::VectorXd score = -P * v;  // zero-mean Gaussian score

  const double h = 1e-6;
  for (int i = 0; i < n; ++i) {
    auto up = phi1, down = phi1;
    up[i] += h;
    down[i] -= h;
    double fd = (gmcar_logdensity(up, phi2, a1, a2, eta0, eta1, t1, t2, g) -
                 gmcar_logdensity(down, phi2, a1, a2, eta0, eta1, t1, t2, g)) /
                (2 * h);
    CHECK(testutil::close_rel(fd, score(i), 1e-5));
  }
  for (int i = 0; i < n; ++i) {
    auto up = phi2, down = phi2;
    up[i] += h;
    down[i] -= h;
    double fd = (gmcar_logdensity(phi1, up, a1, a2, eta0, eta1, t1, t2, g) -
                 gmcar_logdensity(phi1, down, a1, a2, eta0, eta1, t1, t2, g)) /
                (2 * h);
    CHECK(testutil::close_rel(fd, score(n + i), 1e-5));
  }
}

TEST_CASE("unconstrained gradient matches finite differences") {
  Rng rng(510, 0);
  struct Case {
    PriorKind kind;
    bool covariates;
  };
  for (Case c : {Case{PriorKind::gmcar, true}, Case{PriorKind::gmcar, false},
                 Case{PriorKind::mcar, true}, Case{PriorKind::mcar, false}}) {
    Instance inst = make_instance(c.kind, c.covariates, 10, 8, rng);
    StateLayout layout =
        StateLayout::make(inst.spec, inst.graph.n, c.covariates ? inst.pre.p : 0);

    auto f = [&](const std::vector<double>& u) {
      return logpost_unconstrained(u, inst.data, inst.spec, inst.graph, inst.H, pre_of(inst),
                                   layout, nullptr);
    };

    for (int rep = 0; rep < 3; ++rep) {
      ParameterState s = random_state(inst.spec, inst.graph.n, c.covariates ? inst.pre.p : 0,
                                      rng);
      std::vector<double> u = to_unconstrained(s, inst.spec, inst.graph);
      std::vector<double> grad;
      logpost_unconstrained(u, inst.data, inst.spec, inst.graph, inst.H, pre_of(inst), layout,
                            &grad);
      for (int i = 0; i < layout.dim; ++i) {
        double fd = testutil::central_diff(f, u, i, 1e-5);
        CHECK(testutil::close_rel(grad[i], fd, 1e-6));
      }
    }
  }
}

TEST_CASE("gradient vanishes at an ascent fixed point") {
  Rng rng(511, 0);
  SpatialGraph g = make_lattice(2, 2);
  MembershipMatrix H = random_membership(3, g.n, rng);
  ModelSpec spec = ModelSpec::make(PriorKind::gmcar, false);
  Dataset data;
  data.y1 = {4, 2, 7, 1};
  data.E1 = {6.0, 3.0, 8.0, 2.5};
  data.y2 = {5, 9, 3};
  data.E2 = {4.0, 7.0, 3.0};
  StateLayout layout = StateLayout::make(spec, g.n, 0);

  auto eval = [&](const std::vector<double>& u, std::vector<double>* grad) {
    return logpost_unconstrained(u, data, spec, g, H, nullptr, layout, grad);
  };

  std::vector<double> u(layout.dim, 0.1);
  std::vector<double> grad;
  double lp = eval(u, &grad);

  // backtracking gradient ascent, then Newton polish with an fd Hessian
  for (int iter = 0; iter < 400; ++iter) {
    double step = 1.0;
    std::vector<double> trial(layout.dim);
    for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
      for (int i = 0; i < layout.dim; ++i) trial[i] = u[i] + step * grad[i];
      if (eval(trial, nullptr) > lp) break;
    }
    u = trial;
    lp = eval(u, &grad);
  }
  for (int newton = 0; newton < 12; ++newton) {
    const double h = 1e-5;
    Eigen::MatrixXd hess(layout.dim, layout.dim);
    std::vector<double> gp, gm;
    for (int i = 0; i < layout.dim; ++i) {
      auto up = u, down = u;
      up[i] += h;
      down[i] -= h;
      eval(up, &gp);
      eval(down, &gm);
      for (int j = 0; j < layout.dim; ++j) hess(j, i) = (gp[j] - gm[j]) / (2 * h);
    }
    Eigen::VectorXd gvec(layout.dim);
    for (int i = 0; i < layout.dim; ++i) gvec(i) = grad[i];
    Eigen::VectorXd delta = hess.fullPivLu().solve(-gvec);
    double scale = 1.0;
    std::vector<double> trial(layout.dim);
    for (int ls = 0; ls < 30; ++ls, scale *= 0.5) {
      for (int i = 0; i < layout.dim; ++i) trial[i] = u[i] + scale * delta(i);
      if (std::isfinite(eval(trial, nullptr))) break;
    }
    u = trial;
    lp = eval(u, &grad);
  }

  double norm = 0.0;
  for (double v : grad) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-6);
}

TEST_CASE("mu floor guards extreme underflow") {
  Rng rng(512, 0);
  Instance inst = make_instance(PriorKind::gmcar, false, 5, 4, rng);
  ParameterState s = inst.state;
  std::fill(s.phi1.begin(), s.phi1.end(), -400.0 * std::sqrt(s.tau1));  // exp underflows
  double lp = log_posterior(s, inst.data, inst.spec, inst.graph, inst.H, nullptr);
  CHECK(std::isfinite(lp));
}
