#include "carmm/model.hpp"

#include <cmath>

#include "carmm/errors.hpp"
#include "carmm/kernels.hpp"
#include "carmm/negbin.hpp"

namespace carmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double normal_logpdf(double x, double sd) {
  return -0.5 * kLog2Pi - std::log(sd) - 0.5 * x * x / (sd * sd);
}

double halfnormal_logpdf(double x, double scale) {
  // x >= 0 by construction (tau is positive)
  return 0.5 * std::log(2.0) - 0.5 * std::log(M_PI) - std::log(scale) -
         0.5 * x * x / (scale * scale);
}

double gamma_logpdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

void check_dims(const ParameterState& state, const Dataset& data, const ModelSpec& spec,
                const SpatialGraph& graph, const MembershipMatrix& H,
                const CovariatePreprocess* pre) {
  const int n = graph.n;
  if (static_cast<int>(state.phi1.size()) != n || static_cast<int>(state.phi2.size()) != n)
    throw DimensionMismatchError("state phi vectors do not match graph size");
  if (H.n != n) throw DimensionMismatchError("membership matrix column count != graph size");
  data.validate(n, H.m);
  if (spec.use_covariates) {
    if (pre == nullptr) throw DimensionMismatchError("covariate model without preprocess");
    if (pre->n != n) throw DimensionMismatchError("preprocess rows != graph size");
    if (static_cast<int>(state.beta1.size()) != pre->p ||
        static_cast<int>(state.beta2.size()) != pre->p)
      throw DimensionMismatchError("state beta vectors do not match covariate count");
  }
}

}  // namespace

ModelSpec ModelSpec::make(PriorKind kind, bool covariates) {
  ModelSpec spec;
  spec.prior = kind;
  spec.use_covariates = covariates;
  spec.alpha_constraint = kind == PriorKind::mcar ? AlphaConstraint::unit_interval
                                                  : AlphaConstraint::symmetric_unit;
  return spec;
}

std::pair<double, double> ModelSpec::alpha_box() const {
  return alpha_constraint == AlphaConstraint::unit_interval ? std::pair{0.0, 1.0}
                                                            : std::pair{-1.0, 1.0};
}

void StateGradient::resize(int n, int p) {
  phi1.assign(n, 0.0);
  phi2.assign(n, 0.0);
  beta1.assign(p, 0.0);
  beta2.assign(p, 0.0);
  zero();
}

void StateGradient::zero() {
  std::fill(phi1.begin(), phi1.end(), 0.0);
  std::fill(phi2.begin(), phi2.end(), 0.0);
  std::fill(beta1.begin(), beta1.end(), 0.0);
  std::fill(beta2.begin(), beta2.end(), 0.0);
  alpha1 = alpha2 = tau1 = tau2 = eta0 = eta1 = gamma1 = gamma2 = psi1 = psi2 = 0.0;
}

double gmcar_logdensity(const std::vector<double>& phi1, const std::vector<double>& phi2,
                        double alpha1, double alpha2, double eta0, double eta1, double tau1,
                        double tau2, const SpatialGraph& graph) {
  const std::size_t n = graph.n;
  if (phi1.size() != n || phi2.size() != n)
    throw DimensionMismatchError("gmcar_logdensity: phi length != graph size");
  if (!(tau1 > 0.0) || !(tau2 > 0.0))
    throw InvalidParameterError("gmcar_logdensity needs positive precisions");

  // residual of the conditional mean: r = phi1 - (eta0 I + eta1 W) phi2
  std::vector<double> r(n);
  std::vector<double> w_phi2 = graph.neighbor_sum(phi2);
  for (std::size_t i = 0; i < n; ++i) r[i] = phi1[i] - eta0 * phi2[i] - eta1 * w_phi2[i];

  double logdet1 = car_logdet(graph, alpha1, tau1);
  double logdet2 = car_logdet(graph, alpha2, tau2);
  double q1 = graph.car_quadform(alpha1, r, r);
  double q2 = graph.car_quadform(alpha2, phi2, phi2);
  return 0.5 * (logdet1 + logdet2) - graph.n * kLog2Pi - 0.5 * tau1 * q1 - 0.5 * tau2 * q2;
}

double mcar_logdensity(const std::vector<double>& phi1, const std::vector<double>& phi2,
                       double alpha, double tau1, double tau2, double eta0,
                       const SpatialGraph& graph) {
  return gmcar_logdensity(phi1, phi2, alpha, alpha, eta0, 0.0, tau1, tau2, graph);
}

LinearPredictors linear_predictors(const ParameterState& state, const MembershipMatrix& H,
                                   const CovariatePreprocess* pre) {
  const int n = static_cast<int>(state.phi1.size());
  if (static_cast<int>(state.phi2.size()) != n)
    throw DimensionMismatchError("linear_predictors: phi1/phi2 length mismatch");
  if (H.n != n) throw DimensionMismatchError("linear_predictors: membership column mismatch");

  LinearPredictors lp;
  lp.zeta1.resize(n);
  lp.zeta2.resize(n);
  for (int i = 0; i < n; ++i) {
    double x1 = 0.0, x2 = 0.0;
    if (pre != nullptr && pre->p > 0) {
      x1 = pre->row_dot(i, state.beta1);
      x2 = pre->row_dot(i, state.beta2);
    }
    lp.zeta1[i] = state.gamma1 + x1 + state.phi1[i];
    lp.zeta2[i] = state.gamma2 + x2 + state.phi2[i];
  }
  lp.log_rho2 = H.project(lp.zeta2);
  return lp;
}

double log_posterior(const ParameterState& state, const Dataset& data, const ModelSpec& spec,
                     const SpatialGraph& graph, const MembershipMatrix& H,
                     const CovariatePreprocess* pre) {
  check_dims(state, data, spec, graph, H, pre);
  const CovariatePreprocess* effective_pre = spec.use_covariates ? pre : nullptr;
  LinearPredictors lp = linear_predictors(state, H, effective_pre);

  double ll = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    double mu = std::max(data.E1[i] * std::exp(lp.zeta1[i]), kMuFloor);
    ll += negbin_logpmf(data.y1[i], mu, state.psi1);
  }
  for (int j = 0; j < data.m(); ++j) {
    double mu = std::max(data.E2[j] * std::exp(lp.log_rho2[j]), kMuFloor);
    ll += negbin_logpmf(data.y2[j], mu, state.psi2);
  }

  double prior;
  if (spec.prior == PriorKind::mcar) {
    prior = mcar_logdensity(state.phi1, state.phi2, state.alpha1, state.tau1, state.tau2,
                            state.eta0, graph);
  } else {
    prior = gmcar_logdensity(state.phi1, state.phi2, state.alpha1, state.alpha2, state.eta0,
                             state.eta1, state.tau1, state.tau2, graph);
  }

  const Hyperpriors& h = spec.hyper;
  auto [alo, ahi] = spec.alpha_box();
  double hyper = normal_logpdf(state.gamma1, h.gamma_sd) +
                 normal_logpdf(state.gamma2, h.gamma_sd) +
                 normal_logpdf(state.eta0, h.eta_sd) +
                 halfnormal_logpdf(state.tau1, h.tau_scale) +
                 halfnormal_logpdf(state.tau2, h.tau_scale) +
                 gamma_logpdf(state.psi1, h.psi_shape, h.psi_rate) +
                 gamma_logpdf(state.psi2, h.psi_shape, h.psi_rate) -
                 spec.alpha_count() * std::log(ahi - alo);
  if (spec.prior == PriorKind::gmcar) hyper += normal_logpdf(state.eta1, h.eta_sd);
  // flat priors on the QR-space coefficients contribute 0

  return ll + prior + hyper;
}

double log_posterior_with_gradient(const ParameterState& state, const Dataset& data,
                                   const ModelSpec& spec, const SpatialGraph& graph,
                                   const MembershipMatrix& H, const CovariatePreprocess* pre,
                                   StateGradient& grad) {
  check_dims(state, data, spec, graph, H, pre);
  const int n = data.n();
  const int m = data.m();
  const int p = spec.use_covariates ? pre->p : 0;
  grad.resize(n, p);

  const CovariatePreprocess* effective_pre = spec.use_covariates ? pre : nullptr;
  LinearPredictors lp = linear_predictors(state, H, effective_pre);

  // --- likelihood, outcome 1 (areal) ---
  double ll = 0.0;
  std::vector<double> dzeta1(n);  // d loglik / d zeta1_i
  for (int i = 0; i < n; ++i) {
    double mu_raw = data.E1[i] * std::exp(lp.zeta1[i]);
    double mu = std::max(mu_raw, kMuFloor);
    ll += negbin_logpmf(data.y1[i], mu, state.psi1);
    dzeta1[i] = mu_raw > kMuFloor ? negbin_dmu(data.y1[i], mu, state.psi1) * mu : 0.0;
    grad.psi1 += negbin_dpsi(data.y1[i], mu, state.psi1);
  }
  // --- likelihood, outcome 2 (membership) ---
  std::vector<double> dlogrho2(m);  // d loglik / d (H zeta2)_j
  for (int j = 0; j < m; ++j) {
    double mu_raw = data.E2[j] * std::exp(lp.log_rho2[j]);
    double mu = std::max(mu_raw, kMuFloor);
    ll += negbin_logpmf(data.y2[j], mu, state.psi2);
    dlogrho2[j] = mu_raw > kMuFloor ? negbin_dmu(data.y2[j], mu, state.psi2) * mu : 0.0;
    grad.psi2 += negbin_dpsi(data.y2[j], mu, state.psi2);
  }
  std::vector<double> dzeta2 = H.project_transpose(dlogrho2);

  const auto& ops = kernels::dispatch();
  for (int i = 0; i < n; ++i) {
    grad.phi1[i] += dzeta1[i];
    grad.phi2[i] += dzeta2[i];
  }
  grad.gamma1 += ops.sum(dzeta1.data(), n);
  grad.gamma2 += ops.sum(dzeta2.data(), n);
  if (p > 0) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) {
        grad.beta1[j] += pre->Q_star[i][j] * dzeta1[i];
        grad.beta2[j] += pre->Q_star[i][j] * dzeta2[i];
      }
    }
  }

  // --- CAR prior (MCAR evaluates the same density with tied alphas) ---
  const bool mcar = spec.prior == PriorKind::mcar;
  const double alpha1 = state.alpha1;
  const double alpha2 = mcar ? state.alpha1 : state.alpha2;
  const double eta1 = mcar ? 0.0 : state.eta1;

  std::vector<double> w_phi2 = graph.neighbor_sum(state.phi2);
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i)
    r[i] = state.phi1[i] - state.eta0 * state.phi2[i] - eta1 * w_phi2[i];

  std::vector<double> w_r = graph.neighbor_sum(r);
  std::vector<double> q1r(n);  // (D - alpha1 W) r
  for (int i = 0; i < n; ++i) q1r[i] = graph.degrees[i] * r[i] - alpha1 * w_r[i];
  std::vector<double> w_q1r = graph.neighbor_sum(q1r);

  double quad1 = ops.dot(r.data(), q1r.data(), n);
  double cross2 = ops.dot(state.phi2.data(), w_phi2.data(), n);  // phi2' W phi2
  double diag2 = ops.quadform_diag(graph.degrees.data(), state.phi2.data(),
                                   state.phi2.data(), n);
  double quad2 = diag2 - alpha2 * cross2;

  double logdet1 = car_logdet(graph, alpha1, state.tau1);
  double logdet2 = car_logdet(graph, alpha2, state.tau2);
  double prior = 0.5 * (logdet1 + logdet2) - n * kLog2Pi - 0.5 * state.tau1 * quad1 -
                 0.5 * state.tau2 * quad2;

  for (int i = 0; i < n; ++i) {
    grad.phi1[i] += -state.tau1 * q1r[i];
    double q2phi2_i = graph.degrees[i] * state.phi2[i] - alpha2 * w_phi2[i];
    grad.phi2[i] += state.tau1 * (state.eta0 * q1r[i] + eta1 * w_q1r[i]) -
                    state.tau2 * q2phi2_i;
  }
  grad.eta0 += state.tau1 * ops.dot(state.phi2.data(), q1r.data(), n);
  if (!mcar) grad.eta1 += state.tau1 * ops.dot(w_phi2.data(), q1r.data(), n);
  grad.tau1 += 0.5 * n / state.tau1 - 0.5 * quad1;
  grad.tau2 += 0.5 * n / state.tau2 - 0.5 * quad2;

  double rwr = ops.dot(r.data(), w_r.data(), n);
  grad.alpha1 += -0.5 * car_logdet_alpha_derivative(graph, alpha1) + 0.5 * state.tau1 * rwr;
  grad.alpha2 += -0.5 * car_logdet_alpha_derivative(graph, alpha2) + 0.5 * state.tau2 * cross2;

  // --- hyperpriors ---
  const Hyperpriors& h = spec.hyper;
  auto [alo, ahi] = spec.alpha_box();
  double hyper = normal_logpdf(state.gamma1, h.gamma_sd) +
                 normal_logpdf(state.gamma2, h.gamma_sd) +
                 normal_logpdf(state.eta0, h.eta_sd) +
                 halfnormal_logpdf(state.tau1, h.tau_scale) +
                 halfnormal_logpdf(state.tau2, h.tau_scale) +
                 gamma_logpdf(state.psi1, h.psi_shape, h.psi_rate) +
                 gamma_logpdf(state.psi2, h.psi_shape, h.psi_rate) -
                 spec.alpha_count() * std::log(ahi - alo);
  if (!mcar) hyper += normal_logpdf(state.eta1, h.eta_sd);

  grad.gamma1 += -state.gamma1 / (h.gamma_sd * h.gamma_sd);
  grad.gamma2 += -state.gamma2 / (h.gamma_sd * h.gamma_sd);
  grad.eta0 += -state.eta0 / (h.eta_sd * h.eta_sd);
  if (!mcar) grad.eta1 += -state.eta1 / (h.eta_sd * h.eta_sd);
  grad.tau1 += -state.tau1 / (h.tau_scale * h.tau_scale);
  grad.tau2 += -state.tau2 / (h.tau_scale * h.tau_scale);
  grad.psi1 += (h.psi_shape - 1.0) / state.psi1 - h.psi_rate;
  grad.psi2 += (h.psi_shape - 1.0) / state.psi2 - h.psi_rate;

  return ll + prior + hyper;
}

std::vector<std::string> scalar_names(const ModelSpec& spec, int p) {
  std::vector<std::string> names;
  if (spec.prior == PriorKind::mcar) {
    names.push_back("alpha");
  } else {
    names.push_back("alpha1");
    names.push_back("alpha2");
  }
  names.push_back("tau1");
  names.push_back("tau2");
  names.push_back("eta0");
  if (spec.prior == PriorKind::gmcar) names.push_back("eta1");
  names.push_back("gamma1");
  names.push_back("gamma2");
  if (spec.use_covariates) {
    for (int j = 0; j < p; ++j) names.push_back("beta1[" + std::to_string(j + 1) + "]");
    for (int j = 0; j < p; ++j) names.push_back("beta2[" + std::to_string(j + 1) + "]");
  }
  names.push_back("psi1");
  names.push_back("psi2");
  return names;
}

std::vector<double> scalar_values(const ParameterState& state, const ModelSpec& spec,
                                  const CovariatePreprocess* pre) {
  std::vector<double> vals;
  vals.push_back(state.alpha1);
  if (spec.prior == PriorKind::gmcar) vals.push_back(state.alpha2);
  vals.push_back(state.tau1);
  vals.push_back(state.tau2);
  vals.push_back(state.eta0);
  if (spec.prior == PriorKind::gmcar) vals.push_back(state.eta1);
  vals.push_back(state.gamma1);
  vals.push_back(state.gamma2);
  if (spec.use_covariates && pre != nullptr) {
    std::vector<double> b1 = recover_beta(state.beta1, *pre);
    std::vector<double> b2 = recover_beta(state.beta2, *pre);
    vals.insert(vals.end(), b1.begin(), b1.end());
    vals.insert(vals.end(), b2.begin(), b2.end());
  }
  vals.push_back(state.psi1);
  vals.push_back(state.psi2);
  return vals;
}

}  // namespace carmm
