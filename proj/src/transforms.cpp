#include "carmm/transforms.hpp"

#include <cmath>

#include "carmm/errors.hpp"

namespace carmm {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double logit(double x) { return std::log(x / (1.0 - x)); }

}  // namespace

StateLayout StateLayout::make(const ModelSpec& spec, int n, int p) {
  StateLayout l;
  l.n = n;
  l.p = spec.use_covariates ? p : 0;
  l.kind = spec.prior;
  l.phi1_offset = 0;
  l.phi2_offset = n;
  l.alpha_offset = 2 * n;
  l.tau_offset = l.alpha_offset + spec.alpha_count();
  l.eta_offset = l.tau_offset + 2;
  l.gamma_offset = l.eta_offset + spec.eta_count();
  l.theta_offset = l.gamma_offset + 2;
  l.psi_offset = l.theta_offset + 2 * l.p;
  l.dim = l.psi_offset + 2;
  return l;
}

std::vector<std::string> StateLayout::coordinate_names() const {
  std::vector<std::string> names(dim);
  for (int i = 0; i < n; ++i) names[phi1_offset + i] = "phi1_u[" + std::to_string(i + 1) + "]";
  for (int i = 0; i < n; ++i) names[phi2_offset + i] = "phi2_u[" + std::to_string(i + 1) + "]";
  if (kind == PriorKind::mcar) {
    names[alpha_offset] = "alpha_logit";
  } else {
    names[alpha_offset] = "alpha1_logit";
    names[alpha_offset + 1] = "alpha2_logit";
  }
  names[tau_offset] = "log_tau1";
  names[tau_offset + 1] = "log_tau2";
  names[eta_offset] = "eta0";
  if (kind == PriorKind::gmcar) names[eta_offset + 1] = "eta1";
  names[gamma_offset] = "gamma1";
  names[gamma_offset + 1] = "gamma2";
  for (int j = 0; j < p; ++j) {
    names[theta_offset + j] = "theta1[" + std::to_string(j + 1) + "]";
    names[theta_offset + p + j] = "theta2[" + std::to_string(j + 1) + "]";
  }
  names[psi_offset] = "log_psi1";
  names[psi_offset + 1] = "log_psi2";
  return names;
}

std::vector<double> to_unconstrained(const ParameterState& state, const ModelSpec& spec,
                                     const SpatialGraph& graph) {
  const int n = graph.n;
  const int p = static_cast<int>(state.beta1.size());
  StateLayout l = StateLayout::make(spec, n, p);

  if (static_cast<int>(state.phi1.size()) != n || static_cast<int>(state.phi2.size()) != n)
    throw DimensionMismatchError("to_unconstrained: phi length != graph size");
  if (!(state.tau1 > 0.0) || !(state.tau2 > 0.0))
    throw OutOfDomainError("to_unconstrained: precisions must be positive");
  if (!(state.psi1 > 0.0) || !(state.psi2 > 0.0))
    throw OutOfDomainError("to_unconstrained: overdispersions must be positive");

  auto [alo, ahi] = spec.alpha_box();
  auto [slo, shi] = graph.alpha_bounds();
  double lo = std::max(alo, slo), hi = std::min(ahi, shi);
  auto check_alpha = [&](double a) {
    if (!(a > lo) || !(a < hi))
      throw OutOfDomainError("alpha = " + std::to_string(a) + " outside (" +
                             std::to_string(lo) + "," + std::to_string(hi) + ")");
  };
  check_alpha(state.alpha1);
  if (spec.prior == PriorKind::gmcar) check_alpha(state.alpha2);
  if (spec.prior == PriorKind::mcar && state.alpha1 != state.alpha2 && state.alpha2 != 0.0)
    throw OutOfDomainError("mcar state must have tied alphas");

  std::vector<double> u(l.dim);
  double s1 = std::sqrt(state.tau1), s2 = std::sqrt(state.tau2);
  for (int i = 0; i < n; ++i) {
    u[l.phi1_offset + i] = state.phi1[i] * s1;
    u[l.phi2_offset + i] = state.phi2[i] * s2;
  }
  u[l.alpha_offset] = logit((state.alpha1 - alo) / (ahi - alo));
  if (spec.prior == PriorKind::gmcar)
    u[l.alpha_offset + 1] = logit((state.alpha2 - alo) / (ahi - alo));
  u[l.tau_offset] = std::log(state.tau1);
  u[l.tau_offset + 1] = std::log(state.tau2);
  u[l.eta_offset] = state.eta0;
  if (spec.prior == PriorKind::gmcar) u[l.eta_offset + 1] = state.eta1;
  u[l.gamma_offset] = state.gamma1;
  u[l.gamma_offset + 1] = state.gamma2;
  for (int j = 0; j < l.p; ++j) {
    u[l.theta_offset + j] = state.beta1[j];
    u[l.theta_offset + l.p + j] = state.beta2[j];
  }
  u[l.psi_offset] = std::log(state.psi1);
  u[l.psi_offset + 1] = std::log(state.psi2);
  return u;
}

ParameterState from_unconstrained(const std::vector<double>& u, const ModelSpec& spec,
                                  const StateLayout& l) {
  if (static_cast<int>(u.size()) != l.dim)
    throw DimensionMismatchError("from_unconstrained: wrong coordinate count");
  ParameterState s;
  auto [alo, ahi] = spec.alpha_box();

  s.tau1 = std::exp(u[l.tau_offset]);
  s.tau2 = std::exp(u[l.tau_offset + 1]);
  double inv_s1 = 1.0 / std::sqrt(s.tau1), inv_s2 = 1.0 / std::sqrt(s.tau2);
  s.phi1.resize(l.n);
  s.phi2.resize(l.n);
  for (int i = 0; i < l.n; ++i) {
    s.phi1[i] = u[l.phi1_offset + i] * inv_s1;
    s.phi2[i] = u[l.phi2_offset + i] * inv_s2;
  }
  s.alpha1 = alo + (ahi - alo) * sigmoid(u[l.alpha_offset]);
  s.alpha2 = spec.prior == PriorKind::gmcar
                 ? alo + (ahi - alo) * sigmoid(u[l.alpha_offset + 1])
                 : s.alpha1;
  s.eta0 = u[l.eta_offset];
  s.eta1 = spec.prior == PriorKind::gmcar ? u[l.eta_offset + 1] : 0.0;
  s.gamma1 = u[l.gamma_offset];
  s.gamma2 = u[l.gamma_offset + 1];
  s.beta1.resize(l.p);
  s.beta2.resize(l.p);
  for (int j = 0; j < l.p; ++j) {
    s.beta1[j] = u[l.theta_offset + j];
    s.beta2[j] = u[l.theta_offset + l.p + j];
  }
  s.psi1 = std::exp(u[l.psi_offset]);
  s.psi2 = std::exp(u[l.psi_offset + 1]);
  return s;
}

double log_jacobian(const std::vector<double>& u, const ModelSpec& spec, const StateLayout& l) {
  auto [alo, ahi] = spec.alpha_box();
  // phi = phi_u * tau^{-1/2} contributes -n/2 log tau per block; tau = e^{u}
  // and psi = e^{u} contribute u each; alpha contributes the scaled-logit term.
  double lj = (1.0 - 0.5 * l.n) * (u[l.tau_offset] + u[l.tau_offset + 1]);
  lj += u[l.psi_offset] + u[l.psi_offset + 1];
  const int acount = spec.alpha_count();
  for (int k = 0; k < acount; ++k) {
    double s = sigmoid(u[l.alpha_offset + k]);
    lj += std::log(ahi - alo) + std::log(s) + std::log1p(-s);
  }
  return lj;
}

double logpost_unconstrained(const std::vector<double>& u, const Dataset& data,
                             const ModelSpec& spec, const SpatialGraph& graph,
                             const MembershipMatrix& H, const CovariatePreprocess* pre,
                             const StateLayout& l, std::vector<double>* grad) {
  ParameterState state = from_unconstrained(u, spec, l);
  double lj = log_jacobian(u, spec, l);

  if (grad == nullptr) return log_posterior(state, data, spec, graph, H, pre) + lj;

  static thread_local StateGradient g;
  double lp = log_posterior_with_gradient(state, data, spec, graph, H, pre, g);

  grad->assign(l.dim, 0.0);
  auto [alo, ahi] = spec.alpha_box();
  double inv_s1 = 1.0 / std::sqrt(state.tau1), inv_s2 = 1.0 / std::sqrt(state.tau2);
  double phi1_dot = 0.0, phi2_dot = 0.0;  // phi_k . g_phi_k for the tau chain rule
  for (int i = 0; i < l.n; ++i) {
    (*grad)[l.phi1_offset + i] = g.phi1[i] * inv_s1;
    (*grad)[l.phi2_offset + i] = g.phi2[i] * inv_s2;
    phi1_dot += state.phi1[i] * g.phi1[i];
    phi2_dot += state.phi2[i] * g.phi2[i];
  }
  if (spec.prior == PriorKind::mcar) {
    double s = sigmoid(u[l.alpha_offset]);
    (*grad)[l.alpha_offset] = (g.alpha1 + g.alpha2) * (ahi - alo) * s * (1.0 - s) +
                              (1.0 - 2.0 * s);
  } else {
    double s1 = sigmoid(u[l.alpha_offset]);
    double s2 = sigmoid(u[l.alpha_offset + 1]);
    (*grad)[l.alpha_offset] = g.alpha1 * (ahi - alo) * s1 * (1.0 - s1) + (1.0 - 2.0 * s1);
    (*grad)[l.alpha_offset + 1] = g.alpha2 * (ahi - alo) * s2 * (1.0 - s2) + (1.0 - 2.0 * s2);
  }
  (*grad)[l.tau_offset] = g.tau1 * state.tau1 - 0.5 * phi1_dot + (1.0 - 0.5 * l.n);
  (*grad)[l.tau_offset + 1] = g.tau2 * state.tau2 - 0.5 * phi2_dot + (1.0 - 0.5 * l.n);
  (*grad)[l.eta_offset] = g.eta0;
  if (spec.prior == PriorKind::gmcar) (*grad)[l.eta_offset + 1] = g.eta1;
  (*grad)[l.gamma_offset] = g.gamma1;
  (*grad)[l.gamma_offset + 1] = g.gamma2;
  for (int j = 0; j < l.p; ++j) {
    (*grad)[l.theta_offset + j] = g.beta1[j];
    (*grad)[l.theta_offset + l.p + j] = g.beta2[j];
  }
  (*grad)[l.psi_offset] = g.psi1 * state.psi1 + 1.0;
  (*grad)[l.psi_offset + 1] = g.psi2 * state.psi2 + 1.0;
  return lp + lj;
}

std::vector<double> grad_log_posterior(const ParameterState& state, const Dataset& data,
                                       const ModelSpec& spec, const SpatialGraph& graph,
                                       const MembershipMatrix& H,
                                       const CovariatePreprocess* pre) {
  StateLayout l = StateLayout::make(spec, graph.n, static_cast<int>(state.beta1.size()));
  std::vector<double> u = to_unconstrained(state, spec, graph);
  std::vector<double> grad;
  logpost_unconstrained(u, data, spec, graph, H, pre, l, &grad);
  return grad;
}

}  // namespace carmm
