#pragma once

#include <string>
#include <utility>
#include <vector>

#include "carmm/covariates.hpp"
#include "carmm/dataset.hpp"
#include "carmm/graph.hpp"
#include "carmm/membership.hpp"

namespace carmm {

enum class PriorKind { gmcar, mcar };

enum class AlphaConstraint { unit_interval, symmetric_unit };

struct Hyperpriors {
  double gamma_sd = 5.0;   // intercepts, Normal(0, sd^2)
  double eta_sd = 5.0;     // bridging parameters, Normal(0, sd^2)
  double tau_scale = 5.0;  // precisions, Half-Normal(scale)
  double psi_shape = 2.0;  // overdispersions, Gamma(shape, rate)
  double psi_rate = 0.1;
};

struct ModelSpec {
  PriorKind prior = PriorKind::gmcar;
  bool use_covariates = false;
  Hyperpriors hyper;
  // Default follows the joint-properness conditions: (0,1) for the MCAR,
  // (-1,1) for the GMCAR smoothing parameters. Overridable.
  AlphaConstraint alpha_constraint = AlphaConstraint::symmetric_unit;

  static ModelSpec make(PriorKind kind, bool covariates);
  std::pair<double, double> alpha_box() const;
  int alpha_count() const { return prior == PriorKind::mcar ? 1 : 2; }
  int eta_count() const { return prior == PriorKind::mcar ? 1 : 2; }
};

// One point in the full model parameter space, on the model (reported) scale.
// The MCAR ties alpha1 = alpha2 and fixes eta1 = 0. beta1/beta2 hold the
// orthogonalised (QR-space) coefficients while covariates are active;
// recover_beta maps them to the reported covariate-scale coefficients.
struct ParameterState {
  std::vector<double> phi1, phi2;
  double alpha1 = 0.0, alpha2 = 0.0;
  double tau1 = 1.0, tau2 = 1.0;
  double eta0 = 0.0, eta1 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0;
  std::vector<double> beta1, beta2;
  double psi1 = 1.0, psi2 = 1.0;
};

// Gradient of a log density with respect to every model-scale coordinate.
struct StateGradient {
  std::vector<double> phi1, phi2;
  double alpha1 = 0.0, alpha2 = 0.0;
  double tau1 = 0.0, tau2 = 0.0;
  double eta0 = 0.0, eta1 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0;
  std::vector<double> beta1, beta2;
  double psi1 = 0.0, psi2 = 0.0;

  void resize(int n, int p);
  void zero();
};

// log p(phi1, phi2) for the conditional bivariate CAR:
//   phi2        ~ N(0, [tau2 (D - alpha2 W)]^{-1})
//   phi1 | phi2 ~ N((eta0 I + eta1 W) phi2, [tau1 (D - alpha1 W)]^{-1})
double gmcar_logdensity(const std::vector<double>& phi1, const std::vector<double>& phi2,
                        double alpha1, double alpha2, double eta0, double eta1, double tau1,
                        double tau2, const SpatialGraph& graph);

// MCAR(alpha, Lambda) as the eta1 = 0, alpha1 = alpha2 special case, with
// Lambda11 = tau1, Lambda12 = -eta0 tau1, Lambda22 = tau2 + eta0^2 tau1.
double mcar_logdensity(const std::vector<double>& phi1, const std::vector<double>& phi2,
                       double alpha, double tau1, double tau2, double eta0,
                       const SpatialGraph& graph);

struct LinearPredictors {
  std::vector<double> zeta1;     // n: log rho_1 per area
  std::vector<double> zeta2;     // n: areal log-risk component for outcome 2
  std::vector<double> log_rho2;  // m: H * zeta2 per membership
};

// pre may be null when the model carries no covariates.
LinearPredictors linear_predictors(const ParameterState& state, const MembershipMatrix& H,
                                   const CovariatePreprocess* pre);

double log_posterior(const ParameterState& state, const Dataset& data, const ModelSpec& spec,
                     const SpatialGraph& graph, const MembershipMatrix& H,
                     const CovariatePreprocess* pre);

// Returns log_posterior and fills grad with its model-scale gradient.
double log_posterior_with_gradient(const ParameterState& state, const Dataset& data,
                                   const ModelSpec& spec, const SpatialGraph& graph,
                                   const MembershipMatrix& H, const CovariatePreprocess* pre,
                                   StateGradient& grad);

// Names of the reported scalar quantities, in output order:
// alpha(s), tau1, tau2, eta0[, eta1], gamma1, gamma2, beta*[..], psi1, psi2.
std::vector<std::string> scalar_names(const ModelSpec& spec, int p);

// Reported scalar values for one state; beta entries are mapped through
// recover_beta when preprocessing is active.
std::vector<double> scalar_values(const ParameterState& state, const ModelSpec& spec,
                                  const CovariatePreprocess* pre);

constexpr double kMuFloor = 1e-12;  // guards exp underflow in mu = E * rho

}  // namespace carmm
