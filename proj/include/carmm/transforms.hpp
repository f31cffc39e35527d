#pragma once

#include <string>
#include <vector>

#include "carmm/model.hpp"

namespace carmm {

// Coordinate layout of the unconstrained vector the sampler moves in:
//   phi1_u (n), phi2_u (n), alpha(s) scaled-logit, log tau1, log tau2,
//   eta0 [, eta1], gamma1, gamma2, theta1 (p), theta2 (p), log psi1, log psi2
// The phi blocks carry unit-precision coordinates phi_u = sqrt(tau) * phi,
// rescaled back by tau^{-1/2} before entering the model; the log-Jacobian of
// the full map is added to every unconstrained-density evaluation.
struct StateLayout {
  int n = 0;
  int p = 0;
  PriorKind kind = PriorKind::gmcar;

  int phi1_offset = 0;
  int phi2_offset = 0;
  int alpha_offset = 0;
  int tau_offset = 0;
  int eta_offset = 0;
  int gamma_offset = 0;
  int theta_offset = 0;
  int psi_offset = 0;
  int dim = 0;

  static StateLayout make(const ModelSpec& spec, int n, int p);
  std::vector<std::string> coordinate_names() const;
};

std::vector<double> to_unconstrained(const ParameterState& state, const ModelSpec& spec,
                                     const SpatialGraph& graph);

ParameterState from_unconstrained(const std::vector<double>& u, const ModelSpec& spec,
                                  const StateLayout& layout);

double log_jacobian(const std::vector<double>& u, const ModelSpec& spec,
                    const StateLayout& layout);

// log_posterior(from_unconstrained(u)) + log_jacobian(u); fills grad (size
// layout.dim) when non-null. This is the density hmc targets.
double logpost_unconstrained(const std::vector<double>& u, const Dataset& data,
                             const ModelSpec& spec, const SpatialGraph& graph,
                             const MembershipMatrix& H, const CovariatePreprocess* pre,
                             const StateLayout& layout, std::vector<double>* grad);

// Spec-facing wrapper: gradient of the unconstrained target evaluated at a
// model-scale state.
std::vector<double> grad_log_posterior(const ParameterState& state, const Dataset& data,
                                       const ModelSpec& spec, const SpatialGraph& graph,
                                       const MembershipMatrix& H,
                                       const CovariatePreprocess* pre);

}  // namespace carmm
