#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carmm/model.hpp"
#include "carmm/rng.hpp"

namespace carmm {

// Generating truths for the simulation-study protocol. Defaults are the
// no-covariate study values; with_covariates() switches to the covariate
// study (different alpha2 and intercepts, unit prevalence coefficients).
struct TruthSpec {
  PriorKind prior = PriorKind::gmcar;
  bool use_covariates = false;
  double alpha1 = 0.40;
  double alpha2 = 0.90;  // MCAR ties alpha2 to alpha1
  double tau1 = 6.0;
  double tau2 = 4.0;
  double eta0 = 0.30;
  double eta1 = 0.50;  // zero under the MCAR
  double gamma1 = 0.50;
  double gamma2 = 1.30;
  std::vector<double> beta1;  // covariate-scale coefficients
  std::vector<double> beta2;
  double psi1 = 20.0;
  double psi2 = 10.0;

  static TruthSpec no_covariates(PriorKind kind);
  static TruthSpec with_covariates(PriorKind kind);

  ParameterState to_state(int n) const;  // phis zeroed; betas as given
};

// Exact draw from N(0, [tau (D - alpha W)]^{-1}) via a dense Cholesky of the
// precision (n is small in this domain).
std::vector<double> sample_car_gmrf(const SpatialGraph& graph, double alpha, double tau,
                                    Rng& rng);

// GMCAR pair: phi2 marginal CAR draw, phi1 the conditional mean plus CAR noise.
struct GmrfPair {
  std::vector<double> phi1;
  std::vector<double> phi2;
};
GmrfPair sample_gmcar_gmrf(const SpatialGraph& graph, const TruthSpec& truth, Rng& rng);

// Counts drawn NegBin(E * rho, psi) at the truth; X is required when the
// truth carries covariates. Returns the dataset and the phi fields used.
struct SimulatedData {
  Dataset data;
  std::vector<double> phi1, phi2;
};
SimulatedData generate_dataset(const TruthSpec& truth, const SpatialGraph& graph,
                               const MembershipMatrix& H,
                               const std::vector<std::vector<double>>* X,
                               const std::vector<double>& E1, const std::vector<double>& E2,
                               Rng& rng);

// Rook-adjacency grid, the desk-scale stand-in for the real lattice.
SpatialGraph make_lattice(int rows, int cols);

// Random memberships: each row draws its support size around `sparsity`
// areas and weights from a flat Dirichlet.
MembershipMatrix make_membership(int m, const SpatialGraph& graph, int sparsity, Rng& rng);

// Offsets log-uniform in [5, 50]; calibrates counts to the deviance scale.
std::vector<double> make_offsets(int count, Rng& rng);

// Covariates drawn uniform(0, 1) per column.
std::vector<std::vector<double>> make_covariates(int n, int p, Rng& rng);

std::string truth_json(const TruthSpec& truth);
TruthSpec truth_from_json(const std::string& text);

}  // namespace carmm
