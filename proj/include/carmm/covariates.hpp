#pragma once

#include <vector>

namespace carmm {

// Min-max normalisation followed by a thin QR reparameterisation of the
// design matrix. The sampler works on coefficients theta in the orthogonal
// basis Q* = Q * sqrt(n-1); recover_beta maps them back to coefficients on
// the normalised covariates (the scale reported downstream).
struct CovariatePreprocess {
  int n = 0;
  int p = 0;
  std::vector<double> column_mins;          // p
  std::vector<double> column_ranges;        // p
  std::vector<std::vector<double>> Q_star;  // n rows of p
  std::vector<std::vector<double>> R_star;  // p x p upper triangular
  std::vector<std::vector<double>> R_star_inverse;  // p x p upper triangular

  // q_i' theta for one area
  double row_dot(int i, const std::vector<double>& theta) const;
};

CovariatePreprocess preprocess_covariates(const std::vector<std::vector<double>>& X);

// beta = R*^{-1} theta
std::vector<double> recover_beta(const std::vector<double>& theta_tilde,
                                 const CovariatePreprocess& preproc);

// theta = R* beta, the inverse of recover_beta (used by simulation truths)
std::vector<double> beta_to_theta(const std::vector<double>& beta,
                                  const CovariatePreprocess& preproc);

}  // namespace carmm
