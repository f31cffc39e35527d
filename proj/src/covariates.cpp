#include "carmm/covariates.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "carmm/errors.hpp"

namespace carmm {

double CovariatePreprocess::row_dot(int i, const std::vector<double>& theta) const {
  double acc = 0.0;
  for (int j = 0; j < p; ++j) acc += Q_star[i][j] * theta[j];
  return acc;
}

CovariatePreprocess preprocess_covariates(const std::vector<std::vector<double>>& X) {
  const int n = static_cast<int>(X.size());
  if (n < 2) throw DataError("covariate preprocessing needs at least 2 rows");
  const int p = static_cast<int>(X.front().size());
  if (p < 1) throw DataError("covariate preprocessing needs at least 1 column");

  CovariatePreprocess pre;
  pre.n = n;
  pre.p = p;
  pre.column_mins.resize(p);
  pre.column_ranges.resize(p);

  Eigen::MatrixXd Xn(n, p);
  for (int j = 0; j < p; ++j) {
    double lo = X[0][j], hi = X[0][j];
    for (int i = 1; i < n; ++i) {
      lo = std::min(lo, X[i][j]);
      hi = std::max(hi, X[i][j]);
    }
    if (hi - lo == 0.0) throw ConstantColumnError(j);
    pre.column_mins[j] = lo;
    pre.column_ranges[j] = hi - lo;
    for (int i = 0; i < n; ++i) Xn(i, j) = (X[i][j] - lo) / (hi - lo);
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xn);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();

  // fix signs so R has a positive diagonal (deterministic factorisation)
  for (int j = 0; j < p; ++j) {
    if (R(j, j) < 0.0) {
      R.row(j) *= -1.0;
      Q.col(j) *= -1.0;
    }
  }

  const double s = std::sqrt(static_cast<double>(n - 1));
  Eigen::MatrixXd Qs = Q * s;
  Eigen::MatrixXd Rs = R / s;
  Eigen::MatrixXd Rinv =
      Rs.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));

  pre.Q_star.assign(n, std::vector<double>(p));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) pre.Q_star[i][j] = Qs(i, j);
  pre.R_star.assign(p, std::vector<double>(p));
  pre.R_star_inverse.assign(p, std::vector<double>(p));
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      pre.R_star[i][j] = Rs(i, j);
      pre.R_star_inverse[i][j] = Rinv(i, j);
    }
  return pre;
}

std::vector<double> recover_beta(const std::vector<double>& theta_tilde,
                                 const CovariatePreprocess& pre) {
  if (static_cast<int>(theta_tilde.size()) != pre.p)
    throw DimensionMismatchError("recover_beta: coefficient length mismatch");
  std::vector<double> beta(pre.p, 0.0);
  for (int i = 0; i < pre.p; ++i)
    for (int j = 0; j < pre.p; ++j) beta[i] += pre.R_star_inverse[i][j] * theta_tilde[j];
  return beta;
}

std::vector<double> beta_to_theta(const std::vector<double>& beta,
                                  const CovariatePreprocess& pre) {
  if (static_cast<int>(beta.size()) != pre.p)
    throw DimensionMismatchError("beta_to_theta: coefficient length mismatch");
  std::vector<double> theta(pre.p, 0.0);
  for (int i = 0; i < pre.p; ++i)
    for (int j = 0; j < pre.p; ++j) theta[i] += pre.R_star[i][j] * beta[j];
  return theta;
}

}  // namespace carmm
