#include "carmm/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "carmm/errors.hpp"

namespace carmm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_sum_exp(const std::vector<double>& x) {
  double mx = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

// Method-of-moments generalized Pareto fit to exceedances z >= 0.
// Parameterisation: survival (1 + k z / sigma)^{-1/k}.
struct GpdFit {
  double k;
  double sigma;
};

GpdFit fit_gpd_moments(const std::vector<double>& z) {
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= z.size();
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean);
  var /= (z.size() - 1);
  if (!(var > 0.0) || !(mean > 0.0)) return {0.0, std::max(mean, 1e-300)};
  double ratio = mean * mean / var;
  return {0.5 * (1.0 - ratio), 0.5 * mean * (ratio + 1.0)};
}

double gpd_quantile(const GpdFit& fit, double p) {
  if (std::fabs(fit.k) < 1e-12) return -fit.sigma * std::log1p(-p);
  return fit.sigma / fit.k * (std::pow(1.0 - p, -fit.k) - 1.0);
}

}  // namespace

double saturated_deviance(const std::vector<long long>& y, const std::vector<double>& mu,
                          double psi) {
  if (y.size() != mu.size())
    throw LengthMismatchError("saturated_deviance: y and mu differ in length");
  if (!(psi > 0.0)) throw InvalidParameterError("saturated_deviance needs psi > 0");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(mu[i] > 0.0)) throw InvalidParameterError("saturated_deviance needs mu > 0");
    double yd = static_cast<double>(y[i]);
    double first = y[i] > 0 ? yd * std::log(yd / mu[i]) : 0.0;
    double second = (yd + psi) * (std::log1p(yd / psi) - std::log1p(mu[i] / psi));
    acc += first - second;
  }
  return 2.0 * acc;
}

DicResult dic(const std::vector<std::vector<double>>& mu_draws,
              const std::vector<double>& psi_draws, const std::vector<long long>& y) {
  if (mu_draws.empty() || mu_draws.size() != psi_draws.size())
    throw LengthMismatchError("dic: mu and psi draw counts differ");
  const std::size_t draws = mu_draws.size();
  const std::size_t nobs = y.size();

  DicResult out;
  std::vector<double> mu_mean(nobs, 0.0);
  double psi_mean = 0.0;
  for (std::size_t s = 0; s < draws; ++s) {
    out.d_bar += saturated_deviance(y, mu_draws[s], psi_draws[s]);
    for (std::size_t i = 0; i < nobs; ++i) mu_mean[i] += mu_draws[s][i];
    psi_mean += psi_draws[s];
  }
  out.d_bar /= draws;
  for (auto& v : mu_mean) v /= draws;
  psi_mean /= draws;
  out.d_at_mean = saturated_deviance(y, mu_mean, psi_mean);
  out.p_d = out.d_bar - out.d_at_mean;
  out.dic = out.d_bar + out.p_d;
  return out;
}

std::vector<double> tap(const std::vector<long long>& y,
                        const std::vector<std::vector<long long>>& yrep) {
  if (yrep.empty()) throw LengthMismatchError("tap: no replicate draws");
  const std::size_t nobs = y.size();
  for (const auto& row : yrep)
    if (row.size() != nobs) throw LengthMismatchError("tap: replicate width != observations");
  std::vector<double> p(nobs, 0.0);
  for (std::size_t i = 0; i < nobs; ++i) {
    long below = 0, equal = 0;
    for (const auto& row : yrep) {
      if (row[i] < y[i]) ++below;
      if (row[i] == y[i]) ++equal;
    }
    p[i] = (below + 0.5 * equal) / yrep.size();
  }
  return p;
}

std::vector<double> tail_proportions(const std::vector<double>& p,
                                     const std::vector<double>& cutoffs) {
  std::vector<double> out;
  for (double c : cutoffs) {
    long count = 0;
    for (double v : p)
      if (v <= c || v >= 1.0 - c) ++count;
    out.push_back(p.empty() ? 0.0 : static_cast<double>(count) / p.size());
  }
  return out;
}

LooResult loo_elpd(const std::vector<std::vector<double>>& loglik, bool smooth_tails) {
  if (loglik.empty()) throw LengthMismatchError("loo_elpd: no draws");
  const std::size_t draws = loglik.size();
  const std::size_t nobs = loglik.front().size();
  for (const auto& row : loglik)
    if (row.size() != nobs) throw LengthMismatchError("loo_elpd: ragged log-likelihoods");

  LooResult out;
  out.pointwise.resize(nobs);
  out.pareto_k.assign(nobs, kNaN);

  std::vector<double> log_ratio(draws), ratio(draws), weight(draws), ll(draws);
  for (std::size_t i = 0; i < nobs; ++i) {
    for (std::size_t s = 0; s < draws; ++s) {
      ll[s] = loglik[s][i];
      log_ratio[s] = -ll[s];  // importance ratios are reciprocal likelihoods
    }
    // stabilize: ratios relative to the max
    double max_lr = *std::max_element(log_ratio.begin(), log_ratio.end());
    for (std::size_t s = 0; s < draws; ++s) ratio[s] = std::exp(log_ratio[s] - max_lr);
    weight = ratio;

    std::size_t tail = static_cast<std::size_t>(std::ceil(0.2 * draws));
    if (smooth_tails && tail >= 5) {
      std::vector<std::size_t> order(draws);
      for (std::size_t s = 0; s < draws; ++s) order[s] = s;
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return ratio[a] < ratio[b]; });
      double cut = ratio[order[draws - tail - 1]];  // threshold below the tail
      std::vector<double> exceed(tail);
      for (std::size_t t = 0; t < tail; ++t)
        exceed[t] = ratio[order[draws - tail + t]] - cut;
      GpdFit fit = fit_gpd_moments(exceed);
      out.pareto_k[i] = fit.k;
      if (fit.k > 0.7) ++out.n_flagged;
      double max_ratio = ratio[order[draws - 1]];
      for (std::size_t t = 0; t < tail; ++t) {
        double q = (t + 0.5) / tail;
        weight[order[draws - tail + t]] = std::min(cut + gpd_quantile(fit, q), max_ratio);
      }
    }

    // elpd_i = log( sum_s w_s exp(ll_s) / sum_s w_s )
    std::vector<double> log_terms(draws);
    double log_weight_sum;
    {
      std::vector<double> lw(draws);
      for (std::size_t s = 0; s < draws; ++s) {
        lw[s] = std::log(weight[s]);
        log_terms[s] = lw[s] + ll[s];
      }
      log_weight_sum = log_sum_exp(lw);
    }
    out.pointwise[i] = log_sum_exp(log_terms) - log_weight_sum;
    out.elpd_loo += out.pointwise[i];
  }
  out.looic = -2.0 * out.elpd_loo;
  return out;
}

ElpdDiff elpd_diff_se(const std::vector<double>& pointwise_a,
                      const std::vector<double>& pointwise_b) {
  if (pointwise_a.size() != pointwise_b.size())
    throw LengthMismatchError("elpd_diff_se: pointwise vectors differ in length");
  const std::size_t n = pointwise_a.size();
  if (n == 0) throw LengthMismatchError("elpd_diff_se: empty input");

  ElpdDiff out;
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = pointwise_a[i] - pointwise_b[i];
    out.mean_diff += d[i];
    mean += d[i];
  }
  mean /= n;
  if (n > 1) {
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    var /= (n - 1);
    out.se = std::sqrt(n * var);
  }
  return out;
}

FitReport fit_report(const PosteriorSamples& samples, const Dataset& data) {
  const int n = samples.n;
  const int m = samples.m;
  auto rho1 = samples.merged_rho1();
  const std::size_t draws = rho1.size();

  // locate psi draws in the scalar table
  int psi1_idx = -1, psi2_idx = -1;
  for (int s = 0; s < samples.scalar_count(); ++s) {
    if (samples.names[s] == "psi1") psi1_idx = s;
    if (samples.names[s] == "psi2") psi2_idx = s;
  }
  if (psi1_idx < 0 || psi2_idx < 0) throw DataError("fit_report: psi draws missing");

  auto flatten = [&](int idx) {
    std::vector<double> out;
    out.reserve(draws);
    for (const auto& chain : samples.extract_scalar(idx))
      out.insert(out.end(), chain.begin(), chain.end());
    return out;
  };
  std::vector<double> psi1 = flatten(psi1_idx);
  std::vector<double> psi2 = flatten(psi2_idx);

  std::vector<std::vector<double>> mu1(draws, std::vector<double>(n));
  for (std::size_t s = 0; s < draws; ++s)
    for (int i = 0; i < n; ++i) mu1[s][i] = data.E1[i] * rho1[s][i];

  std::vector<std::vector<double>> mu2(draws, std::vector<double>(m));
  {
    std::size_t s = 0;
    for (const auto& chain : samples.chain)
      for (int it = 0; it < samples.kept; ++it, ++s)
        for (int j = 0; j < m; ++j) mu2[s][j] = data.E2[j] * chain.rho2[it * m + j];
  }

  auto loglik = samples.merged_loglik();
  std::vector<std::vector<double>> ll1(draws, std::vector<double>(n));
  std::vector<std::vector<double>> ll2(draws, std::vector<double>(m));
  for (std::size_t s = 0; s < draws; ++s) {
    for (int i = 0; i < n; ++i) ll1[s][i] = loglik[s][i];
    for (int j = 0; j < m; ++j) ll2[s][j] = loglik[s][n + j];
  }

  FitReport report;
  report.outcome1.dic = dic(mu1, psi1, data.y1);
  report.outcome2.dic = dic(mu2, psi2, data.y2);
  report.outcome1.loo = loo_elpd(ll1);
  report.outcome2.loo = loo_elpd(ll2);
  report.outcome1.tap_values = tap(data.y1, samples.merged_yrep(1));
  report.outcome2.tap_values = tap(data.y2, samples.merged_yrep(2));

  for (auto* oc : {&report.outcome1, &report.outcome2}) {
    auto tails = tail_proportions(oc->tap_values, {0.05, 0.1});
    oc->tap_tail_05 = tails[0];
    oc->tap_tail_10 = tails[1];
    double acc = 0.0;
    for (double v : oc->tap_values) acc += v;
    oc->mean_tap = oc->tap_values.empty() ? 0.0 : acc / oc->tap_values.size();
  }
  return report;
}

std::string fit_report_json(const FitReport& report) {
  nlohmann::json j;
  auto fill = [](const OutcomeFit& oc) {
    nlohmann::json o;
    o["d_bar"] = oc.dic.d_bar;
    o["d_at_mean"] = oc.dic.d_at_mean;
    o["p_d"] = oc.dic.p_d;
    o["dic"] = oc.dic.dic;
    o["elpd_loo"] = oc.loo.elpd_loo;
    o["looic"] = oc.loo.looic;
    o["tap_tail_05"] = oc.tap_tail_05;
    o["tap_tail_10"] = oc.tap_tail_10;
    o["mean_tap"] = oc.mean_tap;
    o["n_pareto_k_flagged"] = oc.loo.n_flagged;
    return o;
  };
  j["outcome1"] = fill(report.outcome1);
  j["outcome2"] = fill(report.outcome2);
  return j.dump(2) + "\n";
}

}  // namespace carmm
