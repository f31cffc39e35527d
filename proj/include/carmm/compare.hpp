#pragma once

#include <string>
#include <vector>

#include "carmm/sampler.hpp"

namespace carmm {

// Saturated negative-binomial deviance:
//   2 sum_i [ y_i log(y_i / mu_i) - (y_i + psi) log((1 + y_i/psi)/(1 + mu_i/psi)) ]
// with the first summand taken as 0 when y_i = 0.
double saturated_deviance(const std::vector<long long>& y, const std::vector<double>& mu,
                          double psi);

struct DicResult {
  double d_bar = 0.0;      // mean posterior deviance
  double d_at_mean = 0.0;  // deviance at posterior-mean mu and psi
  double p_d = 0.0;        // d_bar - d_at_mean
  double dic = 0.0;        // d_bar + p_d
};

// mu_draws: draws x observations fitted means; psi_draws: one per draw.
DicResult dic(const std::vector<std::vector<double>>& mu_draws,
              const std::vector<double>& psi_draws, const std::vector<long long>& y);

// Tail-area probabilities p_i = P(yrep_i < y_i) + 0.5 P(yrep_i = y_i).
std::vector<double> tap(const std::vector<long long>& y,
                        const std::vector<std::vector<long long>>& yrep);

// Fraction of p_i in [0, c] union [1-c, 1] for each cutoff.
std::vector<double> tail_proportions(const std::vector<double>& p,
                                     const std::vector<double>& cutoffs);

struct LooResult {
  double elpd_loo = 0.0;
  double looic = 0.0;
  std::vector<double> pointwise;  // per-observation elpd
  std::vector<double> pareto_k;   // GPD shape per observation (NaN when not fit)
  int n_flagged = 0;              // observations with pareto_k > 0.7
};

// PSIS leave-one-out elpd from a draws x observations log-likelihood matrix.
// With smooth_tails off this is plain importance sampling with reciprocal-
// likelihood weights (the harmonic-mean identity); the smoothed variant fits
// a generalized Pareto to the top 20% of the ratios by method of moments.
LooResult loo_elpd(const std::vector<std::vector<double>>& loglik, bool smooth_tails = true);

struct ElpdDiff {
  double mean_diff = 0.0;  // sum of pointwise differences
  double se = 0.0;         // sqrt(n * Var(pointwise differences))
};

ElpdDiff elpd_diff_se(const std::vector<double>& pointwise_a,
                      const std::vector<double>& pointwise_b);

struct OutcomeFit {
  DicResult dic;
  LooResult loo;
  std::vector<double> tap_values;
  double tap_tail_05 = 0.0;
  double tap_tail_10 = 0.0;
  double mean_tap = 0.0;
};

struct FitReport {
  OutcomeFit outcome1;
  OutcomeFit outcome2;
};

FitReport fit_report(const PosteriorSamples& samples, const Dataset& data);

std::string fit_report_json(const FitReport& report);

}  // namespace carmm
