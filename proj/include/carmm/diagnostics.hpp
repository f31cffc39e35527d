#pragma once

#include <string>
#include <vector>

#include "carmm/sampler.hpp"

namespace carmm {

// Classic split R-hat: each chain is halved, R = sqrt(Vhat / W) over the
// 2*chains half-chains. Returns NaN for degenerate (constant) draws.
// rank_normalize switches to the rank-normalized variant.
double split_rhat(const std::vector<std::vector<double>>& draws, bool rank_normalize = false);

// Bulk effective sample size: multi-chain autocorrelation estimator with
// Geyer initial-monotone truncation, capped at the total draw count.
double ess_bulk(const std::vector<std::vector<double>>& draws);

// Type-7 (linear interpolation) quantile of a copy-sorted sample.
double quantile(std::vector<double> values, double prob);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double se_mean = 0.0;
  double sd = 0.0;
  double q2_5 = 0.0;
  double q5 = 0.0;
  double q95 = 0.0;
  double q97_5 = 0.0;
  double rhat = 0.0;
  double ess = 0.0;
};

SummaryRow summarize_quantity(const std::string& name,
                              const std::vector<std::vector<double>>& draws,
                              bool rank_normalize = false);

// Rows for every reported scalar plus the phi fields, Table-4 style columns.
std::vector<SummaryRow> summarize(const PosteriorSamples& samples,
                                  bool rank_normalize = false);

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);
std::vector<SummaryRow> read_summary_csv(const std::string& path);

}  // namespace carmm
