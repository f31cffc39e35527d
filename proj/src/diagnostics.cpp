#include "carmm/diagnostics.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>

#include "carmm/csv.hpp"
#include "carmm/errors.hpp"

namespace carmm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::vector<double>> split_halves(const std::vector<std::vector<double>>& draws) {
  std::vector<std::vector<double>> halves;
  for (const auto& chain : draws) {
    std::size_t half = chain.size() / 2;
    if (half < 1) throw DataError("split_rhat needs at least 2 iterations per chain");
    halves.emplace_back(chain.begin(), chain.begin() + half);
    halves.emplace_back(chain.end() - half, chain.end());
  }
  return halves;
}

double inverse_normal_cdf(double p) {
  return M_SQRT2 * boost::math::erf_inv(2.0 * p - 1.0);
}

std::vector<std::vector<double>> rank_normalize_draws(
    const std::vector<std::vector<double>>& draws) {
  std::vector<std::pair<double, std::pair<int, int>>> pooled;
  for (int c = 0; c < static_cast<int>(draws.size()); ++c)
    for (int i = 0; i < static_cast<int>(draws[c].size()); ++i)
      pooled.push_back({draws[c][i], {c, i}});
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  const double total = static_cast<double>(pooled.size());
  std::vector<std::vector<double>> out(draws.size());
  for (std::size_t c = 0; c < draws.size(); ++c) out[c].resize(draws[c].size());
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) ++j;
    double avg_rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    double z = inverse_normal_cdf((avg_rank - 0.375) / (total + 0.25));
    for (std::size_t k = i; k <= j; ++k)
      out[pooled[k].second.first][pooled[k].second.second] = z;
    i = j + 1;
  }
  return out;
}

// classic R-hat over (half-)chains of equal length
double rhat_of_chains(const std::vector<std::vector<double>>& chains) {
  const int m = static_cast<int>(chains.size());
  const int n = static_cast<int>(chains.front().size());
  if (m < 2 || n < 2) return kNaN;

  // fully constant draws are degenerate; distinct constant chains must
  // instead diverge (zero within-chain variance with real spread)
  double lo = chains[0][0], hi = chains[0][0];
  for (const auto& c : chains)
    for (double x : c) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (lo == hi) return kNaN;

  std::vector<double> means(m), vars(m);
  double grand = 0.0;
  for (int j = 0; j < m; ++j) {
    double mu = 0.0;
    for (double x : chains[j]) mu += x;
    mu /= n;
    means[j] = mu;
    grand += mu;
    double s2 = 0.0;
    for (double x : chains[j]) s2 += (x - mu) * (x - mu);
    vars[j] = s2 / (n - 1);
  }
  grand /= m;

  double b = 0.0;  // between-chain variance (times n)
  for (int j = 0; j < m; ++j) b += (means[j] - grand) * (means[j] - grand);
  b *= static_cast<double>(n) / (m - 1);
  double w = 0.0;
  for (int j = 0; j < m; ++j) w += vars[j];
  w /= m;

  if (w <= 0.0) return std::numeric_limits<double>::infinity();
  double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& draws, bool rank_normalize) {
  if (draws.empty()) throw DataError("split_rhat: no chains");
  auto working = rank_normalize ? rank_normalize_draws(draws) : draws;
  return rhat_of_chains(split_halves(working));
}

double ess_bulk(const std::vector<std::vector<double>>& draws) {
  if (draws.empty()) throw DataError("ess_bulk: no chains");
  const int m = static_cast<int>(draws.size());
  const int n = static_cast<int>(draws.front().size());
  for (const auto& c : draws)
    if (static_cast<int>(c.size()) != n) throw DataError("ess_bulk: ragged chains");
  if (n < 4) return kNaN;

  // center each chain once; lag-t autocovariance is then a shifted dot product
  std::vector<std::vector<double>> centered(m);
  std::vector<double> means(m);
  for (int j = 0; j < m; ++j) {
    double mu = 0.0;
    for (double x : draws[j]) mu += x;
    mu /= n;
    means[j] = mu;
    centered[j].resize(n);
    for (int i = 0; i < n; ++i) centered[j][i] = draws[j][i] - mu;
  }

  auto mean_acov = [&](int t) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int i = 0; i + t < n; ++i) s += centered[j][i] * centered[j][i + t];
      acc += s / n;
    }
    return acc / m;
  };

  double mean_var = mean_acov(0) * n / (n - 1.0);
  double var_plus = mean_var * (n - 1.0) / n;
  if (m > 1) {
    double grand = 0.0;
    for (double mu : means) grand += mu;
    grand /= m;
    double bvar = 0.0;
    for (double mu : means) bvar += (mu - grand) * (mu - grand);
    var_plus += bvar / (m - 1);
  }
  if (var_plus <= 0.0) return kNaN;

  std::vector<double> rho(n, 0.0);
  rho[0] = 1.0;
  rho[1] = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  double rho_even = 1.0;
  double rho_odd = rho[1];
  int s = 1;
  // Geyer initial positive sequence, evaluated lazily pair by pair
  while (s < n - 4 && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov(s + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(s + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[s + 1] = rho_even;
      rho[s + 2] = rho_odd;
    }
    s += 2;
  }
  int max_s = s;
  if (rho_even > 0.0 && max_s + 1 < n) rho[max_s + 1] = rho_even;

  // initial monotone: pair sums must be nonincreasing
  for (int k = 3; k + 2 <= max_s; k += 2) {
    if (rho[k + 1] + rho[k + 2] > rho[k - 1] + rho[k]) {
      rho[k + 1] = 0.5 * (rho[k - 1] + rho[k]);
      rho[k + 2] = rho[k + 1];
    }
  }

  double tau = -1.0;
  for (int k = 0; k <= max_s; ++k) tau += 2.0 * rho[k];
  if (max_s + 1 < n) tau += rho[max_s + 1];

  const double total = static_cast<double>(m) * n;
  if (!(tau > 0.0)) return total;  // super-efficient (antithetic) case, capped
  return std::min(total / tau, total);
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw DataError("quantile of empty sample");
  std::sort(values.begin(), values.end());
  double h = (values.size() - 1) * prob;
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - lo) * (values[lo + 1] - values[lo]);
}

SummaryRow summarize_quantity(const std::string& name,
                              const std::vector<std::vector<double>>& draws,
                              bool rank_normalize) {
  SummaryRow row;
  row.name = name;

  std::vector<double> pooled;
  for (const auto& c : draws) pooled.insert(pooled.end(), c.begin(), c.end());
  const double count = static_cast<double>(pooled.size());

  // Welford: constant input gives an exact zero variance
  double mean = 0.0, m2 = 0.0;
  long k = 0;
  for (double x : pooled) {
    ++k;
    double d = x - mean;
    mean += d / k;
    m2 += d * (x - mean);
  }
  row.mean = mean;
  row.sd = count > 1 ? std::sqrt(m2 / (count - 1)) : 0.0;
  row.q2_5 = quantile(pooled, 0.025);
  row.q5 = quantile(pooled, 0.05);
  row.q95 = quantile(pooled, 0.95);
  row.q97_5 = quantile(pooled, 0.975);
  row.rhat = split_rhat(draws, rank_normalize);
  row.ess = ess_bulk(draws);
  row.se_mean = row.ess > 0.0 ? row.sd / std::sqrt(row.ess) : 0.0;
  return row;
}

std::vector<SummaryRow> summarize(const PosteriorSamples& samples, bool rank_normalize) {
  if (samples.chains == 0 || samples.kept == 0) throw DataError("summarize: empty samples");
  std::vector<SummaryRow> rows;
  for (int s = 0; s < samples.scalar_count(); ++s)
    rows.push_back(summarize_quantity(samples.names[s], samples.extract_scalar(s),
                                      rank_normalize));
  for (int outcome = 1; outcome <= 2; ++outcome)
    for (int i = 0; i < samples.n; ++i)
      rows.push_back(summarize_quantity(
          "phi" + std::to_string(outcome) + "[" + std::to_string(i + 1) + "]",
          samples.extract_phi(outcome, i), rank_normalize));
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  CsvWriter writer(path, {"name", "mean", "se_mean", "sd", "q2.5", "q5", "q95", "q97.5",
                          "rhat", "ess_bulk"});
  for (const auto& r : rows) {
    writer.field(r.name);
    writer.field(r.mean);
    writer.field(r.se_mean);
    writer.field(r.sd);
    writer.field(r.q2_5);
    writer.field(r.q5);
    writer.field(r.q95);
    writer.field(r.q97_5);
    writer.field(r.rhat);
    writer.field(r.ess);
    writer.end_row();
  }
  writer.close();
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  CsvReader reader(path, {"name", "mean", "se_mean", "sd", "q2.5", "q5", "q95", "q97.5",
                          "rhat", "ess_bulk"});
  std::vector<SummaryRow> rows;
  while (reader.next_row()) {
    SummaryRow r;
    r.name = reader.fields()[0];
    r.mean = reader.double_field(1);
    r.se_mean = reader.double_field(2);
    r.sd = reader.double_field(3);
    r.q2_5 = reader.double_field(4);
    r.q5 = reader.double_field(5);
    r.q95 = reader.double_field(6);
    r.q97_5 = reader.double_field(7);
    r.rhat = reader.double_field(8);
    r.ess = reader.double_field(9);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace carmm
