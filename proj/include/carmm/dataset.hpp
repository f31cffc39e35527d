#pragma once

#include <string>
#include <vector>

namespace carmm {

// Counts, offsets, covariates for both outcomes on their native frameworks:
// outcome 1 observed per area (n), outcome 2 per membership (m).
struct Dataset {
  std::vector<long long> y1;        // n
  std::vector<long long> y2;        // m
  std::vector<double> E1;           // n, strictly positive
  std::vector<double> E2;           // m, strictly positive
  std::vector<std::vector<double>> X;  // n rows of p covariates (may be empty)

  int n() const { return static_cast<int>(y1.size()); }
  int m() const { return static_cast<int>(y2.size()); }
  int p() const { return X.empty() ? 0 : static_cast<int>(X.front().size()); }

  void validate(int graph_n, int membership_m) const;
};

// E = sum_a rate_a * population_a (reference-rate offsets). Rates in [0, 1].
double compute_offsets(const std::vector<double>& rates, const std::vector<double>& populations);

// Areal CSV: header `area,y1,E1[,x1..xp]`, one row per area, all areas present.
// Membership CSV: header `membership,y2,E2`.
void read_areal_csv(const std::string& path, int n, Dataset& data);
void read_mm_csv(const std::string& path, int m, Dataset& data);
void write_areal_csv(const Dataset& data, const std::string& path);
void write_mm_csv(const Dataset& data, const std::string& path);

// Age-table CSV: header `unit,age_group,rate,population`; returns per-unit
// offsets E_unit = sum over its age groups of rate * population.
std::vector<double> read_age_table_csv(const std::string& path, int units);

}  // namespace carmm
