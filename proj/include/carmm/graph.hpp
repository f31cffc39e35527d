#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace carmm {

// Areal adjacency with the spectral quantities that make CAR densities cheap.
// For the precision tau * (D - alpha W):
//   log det = n log tau + sum_i log d_i + sum_i log(1 - alpha * lambda_i)
// where lambda_i are the eigenvalues of D^{-1/2} W D^{-1/2}. Eigenvalues are
// computed once at build; everything here is immutable afterwards and safe to
// share across chains.
struct SpatialGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;   // deduplicated, a < b, sorted
  std::vector<double> degrees;              // d_i >= 1
  std::vector<double> car_eigenvalues;      // ascending, in [-1, 1], max = 1
  double sum_log_degrees = 0.0;

  // CSR adjacency (both directions), rows sorted
  std::vector<std::int32_t> adj_offsets;    // n + 1
  std::vector<std::int32_t> adj_indices;    // 2 * |edges|

  // out[i] = sum of x over neighbours of i, i.e. W x
  void neighbor_sum(const double* x, double* out) const;
  std::vector<double> neighbor_sum(const std::vector<double>& x) const;

  // x' W y (uses symmetry: one gather pass + dot)
  double cross_form(const std::vector<double>& x, const std::vector<double>& y) const;

  // x' (D - alpha W) y
  double car_quadform(double alpha, const std::vector<double>& x,
                      const std::vector<double>& y) const;

  // Admissible open interval for alpha given the spectrum (before any model
  // box constraint): (1/lambda_min, 1/lambda_max).
  std::pair<double, double> alpha_bounds() const;
};

SpatialGraph build_graph(const std::vector<std::pair<int, int>>& edge_list, int n);

// log det(tau * (D - alpha W)); throws NotPositiveDefiniteError when any
// factor 1 - alpha * lambda_i <= 0.
double car_logdet(const SpatialGraph& graph, double alpha, double tau);

// sum_i lambda_i / (1 - alpha lambda_i), the alpha derivative of the log det
// (up to sign), reused by gradients.
double car_logdet_alpha_derivative(const SpatialGraph& graph, double alpha);

// Edge-list CSV with header `area_a,area_b`, one undirected edge per row.
SpatialGraph read_graph_csv(const std::string& path, int n);
void write_graph_csv(const SpatialGraph& graph, const std::string& path);

}  // namespace carmm
