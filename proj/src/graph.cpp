#include "carmm/graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "carmm/csv.hpp"
#include "carmm/errors.hpp"
#include "carmm/kernels.hpp"

namespace carmm {

void SpatialGraph::neighbor_sum(const double* x, double* out) const {
  kernels::dispatch().gather_sum(adj_offsets.data(), adj_indices.data(),
                                 static_cast<std::size_t>(n), x, out);
}

std::vector<double> SpatialGraph::neighbor_sum(const std::vector<double>& x) const {
  std::vector<double> out(n);
  neighbor_sum(x.data(), out.data());
  return out;
}

double SpatialGraph::cross_form(const std::vector<double>& x,
                                const std::vector<double>& y) const {
  std::vector<double> wy = neighbor_sum(y);
  return kernels::dispatch().dot(x.data(), wy.data(), x.size());
}

double SpatialGraph::car_quadform(double alpha, const std::vector<double>& x,
                                  const std::vector<double>& y) const {
  const auto& ops = kernels::dispatch();
  double diag = ops.quadform_diag(degrees.data(), x.data(), y.data(), x.size());
  return diag - alpha * cross_form(x, y);
}

std::pair<double, double> SpatialGraph::alpha_bounds() const {
  double lo = car_eigenvalues.front();  // ascending: most negative first
  double hi = car_eigenvalues.back();
  double lower = lo < 0.0 ? 1.0 / lo : -std::numeric_limits<double>::infinity();
  double upper = hi > 0.0 ? 1.0 / hi : std::numeric_limits<double>::infinity();
  return {lower, upper};
}

SpatialGraph build_graph(const std::vector<std::pair<int, int>>& edge_list, int n) {
  if (n < 2) throw DataError("graph needs at least 2 areas");

  std::set<std::pair<int, int>> dedup;
  for (const auto& [a, b] : edge_list) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw InvalidIdError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                           ") references an area outside [0," + std::to_string(n) + ")");
    if (a == b) throw SelfLoopError("self edge (" + std::to_string(a) + "," +
                                    std::to_string(a) + ") is not allowed");
    dedup.insert({std::min(a, b), std::max(a, b)});
  }

  SpatialGraph g;
  g.n = n;
  g.edges.assign(dedup.begin(), dedup.end());

  std::vector<int> deg(n, 0);
  for (const auto& [a, b] : g.edges) {
    ++deg[a];
    ++deg[b];
  }
  for (int i = 0; i < n; ++i)
    if (deg[i] == 0) throw IsolatedAreaError(i);

  g.degrees.assign(deg.begin(), deg.end());
  g.sum_log_degrees = 0.0;
  for (int i = 0; i < n; ++i) g.sum_log_degrees += std::log(g.degrees[i]);

  // CSR adjacency
  g.adj_offsets.assign(n + 1, 0);
  for (const auto& [a, b] : g.edges) {
    ++g.adj_offsets[a + 1];
    ++g.adj_offsets[b + 1];
  }
  for (int i = 0; i < n; ++i) g.adj_offsets[i + 1] += g.adj_offsets[i];
  g.adj_indices.resize(2 * g.edges.size());
  std::vector<std::int32_t> cursor(g.adj_offsets.begin(), g.adj_offsets.end() - 1);
  for (const auto& [a, b] : g.edges) {
    g.adj_indices[cursor[a]++] = b;
    g.adj_indices[cursor[b]++] = a;
  }
  for (int i = 0; i < n; ++i)
    std::sort(g.adj_indices.begin() + g.adj_offsets[i],
              g.adj_indices.begin() + g.adj_offsets[i + 1]);

  // eigenvalues of D^{-1/2} W D^{-1/2}
  Eigen::MatrixXd scaled = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : g.edges) {
    double v = 1.0 / std::sqrt(g.degrees[a] * g.degrees[b]);
    scaled(a, b) = v;
    scaled(b, a) = v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scaled, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  g.car_eigenvalues.resize(n);
  for (int i = 0; i < n; ++i) {
    double lam = solver.eigenvalues()(i);
    // Row-stochastic similarity pins the spectrum to [-1, 1] with lambda_max
    // exactly 1; snap off round-off so the alpha = 1 boundary is detected.
    if (std::fabs(lam - 1.0) < 1e-12) lam = 1.0;
    if (std::fabs(lam + 1.0) < 1e-12) lam = -1.0;
    g.car_eigenvalues[i] = std::clamp(lam, -1.0, 1.0);
  }
  return g;
}

double car_logdet(const SpatialGraph& graph, double alpha, double tau) {
  if (!(tau > 0.0)) throw InvalidParameterError("tau must be positive");
  double acc = 0.0;
  for (double lam : graph.car_eigenvalues) {
    double factor = 1.0 - alpha * lam;
    if (factor <= 0.0)
      throw NotPositiveDefiniteError("1 - alpha*lambda <= 0 at alpha = " +
                                     std::to_string(alpha));
    acc += std::log(factor);
  }
  return graph.n * std::log(tau) + graph.sum_log_degrees + acc;
}

double car_logdet_alpha_derivative(const SpatialGraph& graph, double alpha) {
  double acc = 0.0;
  for (double lam : graph.car_eigenvalues) acc += lam / (1.0 - alpha * lam);
  return acc;
}

SpatialGraph read_graph_csv(const std::string& path, int n) {
  CsvReader reader(path, {"area_a", "area_b"});
  std::vector<std::pair<int, int>> edges;
  while (reader.next_row()) {
    int a = reader.int_field(0);
    int b = reader.int_field(1);
    edges.emplace_back(a, b);
  }
  return build_graph(edges, n);
}

void write_graph_csv(const SpatialGraph& graph, const std::string& path) {
  CsvWriter writer(path, {"area_a", "area_b"});
  for (const auto& [a, b] : graph.edges) {
    writer.field(a);
    writer.field(b);
    writer.end_row();
  }
  writer.close();
}

}  // namespace carmm
