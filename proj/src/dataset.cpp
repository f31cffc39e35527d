#include "carmm/dataset.hpp"

#include <cmath>

#include "carmm/csv.hpp"
#include "carmm/errors.hpp"

namespace carmm {

void Dataset::validate(int graph_n, int membership_m) const {
  if (n() != graph_n)
    throw DimensionMismatchError("areal data has " + std::to_string(n()) +
                                 " rows, graph has " + std::to_string(graph_n) + " areas");
  if (m() != membership_m)
    throw DimensionMismatchError("membership data has " + std::to_string(m()) +
                                 " rows, weight matrix has " + std::to_string(membership_m) +
                                 " memberships");
  if (E1.size() != y1.size() || E2.size() != y2.size())
    throw DimensionMismatchError("offset vectors inconsistent with counts");
  for (double e : E1)
    if (!(e > 0.0)) throw DataError("areal offsets must be strictly positive");
  for (double e : E2)
    if (!(e > 0.0)) throw DataError("membership offsets must be strictly positive");
  for (long long y : y1)
    if (y < 0) throw DataError("counts must be nonnegative");
  for (long long y : y2)
    if (y < 0) throw DataError("counts must be nonnegative");
  if (!X.empty()) {
    if (X.size() != y1.size())
      throw DimensionMismatchError("covariate matrix rows do not match areal count");
    std::size_t p = X.front().size();
    for (const auto& row : X) {
      if (row.size() != p) throw DimensionMismatchError("ragged covariate matrix");
      for (double v : row)
        if (!std::isfinite(v)) throw DataError("covariates must be finite");
    }
  }
}

double compute_offsets(const std::vector<double>& rates,
                       const std::vector<double>& populations) {
  if (rates.size() != populations.size())
    throw DimensionMismatchError("rates and populations differ in length");
  double acc = 0.0;
  for (std::size_t a = 0; a < rates.size(); ++a) {
    if (rates[a] < 0.0 || rates[a] > 1.0)
      throw InvalidParameterError("rates must lie in [0, 1]");
    if (populations[a] < 0.0)
      throw InvalidParameterError("populations must be nonnegative");
    acc += rates[a] * populations[a];
  }
  if (acc == 0.0) throw ZeroOffsetError("offset is zero; expected count would vanish");
  return acc;
}

void read_areal_csv(const std::string& path, int n, Dataset& data) {
  CsvReader reader(path, {"area", "y1", "E1"});
  int p = static_cast<int>(reader.header().size()) - 3;
  data.y1.assign(n, 0);
  data.E1.assign(n, 0.0);
  data.X.clear();
  if (p > 0) data.X.assign(n, std::vector<double>(p, 0.0));
  std::vector<bool> seen(n, false);
  while (reader.next_row()) {
    int area = reader.int_field(0);
    if (area < 0 || area >= n)
      throw DataError(path + ":" + std::to_string(reader.current_row()) + ": area " +
                      std::to_string(area) + " outside [0," + std::to_string(n) + ")");
    if (seen[area])
      throw DataError(path + ":" + std::to_string(reader.current_row()) + ": duplicate area " +
                      std::to_string(area));
    seen[area] = true;
    data.y1[area] = reader.ll_field(1);
    data.E1[area] = reader.double_field(2);
    for (int j = 0; j < p; ++j) data.X[area][j] = reader.double_field(3 + j);
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw DataError(path + ": missing row for area " + std::to_string(i));
}

void read_mm_csv(const std::string& path, int m, Dataset& data) {
  CsvReader reader(path, {"membership", "y2", "E2"});
  data.y2.assign(m, 0);
  data.E2.assign(m, 0.0);
  std::vector<bool> seen(m, false);
  while (reader.next_row()) {
    int j = reader.int_field(0);
    if (j < 0 || j >= m)
      throw DataError(path + ":" + std::to_string(reader.current_row()) + ": membership " +
                      std::to_string(j) + " outside [0," + std::to_string(m) + ")");
    if (seen[j])
      throw DataError(path + ":" + std::to_string(reader.current_row()) +
                      ": duplicate membership " + std::to_string(j));
    seen[j] = true;
    data.y2[j] = reader.ll_field(1);
    data.E2[j] = reader.double_field(2);
  }
  for (int j = 0; j < m; ++j)
    if (!seen[j]) throw DataError(path + ": missing row for membership " + std::to_string(j));
}

void write_areal_csv(const Dataset& data, const std::string& path) {
  std::vector<std::string> header = {"area", "y1", "E1"};
  for (int j = 0; j < data.p(); ++j) header.push_back("x" + std::to_string(j + 1));
  CsvWriter writer(path, header);
  for (int i = 0; i < data.n(); ++i) {
    writer.field(i);
    writer.field(data.y1[i]);
    writer.field(data.E1[i]);
    for (int j = 0; j < data.p(); ++j) writer.field(data.X[i][j]);
    writer.end_row();
  }
  writer.close();
}

void write_mm_csv(const Dataset& data, const std::string& path) {
  CsvWriter writer(path, {"membership", "y2", "E2"});
  for (int j = 0; j < data.m(); ++j) {
    writer.field(j);
    writer.field(data.y2[j]);
    writer.field(data.E2[j]);
    writer.end_row();
  }
  writer.close();
}

std::vector<double> read_age_table_csv(const std::string& path, int units) {
  CsvReader reader(path, {"unit", "age_group", "rate", "population"});
  std::vector<std::vector<double>> rates(units), pops(units);
  while (reader.next_row()) {
    int unit = reader.int_field(0);
    if (unit < 0 || unit >= units)
      throw DataError(path + ":" + std::to_string(reader.current_row()) + ": unit " +
                      std::to_string(unit) + " outside [0," + std::to_string(units) + ")");
    rates[unit].push_back(reader.double_field(2));
    pops[unit].push_back(reader.double_field(3));
  }
  std::vector<double> offsets(units);
  for (int u = 0; u < units; ++u) {
    if (rates[u].empty()) throw DataError(path + ": no age rows for unit " + std::to_string(u));
    offsets[u] = compute_offsets(rates[u], pops[u]);
  }
  return offsets;
}

}  // namespace carmm
