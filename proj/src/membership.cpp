#include "carmm/membership.hpp"

#include <cmath>
#include <map>

#include "carmm/csv.hpp"
#include "carmm/errors.hpp"
#include "carmm/kernels.hpp"

namespace carmm {

void MembershipMatrix::project(const double* zeta, double* out) const {
  kernels::dispatch().spmv(row_offsets.data(), col_indices.data(), weights.data(),
                           static_cast<std::size_t>(m), zeta, out);
}

std::vector<double> MembershipMatrix::project(const std::vector<double>& zeta) const {
  if (static_cast<int>(zeta.size()) != n)
    throw DimensionMismatchError("mm_project: zeta has length " + std::to_string(zeta.size()) +
                                 ", expected " + std::to_string(n));
  std::vector<double> out(m);
  project(zeta.data(), out.data());
  return out;
}

std::vector<double> MembershipMatrix::project_transpose(const std::vector<double>& v) const {
  if (static_cast<int>(v.size()) != m)
    throw DimensionMismatchError("project_transpose: input has length " +
                                 std::to_string(v.size()) + ", expected " + std::to_string(m));
  std::vector<double> out(n, 0.0);
  for (int j = 0; j < m; ++j) {
    for (std::int32_t k = row_offsets[j]; k < row_offsets[j + 1]; ++k)
      out[col_indices[k]] += weights[k] * v[j];
  }
  return out;
}

MembershipMatrix build_membership(const std::vector<MembershipTriplet>& triplets, int m, int n,
                                  bool renormalize) {
  if (m < 1 || n < 1) throw DataError("membership matrix needs m >= 1 and n >= 1");

  // sum duplicates; map keeps (row, col) order canonical regardless of input order
  std::map<std::pair<int, int>, double> cells;
  for (const auto& t : triplets) {
    if (t.membership < 0 || t.membership >= m)
      throw InvalidIdError("membership id " + std::to_string(t.membership) + " outside [0," +
                           std::to_string(m) + ")");
    if (t.area < 0 || t.area >= n)
      throw InvalidIdError("area id " + std::to_string(t.area) + " outside [0," +
                           std::to_string(n) + ")");
    if (t.weight < 0.0)
      throw NegativeWeightError("negative weight for membership " +
                                std::to_string(t.membership) + ", area " +
                                std::to_string(t.area));
    cells[{t.membership, t.area}] += t.weight;
  }

  std::vector<double> row_sums(m, 0.0);
  std::vector<int> row_counts(m, 0);
  for (const auto& [key, w] : cells) {
    row_sums[key.first] += w;
    ++row_counts[key.first];
  }
  for (int j = 0; j < m; ++j) {
    if (row_counts[j] == 0 || row_sums[j] == 0.0) throw EmptyRowError(j);
    if (!renormalize && std::fabs(row_sums[j] - 1.0) > 1e-9)
      throw RowSumViolationError(j, row_sums[j]);
  }

  MembershipMatrix H;
  H.m = m;
  H.n = n;
  H.row_offsets.assign(m + 1, 0);
  for (const auto& [key, w] : cells) {
    (void)w;
    ++H.row_offsets[key.first + 1];
  }
  for (int j = 0; j < m; ++j) H.row_offsets[j + 1] += H.row_offsets[j];
  H.col_indices.resize(cells.size());
  H.weights.resize(cells.size());
  std::vector<std::int32_t> cursor(H.row_offsets.begin(), H.row_offsets.end() - 1);
  for (const auto& [key, w] : cells) {
    std::int32_t pos = cursor[key.first]++;
    H.col_indices[pos] = key.second;
    H.weights[pos] = renormalize ? w / row_sums[key.first] : w;
  }
  return H;
}

std::vector<double> mm_project(const MembershipMatrix& H, const std::vector<double>& zeta) {
  return H.project(zeta);
}

MembershipMatrix read_membership_csv(const std::string& path, int m, int n, bool renormalize) {
  CsvReader reader(path, {"membership", "area", "weight"});
  std::vector<MembershipTriplet> triplets;
  while (reader.next_row()) {
    MembershipTriplet t;
    t.membership = reader.int_field(0);
    t.area = reader.int_field(1);
    t.weight = reader.double_field(2);
    triplets.push_back(t);
  }
  return build_membership(triplets, m, n, renormalize);
}

void write_membership_csv(const MembershipMatrix& H, const std::string& path) {
  CsvWriter writer(path, {"membership", "area", "weight"});
  for (int j = 0; j < H.m; ++j) {
    for (std::int32_t k = H.row_offsets[j]; k < H.row_offsets[j + 1]; ++k) {
      writer.field(j);
      writer.field(static_cast<int>(H.col_indices[k]));
      writer.field(H.weights[k]);
      writer.end_row();
    }
  }
  writer.close();
}

}  // namespace carmm
