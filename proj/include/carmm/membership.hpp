#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace carmm {

// Row-stochastic sparse m x n weight matrix mapping areas to memberships
// (GP practices). Row j holds the fractions of membership j's population
// resident in each contributing area; rows sum to 1.
struct MembershipMatrix {
  int m = 0;
  int n = 0;
  std::vector<std::int32_t> row_offsets;  // m + 1
  std::vector<std::int32_t> col_indices;
  std::vector<double> weights;

  // out = H * zeta  (length m)
  void project(const double* zeta, double* out) const;
  std::vector<double> project(const std::vector<double>& zeta) const;

  // out = H' * v  (length n), for likelihood gradients
  std::vector<double> project_transpose(const std::vector<double>& v) const;
};

struct MembershipTriplet {
  int membership;
  int area;
  double weight;
};

// Duplicate (membership, area) entries are summed before normalization.
// With renormalize off, each row must already sum to 1 within 1e-9.
MembershipMatrix build_membership(const std::vector<MembershipTriplet>& triplets, int m, int n,
                                  bool renormalize);

std::vector<double> mm_project(const MembershipMatrix& H, const std::vector<double>& zeta);

// Weight-triplet CSV with header `membership,area,weight`.
MembershipMatrix read_membership_csv(const std::string& path, int m, int n, bool renormalize);
void write_membership_csv(const MembershipMatrix& H, const std::string& path);

}  // namespace carmm
