#pragma once

#include <string>
#include <vector>

#include "carmm/graph.hpp"

namespace carmm {

enum class RiskCategory { HH, HL, LH, LL };

std::string category_label(RiskCategory c);

// Per-area fraction of draws strictly above the risk threshold.
std::vector<double> exceedance_prob(const std::vector<std::vector<double>>& rho_draws,
                                    double threshold_risk);

// Per draw and area, the average relative risk over the locality (the
// neighbours of the area; the area itself is excluded).
std::vector<std::vector<double>> locality_risk(const std::vector<std::vector<double>>& rho_draws,
                                               const SpatialGraph& graph);

// HH iff both exceedance probabilities are above the probability threshold;
// HL iff only the area's is; LH iff only the locality's is; LL otherwise.
std::vector<RiskCategory> classify(const std::vector<double>& p_area,
                                   const std::vector<double>& p_locality,
                                   double threshold_prob);

struct BivariateLabels {
  std::vector<std::string> cell;       // 16-category "HH,LH"-style labels
  std::vector<std::string> collapsed;  // within-area labels, e.g. "M:H-P:L"
};

BivariateLabels bivariate_classify(const std::vector<RiskCategory>& categories_outcome1,
                                   const std::vector<RiskCategory>& categories_outcome2);

struct ClusterReport {
  double threshold_risk = 1.0;
  double threshold_prob = 0.9;
  // per outcome
  std::vector<double> p_area_1, p_locality_1;
  std::vector<double> p_area_2, p_locality_2;
  std::vector<RiskCategory> categories_1, categories_2;
  BivariateLabels bivariate;
};

// Mortality uses the rho_1 draws; prevalence uses the areal-implied exp(zeta_2)
// draws so both outcomes are classified on the areal framework.
ClusterReport cluster_report(const std::vector<std::vector<double>>& rho1_draws,
                             const std::vector<std::vector<double>>& zeta2_exp_draws,
                             const SpatialGraph& graph, double threshold_risk,
                             double threshold_prob);

void write_cluster_csv(const ClusterReport& report, const std::string& path);
void write_bivariate_csv(const ClusterReport& report, const std::string& path);

// Attach cluster fields to features of a GeoJSON FeatureCollection whose
// properties carry a 0-based integer `area` id; unmatched features pass
// through untouched.
std::string geojson_join(const std::string& geojson_text, const ClusterReport& report);

}  // namespace carmm
