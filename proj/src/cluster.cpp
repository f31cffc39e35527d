#include "carmm/cluster.hpp"

#include <nlohmann/json.hpp>

#include "carmm/csv.hpp"
#include "carmm/errors.hpp"

namespace carmm {

std::string category_label(RiskCategory c) {
  switch (c) {
    case RiskCategory::HH: return "HH";
    case RiskCategory::HL: return "HL";
    case RiskCategory::LH: return "LH";
    default: return "LL";
  }
}

std::vector<double> exceedance_prob(const std::vector<std::vector<double>>& rho_draws,
                                    double threshold_risk) {
  if (rho_draws.empty()) throw DataError("exceedance_prob: no draws");
  const std::size_t n = rho_draws.front().size();
  std::vector<double> p(n, 0.0);
  for (const auto& draw : rho_draws) {
    if (draw.size() != n) throw DimensionMismatchError("exceedance_prob: ragged draws");
    for (std::size_t i = 0; i < n; ++i)
      if (draw[i] > threshold_risk) p[i] += 1.0;  // strict: ties do not exceed
  }
  for (auto& v : p) v /= rho_draws.size();
  return p;
}

std::vector<std::vector<double>> locality_risk(const std::vector<std::vector<double>>& rho_draws,
                                               const SpatialGraph& graph) {
  if (rho_draws.empty()) throw DataError("locality_risk: no draws");
  if (static_cast<int>(rho_draws.front().size()) != graph.n)
    throw DimensionMismatchError("locality_risk: draw width != graph size");
  std::vector<std::vector<double>> out(rho_draws.size(), std::vector<double>(graph.n));
  for (std::size_t s = 0; s < rho_draws.size(); ++s) {
    graph.neighbor_sum(rho_draws[s].data(), out[s].data());
    for (int i = 0; i < graph.n; ++i) out[s][i] /= graph.degrees[i];
  }
  return out;
}

std::vector<RiskCategory> classify(const std::vector<double>& p_area,
                                   const std::vector<double>& p_locality,
                                   double threshold_prob) {
  if (p_area.size() != p_locality.size())
    throw DimensionMismatchError("classify: probability vectors differ in length");
  std::vector<RiskCategory> out(p_area.size());
  for (std::size_t i = 0; i < p_area.size(); ++i) {
    bool area_high = p_area[i] > threshold_prob;
    bool locality_high = p_locality[i] > threshold_prob;
    out[i] = area_high ? (locality_high ? RiskCategory::HH : RiskCategory::HL)
                       : (locality_high ? RiskCategory::LH : RiskCategory::LL);
  }
  return out;
}

BivariateLabels bivariate_classify(const std::vector<RiskCategory>& categories_outcome1,
                                   const std::vector<RiskCategory>& categories_outcome2) {
  if (categories_outcome1.size() != categories_outcome2.size())
    throw DimensionMismatchError("bivariate_classify: category vectors differ in length");
  BivariateLabels out;
  out.cell.resize(categories_outcome1.size());
  out.collapsed.resize(categories_outcome1.size());
  for (std::size_t i = 0; i < categories_outcome1.size(); ++i) {
    std::string c1 = category_label(categories_outcome1[i]);
    std::string c2 = category_label(categories_outcome2[i]);
    out.cell[i] = c1 + ";" + c2;
    // collapsed label keeps only the area-level letter of each outcome
    out.collapsed[i] = std::string("M:") + c1[0] + "-P:" + c2[0];
  }
  return out;
}

ClusterReport cluster_report(const std::vector<std::vector<double>>& rho1_draws,
                             const std::vector<std::vector<double>>& zeta2_exp_draws,
                             const SpatialGraph& graph, double threshold_risk,
                             double threshold_prob) {
  ClusterReport report;
  report.threshold_risk = threshold_risk;
  report.threshold_prob = threshold_prob;

  report.p_area_1 = exceedance_prob(rho1_draws, threshold_risk);
  report.p_locality_1 = exceedance_prob(locality_risk(rho1_draws, graph), threshold_risk);
  report.categories_1 = classify(report.p_area_1, report.p_locality_1, threshold_prob);

  report.p_area_2 = exceedance_prob(zeta2_exp_draws, threshold_risk);
  report.p_locality_2 = exceedance_prob(locality_risk(zeta2_exp_draws, graph), threshold_risk);
  report.categories_2 = classify(report.p_area_2, report.p_locality_2, threshold_prob);

  report.bivariate = bivariate_classify(report.categories_1, report.categories_2);
  return report;
}

void write_cluster_csv(const ClusterReport& report, const std::string& path) {
  CsvWriter writer(path, {"area", "outcome", "p_area", "p_locality", "category"});
  const int n = static_cast<int>(report.p_area_1.size());
  for (int outcome = 1; outcome <= 2; ++outcome) {
    const auto& pa = outcome == 1 ? report.p_area_1 : report.p_area_2;
    const auto& pl = outcome == 1 ? report.p_locality_1 : report.p_locality_2;
    const auto& cat = outcome == 1 ? report.categories_1 : report.categories_2;
    for (int i = 0; i < n; ++i) {
      writer.field(i);
      writer.field(outcome);
      writer.field(pa[i]);
      writer.field(pl[i]);
      writer.field(category_label(cat[i]));
      writer.end_row();
    }
  }
  writer.close();
}

void write_bivariate_csv(const ClusterReport& report, const std::string& path) {
  CsvWriter writer(path, {"area", "cell", "collapsed_label"});
  for (std::size_t i = 0; i < report.bivariate.cell.size(); ++i) {
    writer.field(static_cast<int>(i));
    writer.field(report.bivariate.cell[i]);
    writer.field(report.bivariate.collapsed[i]);
    writer.end_row();
  }
  writer.close();
}

std::string geojson_join(const std::string& geojson_text, const ClusterReport& report) {
  nlohmann::json doc = nlohmann::json::parse(geojson_text);
  if (!doc.contains("features"))
    throw DataError("geojson join: input has no features array");
  const int n = static_cast<int>(report.p_area_1.size());
  for (auto& feature : doc["features"]) {
    if (!feature.contains("properties") || !feature["properties"].contains("area")) continue;
    int area = feature["properties"]["area"].get<int>();
    if (area < 0 || area >= n) continue;
    auto& props = feature["properties"];
    props["p_area_1"] = report.p_area_1[area];
    props["p_locality_1"] = report.p_locality_1[area];
    props["category_1"] = category_label(report.categories_1[area]);
    props["p_area_2"] = report.p_area_2[area];
    props["p_locality_2"] = report.p_locality_2[area];
    props["category_2"] = category_label(report.categories_2[area]);
    props["bivariate_cell"] = report.bivariate.cell[area];
    props["bivariate_label"] = report.bivariate.collapsed[area];
  }
  return doc.dump(2) + "\n";
}

}  // namespace carmm
