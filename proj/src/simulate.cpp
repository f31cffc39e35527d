#include "carmm/simulate.hpp"

#include <Eigen/Dense>
#include <cmath>

#include <nlohmann/json.hpp>

#include "carmm/errors.hpp"

namespace carmm {

TruthSpec TruthSpec::no_covariates(PriorKind kind) {
  TruthSpec t;
  t.prior = kind;
  if (kind == PriorKind::mcar) {
    t.alpha1 = 0.40;
    t.alpha2 = 0.40;
    t.eta1 = 0.0;
  }
  return t;
}

TruthSpec TruthSpec::with_covariates(PriorKind kind) {
  TruthSpec t;
  t.prior = kind;
  t.use_covariates = true;
  t.alpha2 = kind == PriorKind::mcar ? 0.40 : 0.20;
  if (kind == PriorKind::mcar) {
    t.alpha2 = 0.40;
    t.eta1 = 0.0;
  }
  t.gamma1 = -0.30;
  t.gamma2 = -0.50;
  t.beta1 = {0.3, 0.5};
  t.beta2 = {1.0, 1.0};
  return t;
}

ParameterState TruthSpec::to_state(int n) const {
  ParameterState s;
  s.phi1.assign(n, 0.0);
  s.phi2.assign(n, 0.0);
  s.alpha1 = alpha1;
  s.alpha2 = prior == PriorKind::mcar ? alpha1 : alpha2;
  s.tau1 = tau1;
  s.tau2 = tau2;
  s.eta0 = eta0;
  s.eta1 = prior == PriorKind::mcar ? 0.0 : eta1;
  s.gamma1 = gamma1;
  s.gamma2 = gamma2;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.psi1 = psi1;
  s.psi2 = psi2;
  return s;
}

namespace {

// Upper Cholesky solve for a zero-mean draw: precision P = L L', solve
// L' x = z so Cov(x) = P^{-1}.
std::vector<double> precision_draw(const SpatialGraph& graph, double alpha, double tau,
                                   Rng& rng) {
  const int n = graph.n;
  Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) prec(i, i) = tau * graph.degrees[i];
  for (const auto& [a, b] : graph.edges) {
    prec(a, b) = -tau * alpha;
    prec(b, a) = -tau * alpha;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefiniteError("CAR precision is not positive definite at alpha = " +
                                   std::to_string(alpha));
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.normal();
  Eigen::VectorXd x = llt.matrixU().solve(z);
  return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace

std::vector<double> sample_car_gmrf(const SpatialGraph& graph, double alpha, double tau,
                                    Rng& rng) {
  if (!(tau > 0.0)) throw InvalidParameterError("sample_car_gmrf needs tau > 0");
  return precision_draw(graph, alpha, tau, rng);
}

GmrfPair sample_gmcar_gmrf(const SpatialGraph& graph, const TruthSpec& truth, Rng& rng) {
  GmrfPair pair;
  pair.phi2 = sample_car_gmrf(graph, truth.prior == PriorKind::mcar ? truth.alpha1
                                                                    : truth.alpha2,
                              truth.tau2, rng);
  std::vector<double> noise = sample_car_gmrf(graph, truth.alpha1, truth.tau1, rng);
  std::vector<double> w_phi2 = graph.neighbor_sum(pair.phi2);
  double eta1 = truth.prior == PriorKind::mcar ? 0.0 : truth.eta1;
  pair.phi1.resize(graph.n);
  for (int i = 0; i < graph.n; ++i)
    pair.phi1[i] = truth.eta0 * pair.phi2[i] + eta1 * w_phi2[i] + noise[i];
  return pair;
}

SimulatedData generate_dataset(const TruthSpec& truth, const SpatialGraph& graph,
                               const MembershipMatrix& H,
                               const std::vector<std::vector<double>>* X,
                               const std::vector<double>& E1, const std::vector<double>& E2,
                               Rng& rng) {
  const int n = graph.n;
  const int m = H.m;
  if (static_cast<int>(E1.size()) != n || static_cast<int>(E2.size()) != m)
    throw DimensionMismatchError("generate_dataset: offset lengths inconsistent");
  if (truth.use_covariates && (X == nullptr || static_cast<int>(X->size()) != n))
    throw DimensionMismatchError("generate_dataset: covariate matrix missing or wrong size");

  GmrfPair phi = sample_gmcar_gmrf(graph, truth, rng);

  // truth betas act on the min-max normalised covariates, matching how
  // fitted coefficients are reported
  std::vector<std::vector<double>> x_norm;
  if (truth.use_covariates) {
    CovariatePreprocess pre = preprocess_covariates(*X);
    const int p = pre.p;
    x_norm.assign(n, std::vector<double>(p));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j)
        x_norm[i][j] = ((*X)[i][j] - pre.column_mins[j]) / pre.column_ranges[j];
  }

  std::vector<double> zeta1(n), zeta2(n);
  for (int i = 0; i < n; ++i) {
    double x1 = 0.0, x2 = 0.0;
    if (truth.use_covariates) {
      for (std::size_t j = 0; j < truth.beta1.size(); ++j) {
        x1 += x_norm[i][j] * truth.beta1[j];
        x2 += x_norm[i][j] * truth.beta2[j];
      }
    }
    zeta1[i] = truth.gamma1 + x1 + phi.phi1[i];
    zeta2[i] = truth.gamma2 + x2 + phi.phi2[i];
  }
  std::vector<double> log_rho2 = H.project(zeta2);

  SimulatedData out;
  out.phi1 = phi.phi1;
  out.phi2 = phi.phi2;
  out.data.E1 = E1;
  out.data.E2 = E2;
  if (truth.use_covariates) out.data.X = *X;
  out.data.y1.resize(n);
  out.data.y2.resize(m);
  for (int i = 0; i < n; ++i)
    out.data.y1[i] = rng.negbin(E1[i] * std::exp(zeta1[i]), truth.psi1);
  for (int j = 0; j < m; ++j)
    out.data.y2[j] = rng.negbin(E2[j] * std::exp(log_rho2[j]), truth.psi2);
  return out;
}

SpatialGraph make_lattice(int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw DataError("make_lattice needs rows*cols >= 2");
  std::vector<std::pair<int, int>> edges;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  }
  return build_graph(edges, rows * cols);
}

MembershipMatrix make_membership(int m, const SpatialGraph& graph, int sparsity, Rng& rng) {
  if (m < 1) throw DataError("make_membership needs m >= 1");
  const int n = graph.n;
  sparsity = std::clamp(sparsity, 1, n);
  std::vector<MembershipTriplet> triplets;
  for (int j = 0; j < m; ++j) {
    // support size 1 + Binomial(n-1, (sparsity-1)/(n-1)): mean = sparsity,
    // never empty, degenerates to exactly one area at sparsity 1
    int extra = 0;
    if (sparsity > 1) {
      double prob = static_cast<double>(sparsity - 1) / (n - 1);
      for (int t = 0; t < n - 1; ++t)
        if (rng.uniform() < prob) ++extra;
    }
    int support = 1 + extra;

    // sample `support` distinct areas (partial Fisher-Yates over area ids)
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i;
    for (int k = 0; k < support; ++k) {
      int pick = rng.uniform_int(k, n - 1);
      std::swap(ids[k], ids[pick]);
    }
    std::vector<double> w = rng.dirichlet(support);
    for (int k = 0; k < support; ++k) triplets.push_back({j, ids[k], w[k]});
  }
  return build_membership(triplets, m, n, /*renormalize=*/true);
}

std::vector<double> make_offsets(int count, Rng& rng) {
  std::vector<double> offsets(count);
  const double lo = std::log(5.0), hi = std::log(50.0);
  for (auto& e : offsets) e = std::exp(rng.uniform(lo, hi));
  return offsets;
}

std::vector<std::vector<double>> make_covariates(int n, int p, Rng& rng) {
  std::vector<std::vector<double>> X(n, std::vector<double>(p));
  for (auto& row : X)
    for (auto& v : row) v = rng.uniform();
  return X;
}

std::string truth_json(const TruthSpec& truth) {
  nlohmann::json j;
  j["prior"] = truth.prior == PriorKind::mcar ? "mcar" : "gmcar";
  j["use_covariates"] = truth.use_covariates;
  j["alpha1"] = truth.alpha1;
  j["alpha2"] = truth.alpha2;
  j["tau1"] = truth.tau1;
  j["tau2"] = truth.tau2;
  j["eta0"] = truth.eta0;
  j["eta1"] = truth.eta1;
  j["gamma1"] = truth.gamma1;
  j["gamma2"] = truth.gamma2;
  j["beta1"] = truth.beta1;
  j["beta2"] = truth.beta2;
  j["psi1"] = truth.psi1;
  j["psi2"] = truth.psi2;
  return j.dump(2) + "\n";
}

TruthSpec truth_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TruthSpec t;
  t.prior = j.at("prior").get<std::string>() == "mcar" ? PriorKind::mcar : PriorKind::gmcar;
  t.use_covariates = j.at("use_covariates").get<bool>();
  t.alpha1 = j.at("alpha1").get<double>();
  t.alpha2 = j.at("alpha2").get<double>();
  t.tau1 = j.at("tau1").get<double>();
  t.tau2 = j.at("tau2").get<double>();
  t.eta0 = j.at("eta0").get<double>();
  t.eta1 = j.at("eta1").get<double>();
  t.gamma1 = j.at("gamma1").get<double>();
  t.gamma2 = j.at("gamma2").get<double>();
  t.beta1 = j.at("beta1").get<std::vector<double>>();
  t.beta2 = j.at("beta2").get<std::vector<double>>();
  t.psi1 = j.at("psi1").get<double>();
  t.psi2 = j.at("psi2").get<double>();
  return t;
}

}  // namespace carmm
