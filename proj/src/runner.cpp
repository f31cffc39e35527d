#include "carmm/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "carmm/cluster.hpp"
#include "carmm/compare.hpp"
#include "carmm/csv.hpp"
#include "carmm/diagnostics.hpp"
#include "carmm/errors.hpp"
#include "carmm/kernels.hpp"
#include "carmm/sampler.hpp"
#include "carmm/simulate.hpp"

namespace carmm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  // inputs
  std::string graph_path, membership_path, areal_path, mm_path, boundaries_path, config_path;
  std::string areal_ages_path, mm_ages_path;
  std::string fit_dir_a, fit_dir_b;
  std::string out_dir;
  bool rank_normalize = false;
  // model spec
  std::string model = "gmcar";
  std::string covariates = "off";
  std::string alpha_constraint;  // empty: model default
  Hyperpriors hyper;
  // fit config
  FitConfig fit;
  // clustering thresholds
  double threshold_risk = 1.0;
  double threshold_prob = 0.9;
  // simulate shape
  int rows = 10, cols = 10, memberships = 130, sparsity = 10;
};

ModelSpec make_spec(const RunConfig& cfg) {
  PriorKind kind = cfg.model == "mcar" ? PriorKind::mcar : PriorKind::gmcar;
  ModelSpec spec = ModelSpec::make(kind, cfg.covariates == "on");
  spec.hyper = cfg.hyper;
  if (cfg.alpha_constraint == "unit_interval")
    spec.alpha_constraint = AlphaConstraint::unit_interval;
  else if (cfg.alpha_constraint == "symmetric_unit")
    spec.alpha_constraint = AlphaConstraint::symmetric_unit;
  return spec;
}

void apply_config_file(RunConfig& cfg) {
  if (cfg.config_path.empty()) return;
  json j = json::parse(read_file(cfg.config_path));
  if (j.contains("model")) cfg.model = j["model"].get<std::string>();
  if (j.contains("covariates"))
    cfg.covariates = j["covariates"].get<bool>() ? "on" : "off";
  if (j.contains("alpha_constraint"))
    cfg.alpha_constraint = j["alpha_constraint"].get<std::string>();
  if (j.contains("chains")) cfg.fit.chains = j["chains"].get<int>();
  if (j.contains("iterations")) cfg.fit.iterations = j["iterations"].get<int>();
  if (j.contains("warmup_fraction")) cfg.fit.warmup_fraction = j["warmup_fraction"].get<double>();
  if (j.contains("leapfrog_steps")) cfg.fit.leapfrog_steps = j["leapfrog_steps"].get<int>();
  if (j.contains("max_leapfrog_steps"))
    cfg.fit.max_leapfrog_steps = j["max_leapfrog_steps"].get<int>();
  if (j.contains("target_accept")) cfg.fit.target_accept = j["target_accept"].get<double>();
  if (j.contains("seed")) cfg.fit.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) cfg.fit.threads = j["threads"].get<int>();
  if (j.contains("tr")) cfg.threshold_risk = j["tr"].get<double>();
  if (j.contains("tp")) cfg.threshold_prob = j["tp"].get<double>();
  if (j.contains("hyper")) {
    const json& h = j["hyper"];
    if (h.contains("gamma_sd")) cfg.hyper.gamma_sd = h["gamma_sd"].get<double>();
    if (h.contains("eta_sd")) cfg.hyper.eta_sd = h["eta_sd"].get<double>();
    if (h.contains("tau_scale")) cfg.hyper.tau_scale = h["tau_scale"].get<double>();
    if (h.contains("psi_shape")) cfg.hyper.psi_shape = h["psi_shape"].get<double>();
    if (h.contains("psi_rate")) cfg.hyper.psi_rate = h["psi_rate"].get<double>();
  }
  if (j.contains("simulate")) {
    const json& s = j["simulate"];
    if (s.contains("rows")) cfg.rows = s["rows"].get<int>();
    if (s.contains("cols")) cfg.cols = s["cols"].get<int>();
    if (s.contains("memberships")) cfg.memberships = s["memberships"].get<int>();
    if (s.contains("sparsity")) cfg.sparsity = s["sparsity"].get<int>();
  }
}

json resolved_config_json(const RunConfig& cfg) {
  json j;
  j["model"] = cfg.model;
  j["covariates"] = cfg.covariates == "on";
  j["alpha_constraint"] =
      make_spec(cfg).alpha_constraint == AlphaConstraint::unit_interval ? "unit_interval"
                                                                        : "symmetric_unit";
  j["chains"] = cfg.fit.chains;
  j["iterations"] = cfg.fit.iterations;
  j["warmup_fraction"] = cfg.fit.warmup_fraction;
  j["leapfrog_steps"] = cfg.fit.leapfrog_steps;
  j["max_leapfrog_steps"] = cfg.fit.max_leapfrog_steps;
  j["target_accept"] = cfg.fit.target_accept;
  j["seed"] = cfg.fit.seed;
  j["tr"] = cfg.threshold_risk;
  j["tp"] = cfg.threshold_prob;
  j["hyper"] = {{"gamma_sd", cfg.hyper.gamma_sd},
                {"eta_sd", cfg.hyper.eta_sd},
                {"tau_scale", cfg.hyper.tau_scale},
                {"psi_shape", cfg.hyper.psi_shape},
                {"psi_rate", cfg.hyper.psi_rate}};
  return j;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const RunConfig& cfg, const std::vector<std::string>& input_paths,
                    const json& extra) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = resolved_config_json(cfg);
  manifest["seed"] = cfg.fit.seed;
  manifest["kernels_backend"] = kernels::backend_name();
  json inputs = json::object();
  for (const auto& path : input_paths) inputs[path] = file_hash_hex(path);
  manifest["inputs"] = inputs;
  for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
  write_file_atomic((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

int count_data_rows(const std::string& path) {
  std::string text = read_file(path);
  int rows = 0;
  bool nonblank = false;
  for (char c : text) {
    if (c == '\n') {
      if (nonblank) ++rows;
      nonblank = false;
    } else if (c != '\r' && c != ' ') {
      nonblank = true;
    }
  }
  if (nonblank) ++rows;
  return std::max(0, rows - 1);  // header excluded
}

void ensure_out_dir(const std::string& path) {
  if (path.empty()) throw DataError("--out directory is required");
  fs::create_directories(path);
}

// ------------------------------------------------------------------ simulate

int run_simulate(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  Rng rng(cfg.fit.seed, 7001);

  SpatialGraph graph = make_lattice(cfg.rows, cfg.cols);
  MembershipMatrix H = make_membership(cfg.memberships, graph, cfg.sparsity, rng);

  PriorKind kind = cfg.model == "mcar" ? PriorKind::mcar : PriorKind::gmcar;
  bool covariates = cfg.covariates == "on";
  TruthSpec truth =
      covariates ? TruthSpec::with_covariates(kind) : TruthSpec::no_covariates(kind);

  std::vector<double> E1 = make_offsets(graph.n, rng);
  std::vector<double> E2 = make_offsets(H.m, rng);
  std::vector<std::vector<double>> X;
  if (covariates) X = make_covariates(graph.n, static_cast<int>(truth.beta1.size()), rng);

  SimulatedData sim =
      generate_dataset(truth, graph, H, covariates ? &X : nullptr, E1, E2, rng);

  fs::path out(cfg.out_dir);
  write_graph_csv(graph, (out / "graph.csv").string());
  write_membership_csv(H, (out / "membership.csv").string());
  write_areal_csv(sim.data, (out / "areal.csv").string());
  write_mm_csv(sim.data, (out / "mm.csv").string());
  write_file_atomic((out / "truth.json").string(), truth_json(truth));

  json extra;
  extra["n"] = graph.n;
  extra["m"] = H.m;
  write_manifest(cfg.out_dir, "simulate", cfg, {}, extra);
  std::cout << "simulated " << graph.n << " areas, " << H.m << " memberships -> "
            << cfg.out_dir << "\n";
  return 0;
}

// ----------------------------------------------------------------------- fit

void write_long_csv(const std::string& path, const PosteriorSamples& samples,
                    const std::vector<std::string>& names,
                    const std::function<double(const ChainDraws&, int, int)>& value) {
  CsvWriter writer(path, {"chain", "iteration", "name", "value"});
  for (int c = 0; c < samples.chains; ++c) {
    for (int it = 0; it < samples.kept; ++it) {
      for (int q = 0; q < static_cast<int>(names.size()); ++q) {
        writer.field(c + 1);
        writer.field(it + 1);
        writer.field(names[q]);
        writer.field(value(samples.chain[c], it, q));
        writer.end_row();
      }
    }
  }
  writer.close();
}

template <typename T>
void write_indexed_csv(const std::string& path, const PosteriorSamples& samples, int width,
                       const std::vector<T> ChainDraws::* member) {
  CsvWriter writer(path, {"chain", "iteration", "index", "value"});
  for (int c = 0; c < samples.chains; ++c) {
    const auto& flat = samples.chain[c].*member;
    for (int it = 0; it < samples.kept; ++it) {
      for (int i = 0; i < width; ++i) {
        writer.field(c + 1);
        writer.field(it + 1);
        writer.field(i);
        writer.field(flat[static_cast<std::size_t>(it) * width + i]);
        writer.end_row();
      }
    }
  }
  writer.close();
}

int run_fit(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  if (cfg.areal_path.empty() || cfg.mm_path.empty() || cfg.graph_path.empty() ||
      cfg.membership_path.empty())
    throw DataError("fit needs --graph, --membership, --areal-data and --mm-data");

  const int n = count_data_rows(cfg.areal_path);
  const int m = count_data_rows(cfg.mm_path);
  if (n < 2) throw DataError(cfg.areal_path + ": needs at least 2 area rows");
  if (m < 1) throw DataError(cfg.mm_path + ": needs at least 1 membership row");

  SpatialGraph graph = read_graph_csv(cfg.graph_path, n);
  MembershipMatrix H = read_membership_csv(cfg.membership_path, m, n, /*renormalize=*/false);
  Dataset data;
  read_areal_csv(cfg.areal_path, n, data);
  read_mm_csv(cfg.mm_path, m, data);
  // age tables, when given, recompute the offsets from reference rates
  if (!cfg.areal_ages_path.empty()) data.E1 = read_age_table_csv(cfg.areal_ages_path, n);
  if (!cfg.mm_ages_path.empty()) data.E2 = read_age_table_csv(cfg.mm_ages_path, m);
  data.validate(n, m);

  ModelSpec spec = make_spec(cfg);
  CovariatePreprocess pre;
  const CovariatePreprocess* pre_ptr = nullptr;
  if (spec.use_covariates) {
    if (data.p() == 0) throw DataError(cfg.areal_path + ": covariates requested but no x columns");
    pre = preprocess_covariates(data.X);
    pre_ptr = &pre;
  }

  PosteriorSamples samples = hmc_fit(data, spec, graph, H, pre_ptr, cfg.fit);

  fs::path out(cfg.out_dir);
  // parameter draws in long format: scalars then phi fields
  std::vector<std::string> names = samples.names;
  for (int outcome = 1; outcome <= 2; ++outcome)
    for (int i = 0; i < samples.n; ++i)
      names.push_back("phi" + std::to_string(outcome) + "[" + std::to_string(i + 1) + "]");
  const int n_scalar = samples.scalar_count();
  write_long_csv((out / "samples.csv").string(), samples, names,
                 [&](const ChainDraws& c, int it, int q) {
                   if (q < n_scalar) return c.scalars[static_cast<std::size_t>(it) * n_scalar + q];
                   int r = q - n_scalar;
                   if (r < samples.n) return c.phi1[static_cast<std::size_t>(it) * samples.n + r];
                   r -= samples.n;
                   return c.phi2[static_cast<std::size_t>(it) * samples.n + r];
                 });

  write_indexed_csv((out / "rho1.csv").string(), samples, samples.n, &ChainDraws::rho1);
  write_indexed_csv((out / "zeta2.csv").string(), samples, samples.n, &ChainDraws::zeta2_exp);
  write_indexed_csv((out / "rho2.csv").string(), samples, samples.m, &ChainDraws::rho2);
  write_indexed_csv((out / "yrep1.csv").string(), samples, samples.n, &ChainDraws::yrep1);
  write_indexed_csv((out / "yrep2.csv").string(), samples, samples.m, &ChainDraws::yrep2);
  write_indexed_csv((out / "loglik.csv").string(), samples, samples.n + samples.m,
                    &ChainDraws::loglik);

  std::vector<SummaryRow> rows = summarize(samples, cfg.rank_normalize);
  write_summary_csv(rows, (out / "summary.csv").string());

  FitReport report = fit_report(samples, data);
  write_file_atomic((out / "fit_report.json").string(), fit_report_json(report));

  int divergences = 0;
  for (const auto& c : samples.chain) divergences += c.divergences;

  json extra;
  extra["n"] = n;
  extra["m"] = m;
  extra["p"] = data.p();
  extra["kept_iterations"] = samples.kept;
  extra["divergences"] = divergences;
  write_manifest(cfg.out_dir, "fit", cfg,
                 {cfg.graph_path, cfg.membership_path, cfg.areal_path, cfg.mm_path}, extra);

  double div_rate =
      static_cast<double>(divergences) / (static_cast<double>(samples.kept) * samples.chains);
  if (divergences > 0)
    std::cerr << "warning: divergence rate " << div_rate << " (" << divergences
              << " divergent iterations kept post-warmup)\n";
  std::cout << "fit complete: " << samples.chains << " chains x " << samples.kept
            << " kept iterations -> " << cfg.out_dir << "\n";
  return 0;
}

// ------------------------------------------------------------------ diagnose

int run_diagnose(const RunConfig& cfg) {
  if (cfg.fit_dir_a.empty()) throw DataError("diagnose needs --fit");
  std::string out_dir = cfg.out_dir.empty() ? cfg.fit_dir_a : cfg.out_dir;
  ensure_out_dir(out_dir);

  CsvReader reader((fs::path(cfg.fit_dir_a) / "samples.csv").string(),
                   {"chain", "iteration", "name", "value"});
  std::map<std::string, std::map<int, std::vector<double>>> by_name;
  std::vector<std::string> order;
  while (reader.next_row()) {
    int chain = reader.int_field(0);
    const std::string& name = reader.fields()[2];
    double value = reader.double_field(3);
    auto [it, inserted] = by_name.try_emplace(name);
    if (inserted) order.push_back(name);
    it->second[chain].push_back(value);
  }

  std::vector<SummaryRow> rows;
  for (const auto& name : order) {
    std::vector<std::vector<double>> chains;
    for (auto& [chain_id, values] : by_name[name]) chains.push_back(values);
    rows.push_back(summarize_quantity(name, chains, cfg.rank_normalize));
  }
  write_summary_csv(rows, (fs::path(out_dir) / "summary.csv").string());
  std::cout << "diagnosed " << rows.size() << " quantities -> " << out_dir << "/summary.csv\n";
  return 0;
}

// ------------------------------------------------------------------- compare

std::vector<std::vector<double>> read_indexed_csv(const std::string& path, int& width) {
  CsvReader reader(path, {"chain", "iteration", "index", "value"});
  std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> cells;
  int max_index = -1;
  while (reader.next_row()) {
    int chain = reader.int_field(0);
    int iter = reader.int_field(1);
    int index = reader.int_field(2);
    max_index = std::max(max_index, index);
    cells[{chain, iter}].emplace_back(index, reader.double_field(3));
  }
  width = max_index + 1;
  std::vector<std::vector<double>> rows;
  rows.reserve(cells.size());
  for (auto& [key, entries] : cells) {
    std::vector<double> row(width, 0.0);
    for (auto& [index, value] : entries) row[index] = value;
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_compare(const RunConfig& cfg) {
  if (cfg.fit_dir_a.empty() || cfg.fit_dir_b.empty())
    throw DataError("compare needs two fit directories");

  auto load = [](const std::string& dir, int& n, int& m) {
    json manifest = json::parse(read_file((fs::path(dir) / "manifest.json").string()));
    n = manifest.at("n").get<int>();
    m = manifest.at("m").get<int>();
    int width = 0;
    auto loglik = read_indexed_csv((fs::path(dir) / "loglik.csv").string(), width);
    if (width != n + m) throw DataError(dir + ": loglik width does not match manifest n+m");
    return loglik;
  };

  int n_a = 0, m_a = 0, n_b = 0, m_b = 0;
  auto ll_a = load(cfg.fit_dir_a, n_a, m_a);
  auto ll_b = load(cfg.fit_dir_b, n_b, m_b);
  if (n_a != n_b || m_a != m_b)
    throw DataError("compare: fits cover different datasets (n or m differ)");

  auto slice = [](const std::vector<std::vector<double>>& ll, int begin, int count) {
    std::vector<std::vector<double>> out(ll.size(), std::vector<double>(count));
    for (std::size_t s = 0; s < ll.size(); ++s)
      for (int i = 0; i < count; ++i) out[s][i] = ll[s][begin + i];
    return out;
  };

  json result;
  const char* outcome_names[2] = {"outcome1", "outcome2"};
  for (int outcome = 0; outcome < 2; ++outcome) {
    int begin = outcome == 0 ? 0 : n_a;
    int count = outcome == 0 ? n_a : m_a;
    LooResult loo_a = loo_elpd(slice(ll_a, begin, count));
    LooResult loo_b = loo_elpd(slice(ll_b, begin, count));
    ElpdDiff diff = elpd_diff_se(loo_a.pointwise, loo_b.pointwise);
    json o;
    o["elpd_loo_a"] = loo_a.elpd_loo;
    o["elpd_loo_b"] = loo_b.elpd_loo;
    o["looic_a"] = loo_a.looic;
    o["looic_b"] = loo_b.looic;
    o["elpd_diff"] = diff.mean_diff;
    o["elpd_diff_se"] = diff.se;
    result[outcome_names[outcome]] = o;
    std::cout << outcome_names[outcome] << ": elpd diff (A - B) = " << diff.mean_diff
              << " se = " << diff.se << "\n";
  }

  if (!cfg.out_dir.empty()) {
    ensure_out_dir(cfg.out_dir);
    write_file_atomic((fs::path(cfg.out_dir) / "compare.json").string(),
                      result.dump(2) + "\n");
  }
  return 0;
}

// ------------------------------------------------------------------- cluster

int run_cluster(const RunConfig& cfg) {
  if (cfg.fit_dir_a.empty() || cfg.graph_path.empty())
    throw DataError("cluster needs --fit and --graph");
  ensure_out_dir(cfg.out_dir);

  int n1 = 0, n2 = 0;
  auto rho1 = read_indexed_csv((fs::path(cfg.fit_dir_a) / "rho1.csv").string(), n1);
  auto zeta2 = read_indexed_csv((fs::path(cfg.fit_dir_a) / "zeta2.csv").string(), n2);
  if (n1 != n2) throw DataError("cluster: rho1 and zeta2 widths differ");

  SpatialGraph graph = read_graph_csv(cfg.graph_path, n1);
  ClusterReport report =
      cluster_report(rho1, zeta2, graph, cfg.threshold_risk, cfg.threshold_prob);

  fs::path out(cfg.out_dir);
  write_cluster_csv(report, (out / "cluster.csv").string());
  write_bivariate_csv(report, (out / "bivariate.csv").string());
  if (!cfg.boundaries_path.empty()) {
    std::string joined = geojson_join(read_file(cfg.boundaries_path), report);
    write_file_atomic((out / "clusters.geojson").string(), joined);
  }

  int hh = 0;
  for (auto c : report.categories_1)
    if (c == RiskCategory::HH) ++hh;
  std::cout << "clustered " << n1 << " areas (outcome 1: " << hh << " HH) -> " << cfg.out_dir
            << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"bivariate CAR disease mapping with multiple membership"};
  app.require_subcommand(1);

  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cfg.config_path, "JSON config file");
    sub->add_option("--seed", cfg.fit.seed, "rng seed");
    sub->add_option("--out", cfg.out_dir, "output directory");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "prior kind")
        ->check(CLI::IsMember({"gmcar", "mcar"}));
    sub->add_option("--covariates", cfg.covariates, "include covariates")
        ->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--alpha-constraint", cfg.alpha_constraint, "alpha box")
        ->check(CLI::IsMember({"unit_interval", "symmetric_unit"}));
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset at known truths");
  add_common(sim);
  add_model(sim);
  sim->add_option("--rows", cfg.rows, "lattice rows");
  sim->add_option("--cols", cfg.cols, "lattice columns");
  sim->add_option("--memberships", cfg.memberships, "membership count");
  sim->add_option("--sparsity", cfg.sparsity, "mean contributing areas per membership");

  CLI::App* fit = app.add_subcommand("fit", "run hmc on a dataset");
  add_common(fit);
  add_model(fit);
  fit->add_option("--graph", cfg.graph_path, "edge-list csv");
  fit->add_option("--membership", cfg.membership_path, "weight-triplet csv");
  fit->add_option("--areal-data", cfg.areal_path, "areal data csv");
  fit->add_option("--mm-data", cfg.mm_path, "membership data csv");
  fit->add_option("--areal-ages", cfg.areal_ages_path,
                  "age-table csv replacing the areal offsets");
  fit->add_option("--mm-ages", cfg.mm_ages_path,
                  "age-table csv replacing the membership offsets");
  fit->add_option("--chains", cfg.fit.chains, "chain count");
  fit->add_option("--iters", cfg.fit.iterations, "iterations per chain (warmup included)");
  fit->add_option("--warmup-fraction", cfg.fit.warmup_fraction, "warmup fraction");
  fit->add_option("--leapfrog-steps", cfg.fit.leapfrog_steps, "base leapfrog steps");
  fit->add_option("--target-accept", cfg.fit.target_accept, "adaptation target");
  fit->add_option("--threads", cfg.fit.threads, "parallel chains (0 = auto)");
  fit->add_flag("--rank-normalized", cfg.rank_normalize, "rank-normalized split R-hat");

  CLI::App* diag = app.add_subcommand("diagnose", "summaries and convergence for a fit");
  add_common(diag);
  diag->add_option("--fit", cfg.fit_dir_a, "fit output directory")->required();
  diag->add_flag("--rank-normalized", cfg.rank_normalize, "rank-normalized split R-hat");

  CLI::App* cmp = app.add_subcommand("compare", "elpd difference between two fits");
  add_common(cmp);
  cmp->add_option("fit_a", cfg.fit_dir_a, "first fit directory")->required();
  cmp->add_option("fit_b", cfg.fit_dir_b, "second fit directory")->required();

  CLI::App* clu = app.add_subcommand("cluster", "exceedance risk clustering for a fit");
  add_common(clu);
  clu->add_option("--fit", cfg.fit_dir_a, "fit output directory")->required();
  clu->add_option("--graph", cfg.graph_path, "edge-list csv")->required();
  clu->add_option("--tr", cfg.threshold_risk, "relative-risk threshold");
  clu->add_option("--tp", cfg.threshold_prob, "exceedance-probability threshold");
  clu->add_option("--boundaries", cfg.boundaries_path, "GeoJSON boundaries to join");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    apply_config_file(cfg);
    // flags win over the config file: re-parse the original arguments
    std::vector<std::string> again(args.rbegin(), args.rend());
    app.clear();
    app.parse(again);

    if (sim->parsed()) return run_simulate(cfg);
    if (fit->parsed()) return run_fit(cfg);
    if (diag->parsed()) return run_diagnose(cfg);
    if (cmp->parsed()) return run_compare(cfg);
    if (clu->parsed()) return run_cluster(cfg);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

}  // namespace carmm::cli
