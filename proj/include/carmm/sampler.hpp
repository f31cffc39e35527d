#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "carmm/model.hpp"
#include "carmm/rng.hpp"
#include "carmm/transforms.hpp"

namespace carmm {

struct FitConfig {
  int chains = 4;
  int iterations = 2500;         // per chain, warmup included
  double warmup_fraction = 0.5;
  int leapfrog_steps = 32;       // base trajectory length, jittered +/-20%
  int max_leapfrog_steps = 1024; // hard cap on any trajectory
  double target_accept = 0.8;
  std::uint64_t seed = 0;
  double init_range = 2.0;       // unconstrained init draws are U(-r, r)
  int threads = 0;               // 0: min(chains, hardware, CARMM_THREADS)

  int warmup() const { return static_cast<int>(iterations * warmup_fraction); }
  int kept() const { return iterations - warmup(); }
  void validate() const;
};

// Generic density over R^dim; fills *grad (resized to dim) when non-null.
struct TargetDensity {
  int dim = 0;
  std::function<double(const std::vector<double>&, std::vector<double>*)> logp;
};

// One leapfrog trajectory with diagonal metric; q and r are updated in place.
void leapfrog(const TargetDensity& target, std::vector<double>& q, std::vector<double>& r,
              const std::vector<double>& inv_mass, double step_size, int steps,
              std::vector<double>& grad_buf);

struct ChainResult {
  std::vector<std::vector<double>> draws;  // kept x dim
  int divergences = 0;
  double accept_rate = 0.0;                // mean post-warmup acceptance probability
  double step_size = 0.0;
  std::vector<double> inv_mass;
};

// Multi-chain HMC with dual-averaging step size and windowed diagonal metric
// adaptation. Chains run on (seed, chain-index) rng streams and may execute
// in parallel; results are identical either way.
std::vector<ChainResult> sample_chains(const TargetDensity& target, const FitConfig& config);

// Per-chain posterior draws plus the derived quantities computed alongside
// each kept iteration.
struct ChainDraws {
  std::vector<double> scalars;     // kept x n_scalar, reported scale
  std::vector<double> phi1, phi2;  // kept x n, model scale
  std::vector<double> rho1;        // kept x n
  std::vector<double> zeta2_exp;   // kept x n, areal-implied outcome-2 risk
  std::vector<double> rho2;        // kept x m
  std::vector<long long> yrep1;    // kept x n
  std::vector<long long> yrep2;    // kept x m
  std::vector<double> loglik;      // kept x (n + m), outcome 1 first
  int divergences = 0;
  double accept_rate = 0.0;
  double step_size = 0.0;
};

struct PosteriorSamples {
  int chains = 0, kept = 0, n = 0, m = 0, p = 0;
  ModelSpec spec;
  std::vector<std::string> names;  // scalar quantity names
  std::vector<ChainDraws> chain;

  int scalar_count() const { return static_cast<int>(names.size()); }
  // draws of one scalar quantity as chains x kept
  std::vector<std::vector<double>> extract_scalar(int idx) const;
  std::vector<std::vector<double>> extract_phi(int outcome, int area) const;
  // merged draws (chain-major) of a derived per-unit quantity
  std::vector<std::vector<double>> merged_rho1() const;       // (chains*kept) x n
  std::vector<std::vector<double>> merged_zeta2_exp() const;  // (chains*kept) x n
  std::vector<std::vector<long long>> merged_yrep(int outcome) const;
  std::vector<std::vector<double>> merged_loglik() const;     // (chains*kept) x (n+m)
};

ParameterState initialize_chain(const ModelSpec& spec, const SpatialGraph& graph, int p,
                                Rng& rng, double init_range = 2.0);

PosteriorSamples hmc_fit(const Dataset& data, const ModelSpec& spec, const SpatialGraph& graph,
                         const MembershipMatrix& H, const CovariatePreprocess* pre,
                         const FitConfig& config);

int resolve_thread_count(int requested, int chains);

}  // namespace carmm
