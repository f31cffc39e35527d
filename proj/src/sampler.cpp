#include "carmm/sampler.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "carmm/errors.hpp"
#include "carmm/kernels.hpp"
#include "carmm/negbin.hpp"

namespace carmm {

namespace {

// Nesterov dual averaging on log step size (Hoffman & Gelman 2014 defaults).
class DualAverage {
 public:
  DualAverage(double eps0, double delta)
      : mu_(std::log(10.0 * eps0)), log_eps_(std::log(eps0)), delta_(delta) {}

  void update(double accept_prob) {
    ++count_;
    double frac = 1.0 / (count_ + t0_);
    h_bar_ = (1.0 - frac) * h_bar_ + frac * (delta_ - accept_prob);
    log_eps_ = mu_ - std::sqrt(static_cast<double>(count_)) / gamma_ * h_bar_;
    double w = std::pow(static_cast<double>(count_), -kappa_);
    log_eps_bar_ = w * log_eps_ + (1.0 - w) * log_eps_bar_;
  }

  double current() const { return std::exp(log_eps_); }
  double averaged() const { return std::exp(log_eps_bar_); }

 private:
  double mu_;
  double log_eps_;
  double log_eps_bar_ = 0.0;
  double h_bar_ = 0.0;
  double delta_;
  long count_ = 0;
  static constexpr double gamma_ = 0.05;
  static constexpr double t0_ = 10.0;
  static constexpr double kappa_ = 0.75;
};

// Welford accumulator for the diagonal metric windows.
class RunningVariance {
 public:
  void add(const std::vector<double>& x) {
    if (mean_.empty()) {
      mean_.assign(x.size(), 0.0);
      m2_.assign(x.size(), 0.0);
    }
    ++count_;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = x[i] - mean_[i];
      mean_[i] += d / count_;
      m2_[i] += d * (x[i] - mean_[i]);
    }
  }

  long count() const { return count_; }

  // regularized variance estimate, shrunk toward unit scale on few samples
  std::vector<double> regularized() const {
    std::vector<double> v(mean_.size(), 1.0);
    if (count_ < 2) return v;
    double w = static_cast<double>(count_) / (count_ + 5.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      double var = m2_[i] / (count_ - 1);
      v[i] = w * var + (1.0 - w) * 1e-3;
      if (v[i] < 1e-10) v[i] = 1e-10;
    }
    return v;
  }

  void reset() {
    mean_.clear();
    m2_.clear();
    count_ = 0;
  }

 private:
  std::vector<double> mean_, m2_;
  long count_ = 0;
};

struct WarmupSchedule {
  int init_buffer;
  int term_buffer;
  int first_window;

  static WarmupSchedule make(int warmup) {
    WarmupSchedule s{75, 50, 25};
    if (warmup < s.init_buffer + s.term_buffer + s.first_window) {
      s.init_buffer = std::max(1, static_cast<int>(0.15 * warmup));
      s.term_buffer = std::max(1, static_cast<int>(0.10 * warmup));
      s.first_window = std::max(1, warmup - s.init_buffer - s.term_buffer);
    }
    return s;
  }

  // iteration (0-based within warmup) at which each metric window closes
  std::vector<int> window_ends(int warmup) const {
    std::vector<int> ends;
    int start = init_buffer;
    int size = first_window;
    while (start + size < warmup - term_buffer) {
      // grow the final window to absorb the remainder
      if (start + 3 * size >= warmup - term_buffer) {
        ends.push_back(warmup - term_buffer - 1);
        return ends;
      }
      ends.push_back(start + size - 1);
      start += size;
      size *= 2;
    }
    if (warmup - term_buffer - 1 >= init_buffer) ends.push_back(warmup - term_buffer - 1);
    return ends;
  }
};

double kinetic_energy(const std::vector<double>& r, const std::vector<double>& inv_mass) {
  const auto& ops = kernels::dispatch();
  return 0.5 * ops.quadform_diag(inv_mass.data(), r.data(), r.data(), r.size());
}

// One-leapfrog-step probe with fresh momentum per attempt: double or halve
// until the single-step acceptance crosses the adaptation target.
double find_reasonable_step_size(const TargetDensity& target, const std::vector<double>& q0,
                                 const std::vector<double>& inv_mass, Rng& rng,
                                 double target_accept) {
  const int dim = target.dim;
  double eps = 1.0;
  std::vector<double> grad(dim);
  std::vector<double> r(dim);

  auto probe = [&](double step) {
    for (int i = 0; i < dim; ++i) r[i] = rng.normal() / std::sqrt(inv_mass[i]);
    double h0 = -target.logp(q0, nullptr) + kinetic_energy(r, inv_mass);
    std::vector<double> q = q0;
    std::vector<double> p = r;
    leapfrog(target, q, p, inv_mass, step, 1, grad);
    double lp = target.logp(q, nullptr);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    return h0 - (-lp + kinetic_energy(p, inv_mass));  // log accept ratio
  };

  const double log_target = std::log(target_accept);
  double direction = probe(eps) > log_target ? 1.0 : -1.0;
  for (int iter = 0; iter < 50; ++iter) {
    eps *= direction > 0 ? 2.0 : 0.5;
    double log_ratio = probe(eps);
    if (direction > 0 ? log_ratio <= log_target : log_ratio >= log_target) break;
    if (eps > 1e7 || eps < 1e-10) break;
  }
  return std::clamp(eps, 1e-10, 1e7);
}

// Runs one chain; invokes on_kept(q, rng) for every post-warmup draw.
ChainResult run_chain(const TargetDensity& target, const FitConfig& config, int chain_index,
                      const std::vector<double>& q_init,
                      const std::function<void(const std::vector<double>&, Rng&)>& on_kept) {
  const int dim = target.dim;
  Rng rng(config.seed, static_cast<std::uint64_t>(chain_index) + 1);

  std::vector<double> q = q_init;
  std::vector<double> grad(dim);
  double lp = target.logp(q, &grad);
  if (!std::isfinite(lp))
    throw NonFiniteDensityError("chain " + std::to_string(chain_index) +
                                ": non-finite density at initial point");

  std::vector<double> inv_mass(dim, 1.0);
  double eps = find_reasonable_step_size(target, q, inv_mass, rng, config.target_accept);
  DualAverage da(eps, config.target_accept);

  const int warmup = config.warmup();
  const int total = config.iterations;
  WarmupSchedule schedule = WarmupSchedule::make(warmup);
  std::vector<int> window_ends = schedule.window_ends(warmup);
  std::size_t window_cursor = 0;
  RunningVariance metric_acc;

  ChainResult result;
  result.inv_mass = inv_mass;
  double accept_sum = 0.0;
  int accept_count = 0;

  std::vector<double> r(dim), q_prop(dim), r_prop(dim);
  for (int iter = 0; iter < total; ++iter) {
    const bool in_warmup = iter < warmup;

    for (int i = 0; i < dim; ++i) r[i] = rng.normal() / std::sqrt(inv_mass[i]);
    double h0 = -lp + kinetic_energy(r, inv_mass);

    int base = config.leapfrog_steps;
    int lo = std::max(1, static_cast<int>(std::ceil(0.8 * base)));
    int hi = std::max(lo, static_cast<int>(std::floor(1.2 * base)));
    int steps = std::min(rng.uniform_int(lo, hi), config.max_leapfrog_steps);

    // step-size mixture: an occasional much smaller step lets a chain creep
    // out of regions too stiff for the adapted step, where a fixed-length
    // trajectory would otherwise reject forever
    bool rescue = rng.uniform() < 0.1;
    double eps_iter = rescue ? 0.1 * eps : eps;

    q_prop = q;
    r_prop = r;
    leapfrog(target, q_prop, r_prop, inv_mass, eps_iter, steps, grad);
    double lp_prop = target.logp(q_prop, nullptr);
    double h1 = std::isfinite(lp_prop)
                    ? -lp_prop + kinetic_energy(r_prop, inv_mass)
                    : std::numeric_limits<double>::infinity();

    double delta_h = h1 - h0;
    bool divergent = !std::isfinite(delta_h) || delta_h > 1000.0;
    double accept_prob = divergent ? 0.0 : std::min(1.0, std::exp(-delta_h));

    if (!divergent && std::log(rng.uniform_pos()) < -delta_h) {
      q = q_prop;
      lp = lp_prop;
    }

    if (in_warmup) {
      if (!rescue) da.update(accept_prob);
      eps = da.current();
      bool in_metric_phase = iter >= schedule.init_buffer && window_cursor < window_ends.size();
      if (in_metric_phase) {
        metric_acc.add(q);
        if (iter == window_ends[window_cursor]) {
          // dual averaging keeps running across the metric change; its gain
          // is large enough to re-track the step size within a window
          inv_mass = metric_acc.regularized();
          metric_acc.reset();
          ++window_cursor;
        }
      }
      if (iter == warmup - 1) eps = da.averaged();
    } else {
      accept_sum += accept_prob;
      ++accept_count;
      if (divergent) ++result.divergences;
      on_kept(q, rng);
    }
  }

  result.accept_rate = accept_count > 0 ? accept_sum / accept_count : 0.0;
  result.step_size = eps;
  result.inv_mass = inv_mass;
  return result;
}

void run_chains_parallel(int chains, int threads, const std::function<void(int)>& body) {
  if (threads <= 1) {
    for (int c = 0; c < chains; ++c) body(c);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= chains) return;
      try {
        body(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, chains); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

void FitConfig::validate() const {
  if (chains < 1) throw DataError("config: chains must be >= 1");
  if (warmup_fraction <= 0.0 || warmup_fraction >= 1.0)
    throw DataError("config: warmup_fraction must lie in (0, 1)");
  if (kept() < 1 || warmup() < 1)
    throw DataError("config: iterations must exceed warmup and leave kept draws");
  if (leapfrog_steps < 1 || max_leapfrog_steps < 1)
    throw DataError("config: leapfrog steps must be >= 1");
  if (target_accept <= 0.0 || target_accept >= 1.0)
    throw DataError("config: target acceptance must lie in (0, 1)");
}

void leapfrog(const TargetDensity& target, std::vector<double>& q, std::vector<double>& r,
              const std::vector<double>& inv_mass, double step_size, int steps,
              std::vector<double>& grad_buf) {
  const auto& ops = kernels::dispatch();
  const std::size_t dim = q.size();
  target.logp(q, &grad_buf);
  ops.axpy(0.5 * step_size, grad_buf.data(), r.data(), dim);
  for (int s = 0; s < steps; ++s) {
    ops.wxpy(step_size, inv_mass.data(), r.data(), q.data(), dim);
    target.logp(q, &grad_buf);
    double scale = s + 1 == steps ? 0.5 * step_size : step_size;
    ops.axpy(scale, grad_buf.data(), r.data(), dim);
  }
}

std::vector<ChainResult> sample_chains(const TargetDensity& target, const FitConfig& config) {
  config.validate();
  std::vector<ChainResult> results(config.chains);
  int threads = resolve_thread_count(config.threads, config.chains);
  run_chains_parallel(config.chains, threads, [&](int c) {
    Rng init_rng(config.seed, static_cast<std::uint64_t>(c) + 1001);
    std::vector<double> q0(target.dim);
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      for (auto& v : q0) v = init_rng.uniform(-config.init_range, config.init_range);
      ok = std::isfinite(target.logp(q0, nullptr));
    }
    if (!ok) throw NonFiniteDensityError("chain " + std::to_string(c) +
                                         ": no finite initialization after 100 attempts");
    std::vector<std::vector<double>> draws;
    draws.reserve(config.kept());
    ChainResult res = run_chain(
        target, config, c, q0,
        [&](const std::vector<double>& q, Rng&) { draws.push_back(q); });
    res.draws = std::move(draws);
    results[c] = std::move(res);
  });
  return results;
}

ParameterState initialize_chain(const ModelSpec& spec, const SpatialGraph& graph, int p,
                                Rng& rng, double init_range) {
  StateLayout layout = StateLayout::make(spec, graph.n, p);
  std::vector<double> u(layout.dim);
  for (auto& v : u) v = rng.uniform(-init_range, init_range);
  return from_unconstrained(u, spec, layout);
}

std::vector<std::vector<double>> PosteriorSamples::extract_scalar(int idx) const {
  std::vector<std::vector<double>> out(chains, std::vector<double>(kept));
  const int s = scalar_count();
  for (int c = 0; c < chains; ++c)
    for (int it = 0; it < kept; ++it) out[c][it] = chain[c].scalars[it * s + idx];
  return out;
}

std::vector<std::vector<double>> PosteriorSamples::extract_phi(int outcome, int area) const {
  std::vector<std::vector<double>> out(chains, std::vector<double>(kept));
  for (int c = 0; c < chains; ++c) {
    const auto& phi = outcome == 1 ? chain[c].phi1 : chain[c].phi2;
    for (int it = 0; it < kept; ++it) out[c][it] = phi[it * n + area];
  }
  return out;
}

namespace {

template <typename T>
std::vector<std::vector<T>> merge_rows(const std::vector<ChainDraws>& chains, int kept,
                                       int width, const std::vector<T> ChainDraws::* member) {
  std::vector<std::vector<T>> out;
  out.reserve(chains.size() * kept);
  for (const auto& c : chains)
    for (int it = 0; it < kept; ++it) {
      const auto& flat = c.*member;
      out.emplace_back(flat.begin() + it * width, flat.begin() + (it + 1) * width);
    }
  return out;
}

}  // namespace

std::vector<std::vector<double>> PosteriorSamples::merged_rho1() const {
  return merge_rows(chain, kept, n, &ChainDraws::rho1);
}

std::vector<std::vector<double>> PosteriorSamples::merged_zeta2_exp() const {
  return merge_rows(chain, kept, n, &ChainDraws::zeta2_exp);
}

std::vector<std::vector<long long>> PosteriorSamples::merged_yrep(int outcome) const {
  return outcome == 1 ? merge_rows(chain, kept, n, &ChainDraws::yrep1)
                      : merge_rows(chain, kept, m, &ChainDraws::yrep2);
}

std::vector<std::vector<double>> PosteriorSamples::merged_loglik() const {
  return merge_rows(chain, kept, n + m, &ChainDraws::loglik);
}

PosteriorSamples hmc_fit(const Dataset& data, const ModelSpec& spec, const SpatialGraph& graph,
                         const MembershipMatrix& H, const CovariatePreprocess* pre,
                         const FitConfig& config) {
  config.validate();
  const int n = graph.n;
  const int m = H.m;
  const int p = spec.use_covariates && pre != nullptr ? pre->p : 0;
  data.validate(n, m);
  StateLayout layout = StateLayout::make(spec, n, p);

  TargetDensity target;
  target.dim = layout.dim;
  target.logp = [&](const std::vector<double>& u, std::vector<double>* grad) {
    try {
      return logpost_unconstrained(u, data, spec, graph, H, pre, layout, grad);
    } catch (const NumericError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  PosteriorSamples samples;
  samples.chains = config.chains;
  samples.kept = config.kept();
  samples.n = n;
  samples.m = m;
  samples.p = p;
  samples.spec = spec;
  samples.names = scalar_names(spec, p);
  samples.chain.resize(config.chains);
  const int n_scalar = samples.scalar_count();

  int threads = resolve_thread_count(config.threads, config.chains);
  run_chains_parallel(config.chains, threads, [&](int c) {
    Rng init_rng(config.seed, static_cast<std::uint64_t>(c) + 1001);
    std::vector<double> u0(layout.dim);
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      for (auto& v : u0) v = init_rng.uniform(-config.init_range, config.init_range);
      ok = std::isfinite(target.logp(u0, nullptr));
    }
    if (!ok) throw NonFiniteDensityError("chain " + std::to_string(c) +
                                         ": no finite initialization after 100 attempts");

    ChainDraws& draws = samples.chain[c];
    draws.scalars.reserve(static_cast<std::size_t>(samples.kept) * n_scalar);

    ChainResult res = run_chain(
        target, config, c, u0, [&](const std::vector<double>& u, Rng& rng) {
          ParameterState state = from_unconstrained(u, spec, layout);
          LinearPredictors lp = linear_predictors(state, H, spec.use_covariates ? pre : nullptr);

          std::vector<double> scal = scalar_values(state, spec, pre);
          draws.scalars.insert(draws.scalars.end(), scal.begin(), scal.end());
          draws.phi1.insert(draws.phi1.end(), state.phi1.begin(), state.phi1.end());
          draws.phi2.insert(draws.phi2.end(), state.phi2.begin(), state.phi2.end());

          for (int i = 0; i < n; ++i) {
            double rho = std::exp(lp.zeta1[i]);
            double mu = std::max(data.E1[i] * rho, kMuFloor);
            draws.rho1.push_back(rho);
            draws.zeta2_exp.push_back(std::exp(lp.zeta2[i]));
            draws.yrep1.push_back(rng.negbin(mu, state.psi1));
            draws.loglik.push_back(negbin_logpmf(data.y1[i], mu, state.psi1));
          }
          for (int j = 0; j < m; ++j) {
            double mu = std::max(data.E2[j] * std::exp(lp.log_rho2[j]), kMuFloor);
            draws.rho2.push_back(std::exp(lp.log_rho2[j]));
            draws.yrep2.push_back(rng.negbin(mu, state.psi2));
            draws.loglik.push_back(negbin_logpmf(data.y2[j], mu, state.psi2));
          }
        });
    draws.divergences = res.divergences;
    draws.accept_rate = res.accept_rate;
    draws.step_size = res.step_size;
  });

  return samples;
}

int resolve_thread_count(int requested, int chains) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int limit = requested > 0 ? requested : hw;
  if (const char* env = std::getenv("CARMM_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) limit = std::min(limit, cap);
  }
  return std::max(1, std::min(limit, chains));
}

}  // namespace carmm
