#include "carmm/rng.hpp"

#include <cmath>

#include "carmm/errors.hpp"

namespace carmm {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) ^ mix64(stream * kGolden + 0x1ULL))) {}

std::uint64_t Rng::next_u64() { return mix64(key_ + (++counter_) * kGolden); }

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_pos() {
  double u = uniform();
  return u > 0.0 ? u : 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  double u1 = uniform_pos();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

double Rng::exponential() { return -std::log(uniform_pos()); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw InvalidParameterError("gamma shape must be positive");
  if (shape < 1.0) {
    // boost by one and rescale
    double g = gamma(shape + 1.0);
    return g * std::pow(uniform_pos(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform_pos();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

long long Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw InvalidParameterError("poisson mean must be nonnegative");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Knuth product-of-uniforms
    const double threshold = std::exp(-mean);
    long long k = 0;
    double prod = uniform_pos();
    while (prod > threshold) {
      ++k;
      prod *= uniform_pos();
    }
    return k;
  }
  // Hoermann's PTRS transformed rejection
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    double u = uniform() - 0.5;
    double v = uniform_pos();
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * log_mean - mean - std::lgamma(kf + 1.0)) {
      return static_cast<long long>(kf);
    }
  }
}

long long Rng::negbin(double mu, double psi) {
  if (!(mu > 0.0) || !(psi > 0.0)) throw InvalidParameterError("negbin needs mu, psi > 0");
  // gamma-poisson mixture: lambda ~ Gamma(psi, rate psi/mu)
  double lambda = gamma(psi) * (mu / psi);
  return poisson(lambda);
}

int Rng::uniform_int(int lo, int hi) {
  if (hi <= lo) return lo;
  std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

std::vector<double> Rng::dirichlet(std::size_t k) {
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& v : w) {
    v = exponential();
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

}  // namespace carmm
