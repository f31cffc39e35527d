#pragma once

#include <cstdint>
#include <vector>

namespace carmm {

// SplitMix64 evaluated in counter mode: output i of stream (seed, stream) is
// mix(key + i * golden), so draws depend only on (seed, stream, counter) and
// never on thread scheduling. Each chain gets its own stream.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform_pos();                   // (0, 1)
  double uniform(double lo, double hi);
  double normal();                        // standard normal (Box-Muller, no cache)
  double gamma(double shape);             // unit rate, Marsaglia-Tsang
  double exponential();                   // unit rate
  long long poisson(double mean);
  long long negbin(double mu, double psi);  // mean mu, Var mu + mu^2/psi
  int uniform_int(int lo, int hi);        // inclusive bounds
  std::vector<double> dirichlet(std::size_t k);  // symmetric Dirichlet(1,...,1)

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace carmm
