#include "carmm/negbin.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>

#include "carmm/errors.hpp"

namespace carmm {

double negbin_logpmf(long long y, double mu, double psi) {
  if (!(mu > 0.0) || !(psi > 0.0) || !std::isfinite(mu) || !std::isfinite(psi))
    throw InvalidParameterError("negbin_logpmf needs finite mu > 0 and psi > 0");
  if (y < 0) throw InvalidParameterError("negbin_logpmf needs y >= 0");
  const double yd = static_cast<double>(y);
  return std::lgamma(yd + psi) - std::lgamma(psi) - std::lgamma(yd + 1.0) +
         yd * (std::log(mu) - std::log(mu + psi)) +
         psi * (std::log(psi) - std::log(mu + psi));
}

double negbin_dmu(long long y, double mu, double psi) {
  const double yd = static_cast<double>(y);
  return yd / mu - (yd + psi) / (mu + psi);
}

double negbin_dpsi(long long y, double mu, double psi) {
  // denormal psi would overflow inside digamma
  if (!std::isfinite(mu) || !std::isfinite(psi) || !(psi > 1e-300))
    throw InvalidParameterError("negbin_dpsi needs finite mu and normal psi > 0");
  const double yd = static_cast<double>(y);
  return boost::math::digamma(yd + psi) - boost::math::digamma(psi) + std::log(psi) -
         std::log(mu + psi) + 1.0 - (yd + psi) / (mu + psi);
}

}  // namespace carmm
