#pragma once

namespace carmm {

// Negative binomial with mean mu and overdispersion psi: Var = mu + mu^2/psi.

double negbin_logpmf(long long y, double mu, double psi);

// d logpmf / d mu and d logpmf / d psi at (y, mu, psi)
double negbin_dmu(long long y, double mu, double psi);
double negbin_dpsi(long long y, double mu, double psi);

}  // namespace carmm
