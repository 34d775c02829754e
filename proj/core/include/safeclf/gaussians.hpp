#pragma once

#include <Eigen/Core>

namespace safeclf {

/// Standard normal density phi(x).
double normal_pdf(double x);

/// Standard normal CDF Phi(x).
double normal_cdf(double x);

/// phi(x)/Phi(x), stable for arbitrarily negative x (Mills-ratio asymptotics
/// take over where Phi underflows).
double normal_pdf_over_cdf(double x);

/// Bivariate standard normal CDF P(X <= h, Y <= k) with correlation rho.
/// Evaluated by Gauss-Legendre quadrature of the correlation integral in its
/// arcsine parameterization, which is smooth up to |rho| = 1.
double bivariate_normal_cdf(double h, double k, double rho);

/// First moments of a standard bivariate normal with correlation rho,
/// truncated to {X <= h, Y <= k}. Returns (E[X], E[Y]).
/// Requires a strictly positive truncated mass.
Eigen::Vector2d truncated_bivariate_mean(double h, double k, double rho);

/// Mean of a standard normal truncated to the interval [lo, hi].
double truncated_interval_mean(double lo, double hi);

}  // namespace safeclf
