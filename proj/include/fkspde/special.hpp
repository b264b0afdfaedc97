#pragma once

namespace fkspde {

// exp(-x) I_0(x) for x >= 0.
double bessel_i0e(double x);

// Density at x of the symmetric stable law with E exp(i u S) = exp(-|u|^alpha).
double stable_density_1d(double alpha, double x);

// Density at rho >= 0 of |r e_1 + sigma Z|, Z standard normal in R^d, d in {1, 2, 3}.
double offset_norm_density(int d, double r, double sigma, double rho);

}  // namespace fkspde
