#pragma once

#include <cmath>
#include <functional>

#include "fkspde/quadrature.hpp"

namespace oracle {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// E of the self Hamiltonian for standard Brownian motion, beta0 = 0, kernel = centred Gaussian of
// variance eps: int int (2 pi (|r - s| + eps))^{-1/2} dr ds over [0, t]^2.
inline double brownian_self_mean(double t, double eps = 0.0) {
  auto f = [&](double u) { return 2.0 * (t - u) / std::sqrt(2.0 * M_PI * (u + eps)); };
  fkspde::QuadOptions q;
  q.abs_tol = 0.0;
  q.rel_tol = 1e-12;
  return fkspde::integrate_left_power(f, 0.0, t, eps > 0 ? 0.0 : -0.5, q).value;
}

// Same for two independent paths: int int (2 pi (r + s + eps))^{-1/2} dr ds.
inline double brownian_cross_mean(double t, double eps = 0.0) {
  auto f = [&](double v) {
    // int_0^t (r + v + eps)^{-1/2} dr
    return 2.0 * (std::sqrt(t + v + eps) - std::sqrt(v + eps)) / std::sqrt(2.0 * M_PI);
  };
  fkspde::QuadOptions q;
  q.abs_tol = 0.0;
  q.rel_tol = 1e-12;
  return fkspde::integrate(f, 0.0, t, q).value;
}

inline double self_closed_form(double t) { return 8.0 / (3.0 * std::sqrt(2.0 * M_PI)) * std::pow(t, 1.5); }
inline double cross_closed_form(double t) {
  return 4.0 / 3.0 * (2.0 * std::sqrt(2.0) - 2.0) / std::sqrt(2.0 * M_PI) * std::pow(t, 1.5);
}

// int_0^1 int_0^1 |r - s|^{-b}: 2 / ((1 - b)(2 - b)).
inline double time_weight_total(double t, double b) { return 2.0 * std::pow(t, 2.0 - b) / ((1.0 - b) * (2.0 - b)); }

}  // namespace oracle
