#include "fkspde/special.hpp"

#include <cmath>

#include "fkspde/errors.hpp"
#include "fkspde/quadrature.hpp"

namespace fkspde {

double bessel_i0e(double x) {
  x = std::abs(x);
  if (x < 600.0) return std::exp(-x) * std::cyl_bessel_i(0.0, x);
  const double y = 1.0 / (8.0 * x);
  return (1.0 + y * (1.0 + y * (4.5 + y * 37.5))) / std::sqrt(2.0 * M_PI * x);
}

double stable_density_1d(double alpha, double x) {
  require(alpha > 0.0 && alpha <= 2.0, ErrorKind::InvalidParameter, "stable index must lie in (0, 2]");
  x = std::abs(x);
  if (alpha == 2.0) return std::exp(-x * x / 4.0) / (2.0 * std::sqrt(M_PI));
  if (alpha == 1.0) return 1.0 / (M_PI * (1.0 + x * x));
  if (x == 0.0) return std::tgamma(1.0 + 1.0 / alpha) / M_PI;
  const double e = alpha / (alpha - 1.0);
  const double xe = std::pow(x, e);
  auto v = [&](double th) {
    return std::pow(std::cos(th) / std::sin(alpha * th), e) * std::cos((alpha - 1.0) * th) / std::cos(th);
  };
  auto g = [&](double th) {
    if (th <= 0.0 || th >= M_PI / 2) return 0.0;
    const double vv = v(th);
    const double z = xe * vv;
    return z > 700.0 ? 0.0 : vv * std::exp(-z);
  };
  QuadOptions opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-10;
  // Integrand is unimodal; seed panels so the peak is not missed.
  std::vector<double> br;
  for (int i = 0; i <= 16; ++i) br.push_back(0.5 * M_PI * i / 16.0);
  const double val = integrate(g, br, opt).value;
  return alpha / (M_PI * std::abs(alpha - 1.0)) * std::pow(x, 1.0 / (alpha - 1.0)) * val;
}

double offset_norm_density(int d, double r, double sigma, double rho) {
  if (rho < 0.0) return 0.0;
  const double s2 = sigma * sigma;
  r = std::abs(r);
  switch (d) {
    case 1: {
      const double c = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
      return c * (std::exp(-(rho - r) * (rho - r) / (2 * s2)) + std::exp(-(rho + r) * (rho + r) / (2 * s2)));
    }
    case 2: {
      const double z = r * rho / s2;
      return rho / s2 * std::exp(-(rho - r) * (rho - r) / (2 * s2)) * bessel_i0e(z);
    }
    case 3: {
      if (r * rho < 1e-8 * s2) {
        return std::sqrt(2.0 / M_PI) * rho * rho / (s2 * sigma) * std::exp(-(rho * rho + r * r) / (2 * s2));
      }
      const double c = rho / (r * sigma * std::sqrt(2.0 * M_PI));
      // exp(-(rho-r)^2/2s2) * (1 - exp(-2 r rho / s2))
      return c * std::exp(-(rho - r) * (rho - r) / (2 * s2)) * (-std::expm1(-2.0 * r * rho / s2));
    }
    default:
      throw Error(ErrorKind::InvalidParameter, "offset_norm_density supports d in {1, 2, 3}");
  }
}

}  // namespace fkspde
