#include <cmath>

#include "doctest.h"
#include "fkspde/errors.hpp"
#include "fkspde/kernel.hpp"
#include "fkspde/quadrature.hpp"

using namespace fkspde;

namespace {

// int cos(x xi) gamma(x) dx for an even integrable kernel in d = 1.
double cosine_transform(const CovarianceKernel& k, double xi) {
  QuadOptions q;
  q.abs_tol = 1e-12;
  q.rel_tol = 1e-10;
  q.max_intervals = 20000;
  auto f = [&](double x) { return std::cos(x * xi) * gamma_eval(k, x); };
  return 2.0 * (integrate(f, 0.0, 60.0, q).value + integrate_to_infinity(f, 60.0, 10.0, q).value);
}

}  // namespace

TEST_SUITE("kernel") {
  TEST_CASE("pointwise kernel values") {
    CHECK(gamma_eval(CovarianceKernel::riesz(0.5, 1), 4.0) == doctest::Approx(0.5));
    CHECK(gamma_eval(CovarianceKernel::cauchy(2), Eigen::Vector2d(0, 0)) == doctest::Approx(1.0));
    CHECK(gamma_eval(CovarianceKernel::ornstein_uhlenbeck(1.0, 1), 2.0) == doctest::Approx(std::exp(-2.0)));
    CHECK_THROWS_AS(gamma_eval(CovarianceKernel::dirac(1), 0.0), Error);
    CHECK_THROWS_AS(gamma_eval(CovarianceKernel::riesz(0.5, 1), 0.0), Error);
  }

  TEST_CASE("catalog spectral densities") {
    CHECK(spectral_density(CovarianceKernel::dirac(1), 3.7) == doctest::Approx(1.0));
    CHECK(spectral_density(CovarianceKernel::fractional({0.75}), 2.0) == doctest::Approx(std::pow(2.0, -0.5)));
    CHECK(spectral_density(CovarianceKernel::poisson(1), 1.0) == doctest::Approx(std::exp(-1.0)));
  }

  TEST_CASE("fourier transforms match closed forms and a direct cosine transform") {
    const auto cauchy = CovarianceKernel::cauchy(1), ou = CovarianceKernel::ornstein_uhlenbeck(1.0, 1);
    for (double xi : {0.0, 0.5, 2.0}) {
      Eigen::VectorXd v(1);
      v << xi;
      CHECK(fourier_transform(cauchy, v) == doctest::Approx(M_PI * std::exp(-xi)).epsilon(1e-10));
      CHECK(fourier_transform(ou, v) == doctest::Approx(2.0 / (1.0 + xi * xi)).epsilon(1e-10));
      CHECK(fourier_transform(ou, v) == doctest::Approx(cosine_transform(ou, xi)).epsilon(1e-6));
    }
  }

  TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(CovarianceKernel::riesz(1.5, 1), Error);
    CHECK_THROWS_AS(CovarianceKernel::fractional({0.3}), Error);
  }
}
