#include <cmath>

#include "doctest.h"
#include "fkspde/errors.hpp"
#include "fkspde/spectral.hpp"

using namespace fkspde;

namespace {

ProcessSpec unit_brownian() {
  ProcessSpec p = ProcessSpec::brownian(1);
  p.h.psi.scale = 1.0;  // Psi = |xi|^2
  return p;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("dalang verdicts on the Riesz family") {
    const auto p = unit_brownian();
    CHECK(dalang_integral(NoiseSpec(CovarianceKernel::riesz(0.5, 1), 0.5), p, Calculus::Stratonovich).verdict ==
          Verdict::Finite);
    CHECK(dalang_integral(NoiseSpec(CovarianceKernel::riesz(0.5, 1), 0.8), p, Calculus::Stratonovich).verdict ==
          Verdict::Divergent);
  }

  TEST_CASE("white noise skorohod integral equals pi") {
    for (double b0 : {0.0, 0.5, 0.9}) {
      const auto r = dalang_integral(NoiseSpec(CovarianceKernel::dirac(1), b0), unit_brownian(), Calculus::Skorohod);
      CHECK(r.verdict == Verdict::Finite);
      CHECK(r.value() == doctest::Approx(M_PI).epsilon(1e-4 / M_PI));
    }
  }

  TEST_CASE("partial integrals are nondecreasing") {
    const auto r = dalang_integral(NoiseSpec(CovarianceKernel::riesz(0.3, 1), 0.3), unit_brownian(),
                                   Calculus::Stratonovich);
    for (size_t i = 1; i < r.partial.size(); ++i) CHECK(r.partial[i] >= r.partial[i - 1]);
  }

  TEST_CASE("tail split elementary values") {
    const auto p = unit_brownian();
    const auto a = tail_split(NoiseSpec(CovarianceKernel::riesz(0.5, 1), 0.5), p, 1.0);
    CHECK(a.m_N == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(a.eps_N == doctest::Approx(4.0).epsilon(1e-6));
    const auto b = tail_split(NoiseSpec(CovarianceKernel::dirac(1), 0.0), p, 1.0);
    CHECK(b.m_N == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(b.eps_N == doctest::Approx(2.0).epsilon(1e-6));
    const NoiseSpec n(CovarianceKernel::cauchy(1), 0.3);
    CHECK(tail_split(n, p, 20.0).eps_N < tail_split(n, p, 10.0).eps_N);
    CHECK(tail_split(n, p, 20.0).eps_N > 0.0);
  }

  TEST_CASE("holder exponent bounds") {
    const auto p = unit_brownian();
    const auto a = holder_exponents(NoiseSpec(CovarianceKernel::riesz(0.5, 1), 0.5), p);
    CHECK(a.theta1 == doctest::Approx(0.25).epsilon(0.04));
    CHECK(std::abs(a.theta1 - 0.25) < 0.01);
    const auto b = holder_exponents(NoiseSpec(CovarianceKernel::dirac(1), 0.0), p);
    CHECK(std::abs(b.theta1 - 0.5) < 0.01);
    const auto c = holder_exponents(NoiseSpec(CovarianceKernel::riesz(0.3, 1), 0.9), p);
    CHECK(c.theta1 == 0.0);
    CHECK_FALSE(c.theta1_positive);
  }

  TEST_CASE("power counting agrees with quadrature on the grid") {
    for (double alpha : {0.3, 0.5, 0.9})
      for (double b0 : {0.0, 0.3, 0.6, 0.9}) {
        const NoiseSpec n(CovarianceKernel::riesz(alpha, 1), b0);
        const auto p = ProcessSpec::brownian(1);
        CHECK(dalang_integral(n, p, Calculus::Stratonovich).verdict ==
              power_counting_verdict(n, p, Calculus::Stratonovich));
        CHECK(dalang_integral(n, p, Calculus::Skorohod).verdict == Verdict::Finite);
      }
  }
}
