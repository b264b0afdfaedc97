#include <cmath>
#include <vector>

#include "doctest.h"
#include "fkspde/errors.hpp"
#include "fkspde/estimate.hpp"
#include "fkspde/hamiltonian.hpp"
#include "fkspde/quadrature.hpp"
#include "fkspde/rng.hpp"
#include "oracles.hpp"

using namespace fkspde;

namespace {

PathGrid constant_path(double x, double t, int n) {
  PathGrid p;
  p.x0 = Point::Constant(1, x);
  p.t_end = t;
  p.n_steps = n;
  p.times = Eigen::VectorXd::LinSpaced(n + 1, 0.0, t);
  p.positions = Eigen::MatrixXd::Constant(1, n + 1, x);
  return p;
}

// (gamma * q_eps)(x) for Riesz in d = 1 by direct quadrature.
double riesz_convolution(double alpha, double eps, double x) {
  const double s = std::sqrt(eps);
  auto f = [&](double y) {
    return std::pow(std::abs(y), -alpha) * std::exp(-(x - y) * (x - y) / (2 * eps)) / std::sqrt(2 * M_PI * eps);
  };
  QuadOptions q;
  q.abs_tol = 0.0;
  q.rel_tol = 1e-10;
  const double lo = std::min(0.0, x - 40 * s), hi = std::max(0.0, x + 40 * s);
  double v = 0.0;
  if (lo < 0) v += integrate_left_power([&](double u) { return f(-u); }, 0.0, -lo, -alpha, q).value;
  v += integrate_left_power(f, 0.0, hi, -alpha, q).value;
  return v;
}

}  // namespace

TEST_SUITE("hamiltonian") {
  TEST_CASE("singular time weight closed forms") {
    CHECK(singular_time_weight(0, 1, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(singular_time_weight(0, 3.5, 0.0) == doctest::Approx(3.5).epsilon(1e-14));
    const double v = singular_time_weight(1, 2, 0.9);
    CHECK(v == doctest::Approx((std::pow(2.0, 0.1) - 1) / 0.1).epsilon(1e-12));
    const int n = 200000;
    double riemann = 0.0;
    for (int i = 0; i < n; ++i) riemann += std::pow(1.0 + (i + 0.5) / n, -0.9) / n;
    CHECK(std::abs(v - riemann) < 1e-6);
  }

  TEST_CASE("cell weights sum to the full double integral") {
    for (double b : {0.0, 0.3, 0.9}) {
      const int n = 300;
      double s = unit_cell_weight(0, b) * n;
      for (int k = 1; k < n; ++k) s += 2.0 * (n - k) * unit_cell_weight(k, b);
      CHECK(s == doctest::Approx(oracle::time_weight_total(n, b)).epsilon(1e-10));
    }
  }

  TEST_CASE("mollified dirac is the gaussian density") {
    const auto k = mollified_kernel(CovarianceKernel::dirac(1), 0.01);
    CHECK(gamma_eval(k, 0.0) == doctest::Approx(1.0 / std::sqrt(2 * M_PI * 0.01)).epsilon(1e-12));
  }

  TEST_CASE("mollified riesz far from the origin") {
    const auto k = mollified_kernel(CovarianceKernel::riesz(0.5, 1), 0.01);
    const double direct = riesz_convolution(0.5, 0.01, 10.0);
    CHECK(gamma_eval(k, 10.0) == doctest::Approx(direct).epsilon(1e-4));
    CHECK(std::abs(gamma_eval(k, 10.0) / std::pow(10.0, -0.5) - 1) < 0.01);
  }

  TEST_CASE("mollified riesz converges monotonically at a fixed point") {
    // Distance to the unmollified value shrinks with epsilon.
    const double x0 = 0.5, target = std::pow(x0, -0.5);
    double prev = INFINITY;
    for (double eps : {0.1, 0.03, 0.01, 0.003, 0.001}) {
      const double v = gamma_eval(mollified_kernel(CovarianceKernel::riesz(0.5, 1), eps), x0);
      CHECK(v == doctest::Approx(riesz_convolution(0.5, eps, x0)).epsilon(1e-4));
      CHECK(std::abs(v - target) < prev);
      prev = std::abs(v - target);
    }
  }

  TEST_CASE("constant path gives gamma(0) times the time weight") {
    const NoiseSpec ou(CovarianceKernel::ornstein_uhlenbeck(1.0, 1), 0.3);
    const auto p = constant_path(0.2, 1.7, 64);
    CHECK(self_hamiltonian(p, ou, Regularization::none()).value ==
          doctest::Approx(oracle::time_weight_total(1.7, 0.3)).epsilon(1e-12));
    const NoiseSpec half(CovarianceKernel::ornstein_uhlenbeck(1.0, 1), 0.5);
    CHECK(self_hamiltonian(constant_path(0.0, 1.0, 50), half, Regularization::none()).value ==
          doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  }

  TEST_CASE("cross with itself equals self") {
    Stream st(3);
    const auto p = sample_path(ProcessSpec::brownian(1), Point::Zero(1), 1.0, 256, st);
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.5);
    const auto r = Regularization::mollify();
    CHECK(cross_hamiltonian(p, p, n, r).value == self_hamiltonian(p, n, r).value);
    const auto f = covariance_matrix({p}, n, r);
    CHECK(f.q(0, 0) == self_hamiltonian(p, n, r).value);
  }

  TEST_CASE("cross hamiltonian decays with separation") {
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.0);
    const HamiltonianContext ctx(n, Regularization::mollify(), 1.0, 128);
    double prev = INFINITY;
    for (double z : {10.0, 100.0, 1000.0}) {
      Stream sa(5), sb(6);
      const auto a = sample_path(ProcessSpec::brownian(1), Point::Zero(1), 1.0, 128, sa);
      const auto b = sample_path(ProcessSpec::brownian(1), Point::Constant(1, z), 1.0, 128, sb);
      const double v = ctx.cross(a, b);
      CHECK(v < prev);
      prev = v;
    }
  }

  TEST_CASE("hamiltonian means against the mollified oracle") {
    const double eps = 1e-3;
    const NoiseSpec n(mollified_kernel(CovarianceKernel::dirac(1), eps), 0.0);
    const HamiltonianContext ctx(n, Regularization::none(), 1.0, 512);
    const long m = 3000;
    std::vector<double> s(m), c(m);
    for (long i = 0; i < m; ++i) {
      Stream st(21, {static_cast<std::uint64_t>(i)});
      const auto a = sample_path(ProcessSpec::brownian(1), Point::Zero(1), 1.0, 512, st);
      const auto b = sample_path(ProcessSpec::brownian(1), Point::Zero(1), 1.0, 512, st);
      s[i] = ctx.self(a);
      c[i] = ctx.cross(a, b);
    }
    const auto es = summarize(s), ec = summarize(c);
    // Midpoint cells add a small positive bias on the diagonal; allow 2% on top of the MC error.
    CHECK(std::abs(es.mean - oracle::brownian_self_mean(1.0, eps)) < 4 * es.std_error + 0.02 * es.mean);
    CHECK(std::abs(ec.mean - oracle::brownian_cross_mean(1.0, eps)) < 4 * ec.std_error);
  }

  TEST_CASE("covariance ensembles are positive semidefinite") {
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.3);
    const HamiltonianContext ctx(n, Regularization::mollify(), 1.0, 128);
    int good = 0;
    const int trials = 40;
    for (int e = 0; e < trials; ++e) {
      Stream st(31, {static_cast<std::uint64_t>(e)});
      const int K = 2 + e % 31;
      std::vector<PathGrid> paths;
      for (int k = 0; k < K; ++k) paths.push_back(sample_path(ProcessSpec::brownian(1), Point::Zero(1), 1.0, 128, st));
      const auto f = covariance_matrix(paths, ctx);
      good += f.min_eigenvalue >= -1e-10;
      CHECK((f.l * f.l.transpose() - f.q).norm() <= 1e-8 * f.q.norm() + f.jitter * std::sqrt(K) * 2);
    }
    CHECK(good >= 0.95 * trials);
  }

  TEST_CASE("unregularized singular kernels are refused") {
    CHECK_THROWS_AS(HamiltonianContext(NoiseSpec(CovarianceKernel::riesz(0.5, 1), 0.0), Regularization::none(), 1, 8),
                    Error);
    CHECK_THROWS_AS(HamiltonianContext(NoiseSpec(CovarianceKernel::dirac(1), 0.0), Regularization::cap(0.1), 1, 8),
                    Error);
  }
}
