#include <cmath>
#include <vector>

#include "doctest.h"
#include "fkspde/errors.hpp"
#include "fkspde/pde.hpp"
#include "fkspde/solver.hpp"
#include "oracles.hpp"

using namespace fkspde;

namespace {

const Point kOrigin = Point::Zero(1);

NoiseSpec white(double eps = 1e-3) { return NoiseSpec(mollified_kernel(CovarianceKernel::dirac(1), eps), 0.0); }

SolverOptions steps(int n) {
  SolverOptions o;
  o.n_steps = n;
  return o;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("single inner path skorohod solution has mean one") {
    const HamiltonianContext ctx(white(), Regularization::none(), 1.0, 64);
    const long n = 100000;
    std::vector<double> v(n);
    for (long i = 0; i < n; ++i) {
      Stream st(41, {static_cast<std::uint64_t>(i)});
      const auto s = sample_solution(ctx, kOrigin, Calculus::Skorohod, 1, ProcessSpec::brownian(1),
                                     InitialCondition::constant(1.0), st);
      CHECK(s.value == doctest::Approx(std::exp(s.v(0) - 0.5 * s.q_diag(0))).epsilon(1e-13));
      v[i] = s.value;
    }
    const auto e = summarize(v);
    CHECK(std::abs(e.mean - 1.0) < 3 * e.std_error);
  }

  TEST_CASE("stratonovich solutions are positive") {
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.3);
    for (int i = 0; i < 200; ++i) {
      Stream st(42, {static_cast<std::uint64_t>(i)});
      const auto s = sample_solution(1.0, kOrigin, Calculus::Stratonovich, 1 + i % 8, n, ProcessSpec::brownian(1),
                                     InitialCondition::constant(1.0), Regularization::mollify(), st, steps(64));
      CHECK(s.value > 0.0);
    }
  }

  TEST_CASE("two inner paths reduce the variance") {
    const HamiltonianContext ctx(white(), Regularization::none(), 0.5, 64);
    const long n = 10000;
    std::vector<double> v1(n), v2(n);
    for (long i = 0; i < n; ++i) {
      Stream a(43, {static_cast<std::uint64_t>(i)}), b(44, {static_cast<std::uint64_t>(i)});
      v1[i] = sample_solution(ctx, kOrigin, Calculus::Skorohod, 1, ProcessSpec::brownian(1), InitialCondition(), a)
                  .value;
      v2[i] = sample_solution(ctx, kOrigin, Calculus::Skorohod, 2, ProcessSpec::brownian(1), InitialCondition(), b)
                  .value;
    }
    const auto e1 = summarize(v1), e2 = summarize(v2);
    CHECK(e2.std_error < e1.std_error);
  }

  TEST_CASE("first moments") {
    const auto one = InitialCondition::constant(1.0);
    const auto sk = moment_fk(1, 1.0, kOrigin, Calculus::Skorohod, white(), ProcessSpec::brownian(1), one,
                              Regularization::none(), 200, 1, steps(64));
    CHECK(sk.mean == 1.0);
    const auto st = moment_fk(1, 0.5, kOrigin, Calculus::Stratonovich, white(), ProcessSpec::brownian(1), one,
                              Regularization::none(), 2000, 1, steps(128));
    CHECK(st.mean - 3 * st.std_error > 1.0);
    // Jensen: E exp(H / 2) >= exp(E H / 2).
    CHECK(st.mean > std::exp(0.5 * oracle::brownian_self_mean(0.5, 1e-3)) - 3 * st.std_error);
  }

  TEST_CASE("mixed moments") {
    const auto one = InitialCondition::constant(1.0);
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.3);
    const auto reg = Regularization::mollify();
    const auto p2 = moment_fk(2, 0.5, kOrigin, Calculus::Skorohod, n, ProcessSpec::brownian(1), one, reg, 500, 9,
                              steps(64));
    const auto same = mixed_moment(0.5, kOrigin, kOrigin, Calculus::Skorohod, n, ProcessSpec::brownian(1), one, reg,
                                   500, 9, steps(64));
    CHECK(same.mean == p2.mean);
    double prev = INFINITY;
    for (double z : {1.0, 10.0, 1000.0}) {
      const auto m = mixed_moment(0.5, kOrigin, Point::Constant(1, z), Calculus::Skorohod, n,
                                  ProcessSpec::brownian(1), one, reg, 500, 9, steps(64));
      CHECK(m.mean <= p2.mean + 3 * std::hypot(m.std_error, p2.std_error));
      CHECK(m.mean < prev);
      prev = m.mean;
    }
    // Far apart the paths barely move against |z|: exponent -> gamma(z) times the time weight.
    CHECK(prev == doctest::Approx(std::exp(std::pow(1000.0, -0.5) * oracle::time_weight_total(0.5, 0.3))).epsilon(1e-3));
  }

  TEST_CASE("exponential moments of the hamiltonian") {
    const auto b = ProcessSpec::brownian(1);
    const auto z = exp_moment(0.0, 0.5, kOrigin, white(), b, Regularization::none(), 100, 3, steps(64));
    CHECK(z.estimate.mean == 1.0);
    CHECK(z.estimate.std_error == 0.0);
    const auto neg = exp_moment(-1.0, 0.5, kOrigin, white(), b, Regularization::none(), 500, 3, steps(64));
    CHECK(neg.estimate.mean > 0.0);
    CHECK(neg.estimate.mean <= 1.0);
    const auto pos = exp_moment(0.5, 0.5, kOrigin, white(), b, Regularization::none(), 2000, 3, steps(256));
    const double eh = 8.0 / (3.0 * std::sqrt(2 * M_PI)) * std::pow(0.5, 1.5);
    CHECK(pos.estimate.mean >= 1.0 + 0.5 * eh - 3 * pos.estimate.std_error - 0.02);
    CHECK_FALSE(pos.unstable);
  }

  TEST_CASE("semigroup means") {
    const auto b = ProcessSpec::brownian(1);
    CHECK(skorohod_mean(1.0, kOrigin, b, InitialCondition::constant(1.0)) == 1.0);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(skorohod_mean(1.0, kOrigin, b, InitialCondition::indicator(Eigen::VectorXd::Constant(1, 0.0),
                                                                     Eigen::VectorXd::Constant(1, inf))) ==
          doctest::Approx(0.5).epsilon(1e-9));
    CHECK(skorohod_mean(1.0, kOrigin, b, InitialCondition::indicator(Eigen::VectorXd::Constant(1, -1.0),
                                                                     Eigen::VectorXd::Constant(1, 1.0))) ==
          doctest::Approx(oracle::normal_cdf(1) - oracle::normal_cdf(-1)).epsilon(1e-9));
  }

  TEST_CASE("deterministic feynman-kac") {
    const auto b = ProcessSpec::brownian(1);
    const auto c = fk_deterministic([](double, const Point&) { return 0.7; }, 1.0, 0.5, kOrigin, b,
                                    InitialCondition::constant(1.0), 200, 1, steps(32));
    CHECK(c.estimate.mean == doctest::Approx(std::exp(0.35)).epsilon(1e-12));
    const auto box = InitialCondition::indicator(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0));
    const auto z = fk_deterministic([](double, const Point&) { return 0.0; }, 1.0, 1.0, kOrigin, b, box, 20000, 2,
                                    steps(16));
    CHECK(std::abs(z.estimate.mean - skorohod_mean(1.0, kOrigin, b, box)) < 3 * z.estimate.std_error);
  }

  TEST_CASE("deterministic feynman-kac against crank-nicolson") {
    const auto b = ProcessSpec::brownian(1);
    const double bound = 2.0;
    auto f = [&](double x) { return std::clamp(x, -bound, bound); };
    const auto u = fk_deterministic([&](double, const Point& y) { return y(0); }, bound, 0.5, kOrigin, b,
                                    InitialCondition::constant(1.0), 40000, 5, steps(256));
    PdeGrid g;
    g.points = 2001;
    g.steps = 2000;
    // Constant initial data needs the zero boundary far away: run on [-40, 40].
    g.halfwidth = 40.0;
    g.points = 8001;
    const double pde = crank_nicolson_1d(f, [](double) { return 1.0; }, 0.5, 0.5, 0.0, g);
    CHECK(u.clipped);
    CHECK(std::abs(u.estimate.mean - pde) / pde < 0.01);
  }

  TEST_CASE("crank-nicolson oracle reproduces the heat kernel") {
    // u0 = Gaussian of variance 1, f = c: u(t, 0) = exp(c t) / sqrt(2 pi (1 + t)).
    const double c = 0.3, t = 0.5;
    const double v = crank_nicolson_1d([&](double) { return c; },
                                       [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); }, 0.5, t,
                                       0.0);
    CHECK(v == doctest::Approx(std::exp(c * t) / std::sqrt(2 * M_PI * (1 + t))).epsilon(1e-5));
  }

  TEST_CASE("dalang preconditions") {
    const NoiseSpec bad(CovarianceKernel::riesz(0.5, 1), 0.9);
    Stream st(1);
    CHECK_THROWS_AS(sample_solution(1.0, kOrigin, Calculus::Skorohod, 1, bad, ProcessSpec::brownian(1),
                                    InitialCondition(), Regularization::mollify(), st),
                    Error);
    CHECK_NOTHROW(moment_fk(1, 1.0, kOrigin, Calculus::Skorohod, bad, ProcessSpec::brownian(1), InitialCondition(),
                            Regularization::mollify(), 10, 1, steps(16)));
  }
}
