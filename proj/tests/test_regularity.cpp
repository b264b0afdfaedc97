#include <cmath>
#include <vector>

#include "doctest.h"
#include "fkspde/errors.hpp"
#include "fkspde/quadrature.hpp"
#include "fkspde/regularity.hpp"
#include "oracles.hpp"

using namespace fkspde;

namespace {

const Point kOrigin = Point::Zero(1);

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidParameter;
}

RegularityOptions steps(int n) {
  RegularityOptions o;
  o.n_steps = n;
  return o;
}

IncrementCurve power_curve(double slope, double rel_se) {
  IncrementCurve c;
  for (double h : dyadic_lags(1.0, 8)) {
    c.lags.push_back(h);
    c.values.push_back(2.0 * std::pow(h, slope));
    c.std_errors.push_back(rel_se * 2.0 * std::pow(h, slope));
  }
  return c;
}

}  // namespace

TEST_SUITE("regularity") {
  TEST_CASE("zero lags give exactly zero") {
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.3);
    const auto s = v_space_increment(kOrigin, 1.0, n, ProcessSpec::brownian(1), Regularization::mollify(), 50, 1,
                                     steps(64));
    CHECK(s.mean == 0.0);
    CHECK(s.std_error == 0.0);
    const auto t = v_time_increment(0.0, 1.0, n, ProcessSpec::brownian(1), Regularization::mollify(), 50, 1, steps(64));
    CHECK(t.a.mean == 0.0);
    CHECK(t.b.mean == 0.0);
  }

  TEST_CASE("holder fit recovers a synthetic power law") {
    const auto r = holder_fit(power_curve(0.5, 0.01), 0.25);
    CHECK(r.exponent == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(r.consistent);
    CHECK(r.ci_low <= 0.25);
    CHECK(r.ci_high >= 0.25);
    CHECK(r.n_lags == 8);
    const auto off = holder_fit(power_curve(1.0, 0.01), 0.25);
    CHECK_FALSE(off.consistent);
  }

  TEST_CASE("holder fit refusals") {
    auto c = power_curve(0.5, 0.01);
    c.std_errors[3] = c.values[3];
    CHECK(kind_of([&] { holder_fit(c); }) == ErrorKind::NoiseDominated);
    IncrementCurve narrow;
    for (double h : {1.0, 0.8, 0.6, 0.5, 0.4}) {
      narrow.lags.push_back(h);
      narrow.values.push_back(h);
      narrow.std_errors.push_back(0.01 * h);
    }
    CHECK(kind_of([&] { holder_fit(narrow); }) == ErrorKind::InsufficientDecades);
  }

  TEST_CASE("increments need a translation-invariant process") {
    DiffusionSDE sde;
    sde.drift = [](const Point& x) { return Point::Zero(x.size()); };
    sde.dispersion = [](const Point& x) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(x.size(), x.size())); };
    const ProcessSpec p = ProcessSpec::diffusion(sde, 1, AssumptionH{});
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.3);
    CHECK(kind_of([&] {
            v_space_increment(Point::Constant(1, 0.1), 1.0, n, p, Regularization::mollify(), 10, 1, steps(16));
          }) == ErrorKind::NotTranslationInvariant);
    CHECK(kind_of([&] { v_time_increment(0.125, 1.0, n, p, Regularization::mollify(), 10, 1, steps(16)); }) ==
          ErrorKind::NotTranslationInvariant);
    CHECK(kind_of([&] {
            v_time_increment(0.1, 1.0, n, ProcessSpec::brownian(1), Regularization::mollify(), 10, 1, steps(16));
          }) == ErrorKind::GridMismatch);
  }

  TEST_CASE("space increment against the gaussian oracle") {
    // Mollified white noise: gamma = N(0, eps) density, so E gamma(X_r - X_s + z) is a N(0, |r - s| + eps) density.
    const double eps = 0.01, z = 0.3, t = 1.0;
    auto f = [&](double u) {
      const double v = u + eps;
      return 2.0 * (t - u) * (1.0 - std::exp(-z * z / (2 * v))) / std::sqrt(2 * M_PI * v);
    };
    QuadOptions q;
    q.rel_tol = 1e-10;
    const double exact = 2.0 * integrate(f, 0.0, t, q).value;
    const NoiseSpec n(mollified_kernel(CovarianceKernel::dirac(1), eps), 0.0);
    const auto e = v_space_increment(Point::Constant(1, z), t, n, ProcessSpec::brownian(1), Regularization::none(),
                                     3000, 2, steps(512));
    CHECK(std::abs(e.mean - exact) < 4 * e.std_error + 0.03 * exact);
  }

  TEST_CASE("malliavin integrands") {
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.3);
    const auto s = malliavin_samples(1.0, kOrigin, n, ProcessSpec::brownian(1), InitialCondition::constant(1.0),
                                     Regularization::mollify(), 300, 4, steps(128));
    for (const auto& x : s) {
      CHECK(x.skorohod > 0.0);
      CHECK(x.stratonovich >= x.skorohod);
    }
    double prev = INFINITY;
    for (double t : {1.0, 0.25, 0.0625}) {
      const auto m = malliavin_norm_sq(t, kOrigin, Calculus::Skorohod, n, ProcessSpec::brownian(1),
                                       InitialCondition::constant(1.0), Regularization::mollify(), 400, 4, steps(128));
      CHECK(m.mean < prev);
      prev = m.mean;
    }
    const NoiseSpec bad(CovarianceKernel::riesz(0.5, 1), 0.9);
    CHECK(kind_of([&] {
            malliavin_samples(1.0, kOrigin, bad, ProcessSpec::brownian(1), InitialCondition(),
                              Regularization::mollify(), 10, 1, steps(16));
          }) == ErrorKind::DalangViolation);
  }

  TEST_CASE("skorohod malliavin norm against a two-level simulation") {
    // E <Du, Du> = E over pairs i != j of exp(V_i - Q_ii/2) exp(V_j - Q_jj/2) Q_ij with V ~ N(0, Q).
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.3);
    const auto b = ProcessSpec::brownian(1);
    const int steps_n = 64, K = 6;
    const HamiltonianContext ctx(n, Regularization::mollify(), 0.5, steps_n);
    const long outer = 3000;
    std::vector<double> v(outer);
    for (long o = 0; o < outer; ++o) {
      Stream st(88, {static_cast<std::uint64_t>(o)});
      std::vector<PathGrid> paths;
      for (int k = 0; k < K; ++k) paths.push_back(sample_path(b, kOrigin, 0.5, steps_n, st));
      const auto cf = covariance_matrix(paths, ctx);
      Eigen::VectorXd g(K);
      for (int k = 0; k < K; ++k) g(k) = st.normal();
      const Eigen::VectorXd V = cf.l * g;
      double acc = 0.0;
      for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
          if (i != j) acc += std::exp(V(i) - 0.5 * cf.q(i, i) + V(j) - 0.5 * cf.q(j, j)) * cf.q(i, j);
      v[o] = acc / (K * (K - 1));
    }
    const auto brute = summarize(v);
    const auto m = malliavin_norm_sq(0.5, kOrigin, Calculus::Skorohod, n, b, InitialCondition::constant(1.0),
                                     Regularization::mollify(ctx.epsilon()), 20000, 5, steps(steps_n));
    CHECK(std::abs(m.mean - brute.mean) < 4 * std::hypot(m.std_error, brute.std_error));
  }

  TEST_CASE("negative moments of a riesz kernel") {
    // gamma^{-p} = |x|^{alpha p} and X_r - X~_s ~ N(0, r + s).
    const double alpha = 0.5, p = 1.5, t = 1.0, qe = alpha * p;
    const double abs_moment = std::pow(2.0, qe / 2) * std::tgamma((qe + 1) / 2) / std::sqrt(M_PI);
    const double a = qe / 2;
    const double time_avg = (std::pow(2 * t, a + 2) - 2 * std::pow(t, a + 2)) / ((a + 1) * (a + 2)) / (t * t);
    const auto m = negative_moment(p, t, kOrigin, CovarianceKernel::riesz(alpha, 1), ProcessSpec::brownian(1), 200000,
                                   6);
    CHECK(std::abs(m.mean - abs_moment * time_avg) < 4 * m.std_error);
    CHECK(kind_of([&] {
            negative_moment(1.0, 1.0, kOrigin, CovarianceKernel::dirac(1), ProcessSpec::brownian(1), 10, 1);
          }) == ErrorKind::DiracPointwiseEval);
  }
}
