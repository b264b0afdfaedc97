#include <cmath>
#include <vector>

#include "doctest.h"
#include "fkspde/chaos.hpp"
#include "fkspde/errors.hpp"
#include "fkspde/hamiltonian.hpp"
#include "oracles.hpp"

using namespace fkspde;

namespace {

const Point kOrigin = Point::Zero(1);

// E[H_12^n] / n! by brute-force Monte Carlo on independent path pairs.
std::vector<MCEstimate> cross_power_means(const NoiseSpec& noise, double t, int n_max, long pairs, int steps) {
  const HamiltonianContext ctx(noise, Regularization::none(), t, steps);
  std::vector<std::vector<double>> v(n_max + 1, std::vector<double>(pairs));
  for (long i = 0; i < pairs; ++i) {
    Stream st(77, {static_cast<std::uint64_t>(i)});
    const auto a = sample_path(ProcessSpec::brownian(1), kOrigin, t, steps, st);
    const auto b = sample_path(ProcessSpec::brownian(1), kOrigin, t, steps, st);
    const double h = ctx.cross(a, b);
    double term = 1.0;
    for (int n = 0; n <= n_max; ++n) {
      v[n][i] = term;
      term *= h / (n + 1);
    }
  }
  std::vector<MCEstimate> out;
  for (auto& x : v) out.push_back(summarize(x));
  return out;
}

}  // namespace

TEST_SUITE("chaos") {
  TEST_CASE("zeroth and first order") {
    const NoiseSpec white(CovarianceKernel::dirac(1), 0.0);
    const auto b = ProcessSpec::brownian(1);
    CHECK(chaos_kernel_norm(0, 1.0, kOrigin, white, b, InitialCondition::constant(1.0), 1).value == 1.0);
    CHECK(chaos_kernel_norm(0, 1.0, kOrigin, white, b, InitialCondition::constant(2.0), 1).value == 4.0);
    const auto n1 = chaos_kernel_norm(1, 1.0, kOrigin, white, b, InitialCondition::constant(1.0), 1);
    CHECK(n1.method == ChaosMethod::Deterministic);
    CHECK(n1.value == doctest::Approx(oracle::cross_closed_form(1.0)).epsilon(1e-6));
  }

  TEST_CASE("orders against brute-force cross hamiltonian moments") {
    const NoiseSpec n(CovarianceKernel::cauchy(1), 0.3);
    const auto mc = cross_power_means(n, 1.0, 3, 20000, 128);
    const auto u0 = InitialCondition::constant(1.0);
    ChaosOptions o;
    o.is_samples = 100000;
    for (int k = 1; k <= 3; ++k) {
      const auto c = chaos_kernel_norm(k, 1.0, kOrigin, n, ProcessSpec::brownian(1), u0, 5, o);
      const double se = std::hypot(c.std_error, mc[k].std_error);
      CHECK(std::abs(c.value - mc[k].mean) < 4 * se + 0.03 * mc[k].mean);
    }
  }

  TEST_CASE("deterministic and sampled rules agree") {
    const auto u0 = InitialCondition::constant(1.0);
    for (const auto& n : {NoiseSpec(CovarianceKernel::riesz(0.5, 1), 0.5), NoiseSpec(CovarianceKernel::cauchy(1), 0.0)}) {
      for (int k : {1, 2}) {
        const auto det = chaos_kernel_norm(k, 1.0, kOrigin, n, ProcessSpec::brownian(1), u0, 3);
        ChaosOptions o;
        o.force_sampling = true;
        o.is_samples = 400000;
        const auto is = chaos_kernel_norm(k, 1.0, kOrigin, n, ProcessSpec::brownian(1), u0, 3, o);
        CHECK(det.method == ChaosMethod::Deterministic);
        CHECK(is.method == ChaosMethod::ImportanceSampled);
        CHECK(std::abs(det.value - is.value) < 5 * is.std_error + 0.02 * det.value);
      }
    }
  }

  TEST_CASE("simplex integrals") {
    CHECK(simplex_dirichlet({0.0}, 2.5) == doctest::Approx(2.5));
    CHECK(simplex_dirichlet({0.0, 0.0, 0.0}, 1.0) == doctest::Approx(1.0 / 6.0));
    // int_0^1 int_0^{r2} r1^{-1/2} (r2 - r1)^{-1/2} dr1 dr2 = pi.
    CHECK(simplex_dirichlet({0.5, 0.5}, 1.0) == doctest::Approx(M_PI));
    Stream st(9);
    const long n = 400000;
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
      double a = st.uniform(), b = st.uniform();
      if (a > b) std::swap(a, b);
      acc += std::pow(a, -0.3) * std::pow(b - a, -0.2);
    }
    CHECK(simplex_dirichlet({0.3, 0.2}, 1.0) == doctest::Approx(0.5 * acc / n).epsilon(0.02));
  }

  TEST_CASE("second moment series") {
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.3);
    const auto b = ProcessSpec::brownian(1);
    const auto u0 = InitialCondition::constant(1.0);
    const auto z = chaos_second_moment(1.0, kOrigin, 0, n, b, u0, 1);
    CHECK(z.estimate == 1.0);
    CHECK(z.upper > 1.0);
    const auto s = chaos_second_moment(1.0, kOrigin, 4, n, b, u0, 1);
    CHECK(s.terms.size() == 5);
    CHECK(s.upper >= s.estimate);
    CHECK(s.tail.bound < z.tail.bound);
    for (size_t k = 1; k < s.hypercontractive_partials.size(); ++k)
      CHECK(s.hypercontractive_partials[k] >= s.hypercontractive_partials[k - 1]);
    // Short times: every chaos beyond the constant vanishes.
    double prev = INFINITY;
    for (double t : {0.1, 0.01, 0.001}) {
      const auto r = chaos_second_moment(t, kOrigin, 3, n, b, u0, 1);
      CHECK(r.estimate > 1.0);
      CHECK(r.estimate < prev);
      prev = r.estimate;
    }
    CHECK(prev - 1.0 < 1e-3);
  }

  TEST_CASE("order bound dominates the computed norms") {
    const NoiseSpec n(CovarianceKernel::cauchy(1), 0.0);
    const auto b = ProcessSpec::brownian(1);
    const auto tail = chaos_tail(1.0, 2, n, b);
    for (int k = 1; k <= 2; ++k) {
      const auto c = chaos_kernel_norm(k, 1.0, kOrigin, n, b, InitialCondition::constant(1.0), 1);
      CHECK(c.value <= chaos_order_bound(k, tail.a_t, 1.0, tail.m_N, tail.eps_tilde) * (1 + 1e-9));
    }
  }

  TEST_CASE("refusals") {
    const NoiseSpec n(CovarianceKernel::riesz(0.5, 1), 0.3);
    const auto b = ProcessSpec::brownian(1);
    auto kind = [](auto&& f) {
      try {
        f();
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::InvalidParameter;
    };
    ChaosOptions o;
    o.max_order = 3;
    CHECK(kind([&] { chaos_kernel_norm(4, 1.0, kOrigin, n, b, InitialCondition(), 1, o); }) == ErrorKind::OrderTooHigh);
    CHECK(kind([&] { chaos_second_moment(1.0, kOrigin, 5, n, b, InitialCondition(), 1, o); }) == ErrorKind::OrderTooHigh);
    const auto box = InitialCondition::indicator(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0));
    CHECK(kind([&] { chaos_kernel_norm(1, 1.0, kOrigin, n, b, box, 1); }) == ErrorKind::UnsupportedCombination);
    const NoiseSpec white2(CovarianceKernel::dirac(2), 0.0);
    CHECK(kind([&] {
            chaos_kernel_norm(3, 1.0, Point::Zero(2), white2, ProcessSpec::brownian(2), InitialCondition(), 1);
          }) == ErrorKind::ProposalUnnormalizable);
    CHECK(kind([&] {
            chaos_second_moment(1.0, Point::Zero(2), 2, white2, ProcessSpec::brownian(2), InitialCondition(), 1);
          }) == ErrorKind::DalangViolation);
  }
}
