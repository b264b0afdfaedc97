#include <cmath>
#include <vector>

#include "doctest.h"
#include "fkspde/errors.hpp"
#include "fkspde/estimate.hpp"
#include "fkspde/process.hpp"
#include "fkspde/rng.hpp"

using namespace fkspde;

TEST_SUITE("process") {
  TEST_CASE("paths start at the initial point") {
    Stream st(7);
    Point x0(1);
    x0 << 3.0;
    const PathGrid p = sample_path(ProcessSpec::brownian(1), x0, 1.0, 16, st);
    CHECK(p.positions(0, 0) == 3.0);
    CHECK(p.positions.cols() == 17);
  }

  TEST_CASE("brownian endpoint variance") {
    const long n = 100000;
    std::vector<double> sq(n);
    const Point x0 = Point::Zero(1);
    for (long i = 0; i < n; ++i) {
      Stream st(11, {static_cast<std::uint64_t>(i)});
      const double x = sample_path(ProcessSpec::brownian(1), x0, 1.0, 8, st).end()(0);
      sq[i] = x * x;
    }
    const MCEstimate e = summarize(sq);
    CHECK(std::abs(e.mean - 1.0) < 3.0 * e.std_error);
  }

  TEST_CASE("stable characteristic function") {
    const long n = 100000;
    std::vector<double> c(n);
    const Point x0 = Point::Zero(1);
    for (long i = 0; i < n; ++i) {
      Stream st(12, {static_cast<std::uint64_t>(i)});
      c[i] = std::cos(2.0 * sample_path(ProcessSpec::stable(1.0, 1), x0, 1.0, 4, st).end()(0));
    }
    CHECK(std::abs(summarize(c).mean - std::exp(-2.0)) < 0.01);
  }

  TEST_CASE("transition densities") {
    const Point o = Point::Zero(1);
    CHECK(transition_density(ProcessSpec::brownian(1), 1.0, o, o) ==
          doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
    CHECK(transition_density(ProcessSpec::stable(1.0, 1), 1.0, o, o) == doctest::Approx(1.0 / M_PI).epsilon(1e-8));
    const Point o2 = Point::Zero(2);
    const Eigen::Vector2d y(0.6, 0.8);
    CHECK(transition_density(ProcessSpec::brownian(2), 0.5, o2, y) ==
          doctest::Approx(std::exp(-1.0) / M_PI).epsilon(1e-12));
  }

  TEST_CASE("2-d brownian endpoints match the density in an annulus") {
    const long n = 100000;
    long hits = 0;
    const Point o2 = Point::Zero(2);
    for (long i = 0; i < n; ++i) {
      Stream st(13, {static_cast<std::uint64_t>(i)});
      const double r = sample_endpoint(ProcessSpec::brownian(2), o2, 0.5, st).norm();
      hits += r > 0.9 && r < 1.1;
    }
    // P(0.9 < |X| < 1.1) = exp(-0.81) - exp(-1.21) for variance 0.5 per axis.
    const double p = std::exp(-0.81) - std::exp(-1.21);
    CHECK(std::abs(static_cast<double>(hits) / n - p) < 0.05 * p);
  }

  TEST_CASE("heat domination holds with equality for Levy processes") {
    const std::vector<double> ts{0.1, 0.5, 1.0}, xis{0.5, 1.0, 4.0};
    CHECK(heat_domination_check(ProcessSpec::brownian(1), ts, xis).violations.empty());
    CHECK(heat_domination_check(ProcessSpec::stable(1.5, 1), ts, xis).violations.empty());
  }

  TEST_CASE("heat domination flags a too-fast candidate bound") {
    DiffusionSDE sde;
    sde.drift = [](const Point& x) { return Point::Zero(x.size()); };
    sde.dispersion = [](const Point& x) {
      return Eigen::MatrixXd(std::sqrt(2.0) * Eigen::MatrixXd::Identity(x.size(), x.size()));
    };
    AssumptionH h;
    h.c2 = 2.0;
    h.psi.scale = 1.0;
    const ProcessSpec p = ProcessSpec::diffusion(sde, 1, h);
    DominationOptions o;
    o.n_samples = 100000;
    const auto r = heat_domination_check(p, {0.5}, {0.5, 1.0, 1.5}, o);
    CHECK_FALSE(r.violations.empty());
    CHECK(r.empirical);
  }
}
