#include "fkspde/spectral.hpp"

#include <cmath>
#include <limits>

#include "fkspde/errors.hpp"
#include "fkspde/quadrature.hpp"

namespace fkspde {

NoiseSpec::NoiseSpec(CovarianceKernel k, double b0) : kernel(std::move(k)), beta0(b0) {
  require(b0 >= 0.0 && b0 < 1.0, ErrorKind::InvalidParameter, "beta0 must lie in [0, 1)");
}

double NoiseSpec::a_t(double t) const { return 2.0 * std::pow(t, 1.0 - beta0) / (1.0 - beta0); }

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Finite: return "Finite";
    case Verdict::Divergent: return "Divergent";
    default: return "Inconclusive";
  }
}

const char* calculus_name(Calculus c) { return c == Calculus::Stratonovich ? "stratonovich" : "skorohod"; }

std::vector<double> default_cutoffs() {
  std::vector<double> c;
  for (int k = 0; k <= 32; ++k) c.push_back(std::pow(10.0, 0.25 * k));
  return c;
}

namespace {

double exponent_of(const NoiseSpec& noise, Calculus mode) { return mode == Calculus::Stratonovich ? 1.0 - noise.beta0 : 1.0; }

// Integral of f over [a, b]; the first panel [0, b] uses the power-weighted rule when a == 0.
template <class F>
QuadResult shell_integral(F&& f, double a, double b, double origin_power, const QuadOptions& opt) {
  if (a == 0.0) return integrate_left_power(f, 0.0, b, std::max(origin_power, -0.999999), opt);
  return integrate(f, a, b, opt);
}

// Least-squares slope of log increments against log radius over the last decade.
double fit_tail_slope(const std::vector<double>& cut, const std::vector<double>& inc) {
  const double r_last = cut.back();
  std::vector<double> xs, ys;
  for (size_t k = 1; k < cut.size(); ++k) {
    if (cut[k] < r_last / 10.0 * (1 - 1e-12)) continue;
    if (!(inc[k] > 0.0)) continue;
    xs.push_back(std::log(cut[k]));
    ys.push_back(std::log(inc[k] / std::log(cut[k] / cut[k - 1])));
  }
  if (xs.size() < 2) return -std::numeric_limits<double>::infinity();
  const Eigen::Map<Eigen::VectorXd> x(xs.data(), xs.size()), y(ys.data(), ys.size());
  const double mx = x.mean(), my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (sxx <= 0) return -std::numeric_limits<double>::infinity();
  return ((x.array() - mx) * (y.array() - my)).sum() / sxx;
}

// Ratio-based slope over [R, 10R] and [10R, 100R], evaluated in log coordinates.
double decade_slope(const CovarianceKernel& k, const std::function<double(double)>& weight, double r0) {
  auto f = [&](double u) {
    const double r = std::exp(u);
    return spectral_shell(k, r) * weight(r) * r;
  };
  QuadOptions opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-10;
  const double l0 = std::log(r0), l1 = l0 + std::log(10.0), l2 = l1 + std::log(10.0);
  const double s1 = integrate(f, l0, l1, opt).value;
  const double s2 = integrate(f, l1, l2, opt).value;
  if (!(s1 > 0.0) || !(s2 > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log10(s2 / s1);
}

}  // namespace

DalangResult dalang_integral(const NoiseSpec& noise, const ProcessSpec& process, Calculus mode,
                             const std::vector<double>& cutoffs, const DalangOptions& opt) {
  require(!cutoffs.empty(), ErrorKind::InvalidParameter, "cutoff list is empty");
  for (size_t i = 0; i < cutoffs.size(); ++i) {
    require(cutoffs[i] > 0.0, ErrorKind::InvalidParameter, "cutoffs must be positive");
    if (i) require(cutoffs[i] > cutoffs[i - 1], ErrorKind::InvalidParameter, "cutoffs must increase strictly");
  }
  require(noise.dim() == process.dim, ErrorKind::InvalidParameter, "noise and process dimensions differ");
  const double e = exponent_of(noise, mode);
  const auto& k = noise.kernel;
  auto f = [&](double r) {
    if (r <= 0.0) return 0.0;
    return spectral_shell(k, r, opt.scale) * std::pow(1.0 + process.psi(r), -e);
  };
  QuadOptions q;
  q.abs_tol = opt.abs_tol;
  q.rel_tol = opt.rel_tol;
  q.max_intervals = 20000;
  const double p0 = spectral_shell_origin_power(k);

  DalangResult res;
  res.cutoffs = cutoffs;
  std::vector<double> inc(cutoffs.size(), 0.0);
  double total = 0.0, prev = 0.0;
  for (size_t i = 0; i < cutoffs.size(); ++i) {
    const auto r = shell_integral(f, prev, cutoffs[i], p0, q);
    if (!r.converged) throw Error(ErrorKind::QuadratureFailure, "shell integral did not converge");
    inc[i] = std::max(r.value, 0.0);
    total += inc[i];
    res.partial.push_back(total);
    prev = cutoffs[i];
  }
  res.tail_slope = cutoffs.size() >= 3 ? fit_tail_slope(cutoffs, inc) : 0.0;

  bool cauchy = cutoffs.size() >= 4;
  for (size_t i = cutoffs.size() >= 3 ? cutoffs.size() - 3 : 0; i < cutoffs.size() && cauchy; ++i)
    if (i == 0 || !(inc[i] <= opt.rel_threshold * res.partial[i])) cauchy = false;
  if (cauchy || res.tail_slope < -opt.finite_margin) res.verdict = Verdict::Finite;
  else if (res.tail_slope >= -opt.divergent_margin) res.verdict = Verdict::Divergent;
  else res.verdict = Verdict::Inconclusive;
  return res;
}

Verdict power_counting_verdict(const NoiseSpec& noise, const ProcessSpec& process, Calculus mode) {
  const double q = spectral_shell_tail_power(noise.kernel);
  if (std::isnan(q))
    throw Error(ErrorKind::UnsupportedCombination, "power counting needs a kernel with a known spectral tail");
  if (std::isinf(q) && q < 0) return Verdict::Finite;
  const double tail = q - process.h.psi.power * exponent_of(noise, mode);
  return tail < -1.0 ? Verdict::Finite : Verdict::Divergent;
}

double spectral_mass(const CovarianceKernel& k, double N, SpectralScale scale) {
  require(N > 0.0, ErrorKind::InvalidParameter, "cutoff must be positive");
  auto f = [&](double r) { return r <= 0.0 ? 0.0 : spectral_shell(k, r, scale); };
  QuadOptions q;
  q.abs_tol = 1e-12;
  q.rel_tol = 1e-10;
  const double p0 = std::max(spectral_shell_origin_power(k), -0.999999);
  const double a = std::min(N, 1.0);
  double total = integrate_left_power(f, 0.0, a, p0, q).value;
  if (N <= a) return total;
  // Geometric pieces so that a shell concentrated near the origin is not lost on a long interval.
  std::vector<double> br{a};
  while (br.back() * 4.0 < N) br.push_back(br.back() * 4.0);
  br.push_back(N);
  return total + integrate(f, br, q).value;
}

double spectral_tail(const CovarianceKernel& k, double N, const std::function<double(double)>& weight,
                     SpectralScale scale) {
  require(N > 0.0, ErrorKind::InvalidParameter, "cutoff must be positive");
  auto f = [&](double u) {
    const double r = std::exp(u);
    return spectral_shell(k, r, scale) * weight(r) * r;
  };
  QuadOptions q;
  q.abs_tol = 0.0;
  q.rel_tol = 1e-11;
  const double step = std::log(2.0);
  double total = 0.0, last = -1.0, last_ratio = -1.0;
  double u = std::log(N);
  for (int k2 = 0; k2 < 2000; ++k2) {
    const double s = integrate(f, u, u + step, q).value;
    u += step;
    total += s;
    if (s == 0.0 || s < 1e-17 * total) return total;
    if (last > 0.0) {
      const double ratio = s / last;
      if (k2 > 8 && ratio < 1.0 && std::abs(ratio - last_ratio) < 1e-7 * ratio) {
        return total + s * ratio / (1.0 - ratio);
      }
      if (k2 > 60 && ratio >= 1.0) throw Error(ErrorKind::DivergentTail, "tail integral does not converge");
      last_ratio = ratio;
    }
    last = s;
  }
  throw Error(ErrorKind::DivergentTail, "tail integral did not settle within the doubling budget");
}

SpectralSplit tail_split(const NoiseSpec& noise, const ProcessSpec& process, double N, SpectralScale scale) {
  SpectralSplit s;
  s.N = N;
  s.m_N = spectral_mass(noise.kernel, N, scale);
  const double e = 1.0 - noise.beta0;
  s.eps_N = spectral_tail(noise.kernel, N, [&](double r) { return std::pow(process.psi(r), -e); }, scale);
  return s;
}

HolderExponents holder_exponents(const NoiseSpec& noise, const ProcessSpec& process) {
  const auto& k = noise.kernel;
  const double e = 1.0 - noise.beta0;
  const double r0 = 1e6;
  HolderExponents out;

  auto bisect = [&](const std::function<double(double)>& slope_at, double& theta, bool& positive) {
    double lo = 1e-9, hi = 1.0;
    if (slope_at(lo) >= 0.0) {
      theta = 0.0;
      positive = false;
      return;
    }
    positive = true;
    if (slope_at(hi) < 0.0) {
      theta = 1.0;
      return;
    }
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (slope_at(mid) < 0.0 ? lo : hi) = mid;
    }
    theta = 0.5 * (lo + hi);
  };

  bisect(
      [&](double th) {
        return decade_slope(
            k, [&](double r) { return std::pow(r, 2.0 * th) / (1.0 + std::pow(process.psi(r), e)); }, r0);
      },
      out.theta1, out.theta1_positive);

  const bool tab_unknown = std::holds_alternative<Tabulated>(k.kind) && std::isnan(spectral_shell_tail_power(k));
  out.theta2_available = !tab_unknown;
  if (out.theta2_available) {
    bisect(
        [&](double th) {
          return decade_slope(
              k, [&](double r) { return std::pow(process.psi(r), th) * std::pow(1.0 + process.psi(r), -e); }, r0);
        },
        out.theta2, out.theta2_positive);
  }
  return out;
}

double shifted_heat_integral(const CovarianceKernel& k, const ProcessSpec& process, double t, double shift) {
  require(k.dim == 1, ErrorKind::UnsupportedCombination, "shifted heat integral is implemented in d = 1");
  const double p = std::max(spectral_shell_origin_power(k), -0.999999);
  auto f = [&](double xi) {
    if (xi == 0.0 && k.singular_at_zero() && !k.is_dirac()) return 0.0;
    return std::exp(-2.0 * t * process.psi(xi + shift)) * spectral_density(k, xi);
  };
  QuadOptions q;
  q.abs_tol = 1e-13;
  q.rel_tol = 1e-10;
  const double b0 = std::min(0.0, -shift), b1 = std::max(0.0, -shift);
  const double len = std::max(process.h.psi.radius_at(1.0 / (2.0 * t)), 1e-3);
  double total = 0.0;
  // Panels adjacent to the origin use the power-weighted rule toward 0.
  auto piece = [&](double a, double b) {
    if (a == b) return 0.0;
    if (a == 0.0) return integrate_left_power(f, 0.0, b, p, q).value;
    if (b == 0.0) return integrate_left_power([&](double x) { return f(-x); }, 0.0, -a, p, q).value;
    return integrate(f, a, b, q).value;
  };
  total += piece(b0, b1);
  total += piece(b1, b1 + len);
  total += piece(b0 - len, b0);
  total += integrate_to_infinity(f, b1 + len, len, q).value;
  total += integrate_to_infinity([&](double x) { return f(-x); }, -(b0 - len), len, q).value;
  return total;
}

}  // namespace fkspde
