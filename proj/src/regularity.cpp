#include "fkspde/regularity.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>

#include "fkspde/errors.hpp"
#include "fkspde/parallel.hpp"
#include "fkspde/rng.hpp"

namespace fkspde {

namespace {

enum : std::uint64_t { kTagSpace = 31, kTagTime = 32, kTagMalliavin = 33, kTagNegative = 34 };

void require_levy(const ProcessSpec& process) {
  require(process.is_levy(), ErrorKind::NotTranslationInvariant,
          "increment formulas need a translation-invariant process (Brownian or stable)");
}

}  // namespace

MCEstimate v_space_increment(const Point& z, double t, const NoiseSpec& noise, const ProcessSpec& process,
                             const Regularization& reg, long n_samples, std::uint64_t seed,
                             const RegularityOptions& opt) {
  require_levy(process);
  require(z.size() == process.dim && noise.dim() == process.dim, ErrorKind::InvalidParameter,
          "offset, noise and process dimensions differ");
  require(n_samples > 1 && t > 0.0, ErrorKind::InvalidParameter, "need t > 0 and at least two samples");
  const HamiltonianContext ctx(noise, reg, t, opt.n_steps);
  const bool zero = z.isZero(0.0);
  const Point x0 = Point::Zero(process.dim);
  std::vector<double> v(n_samples);
  parallel_for(static_cast<size_t>(n_samples), opt.workers, [&](size_t i) {
    Stream st(seed, {kTagSpace, static_cast<std::uint64_t>(i)});
    const PathGrid p = sample_path(process, x0, t, opt.n_steps, st);
    if (zero) {
      v[i] = 0.0;
      return;
    }
    const Eigen::MatrixXd y = HamiltonianContext::midpoints(p);
    v[i] = 2.0 * (ctx.self_mid(y) - ctx.shifted_mid(y, z));
  });
  return summarize(v, seed);
}

TimeIncrement v_time_increment(double h, double t, const NoiseSpec& noise, const ProcessSpec& process,
                               const Regularization& reg, long n_samples, std::uint64_t seed,
                               const RegularityOptions& opt) {
  require_levy(process);
  require(noise.dim() == process.dim, ErrorKind::InvalidParameter, "noise and process dimensions differ");
  require(n_samples > 1 && t > 0.0 && h >= 0.0, ErrorKind::InvalidParameter, "need t > 0, h >= 0 and two samples");
  const int n = opt.n_steps;
  const double dt = t / n;
  const int m = static_cast<int>(std::lround(h / dt));
  require(std::abs(m * dt - h) <= 1e-9 * std::max(h, dt), ErrorKind::GridMismatch,
          "time lag is not a whole number of steps");
  const HamiltonianContext ctx(noise, reg, t, n);
  std::unique_ptr<HamiltonianContext> strip;
  if (m > 0) {
    Regularization r = reg;
    // Same epsilon on the strip as on [0, t].
    if (r.mode == Regularization::Mode::SpatialMollify && r.parameter == 0.0) r.parameter = ctx.epsilon();
    strip = std::make_unique<HamiltonianContext>(noise, r, m * dt, m);
  }
  const Point x0 = Point::Zero(process.dim);
  std::vector<double> a(n_samples), b(n_samples);
  parallel_for(static_cast<size_t>(n_samples), opt.workers, [&](size_t i) {
    if (m == 0) {
      a[i] = b[i] = 0.0;
      return;
    }
    Stream st(seed, {kTagTime, static_cast<std::uint64_t>(i)});
    const PathGrid p = sample_path(process, x0, (n + m) * dt, n + m, st);
    const Eigen::MatrixXd y = HamiltonianContext::midpoints(p);
    const Eigen::MatrixXd y0 = y.leftCols(n), y1 = y.middleCols(m, n);
    a[i] = ctx.self_mid(y1) + ctx.self_mid(y0) - 2.0 * ctx.cross_mid(y1, y0);
    b[i] = strip->self_mid(y.leftCols(m));
  });
  return {summarize(a, seed), summarize(b, seed)};
}

std::vector<double> dyadic_lags(double L, int levels) {
  std::vector<double> out;
  for (int k = 1; k <= levels; ++k) out.push_back(L * std::ldexp(1.0, -k));
  return out;
}

HolderReport holder_fit(const IncrementCurve& c, double theoretical, double tolerance) {
  require(c.lags.size() == c.values.size() && c.values.size() == c.std_errors.size(), ErrorKind::InvalidParameter,
          "curve arrays differ in length");
  std::vector<int> idx;
  for (size_t i = 0; i < c.lags.size(); ++i) {
    if (c.lags[i] == 0.0) continue;
    if (!(c.values[i] > 3.0 * c.std_errors[i]) || !(c.values[i] > 0.0))
      throw Error(ErrorKind::NoiseDominated, "increment at lag " + std::to_string(c.lags[i]) +
                                                 " is within 3 standard errors of zero");
    idx.push_back(static_cast<int>(i));
  }
  double lo = INFINITY, hi = 0.0;
  for (int i : idx) lo = std::min(lo, c.lags[i]), hi = std::max(hi, c.lags[i]);
  if (idx.size() < 4 || std::log10(hi / lo) < 1.5)
    throw Error(ErrorKind::InsufficientDecades, "need at least 4 positive lags spanning 1.5 decades");
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n), w(n);
  bool have_se = true;
  for (int i : idx) have_se = have_se && c.std_errors[i] > 0.0;
  for (int k = 0; k < n; ++k) {
    const int i = idx[k];
    X(k, 0) = 1.0;
    X(k, 1) = std::log(c.lags[i]);
    y(k) = std::log(c.values[i]);
    const double rel = c.std_errors[i] / c.values[i];
    w(k) = have_se ? 1.0 / (rel * rel) : 1.0;
  }
  const Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
  const Eigen::Vector2d beta = xtwx.ldlt().solve(X.transpose() * w.asDiagonal() * y);
  const Eigen::VectorXd r = y - X * beta;
  const double chi2 = (r.array().square() * w.array()).sum();
  HolderReport out;
  out.n_lags = n;
  out.slope = beta(1);
  out.exponent = 0.5 * beta(1);
  // With known errors the covariance is (X'WX)^{-1}; otherwise scale by the residual variance.
  const double s2 = have_se ? std::max(1.0, chi2 / (n - 2)) : chi2 / (n - 2);
  out.slope_se = std::sqrt(s2 * xtwx.inverse()(1, 1));
  out.ci_low = out.exponent - 1.96 * 0.5 * out.slope_se;
  out.ci_high = out.exponent + 1.96 * 0.5 * out.slope_se;
  out.residual = std::sqrt(chi2 / w.sum());
  out.theoretical = theoretical;
  out.consistent = std::isnan(theoretical) || std::abs(out.exponent - theoretical) <= tolerance;
  return out;
}

std::vector<MalliavinSample> malliavin_samples(double t, const Point& x, const NoiseSpec& noise,
                                               const ProcessSpec& process, const InitialCondition& u0,
                                               const Regularization& reg, long n_samples, std::uint64_t seed,
                                               const RegularityOptions& opt) {
  require(x.size() == process.dim && noise.dim() == process.dim, ErrorKind::InvalidParameter,
          "start point, noise and process dimensions differ");
  require(n_samples > 0 && t > 0.0, ErrorKind::InvalidParameter, "need t > 0 and at least one sample");
  require_dalang(noise, process, Calculus::Stratonovich);
  const HamiltonianContext ctx(noise, reg, t, opt.n_steps);
  std::vector<MalliavinSample> out(n_samples);
  parallel_for(static_cast<size_t>(n_samples), opt.workers, [&](size_t i) {
    Stream st(seed, {kTagMalliavin, static_cast<std::uint64_t>(i)});
    const PathGrid a = sample_path(process, x, t, opt.n_steps, st);
    const PathGrid b = sample_path(process, x, t, opt.n_steps, st);
    const Eigen::MatrixXd ya = HamiltonianContext::midpoints(a), yb = HamiltonianContext::midpoints(b);
    const double qa = ctx.self_mid(ya), qb = ctx.self_mid(yb), qab = ctx.cross_mid(ya, yb);
    const double uu = u0(a.end()) * u0(b.end());
    out[i].stratonovich = uu * std::exp(0.5 * (qa + qb) + qab) * qab;
    out[i].skorohod = uu * std::exp(qab) * qab;
    if (!std::isfinite(out[i].stratonovich) || !std::isfinite(out[i].skorohod))
      throw Error(ErrorKind::NumericalFailure, "NonFinite: Malliavin integrand overflowed");
  });
  return out;
}

MCEstimate malliavin_norm_sq(double t, const Point& x, Calculus mode, const NoiseSpec& noise,
                             const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg,
                             long n_samples, std::uint64_t seed, const RegularityOptions& opt) {
  const auto s = malliavin_samples(t, x, noise, process, u0, reg, n_samples, seed, opt);
  std::vector<double> v(s.size());
  for (size_t i = 0; i < s.size(); ++i) v[i] = mode == Calculus::Stratonovich ? s[i].stratonovich : s[i].skorohod;
  return summarize(v, seed);
}

MCEstimate negative_moment(double p, double t, const Point& x, const CovarianceKernel& kernel,
                           const ProcessSpec& process, long n_samples, std::uint64_t seed, int workers) {
  require(p > 0.0 && t > 0.0 && n_samples > 1, ErrorKind::InvalidParameter, "need p > 0, t > 0, two samples");
  require(!kernel.is_dirac(), ErrorKind::DiracPointwiseEval, "negative moments need a pointwise kernel");
  require(x.size() == process.dim && kernel.dim == process.dim, ErrorKind::InvalidParameter,
          "start point, kernel and process dimensions differ");
  std::vector<double> v(n_samples);
  parallel_for(static_cast<size_t>(n_samples), workers, [&](size_t i) {
    Stream st(seed, {kTagNegative, static_cast<std::uint64_t>(i)});
    const double r = t * st.uniform(), s = t * st.uniform();
    const Point a = sample_endpoint(process, x, r, st);
    const Point b = sample_endpoint(process, x, s, st);
    const double g = gamma_eval(kernel, a - b);
    if (!(g > 0.0)) throw Error(ErrorKind::NumericalFailure, "kernel is not positive at a sampled point");
    v[i] = std::pow(g, -p);
  });
  return summarize(v, seed);
}

}  // namespace fkspde
