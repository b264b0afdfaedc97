#include "fkspde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fkspde/errors.hpp"
#include "fkspde/parallel.hpp"
#include "fkspde/quadrature.hpp"

namespace fkspde {

namespace {

enum : std::uint64_t { kTagMoment = 11, kTagExp = 12, kTagDeterministic = 13, kTagHamiltonian = 14, kTagSolution = 15 };

}  // namespace

// ---- initial conditions ----

InitialCondition InitialCondition::constant(double c) {
  require(std::isfinite(c), ErrorKind::InvalidParameter, "initial value must be finite");
  InitialCondition u;
  u.kind_ = Kind::Constant;
  u.c_ = c;
  u.bound_ = std::abs(c);
  return u;
}

InitialCondition InitialCondition::indicator(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  require(lo.size() == hi.size() && lo.size() >= 1, ErrorKind::InvalidParameter, "box corners must share a dimension");
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    require(lo(i) <= hi(i) && !std::isnan(lo(i)) && !std::isnan(hi(i)), ErrorKind::InvalidParameter,
            "box needs lo <= hi on every axis");
  InitialCondition u;
  u.kind_ = Kind::Indicator;
  u.lo_ = std::move(lo);
  u.hi_ = std::move(hi);
  u.bound_ = 1.0;
  return u;
}

InitialCondition InitialCondition::tabulated(std::function<double(const Point&)> f, double bound, std::string label) {
  require(static_cast<bool>(f), ErrorKind::InvalidParameter, "initial condition needs a function");
  require(bound >= 0.0 && std::isfinite(bound), ErrorKind::InvalidParameter, "declared bound must be finite");
  InitialCondition u;
  u.kind_ = Kind::Tabulated;
  u.f_ = std::move(f);
  u.bound_ = bound;
  u.label_ = std::move(label);
  return u;
}

double InitialCondition::operator()(const Point& x) const {
  switch (kind_) {
    case Kind::Constant: return c_;
    case Kind::Indicator:
      require(x.size() == lo_.size(), ErrorKind::InvalidParameter, "point dimension does not match the box");
      return ((x.array() >= lo_.array()) && (x.array() <= hi_.array())).all() ? 1.0 : 0.0;
    case Kind::Tabulated: {
      const double v = f_(x);
      require(std::abs(v) <= bound_ && std::isfinite(v), ErrorKind::InvalidParameter,
              "initial condition exceeds its declared bound");
      return v;
    }
  }
  return 0.0;
}

std::string InitialCondition::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Constant: os << "constant(" << c_ << ")"; break;
    case Kind::Indicator:
      os << "indicator(";
      for (Eigen::Index i = 0; i < lo_.size(); ++i) os << (i ? ";" : "") << lo_(i) << ":" << hi_(i);
      os << ")";
      break;
    case Kind::Tabulated: os << "tabulated(" << label_ << "," << bound_ << ")"; break;
  }
  return os.str();
}

// ---- preconditions ----

void require_dalang(const NoiseSpec& noise, const ProcessSpec& process, Calculus mode) {
  const auto r = dalang_integral(noise, process, mode);
  Verdict v = r.verdict;
  if (v == Verdict::Inconclusive) {
    try {
      v = power_counting_verdict(noise, process, mode);
    } catch (const Error&) {
    }
  }
  if (v != Verdict::Finite) {
    std::ostringstream os;
    os << "Dalang condition (" << calculus_name(mode) << ") is " << verdict_name(v) << " for " << noise.kernel.name()
       << " with " << process.name() << ", beta0 = " << noise.beta0;
    throw Error(ErrorKind::DalangViolation, os.str());
  }
}

namespace {

void log_abs(double u, double& lg, int& sign) {
  if (u == 0.0) {
    lg = -std::numeric_limits<double>::infinity();
    sign = 0;
  } else {
    lg = std::log(std::abs(u));
    sign = u > 0 ? 1 : -1;
  }
}

}  // namespace

// ---- single realizations ----

SolutionSample sample_solution(const HamiltonianContext& ctx, const Point& x, Calculus mode, int K,
                               const ProcessSpec& process, const InitialCondition& u0, Stream& stream, double jitter) {
  require(K >= 1, ErrorKind::InvalidParameter, "need at least one inner path");
  require(x.size() == process.dim, ErrorKind::InvalidParameter, "start point dimension does not match the process");
  std::vector<PathGrid> paths;
  paths.reserve(K);
  for (int k = 0; k < K; ++k) paths.push_back(sample_path(process, x, ctx.t_end(), ctx.n_steps(), stream));
  const CovarianceFactor cf = covariance_matrix(paths, ctx, jitter, 1);
  Eigen::VectorXd g(K);
  for (int k = 0; k < K; ++k) g(k) = stream.normal();

  SolutionSample s;
  s.mode = mode;
  s.inner_paths = K;
  s.v = cf.l * g;
  s.q_diag = cf.q.diagonal();
  s.jitter = cf.jitter;
  std::vector<double> l(K);
  std::vector<int> sg(K);
  double shift = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    double lu;
    log_abs(u0(paths[k].end()), lu, sg[k]);
    l[k] = s.v(k) - (mode == Calculus::Skorohod ? 0.5 * s.q_diag(k) : 0.0) + lu;
    if (sg[k] != 0) {
      if (!std::isfinite(l[k])) throw Error(ErrorKind::NumericalFailure, "NonFinite: solution exponent is not finite");
      shift = std::max(shift, l[k]);
    }
  }
  if (!std::isfinite(shift)) {
    s.value = 0.0;
    s.log_value = -std::numeric_limits<double>::infinity();
    return s;
  }
  double acc = 0.0;
  for (int k = 0; k < K; ++k)
    if (sg[k] != 0) acc += sg[k] * std::exp(l[k] - shift);
  acc /= K;
  s.value = std::exp(shift) * acc;
  s.log_value = acc > 0 ? shift + std::log(acc) : std::numeric_limits<double>::quiet_NaN();
  return s;
}

SolutionSample sample_solution(double t, const Point& x, Calculus mode, int K, const NoiseSpec& noise,
                               const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg,
                               Stream& stream, const SolverOptions& opt) {
  // Both modes need the stronger condition: the correction term is infinite without it.
  if (opt.check_dalang) require_dalang(noise, process, Calculus::Stratonovich);
  const HamiltonianContext ctx(noise, reg, t, opt.n_steps);
  return sample_solution(ctx, x, mode, K, process, u0, stream, opt.jitter);
}

// ---- moments ----

double pair_exponent(const Eigen::MatrixXd& h, PairSet set, double weight) {
  const Eigen::Index p = h.rows();
  require(h.cols() == p, ErrorKind::InvalidParameter, "Hamiltonian matrix must be square");
  double s = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (set == PairSet::AllOrdered) s += h(i, i);
    for (Eigen::Index j = i + 1; j < p; ++j) s += (set == PairSet::AllOrdered ? 2.0 : 1.0) * h(i, j);
  }
  return weight * s;
}

MCEstimate product_moment(double t, const std::vector<Point>& starts, Calculus mode, const NoiseSpec& noise,
                          const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg,
                          long n_samples, std::uint64_t seed, const SolverOptions& opt) {
  require(!starts.empty(), ErrorKind::InvalidParameter, "need at least one start point");
  require(n_samples >= 1, ErrorKind::InvalidParameter, "need at least one sample");
  for (const auto& x : starts)
    require(x.size() == process.dim, ErrorKind::InvalidParameter, "start point dimension does not match the process");
  if (opt.check_dalang) require_dalang(noise, process, mode);
  const int p = static_cast<int>(starts.size());
  const bool strat = mode == Calculus::Stratonovich;
  const HamiltonianContext ctx(noise, reg, t, opt.n_steps);

  std::vector<double> logs(n_samples);
  std::vector<int> signs(n_samples);
  parallel_for(static_cast<size_t>(n_samples), opt.workers, [&](size_t i) {
    Stream st(seed, {kTagMoment, static_cast<std::uint64_t>(i)});
    std::vector<Eigen::MatrixXd> y(p);
    double lu_sum = 0.0;
    int sign = 1;
    for (int k = 0; k < p; ++k) {
      const PathGrid path = sample_path(process, starts[k], t, opt.n_steps, st);
      y[k] = HamiltonianContext::midpoints(path);
      double lu;
      int sk;
      log_abs(u0(path.end()), lu, sk);
      lu_sum += lu;
      sign *= sk;
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
    for (int a = 0; a < p; ++a) {
      if (strat) h(a, a) = ctx.self_mid(y[a]);
      for (int b = a + 1; b < p; ++b) h(a, b) = h(b, a) = ctx.cross_mid(y[a], y[b]);
    }
    const double e = strat ? pair_exponent(h, PairSet::AllOrdered, 0.5) : pair_exponent(h, PairSet::StrictUpper, 1.0);
    if (!std::isfinite(e)) {
      std::ostringstream os;
      os << "NonFinite: moment exponent from Hamiltonians " << h.format(Eigen::IOFormat(6, 0, ",", ";"));
      throw Error(ErrorKind::NumericalFailure, os.str());
    }
    logs[i] = e + lu_sum;
    signs[i] = sign;
  });
  return summarize_log(logs, signs, seed, opt.fingerprint);
}

MCEstimate hamiltonian_mean(bool cross, double t, const Point& x, const NoiseSpec& noise, const ProcessSpec& process,
                            const Regularization& reg, long n_samples, std::uint64_t seed, const SolverOptions& opt) {
  require(n_samples >= 2, ErrorKind::InvalidParameter, "need at least two samples");
  require(x.size() == process.dim, ErrorKind::InvalidParameter, "start point dimension does not match the process");
  const HamiltonianContext ctx(noise, reg, t, opt.n_steps);
  std::vector<double> v(n_samples);
  parallel_for(static_cast<size_t>(n_samples), opt.workers, [&](size_t i) {
    Stream st(seed, {kTagHamiltonian, static_cast<std::uint64_t>(i)});
    const PathGrid a = sample_path(process, x, t, opt.n_steps, st);
    if (!cross) {
      v[i] = ctx.self(a);
      return;
    }
    const PathGrid b = sample_path(process, x, t, opt.n_steps, st);
    v[i] = ctx.cross(a, b);
  });
  return summarize(v, seed, opt.fingerprint);
}

SolutionSummary simulate_solution(double t, const Point& x, Calculus mode, int K, const NoiseSpec& noise,
                                  const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg,
                                  long n_samples, std::uint64_t seed, const SolverOptions& opt) {
  require(n_samples >= 2, ErrorKind::InvalidParameter, "need at least two samples");
  if (opt.check_dalang) require_dalang(noise, process, Calculus::Stratonovich);
  const HamiltonianContext ctx(noise, reg, t, opt.n_steps);
  std::vector<double> v(n_samples);
  std::vector<int> pos(n_samples);
  parallel_for(static_cast<size_t>(n_samples), opt.workers, [&](size_t i) {
    Stream st(seed, {kTagSolution, static_cast<std::uint64_t>(i)});
    const SolutionSample s = sample_solution(ctx, x, mode, K, process, u0, st, opt.jitter);
    v[i] = s.value;
    pos[i] = s.value > 0.0;
  });
  SolutionSummary out;
  out.estimate = summarize(v, seed, opt.fingerprint);
  long np = 0;
  for (int b : pos) np += b;
  out.positive_fraction = static_cast<double>(np) / n_samples;
  return out;
}

MCEstimate moment_fk(int p, double t, const Point& x, Calculus mode, const NoiseSpec& noise,
                     const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg, long n_samples,
                     std::uint64_t seed, const SolverOptions& opt) {
  require(p >= 1, ErrorKind::InvalidParameter, "moment order must be positive");
  return product_moment(t, std::vector<Point>(p, x), mode, noise, process, u0, reg, n_samples, seed, opt);
}

MCEstimate mixed_moment(double t, const Point& x1, const Point& x2, Calculus mode, const NoiseSpec& noise,
                        const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg,
                        long n_samples, std::uint64_t seed, const SolverOptions& opt) {
  return product_moment(t, {x1, x2}, mode, noise, process, u0, reg, n_samples, seed, opt);
}

ExpMomentReport exp_moment(double beta, double t, const Point& x, const NoiseSpec& noise, const ProcessSpec& process,
                           const Regularization& reg, long n_samples, std::uint64_t seed, const SolverOptions& opt) {
  require(n_samples >= 2, ErrorKind::InvalidParameter, "need at least two samples");
  require(std::isfinite(beta), ErrorKind::InvalidParameter, "beta must be finite");
  if (opt.check_dalang && beta > 0.0) require_dalang(noise, process, Calculus::Stratonovich);
  const long n2 = 2 * n_samples;
  std::vector<double> logs(n2, 0.0);
  if (beta != 0.0) {
    const HamiltonianContext ctx(noise, reg, t, opt.n_steps);
    parallel_for(static_cast<size_t>(n2), opt.workers, [&](size_t i) {
      Stream st(seed, {kTagExp, static_cast<std::uint64_t>(i)});
      const PathGrid path = sample_path(process, x, t, opt.n_steps, st);
      logs[i] = beta * ctx.self_mid(HamiltonianContext::midpoints(path));
    });
  }
  auto part = [&](long lo, long hi) {
    std::vector<double> l(logs.begin() + lo, logs.begin() + hi);
    return summarize_log(l, std::vector<int>(hi - lo, 1), seed, opt.fingerprint);
  };
  ExpMomentReport r;
  r.estimate = part(0, n_samples);
  r.first_half = part(0, n_samples / 2);
  r.second_half = part(n_samples / 2, n_samples);
  r.doubled = part(0, n2);
  const double se = std::hypot(r.first_half.std_error, r.second_half.std_error);
  const double gap = std::abs(r.first_half.mean - r.second_half.mean);
  r.half_gap_se = se > 0 ? gap / se : (gap > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  r.unstable = r.half_gap_se > 5.0;
  return r;
}

// ---- deterministic pieces ----

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double one_dim_mean(double t, double x, const ProcessSpec& process, const InitialCondition& u0) {
  Point px(1), py(1);
  px(0) = x;
  auto f = [&](double y) {
    py(0) = y;
    return transition_density(process, t, px, py) * u0(py);
  };
  QuadOptions q;
  q.abs_tol = 1e-13;
  q.rel_tol = 1e-10;
  double scale;
  if (auto st = std::get_if<IsotropicStable>(&process.kind)) scale = std::pow(t, 1.0 / st->alpha);
  else scale = std::sqrt(t);
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  if (u0.kind() == InitialCondition::Kind::Indicator) {
    lo = u0.lo()(0);
    hi = u0.hi()(0);
  }
  std::vector<double> b{x};
  for (double c : {-10.0, -3.0, -1.0, 1.0, 3.0, 10.0}) b.push_back(x + c * scale);
  if (std::isfinite(lo)) b.push_back(lo);
  if (std::isfinite(hi)) b.push_back(hi);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  std::vector<double> in;
  for (double v : b)
    if (v >= lo && v <= hi) in.push_back(v);
  // Finite box ends are among the breakpoints, so only infinite ends need tails.
  double total = 0.0;
  if (in.size() >= 2) total += integrate(f, in, q).value;
  if (!std::isfinite(lo)) total += integrate_to_infinity([&](double y) { return f(-y); }, -in.front(), scale, q).value;
  if (!std::isfinite(hi)) total += integrate_to_infinity(f, in.back(), scale, q).value;
  return total;
}

}  // namespace

double skorohod_mean(double t, const Point& x, const ProcessSpec& process, const InitialCondition& u0) {
  require(t > 0.0, ErrorKind::InvalidParameter, "time must be positive");
  require(x.size() == process.dim, ErrorKind::InvalidParameter, "start point dimension does not match the process");
  // Surfaces DensityUnavailable before any shortcut.
  transition_density(process, t, x, x);
  if (u0.kind() == InitialCondition::Kind::Constant) return u0.constant_value();
  if (process.dim == 1) return one_dim_mean(t, x(0), process, u0);
  if (u0.kind() == InitialCondition::Kind::Indicator && std::holds_alternative<Brownian>(process.kind)) {
    double v = 1.0;
    const double s = std::sqrt(t);
    for (int i = 0; i < process.dim; ++i)
      v *= normal_cdf((u0.hi()(i) - x(i)) / s) - normal_cdf((u0.lo()(i) - x(i)) / s);
    return v;
  }
  throw Error(ErrorKind::UnsupportedCombination, "semigroup quadrature in d > 1 covers Brownian box indicators only");
}

DeterministicReport fk_deterministic(const std::function<double(double, const Point&)>& f, double bound, double t,
                                     const Point& x, const ProcessSpec& process, const InitialCondition& u0,
                                     long n_samples, std::uint64_t seed, const SolverOptions& opt) {
  require(bound >= 0.0 && std::isfinite(bound), ErrorKind::InvalidParameter, "potential bound must be finite");
  require(n_samples >= 1 && t > 0.0, ErrorKind::InvalidParameter, "need t > 0 and at least one sample");
  const int n = opt.n_steps;
  std::vector<double> logs(n_samples);
  std::vector<int> signs(n_samples);
  std::vector<long> clips(n_samples, 0);
  parallel_for(static_cast<size_t>(n_samples), opt.workers, [&](size_t i) {
    Stream st(seed, {kTagDeterministic, static_cast<std::uint64_t>(i)});
    const PathGrid path = sample_path(process, x, t, n, st);
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
      double v = f(t - path.times(k), path.positions.col(k));
      if (std::abs(v) > bound) {
        v = std::clamp(v, -bound, bound);
        ++clips[i];
      }
      acc += (k == 0 || k == n ? 0.5 : 1.0) * v;
    }
    double lu;
    log_abs(u0(path.end()), lu, signs[i]);
    logs[i] = acc * path.dt() + lu;
  });
  DeterministicReport r;
  r.estimate = summarize_log(logs, signs, seed, opt.fingerprint);
  long total = 0;
  for (long c : clips) total += c;
  r.clipped = total > 0;
  r.clipped_fraction = static_cast<double>(total) / (static_cast<double>(n_samples) * (n + 1));
  return r;
}

}  // namespace fkspde
