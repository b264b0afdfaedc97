#include "fkspde/process.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "fkspde/errors.hpp"
#include "fkspde/special.hpp"

namespace fkspde {

double CharacteristicExponent::operator()(double r) const { return scale * std::pow(std::abs(r), power); }

double CharacteristicExponent::radius_at(double v) const { return std::pow(v / scale, 1.0 / power); }

ProcessSpec ProcessSpec::brownian(int d) {
  require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
  ProcessSpec p;
  p.kind = Brownian{};
  p.dim = d;
  p.h.psi = {0.5, 2.0};
  return p;
}

ProcessSpec ProcessSpec::stable(double alpha, int d) {
  require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
  require(alpha > 0.0 && alpha <= 2.0, ErrorKind::InvalidParameter, "stable index must lie in (0, 2]");
  ProcessSpec p;
  p.kind = IsotropicStable{alpha};
  p.dim = d;
  p.h.psi = {1.0, alpha};
  return p;
}

ProcessSpec ProcessSpec::diffusion(DiffusionSDE sde, int d, AssumptionH h) {
  require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
  require(sde.ellipticity > 0.0, ErrorKind::InvalidParameter, "ellipticity constant must be positive");
  require(static_cast<bool>(sde.drift) && static_cast<bool>(sde.dispersion), ErrorKind::InvalidParameter,
          "diffusion needs drift and dispersion");
  ProcessSpec p;
  p.kind = std::move(sde);
  p.dim = d;
  p.h = h;
  return p;
}

std::string ProcessSpec::name() const {
  if (std::holds_alternative<Brownian>(kind)) return "brownian";
  if (auto s = std::get_if<IsotropicStable>(&kind)) return "stable(" + std::to_string(s->alpha) + ")";
  return "diffusion";
}

double stable_variate(double alpha, Stream& stream) {
  if (alpha == 2.0) return std::sqrt(2.0) * stream.normal();
  const double v = M_PI * (stream.uniform() - 0.5);
  const double w = stream.exponential();
  if (alpha == 1.0) return std::tan(v);
  const double a = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
  const double b = std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
  return a * b;
}

namespace {

// Positive a-stable variate with Laplace transform exp(-lambda^a), 0 < a < 1.
double positive_stable(double a, Stream& stream) {
  const double u = stream.uniform();
  const double e = stream.exponential();
  const double k = std::pow(std::sin(a * M_PI * u), a / (1.0 - a)) * std::sin((1.0 - a) * M_PI * u) /
                   std::pow(std::sin(M_PI * u), 1.0 / (1.0 - a));
  return std::pow(k / e, (1.0 - a) / a);
}

void check_ellipticity(const Eigen::MatrixXd& sigma, double c) {
  const Eigen::MatrixXd a = sigma * sigma.transpose();
  double lo;
  if (a.rows() == 1) {
    lo = a(0, 0);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    lo = es.eigenvalues().minCoeff();
  }
  if (lo < c * (1.0 - 1e-12))
    throw Error(ErrorKind::EllipticityViolation,
                "smallest eigenvalue of sigma sigma^T is " + std::to_string(lo) +
                    " below " + std::to_string(c));
}

}  // namespace

void stable_vector(double alpha, Stream& stream, Eigen::Ref<Eigen::VectorXd> out) {
  const int d = static_cast<int>(out.size());
  if (d == 1) {
    out(0) = stable_variate(alpha, stream);
    return;
  }
  double scale = std::sqrt(2.0);
  if (alpha < 2.0) scale *= std::sqrt(positive_stable(0.5 * alpha, stream));
  for (int i = 0; i < d; ++i) out(i) = scale * stream.normal();
}

PathGrid sample_path(const ProcessSpec& spec, const Point& x0, double t_end, int n_steps, Stream& stream) {
  require(t_end > 0.0, ErrorKind::InvalidParameter, "t_end must be positive");
  require(n_steps >= 1, ErrorKind::InvalidParameter, "n_steps must be at least 1");
  require(x0.size() == spec.dim, ErrorKind::InvalidParameter, "start point dimension mismatch");
  const int d = spec.dim;
  PathGrid p;
  p.x0 = x0;
  p.t_end = t_end;
  p.n_steps = n_steps;
  p.times = Eigen::VectorXd::LinSpaced(n_steps + 1, 0.0, t_end);
  p.times(n_steps) = t_end;
  p.positions.resize(d, n_steps + 1);
  p.positions.col(0) = x0;
  const double dt = t_end / n_steps;
  Eigen::VectorXd inc(d);
  if (std::holds_alternative<Brownian>(spec.kind)) {
    const double s = std::sqrt(dt);
    for (int k = 0; k < n_steps; ++k) {
      for (int i = 0; i < d; ++i) inc(i) = s * stream.normal();
      p.positions.col(k + 1) = p.positions.col(k) + inc;
    }
  } else if (auto st = std::get_if<IsotropicStable>(&spec.kind)) {
    const double s = std::pow(dt, 1.0 / st->alpha);
    for (int k = 0; k < n_steps; ++k) {
      stable_vector(st->alpha, stream, inc);
      p.positions.col(k + 1) = p.positions.col(k) + s * inc;
    }
  } else {
    const auto& sde = std::get<DiffusionSDE>(spec.kind);
    const double s = std::sqrt(dt);
    for (int k = 0; k < n_steps; ++k) {
      const Point x = p.positions.col(k);
      const Eigen::MatrixXd sig = sde.dispersion(x);
      check_ellipticity(sig, sde.ellipticity);
      for (int i = 0; i < d; ++i) inc(i) = s * stream.normal();
      p.positions.col(k + 1) = x + sde.drift(x) * dt + sig * inc;
    }
  }
  return p;
}

Point sample_endpoint(const ProcessSpec& spec, const Point& x0, double t_end, Stream& stream) {
  const int d = spec.dim;
  Eigen::VectorXd inc(d);
  if (std::holds_alternative<Brownian>(spec.kind)) {
    const double s = std::sqrt(t_end);
    for (int i = 0; i < d; ++i) inc(i) = s * stream.normal();
    return x0 + inc;
  }
  if (auto st = std::get_if<IsotropicStable>(&spec.kind)) {
    stable_vector(st->alpha, stream, inc);
    return x0 + std::pow(t_end, 1.0 / st->alpha) * inc;
  }
  return sample_path(spec, x0, t_end, 128, stream).end();
}

double transition_density(const ProcessSpec& spec, double t, const Point& x, const Point& y) {
  require(t > 0.0, ErrorKind::InvalidParameter, "transition density needs t > 0");
  const int d = spec.dim;
  const double r2 = (y - x).squaredNorm();
  if (std::holds_alternative<Brownian>(spec.kind))
    return std::pow(2.0 * M_PI * t, -0.5 * d) * std::exp(-r2 / (2.0 * t));
  if (auto st = std::get_if<IsotropicStable>(&spec.kind)) {
    if (st->alpha == 2.0) return std::pow(4.0 * M_PI * t, -0.5 * d) * std::exp(-r2 / (4.0 * t));
    if (st->alpha == 1.0) {
      const double c = std::tgamma(0.5 * (d + 1)) / std::pow(M_PI, 0.5 * (d + 1));
      return c * t / std::pow(t * t + r2, 0.5 * (d + 1));
    }
    if (d == 1) {
      const double s = std::pow(t, -1.0 / st->alpha);
      return s * stable_density_1d(st->alpha, std::sqrt(r2) * s);
    }
    throw Error(ErrorKind::DensityUnavailable, "no density for stable index " + std::to_string(st->alpha) + " in d > 1");
  }
  const auto& sde = std::get<DiffusionSDE>(spec.kind);
  if (!sde.density) throw Error(ErrorKind::DensityUnavailable, "diffusion has no density hook");
  return sde.density(t, x, y);
}

double characteristic_function(const ProcessSpec& spec, double t, double r) {
  require(spec.is_levy(), ErrorKind::UnsupportedCombination, "closed-form characteristic function needs a Levy process");
  return std::exp(-t * spec.psi(r));
}

DominationReport heat_domination_check(const ProcessSpec& spec, const std::vector<double>& t_list,
                                       const std::vector<double>& xi_list, const DominationOptions& opt) {
  DominationReport rep;
  const double c1 = spec.h.c1, c2 = spec.h.c2;
  auto record = [&](double t, double xi, double v, double bound, double se, double tol) {
    if (v - bound > tol) {
      rep.violations.push_back({t, xi, v, bound, se});
      const double rel = (v - bound) / std::max(bound, 1e-300);
      rep.max_relative_violation = std::max(rep.max_relative_violation, rel);
    }
  };
  if (spec.is_levy()) {
    for (double t : t_list)
      for (double xi : xi_list) {
        const double v = characteristic_function(spec, t, xi);
        record(t, xi, v, c1 * std::exp(-c2 * t * spec.psi(xi)), 0.0, opt.tolerance);
      }
    return rep;
  }
  rep.empirical = true;
  const Point x0 = Point::Zero(spec.dim);
  for (size_t ti = 0; ti < t_list.size(); ++ti) {
    const double t = t_list[ti];
    Eigen::VectorXd inc(opt.n_samples);
    for (int s = 0; s < opt.n_samples; ++s) {
      Stream st(opt.seed, {ti, static_cast<std::uint64_t>(s)});
      inc(s) = sample_path(spec, x0, t, opt.n_steps, st).end()(0);
    }
    for (double xi : xi_list) {
      const Eigen::ArrayXd c = (xi * inc.array()).cos();
      const double m = c.mean();
      const double sd = std::sqrt((c - m).square().sum() / (opt.n_samples - 1));
      const double se = sd / std::sqrt(static_cast<double>(opt.n_samples));
      record(t, xi, m, c1 * std::exp(-c2 * t * spec.psi(xi)), se, std::max(3.0 * se, opt.tolerance));
    }
  }
  return rep;
}

void write_paths_csv(std::ostream& os, const std::vector<PathGrid>& paths) {
  if (paths.empty()) return;
  const int d = paths.front().dim();
  os << "path_id,step,t";
  for (int i = 1; i <= d; ++i) os << ",x_" << i;
  os << "\n" << std::setprecision(17);
  for (size_t id = 0; id < paths.size(); ++id) {
    const auto& p = paths[id];
    for (int k = 0; k <= p.n_steps; ++k) {
      os << id << "," << k << "," << p.times(k);
      for (int i = 0; i < d; ++i) os << "," << p.positions(i, k);
      os << "\n";
    }
  }
}

}  // namespace fkspde
