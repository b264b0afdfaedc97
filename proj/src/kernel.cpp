#include "fkspde/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fkspde/errors.hpp"
#include "fkspde/quadrature.hpp"
#include "fkspde/special.hpp"

namespace fkspde {

// ---- Profile ----

Profile Profile::sampled(std::vector<double> r, std::vector<double> v) {
  require(r.size() == v.size() && r.size() >= 2, ErrorKind::InvalidParameter, "table needs at least two samples");
  for (size_t i = 1; i < r.size(); ++i)
    require(r[i] > r[i - 1], ErrorKind::InvalidParameter, "table radii must increase strictly");
  for (double x : v) require(std::isfinite(x), ErrorKind::InvalidParameter, "table values must be finite");
  Profile p;
  p.kind_ = Kind::Sampled;
  p.r_ = std::move(r);
  p.v_ = std::move(v);
  const size_t n = p.r_.size();
  const double a = p.v_[n - 2], b = p.v_[n - 1];
  p.tail_power_ = (a > 0 && b > 0 && p.r_[n - 2] > 0) ? std::log(b / a) / std::log(p.r_[n - 1] / p.r_[n - 2]) : 0.0;
  return p;
}

Profile Profile::log_grid(double scale, double r_max, std::vector<double> v, std::function<double(double)> beyond) {
  require(v.size() >= 2 && scale > 0 && r_max > 0, ErrorKind::InvalidParameter, "bad log-grid table");
  Profile p;
  p.kind_ = Kind::LogGrid;
  p.scale_ = scale;
  p.r_max_ = r_max;
  p.r2_max_ = r_max * r_max;
  p.v_ = std::move(v);
  p.u_step_inv_ = (p.v_.size() - 1) / std::log1p(p.r2_max_ / scale);
  p.f_ = std::move(beyond);
  return p;
}

Profile Profile::closed(std::function<double(double)> f) {
  Profile p;
  p.kind_ = Kind::Closed;
  p.f_ = std::move(f);
  return p;
}

double Profile::operator()(double r) const {
  r = std::abs(r);
  switch (kind_) {
    case Kind::Empty:
      throw Error(ErrorKind::InvalidParameter, "empty profile");
    case Kind::Closed:
      return f_(r);
    case Kind::LogGrid:
      return from_sq(r * r);
    case Kind::Sampled: {
      if (r <= r_.front()) return v_.front();
      if (r >= r_.back()) {
        if (tail_power_ == 0.0) return v_.back();
        return v_.back() * std::pow(r / r_.back(), tail_power_);
      }
      const auto it = std::upper_bound(r_.begin(), r_.end(), r);
      const size_t i = static_cast<size_t>(it - r_.begin()) - 1;
      const double w = (r - r_[i]) / (r_[i + 1] - r_[i]);
      return v_[i] + w * (v_[i + 1] - v_[i]);
    }
  }
  return 0.0;
}

double Profile::from_sq(double r2) const {
  if (kind_ != Kind::LogGrid) return (*this)(std::sqrt(r2));
  if (r2 > r2_max_) return f_(std::sqrt(r2));
  const double u = std::log1p(r2 / scale_) * u_step_inv_;
  const int n = static_cast<int>(v_.size()) - 1;
  int i = static_cast<int>(u);
  if (i >= n) i = n - 1;
  const double w = u - i;
  return v_[i] + w * (v_[i + 1] - v_[i]);
}

// ---- kernel construction ----

CovarianceKernel CovarianceKernel::dirac(int d) {
  require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
  return {Dirac{}, d};
}

CovarianceKernel CovarianceKernel::riesz(double alpha, int d) {
  require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
  require(alpha > 0.0 && alpha < d, ErrorKind::InvalidParameter, "Riesz index must satisfy 0 < alpha < d");
  return {Riesz{alpha}, d};
}

CovarianceKernel CovarianceKernel::fractional(std::vector<double> hurst) {
  require(!hurst.empty(), ErrorKind::InvalidParameter, "fractional kernel needs at least one Hurst index");
  for (double h : hurst) require(h > 0.5 && h < 1.0, ErrorKind::InvalidParameter, "Hurst indices must lie in (1/2, 1)");
  const int d = static_cast<int>(hurst.size());
  return {FractionalProduct{std::move(hurst)}, d};
}

CovarianceKernel CovarianceKernel::cauchy(int d) {
  require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
  return {Cauchy{}, d};
}

CovarianceKernel CovarianceKernel::poisson(int d) {
  require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
  return {Poisson{}, d};
}

CovarianceKernel CovarianceKernel::ornstein_uhlenbeck(double alpha, int d) {
  require(d >= 1, ErrorKind::InvalidParameter, "dimension must be positive");
  require(alpha > 0.0 && alpha <= 2.0, ErrorKind::InvalidParameter, "OU index must lie in (0, 2]");
  return {OrnsteinUhlenbeck{alpha}, d};
}

CovarianceKernel CovarianceKernel::tabulated(std::shared_ptr<const TabulatedData> data, int d) {
  require(d >= 1 && data != nullptr, ErrorKind::InvalidParameter, "bad tabulated kernel");
  const size_t need = data->per_axis ? static_cast<size_t>(d) : 1u;
  require(data->gamma.size() == need && data->spectral.size() == need, ErrorKind::InvalidParameter,
          "tabulated kernel must supply gamma and spectral samples for each axis of its layout");
  return {Tabulated{std::move(data)}, d};
}

bool CovarianceKernel::singular_at_zero() const {
  if (std::holds_alternative<Dirac>(kind) || std::holds_alternative<Riesz>(kind) ||
      std::holds_alternative<FractionalProduct>(kind))
    return true;
  if (auto t = std::get_if<Tabulated>(&kind)) return t->data->singular_at_zero;
  return false;
}

bool CovarianceKernel::is_radial() const {
  if (dim == 1) return true;
  if (std::holds_alternative<Cauchy>(kind) || std::holds_alternative<FractionalProduct>(kind)) return false;
  if (auto t = std::get_if<Tabulated>(&kind)) return !t->data->per_axis;
  return true;
}

bool CovarianceKernel::is_product() const {
  if (dim == 1) return true;
  if (std::holds_alternative<Cauchy>(kind) || std::holds_alternative<FractionalProduct>(kind)) return true;
  if (auto t = std::get_if<Tabulated>(&kind)) return t->data->per_axis || t->data->gaussian_variance > 0;
  return false;
}

std::string CovarianceKernel::name() const {
  std::ostringstream os;
  os.precision(15);
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Dirac>) os << "dirac";
        else if constexpr (std::is_same_v<T, Riesz>) os << "riesz(" << k.alpha << ")";
        else if constexpr (std::is_same_v<T, FractionalProduct>) {
          os << "fractional(";
          for (size_t i = 0; i < k.hurst.size(); ++i) os << (i ? "," : "") << k.hurst[i];
          os << ")";
        } else if constexpr (std::is_same_v<T, Cauchy>) os << "cauchy";
        else if constexpr (std::is_same_v<T, Poisson>) os << "poisson";
        else if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>) os << "ou(" << k.alpha << ")";
        else os << "tabulated(" << k.data->origin << ")";
      },
      kind);
  os << "/d" << dim;
  return os.str();
}

// ---- pointwise evaluation ----

namespace {

void check_dim(const CovarianceKernel& k, Eigen::Index n) {
  require(n == k.dim, ErrorKind::InvalidParameter, "point dimension does not match kernel dimension");
}

double gaussian_density(double r2, double var, int d) {
  return std::pow(2.0 * M_PI * var, -0.5 * d) * std::exp(-0.5 * r2 / var);
}

double ou_transform(double alpha, int d, double r) {
  if (alpha == 1.0) {
    return std::pow(2.0, d) * std::pow(M_PI, 0.5 * (d - 1)) * std::tgamma(0.5 * (d + 1)) *
           std::pow(1.0 + r * r, -0.5 * (d + 1));
  }
  if (alpha == 2.0) return std::pow(M_PI, 0.5 * d) * std::exp(-r * r / 4.0);
  if (d == 1) return 2.0 * M_PI * stable_density_1d(alpha, r);
  throw Error(ErrorKind::UnsupportedCombination,
              "OU spectral density for alpha not in {1, 2} is only implemented in d = 1");
}

}  // namespace

double gamma_eval(const CovarianceKernel& k, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(k, x.size());
  const int d = k.dim;
  return std::visit(
      [&](const auto& kk) -> double {
        using T = std::decay_t<decltype(kk)>;
        if constexpr (std::is_same_v<T, Dirac>) {
          throw Error(ErrorKind::DiracPointwiseEval, "the Dirac kernel has no pointwise values");
        } else if constexpr (std::is_same_v<T, Riesz>) {
          const double r = x.norm();
          if (r == 0.0) throw Error(ErrorKind::SingularityHit, "Riesz kernel evaluated at the origin");
          return std::pow(r, -kk.alpha);
        } else if constexpr (std::is_same_v<T, FractionalProduct>) {
          double v = 1.0;
          for (int i = 0; i < d; ++i) {
            if (x(i) == 0.0) throw Error(ErrorKind::SingularityHit, "fractional kernel evaluated on a coordinate axis");
            v *= std::pow(std::abs(x(i)), 2.0 * kk.hurst[i] - 2.0);
          }
          return v;
        } else if constexpr (std::is_same_v<T, Cauchy>) {
          double v = 1.0;
          for (int i = 0; i < d; ++i) v /= 1.0 + x(i) * x(i);
          return v;
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return std::pow(1.0 + x.squaredNorm(), -0.5 * (d + 1));
        } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>) {
          return std::exp(-std::pow(x.norm(), kk.alpha));
        } else {
          const auto& t = *kk.data;
          if (t.singular_at_zero && x.squaredNorm() == 0.0)
            throw Error(ErrorKind::SingularityHit, "tabulated kernel is singular at the origin");
          if (t.gaussian_variance > 0) return gaussian_density(x.squaredNorm(), t.gaussian_variance, d);
          if (!t.per_axis) return t.gamma[0].from_sq(x.squaredNorm());
          double v = 1.0;
          for (int i = 0; i < d; ++i) v *= t.gamma[i](std::abs(x(i)));
          return v;
        }
      },
      k.kind);
}

double gamma_eval(const CovarianceKernel& k, double x) {
  Eigen::VectorXd v(1);
  v(0) = x;
  return gamma_eval(k, v);
}

double spectral_density(const CovarianceKernel& k, const Eigen::Ref<const Eigen::VectorXd>& xi) {
  check_dim(k, xi.size());
  const int d = k.dim;
  return std::visit(
      [&](const auto& kk) -> double {
        using T = std::decay_t<decltype(kk)>;
        if constexpr (std::is_same_v<T, Dirac>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, Riesz>) {
          const double r = xi.norm();
          if (r == 0.0) throw Error(ErrorKind::SingularityHit, "Riesz spectral density is singular at 0");
          return std::pow(r, kk.alpha - d);
        } else if constexpr (std::is_same_v<T, FractionalProduct>) {
          double v = 1.0;
          for (int i = 0; i < d; ++i) {
            if (xi(i) == 0.0) throw Error(ErrorKind::SingularityHit, "fractional spectral density is singular on the axes");
            v *= std::pow(std::abs(xi(i)), 1.0 - 2.0 * kk.hurst[i]);
          }
          return v;
        } else if constexpr (std::is_same_v<T, Cauchy>) {
          return std::exp(-xi.template lpNorm<1>());
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return std::exp(-xi.norm());
        } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>) {
          return ou_transform(kk.alpha, d, xi.norm());
        } else {
          const auto& t = *kk.data;
          if (!t.per_axis) return t.spectral[0](xi.norm());
          double v = 1.0;
          for (int i = 0; i < d; ++i) v *= t.spectral[i](std::abs(xi(i)));
          return v;
        }
      },
      k.kind);
}

double spectral_density(const CovarianceKernel& k, double xi) {
  Eigen::VectorXd v(1);
  v(0) = xi;
  return spectral_density(k, v);
}

double fourier_constant(const CovarianceKernel& k) {
  const int d = k.dim;
  return std::visit(
      [&](const auto& kk) -> double {
        using T = std::decay_t<decltype(kk)>;
        if constexpr (std::is_same_v<T, Riesz>) {
          const double a = kk.alpha;
          return std::pow(2.0, d - a) * std::pow(M_PI, 0.5 * d) * std::tgamma(0.5 * (d - a)) / std::tgamma(0.5 * a);
        } else if constexpr (std::is_same_v<T, FractionalProduct>) {
          double c = 1.0;
          for (double h : kk.hurst) {
            const double a = 2.0 - 2.0 * h;
            c *= 2.0 * std::tgamma(1.0 - a) * std::sin(0.5 * M_PI * a);
          }
          return c;
        } else if constexpr (std::is_same_v<T, Cauchy>) {
          return std::pow(M_PI, d);
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return std::pow(M_PI, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          return kk.data->fourier_constant;
        } else {
          return 1.0;
        }
      },
      k.kind);
}

double fourier_transform(const CovarianceKernel& k, const Eigen::Ref<const Eigen::VectorXd>& xi) {
  return fourier_constant(k) * spectral_density(k, xi);
}

double unit_sphere_area(int d) { return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d); }

namespace {

// Integral over S^{d-1} of a function even in each coordinate.
template <class F>
double orthant_sphere_integral(int d, F&& f) {
  QuadOptions opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-9;
  Eigen::VectorXd w(d);
  if (d == 2) {
    auto g = [&](double th) {
      w << std::cos(th), std::sin(th);
      return f(w);
    };
    return 4.0 * integrate(g, 0.0, 0.5 * M_PI, opt).value;
  }
  if (d == 3) {
    auto outer = [&](double ph) {
      auto inner = [&](double th) {
        w << std::sin(ph) * std::cos(th), std::sin(ph) * std::sin(th), std::cos(ph);
        return f(w);
      };
      return std::sin(ph) * integrate(inner, 0.0, 0.5 * M_PI, opt).value;
    };
    return 8.0 * integrate(outer, 0.0, 0.5 * M_PI, opt).value;
  }
  throw Error(ErrorKind::UnsupportedCombination, "non-radial spectral shells are implemented for d <= 3");
}

}  // namespace

double spectral_shell(const CovarianceKernel& k, double r, SpectralScale scale) {
  const int d = k.dim;
  double v;
  if (k.is_radial()) {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(d);
    xi(0) = r;
    v = unit_sphere_area(d) * std::pow(r, d - 1) * spectral_density(k, xi);
  } else if (auto fp = std::get_if<FractionalProduct>(&k.kind)) {
    double sa = 0.0, num = 1.0;
    for (double h : fp->hurst) {
      const double a = 1.0 - 2.0 * h;
      sa += a;
      num *= std::tgamma(0.5 * (a + 1.0));
    }
    v = 2.0 * num / std::tgamma(0.5 * (sa + d)) * std::pow(r, d - 1 + sa);
  } else {
    v = std::pow(r, d - 1) * orthant_sphere_integral(d, [&](const Eigen::VectorXd& w) {
          return spectral_density(k, Eigen::VectorXd(r * w));
        });
  }
  if (scale == SpectralScale::Measure) v *= fourier_constant(k) / std::pow(2.0 * M_PI, d);
  return v;
}

double spectral_shell_origin_power(const CovarianceKernel& k) {
  const int d = k.dim;
  if (auto rz = std::get_if<Riesz>(&k.kind)) return rz->alpha - 1.0;
  if (auto fp = std::get_if<FractionalProduct>(&k.kind)) {
    double s = d - 1.0;
    for (double h : fp->hurst) s += 1.0 - 2.0 * h;
    return s;
  }
  if (auto t = std::get_if<Tabulated>(&k.kind)) return t->data->spectral_origin_power;
  return d - 1.0;
}

double spectral_shell_tail_power(const CovarianceKernel& k) {
  const int d = k.dim;
  const double ninf = -std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto& kk) -> double {
        using T = std::decay_t<decltype(kk)>;
        if constexpr (std::is_same_v<T, Dirac>) return d - 1.0;
        else if constexpr (std::is_same_v<T, Riesz>) return kk.alpha - 1.0;
        else if constexpr (std::is_same_v<T, FractionalProduct>) return spectral_shell_origin_power(k);
        else if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>) return kk.alpha < 2.0 ? -1.0 - kk.alpha : ninf;
        else if constexpr (std::is_same_v<T, Tabulated>)
          return kk.data->spectral_tail_known ? kk.data->spectral_tail_power : std::numeric_limits<double>::quiet_NaN();
        else return ninf;
      },
      k.kind);
}

}  // namespace fkspde
