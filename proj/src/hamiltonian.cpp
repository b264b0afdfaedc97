#include "fkspde/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fkspde/errors.hpp"
#include "fkspde/parallel.hpp"
#include "fkspde/quadrature.hpp"
#include "fkspde/special.hpp"

namespace fkspde {

std::string Regularization::describe() const {
  std::ostringstream os;
  os.precision(10);
  switch (mode) {
    case Mode::None: os << "none"; break;
    case Mode::SpatialMollify:
      if (parameter > 0) os << "mollify(" << parameter << ")";
      else os << "mollify(dt)";
      break;
    case Mode::SpectralCutoff: os << "cutoff(" << parameter << ")"; break;
    case Mode::Cap: os << "cap(" << parameter << ")"; break;
  }
  if (diagonal == Diagonal::SkipDiagonal) os << "+skipdiag";
  return os.str();
}

double singular_time_weight(double a, double b, double beta0) {
  require(a >= 0.0 && b > a, ErrorKind::InvalidParameter, "need 0 <= a < b");
  require(beta0 >= 0.0 && beta0 < 1.0, ErrorKind::InvalidParameter, "beta0 must lie in [0, 1)");
  if (beta0 == 0.0) return b - a;
  const double e = 1.0 - beta0;
  return (std::pow(b, e) - std::pow(a, e)) / e;
}

double unit_cell_weight(int k, double beta0) {
  require(k >= 0, ErrorKind::InvalidParameter, "cell offset must be nonnegative");
  const double b = beta0;
  if (k >= 64) {
    const double x = static_cast<double>(k);
    const double x2 = 1.0 / (x * x);
    const double c2 = b * (b + 1.0) / 12.0;
    const double c4 = b * (b + 1.0) * (b + 2.0) * (b + 3.0) / 360.0;
    return std::pow(x, -b) * (1.0 + x2 * (c2 + x2 * c4));
  }
  const double norm = (1.0 - b) * (2.0 - b);
  auto F = [&](double x) { return x == 0.0 ? 0.0 : std::pow(x, 2.0 - b) / norm; };
  if (k == 0) return 2.0 * F(1.0);
  return F(k + 1.0) - 2.0 * F(k) + F(k - 1.0);
}

// ---- regularized kernels ----

namespace {

constexpr int kTableStart = 256;
constexpr int kTableMax = 1 << 16;
constexpr double kTableTol = 5e-5;

// Values on nodes uniform in u = log(1 + r^2 / scale), refined by doubling until the
// linear interpolant matches the exact function at every midpoint.
Profile build_table(const std::function<double(double)>& exact, double scale, double r_max,
                    std::function<double(double)> beyond) {
  const double u_max = std::log1p(r_max * r_max / scale);
  auto r_of = [&](double u) { return std::sqrt(scale * std::expm1(u)); };
  int n = kTableStart;
  std::vector<double> v(n + 1);
  for (int i = 0; i <= n; ++i) v[i] = exact(r_of(u_max * i / n));
  for (;;) {
    for (double x : v)
      if (!std::isfinite(x)) throw Error(ErrorKind::TableBuildFailure, "kernel table has non-finite values");
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    std::vector<double> mid(n);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      mid[i] = exact(r_of(u_max * (i + 0.5) / n));
      const double lin = 0.5 * (v[i] + v[i + 1]);
      const double den = std::max(std::abs(mid[i]), 1e-6 * vmax);
      worst = std::max(worst, den > 0 ? std::abs(lin - mid[i]) / den : 0.0);
    }
    if (!std::isfinite(worst)) throw Error(ErrorKind::TableBuildFailure, "kernel table has non-finite values");
    if (worst <= kTableTol) return Profile::log_grid(scale, r_max, std::move(v), std::move(beyond));
    if (2 * n > kTableMax) throw Error(ErrorKind::TableBuildFailure, "kernel table did not reach its accuracy target");
    std::vector<double> w(2 * n + 1);
    for (int i = 0; i < n; ++i) {
      w[2 * i] = v[i];
      w[2 * i + 1] = mid[i];
    }
    w[2 * n] = v[n];
    v.swap(w);
    n *= 2;
  }
}

// E g(|r e_1 + sigma Z|) with Z standard normal in R^d; g(rho) ~ rho^{-sing} at 0.
double radial_convolution(int d, const std::function<double(double)>& g, double sing, double r, double sigma) {
  std::vector<double> b{0.0, 0.01 * sigma, 0.1 * sigma, sigma};
  for (double c : {-8.0, -2.0, 0.0, 2.0, 8.0})
    if (r + c * sigma > 0.0) b.push_back(r + c * sigma);
  const double hi = r + 40.0 * sigma;
  b.push_back(hi);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  auto h = [&](double rho) { return g(rho) * offset_norm_density(d, r, sigma, rho); };
  QuadOptions q;
  q.abs_tol = 0.0;
  q.rel_tol = 1e-10;
  q.max_intervals = 8000;
  const double p = d - 1.0 - sing;
  QuadResult res = integrate_left_power(h, 0.0, b[1], p, q);
  std::vector<double> rest(b.begin() + 1, b.end());
  res += integrate(h, rest, q);
  if (!res.converged || !std::isfinite(res.value))
    throw Error(ErrorKind::TableBuildFailure, "convolution quadrature did not converge");
  return res.value;
}

// (1 / pi) int_0^N F(xi) cos(xi r) dxi in d = 1, and the radial analogues for d = 2, 3.
double radial_inverse(int d, const std::function<double(double)>& F, double origin_power, double N, double r) {
  auto h = [&](double xi) {
    const double x = xi * r;
    switch (d) {
      case 1: return F(xi) * std::cos(x) / M_PI;
      case 2: return F(xi) * std::cyl_bessel_j(0.0, x) * xi / (2.0 * M_PI);
      default: return F(xi) * xi * xi * (x == 0.0 ? 1.0 : std::sin(x) / x) / (2.0 * M_PI * M_PI);
    }
  };
  QuadOptions q;
  q.abs_tol = 1e-14;
  q.rel_tol = 1e-10;
  q.max_intervals = 8000;
  const int panels = 1 + static_cast<int>(std::ceil(N * r / M_PI));
  const double len = N / panels;
  QuadResult res = integrate_left_power(h, 0.0, len, std::max(origin_power, -0.999999), q);
  if (panels > 1) {
    std::vector<double> b;
    for (int i = 1; i <= panels; ++i) b.push_back(len * i);
    res += integrate(h, b, q);
  }
  if (!res.converged || !std::isfinite(res.value))
    throw Error(ErrorKind::TableBuildFailure, "inverse transform quadrature did not converge");
  return res.value;
}

struct AxisParts {
  std::function<double(double)> gamma;     // |x| -> g(|x|)
  std::function<double(double)> spectral;  // catalog mu-hat along the axis
  double fourier_constant = 1.0;
  double sing = 0.0;
  double origin_power = 0.0;  // mu-hat ~ xi^p at 0
};

AxisParts axis_parts(const CovarianceKernel& k, int i) {
  AxisParts a;
  if (auto fp = std::get_if<FractionalProduct>(&k.kind)) {
    const double h = fp->hurst[i];
    const double s = 2.0 - 2.0 * h;
    a.gamma = [h](double x) { return std::pow(x, 2.0 * h - 2.0); };
    a.spectral = [h](double x) { return std::pow(x, 1.0 - 2.0 * h); };
    a.fourier_constant = 2.0 * std::tgamma(1.0 - s) * std::sin(0.5 * M_PI * s);
    a.sing = s;
    a.origin_power = 1.0 - 2.0 * h;
  } else if (std::holds_alternative<Cauchy>(k.kind)) {
    a.gamma = [](double x) { return 1.0 / (1.0 + x * x); };
    a.spectral = [](double x) { return std::exp(-x); };
    a.fourier_constant = M_PI;
  } else if (auto t = std::get_if<Tabulated>(&k.kind)) {
    auto data = t->data;
    a.gamma = [data, i](double x) { return data->gamma[i](x); };
    a.spectral = [data, i](double x) { return data->spectral[i](x); };
    a.fourier_constant = std::pow(data->fourier_constant, 1.0 / k.dim);
    a.origin_power = 0.0;
  } else {
    throw Error(ErrorKind::UnsupportedCombination, "kernel has no product layout");
  }
  return a;
}

// Radial base function rho -> gamma(rho e_1) and its power singularity at the origin.
std::function<double(double)> radial_base(const CovarianceKernel& k, double* sing) {
  *sing = 0.0;
  const int d = k.dim;
  if (auto rz = std::get_if<Riesz>(&k.kind)) {
    *sing = rz->alpha;
    const double a = rz->alpha;
    return [a](double r) { return std::pow(r, -a); };
  }
  if (auto fp = std::get_if<FractionalProduct>(&k.kind)) {
    *sing = 2.0 - 2.0 * fp->hurst[0];
    const double h = fp->hurst[0];
    return [h](double r) { return std::pow(r, 2.0 * h - 2.0); };
  }
  if (std::holds_alternative<Cauchy>(k.kind)) return [](double r) { return 1.0 / (1.0 + r * r); };
  if (std::holds_alternative<Poisson>(k.kind)) return [d](double r) { return std::pow(1.0 + r * r, -0.5 * (d + 1)); };
  if (auto ou = std::get_if<OrnsteinUhlenbeck>(&k.kind)) {
    const double a = ou->alpha;
    return [a](double r) { return std::exp(-std::pow(r, a)); };
  }
  if (auto t = std::get_if<Tabulated>(&k.kind)) {
    auto data = t->data;
    return [data](double r) { return data->gamma[0](r); };
  }
  throw Error(ErrorKind::UnsupportedCombination, "kernel has no radial profile");
}

double radial_spectral(const CovarianceKernel& k, double r) {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(k.dim);
  xi(0) = r;
  return spectral_density(k, xi);
}

std::shared_ptr<TabulatedData> derived_data(const CovarianceKernel& k, const std::string& origin) {
  auto t = std::make_shared<TabulatedData>();
  t->fourier_constant = fourier_constant(k);
  t->spectral_origin_power = spectral_shell_origin_power(k);
  t->spectral_tail_known = true;
  t->spectral_tail_power = -std::numeric_limits<double>::infinity();
  t->origin = origin;
  return t;
}

}  // namespace

CovarianceKernel mollified_kernel(const CovarianceKernel& k, double eps) {
  require(eps > 0.0, ErrorKind::InvalidParameter, "mollification epsilon must be positive");
  const int d = k.dim;
  std::ostringstream name;
  name.precision(10);
  name << "mollified(" << k.name() << "," << eps << ")";
  auto t = derived_data(k, name.str());

  const TabulatedData* base_tab = nullptr;
  if (auto tb = std::get_if<Tabulated>(&k.kind)) base_tab = tb->data.get();

  if (k.is_dirac() || (base_tab && base_tab->gaussian_variance > 0)) {
    const double var = eps + (base_tab ? base_tab->gaussian_variance : 0.0);
    t->gaussian_variance = var;
    t->gamma = {Profile::closed([var, d](double r) {
      return std::pow(2.0 * M_PI * var, -0.5 * d) * std::exp(-0.5 * r * r / var);
    })};
    t->spectral = {Profile::closed([var](double r) { return std::exp(-0.5 * var * r * r); })};
    t->fourier_constant = 1.0;
    t->spectral_origin_power = d - 1.0;
    return CovarianceKernel::tabulated(t, d);
  }

  const double sigma = std::sqrt(eps);
  const double r_max = 200.0 * sigma;
  if (k.is_radial()) {
    require(d <= 3, ErrorKind::UnsupportedCombination, "radial mollification is implemented for d <= 3");
    double sing = 0.0;
    auto g = radial_base(k, &sing);
    if (base_tab && base_tab->singular_at_zero) sing = 0.0;
    t->gamma = {build_table([&](double r) { return radial_convolution(d, g, sing, r, sigma); }, eps, r_max, g)};
    CovarianceKernel kc = k;
    t->spectral = {Profile::closed([kc, eps](double r) { return radial_spectral(kc, r) * std::exp(-0.5 * eps * r * r); })};
  } else {
    t->per_axis = true;
    for (int i = 0; i < d; ++i) {
      const AxisParts a = axis_parts(k, i);
      auto g = a.gamma;
      t->gamma.push_back(
          build_table([&](double r) { return radial_convolution(1, g, a.sing, r, sigma); }, eps, r_max, g));
      auto s = a.spectral;
      t->spectral.push_back(Profile::closed([s, eps](double x) { return s(x) * std::exp(-0.5 * eps * x * x); }));
    }
  }
  return CovarianceKernel::tabulated(t, d);
}

CovarianceKernel cutoff_kernel(const CovarianceKernel& k, double N) {
  require(N > 0.0, ErrorKind::InvalidParameter, "spectral cutoff must be positive");
  const int d = k.dim;
  std::ostringstream name;
  name.precision(10);
  name << "cutoff(" << k.name() << "," << N << ")";
  auto t = derived_data(k, name.str());
  const double scale = 1.0 / (N * N);
  const double r_max = 200.0 / N;

  if (k.is_radial()) {
    require(d <= 3, ErrorKind::UnsupportedCombination, "radial cutoff kernels are implemented for d <= 3");
    std::function<double(double)> beyond = [](double) { return 0.0; };
    if (!k.is_dirac()) {
      double sing = 0.0;
      beyond = radial_base(k, &sing);
    }
    const double c = fourier_constant(k);
    const double p = spectral_shell_origin_power(k);
    auto F = [&](double xi) { return xi == 0.0 ? 0.0 : c * radial_spectral(k, xi); };
    t->gamma = {build_table([&](double r) { return radial_inverse(d, F, p, N, r); }, scale, r_max, beyond)};
    CovarianceKernel kc = k;
    t->spectral = {Profile::closed([kc, N](double r) { return r <= N ? radial_spectral(kc, r) : 0.0; })};
  } else {
    t->per_axis = true;
    for (int i = 0; i < d; ++i) {
      const AxisParts a = axis_parts(k, i);
      auto F = [&](double xi) { return xi == 0.0 ? 0.0 : a.fourier_constant * a.spectral(xi); };
      t->gamma.push_back(build_table([&](double r) { return radial_inverse(1, F, a.origin_power, N, r); }, scale,
                                     r_max, a.gamma));
      auto s = a.spectral;
      t->spectral.push_back(Profile::closed([s, N](double x) { return x <= N ? s(x) : 0.0; }));
    }
  }
  return CovarianceKernel::tabulated(t, d);
}

// ---- vectorised evaluation ----

KernelEvaluator::KernelEvaluator(const CovarianceKernel& k, double cap) : dim_(k.dim), cap_(cap), kernel_(k) {
  require(!k.is_dirac(), ErrorKind::UnboundedKernel, "the Dirac kernel cannot be evaluated pointwise");
  const int d = k.dim;
  if (auto t = std::get_if<Tabulated>(&k.kind)) {
    auto data = t->data;
    if (data->gaussian_variance > 0) {
      kind_ = Kind::Gaussian;
      gauss_c_ = std::pow(2.0 * M_PI * data->gaussian_variance, -0.5 * d);
      gauss_k_ = -0.5 / data->gaussian_variance;
    } else if (data->per_axis) {
      kind_ = Kind::Product;
      for (int i = 0; i < d; ++i) axis_.push_back([data, i](double x) { return data->gamma[i](x); });
    } else {
      kind_ = Kind::Radial;
      radial_sq_ = [data](double r2) { return data->gamma[0].from_sq(r2); };
    }
    return;
  }
  if (k.is_radial()) {
    kind_ = Kind::Radial;
    if (auto rz = std::get_if<Riesz>(&k.kind)) {
      const double e = -0.5 * rz->alpha;
      radial_sq_ = [e](double r2) { return std::pow(r2, e); };
    } else if (auto fp = std::get_if<FractionalProduct>(&k.kind)) {
      const double e = fp->hurst[0] - 1.0;
      radial_sq_ = [e](double r2) { return std::pow(r2, e); };
    } else if (std::holds_alternative<Cauchy>(k.kind)) {
      radial_sq_ = [](double r2) { return 1.0 / (1.0 + r2); };
    } else if (std::holds_alternative<Poisson>(k.kind)) {
      const double e = -0.5 * (d + 1);
      radial_sq_ = [e](double r2) { return std::pow(1.0 + r2, e); };
    } else if (auto ou = std::get_if<OrnsteinUhlenbeck>(&k.kind)) {
      const double e = 0.5 * ou->alpha;
      radial_sq_ = [e](double r2) { return std::exp(-std::pow(r2, e)); };
    }
    return;
  }
  kind_ = Kind::Product;
  for (int i = 0; i < d; ++i) axis_.push_back(axis_parts(k, i).gamma);
}

void KernelEvaluator::eval(const Eigen::Ref<const Eigen::MatrixXd>& diff, Eigen::Ref<Eigen::ArrayXd> out) const {
  const Eigen::Index m = diff.cols();
  switch (kind_) {
    case Kind::Gaussian:
      if (dim_ == 1 && diff.outerStride() == 1) {
        const Eigen::Map<const Eigen::ArrayXd> x(diff.data(), m);
        out = gauss_c_ * (gauss_k_ * x.square()).max(-700.0).exp();
      } else if (dim_ == 1)
        out = gauss_c_ * (gauss_k_ * diff.row(0).transpose().array().square()).max(-700.0).exp();
      else out = gauss_c_ * (gauss_k_ * diff.colwise().squaredNorm().transpose().array()).max(-700.0).exp();
      break;
    case Kind::Radial:
      for (Eigen::Index j = 0; j < m; ++j) out(j) = radial_sq_(diff.col(j).squaredNorm());
      break;
    case Kind::Product:
      for (Eigen::Index j = 0; j < m; ++j) {
        double v = 1.0;
        for (int i = 0; i < dim_; ++i) v *= axis_[i](std::abs(diff(i, j)));
        out(j) = v;
      }
      break;
  }
  if (cap_ > 0.0) out = out.min(cap_);
}

double KernelEvaluator::eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::ArrayXd out(1);
  eval(Eigen::MatrixXd(x), out);
  return out(0);
}

// ---- Hamiltonian sums ----

HamiltonianContext::HamiltonianContext(const NoiseSpec& noise, const Regularization& reg, double t_end, int n_steps)
    : noise_(noise), reg_(reg), t_(t_end), n_(n_steps), kernel_(noise.kernel) {
  require(t_end > 0.0, ErrorKind::InvalidParameter, "time horizon must be positive");
  require(n_steps >= 1, ErrorKind::InvalidParameter, "need at least one time step");
  const double dt = t_end / n_steps;
  skip_diag_ = reg.diagonal == Regularization::Diagonal::SkipDiagonal;
  double cap = 0.0;
  switch (reg.mode) {
    case Regularization::Mode::None:
      require(!noise.kernel.singular_at_zero(), ErrorKind::UnboundedKernel,
              "an unregularized Hamiltonian needs a bounded kernel");
      break;
    case Regularization::Mode::SpatialMollify:
      require(reg.parameter >= 0.0, ErrorKind::InvalidParameter, "mollification epsilon must be positive");
      eps_ = reg.parameter > 0.0 ? reg.parameter : dt;
      kernel_ = mollified_kernel(noise.kernel, eps_);
      break;
    case Regularization::Mode::SpectralCutoff:
      require(reg.parameter > 0.0, ErrorKind::InvalidParameter, "spectral cutoff must be positive");
      kernel_ = cutoff_kernel(noise.kernel, reg.parameter);
      break;
    case Regularization::Mode::Cap: {
      require(reg.parameter > 0.0, ErrorKind::InvalidParameter, "cap radius must be positive");
      require(!noise.kernel.is_dirac(), ErrorKind::UnboundedKernel, "the Dirac kernel cannot be capped");
      const int d = noise.kernel.dim;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
      if (noise.kernel.is_radial()) x(0) = reg.parameter;
      else x.setConstant(reg.parameter / std::sqrt(static_cast<double>(d)));
      cap = gamma_eval(noise.kernel, x);
      break;
    }
  }
  eval_ = KernelEvaluator(kernel_, cap);
  const double beta0 = noise.beta0;
  w_.resize(n_steps);
  const double sc = std::pow(dt, 2.0 - beta0);
  for (int k = 0; k < n_steps; ++k) w_(k) = sc * unit_cell_weight(k, beta0);
  if (n_steps % 2 == 0) {
    const int h = n_steps / 2;
    w_half_.resize(h);
    const double sh = std::pow(2.0 * dt, 2.0 - beta0);
    for (int k = 0; k < h; ++k) w_half_(k) = sh * unit_cell_weight(k, beta0);
  }
}

Eigen::MatrixXd HamiltonianContext::midpoints(const PathGrid& path) {
  const int n = path.n_steps;
  return 0.5 * (path.positions.leftCols(n) + path.positions.rightCols(n));
}

namespace {

Eigen::MatrixXd half_midpoints(const PathGrid& path) {
  const int h = path.n_steps / 2;
  Eigen::MatrixXd y(path.dim(), h);
  for (int i = 0; i < h; ++i) y.col(i) = 0.5 * (path.positions.col(2 * i) + path.positions.col(2 * i + 2));
  return y;
}

}  // namespace

void HamiltonianContext::check_grid(const PathGrid& p) const {
  require(p.n_steps == n_ && std::abs(p.t_end - t_) <= 1e-12 * t_, ErrorKind::GridMismatch,
          "path grid does not match the Hamiltonian grid");
  require(p.dim() == noise_.dim(), ErrorKind::GridMismatch, "path dimension does not match the noise dimension");
}

double HamiltonianContext::pair_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, bool same,
                                    const Eigen::VectorXd& w) const {
  const Eigen::Index n = a.cols(), d = a.rows();
  require(b.cols() == n && b.rows() == d && w.size() == n, ErrorKind::GridMismatch, "cell arrays have different shapes");
  Eigen::MatrixXd diff(d, n);
  Eigen::ArrayXd g1(n), g2(n);

  // out = gamma(src - shift) for scalar positions.
  const bool gauss = eval_.gaussian();
  const double gc = eval_.gaussian_c(), gk = eval_.gaussian_k();
  auto eval1 = [&](const Eigen::Map<const Eigen::ArrayXd>& src, double shift, Eigen::Ref<Eigen::ArrayXd> out) {
    const Eigen::Index m = src.size();
    if (gauss) {
      // Clamp the exponent: subnormal exp results are slow and far below the summation error.
      out = gc * (gk * (src - shift).square()).max(-700.0).exp();
    } else {
      Eigen::Map<Eigen::ArrayXd>(diff.data(), m) = src - shift;
      eval_.eval(diff.leftCols(m), out);
    }
  };

  double diag = 0.0;
  if (!skip_diag_) {
    diff = a - b;
    eval_.eval(diff, g1);
    diag = w(0) * g1.sum();
  }
  double rows = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Eigen::Index m = n - 1 - i;
    auto t1 = g1.head(m);
    auto t2 = g2.head(m);
    if (d == 1) {
      const Eigen::Map<const Eigen::ArrayXd> aj(a.data() + i + 1, m), bj(b.data() + i + 1, m);
      if (same) {
        eval1(aj, a(0, i), t1);
      } else {
        eval1(bj, a(0, i), t1);
        eval1(aj, b(0, i), t2);
      }
    } else {
      auto dm = diff.leftCols(m);
      if (same) {
        dm = a.rightCols(m).colwise() - a.col(i);
        eval_.eval(dm, t1);
      } else {
        dm = b.rightCols(m).colwise() - a.col(i);
        eval_.eval(dm, t1);
        dm = a.rightCols(m).colwise() - b.col(i);
        eval_.eval(dm, t2);
      }
    }
    // Doubling is exact, so the self sum equals the cross sum of a path with itself.
    if (same) rows += 2.0 * t1.matrix().dot(w.segment(1, m));
    else {
      t1 += t2;
      rows += t1.matrix().dot(w.segment(1, m));
    }
  }
  const double v = diag + rows;
  if (!std::isfinite(v)) throw Error(ErrorKind::NumericalFailure, "NonFinite: Hamiltonian cell sum is not finite");
  return v;
}

double HamiltonianContext::self(const PathGrid& path) const {
  check_grid(path);
  return pair_sum(midpoints(path), midpoints(path), true, w_);
}

double HamiltonianContext::cross(const PathGrid& a, const PathGrid& b) const {
  check_grid(a);
  check_grid(b);
  return pair_sum(midpoints(a), midpoints(b), false, w_);
}

double HamiltonianContext::self_mid(const Eigen::MatrixXd& ya) const { return pair_sum(ya, ya, true, w_); }

double HamiltonianContext::cross_mid(const Eigen::MatrixXd& ya, const Eigen::MatrixXd& yb) const {
  return pair_sum(ya, yb, false, w_);
}

double HamiltonianContext::shifted_mid(const Eigen::MatrixXd& ya, const Eigen::VectorXd& z) const {
  const Eigen::MatrixXd yb = ya.colwise() - z;
  return pair_sum(ya, yb, false, w_);
}

double HamiltonianContext::self_half(const PathGrid& path) const {
  check_grid(path);
  require(n_ % 2 == 0, ErrorKind::InvalidParameter, "half-resolution sums need an even step count");
  const Eigen::MatrixXd y = half_midpoints(path);
  return pair_sum(y, y, true, w_half_);
}

double HamiltonianContext::cross_half(const PathGrid& a, const PathGrid& b) const {
  check_grid(a);
  check_grid(b);
  require(n_ % 2 == 0, ErrorKind::InvalidParameter, "half-resolution sums need an even step count");
  return pair_sum(half_midpoints(a), half_midpoints(b), false, w_half_);
}

HamiltonianValue self_hamiltonian(const PathGrid& path, const NoiseSpec& noise, const Regularization& reg) {
  require(path.n_steps >= 1, ErrorKind::InvalidParameter, "path needs at least two points");
  const HamiltonianContext ctx(noise, reg, path.t_end, path.n_steps);
  HamiltonianValue out;
  out.value = ctx.self(path);
  out.reg = reg;
  out.n_steps = path.n_steps;
  out.discretization = path.n_steps % 2 == 0 ? std::abs(out.value - ctx.self_half(path))
                                             : std::numeric_limits<double>::quiet_NaN();
  return out;
}

HamiltonianValue cross_hamiltonian(const PathGrid& a, const PathGrid& b, const NoiseSpec& noise,
                                   const Regularization& reg) {
  require(a.n_steps == b.n_steps && std::abs(a.t_end - b.t_end) <= 1e-12 * a.t_end, ErrorKind::GridMismatch,
          "paths do not share a time grid");
  const HamiltonianContext ctx(noise, reg, a.t_end, a.n_steps);
  HamiltonianValue out;
  out.value = ctx.cross(a, b);
  out.reg = reg;
  out.n_steps = a.n_steps;
  out.discretization = a.n_steps % 2 == 0 ? std::abs(out.value - ctx.cross_half(a, b))
                                          : std::numeric_limits<double>::quiet_NaN();
  return out;
}

// ---- covariance ----

CovarianceFactor factor_covariance(Eigen::MatrixXd q, double jitter) {
  require(jitter >= 0.0, ErrorKind::InvalidParameter, "jitter must be nonnegative");
  const Eigen::Index K = q.rows();
  require(K >= 1 && q.cols() == K, ErrorKind::InvalidParameter, "covariance must be square and nonempty");
  q = 0.5 * (q + q.transpose()).eval();
  CovarianceFactor f;
  f.min_eigenvalue = K == 1 ? q(0, 0) : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q, Eigen::EigenvaluesOnly).eigenvalues()(0);
  const double unit = std::max(q.trace() / K, 1e-300);
  const double j_max = 1e-4 * unit;
  double j = jitter;
  for (;;) {
    Eigen::MatrixXd m = q;
    m.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().allFinite()) {
      f.l = llt.matrixL();
      f.jitter = j;
      f.q = std::move(q);
      return f;
    }
    j = std::max(1e-12 * unit, 10.0 * j);
    if (j > j_max) throw Error(ErrorKind::NotPSD, "covariance factorization failed at the maximum jitter");
  }
}

CovarianceFactor covariance_matrix(const std::vector<PathGrid>& paths, const HamiltonianContext& ctx, double jitter,
                                   int workers) {
  const size_t K = paths.size();
  require(K >= 1, ErrorKind::InvalidParameter, "need at least one path");
  std::vector<Eigen::MatrixXd> y(K);
  for (size_t i = 0; i < K; ++i) {
    ctx.check_grid(paths[i]);
    y[i] = HamiltonianContext::midpoints(paths[i]);
  }
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < K; ++i)
    for (size_t j = i; j < K; ++j) pairs.emplace_back(i, j);
  std::vector<double> vals(pairs.size());
  parallel_for(pairs.size(), workers, [&](size_t p) {
    const auto [i, j] = pairs[p];
    vals[p] = i == j ? ctx.self_mid(y[i]) : ctx.cross_mid(y[i], y[j]);
  });
  Eigen::MatrixXd q(K, K);
  for (size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    q(i, j) = q(j, i) = vals[p];
  }
  return factor_covariance(std::move(q), jitter);
}

CovarianceFactor covariance_matrix(const std::vector<PathGrid>& paths, const NoiseSpec& noise,
                                   const Regularization& reg, double jitter) {
  require(!paths.empty(), ErrorKind::InvalidParameter, "need at least one path");
  const HamiltonianContext ctx(noise, reg, paths[0].t_end, paths[0].n_steps);
  return covariance_matrix(paths, ctx, jitter, 1);
}

}  // namespace fkspde
