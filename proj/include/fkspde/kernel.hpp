#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace fkspde {

// Scalar radial profile f(r), r >= 0.
class Profile {
 public:
  Profile() = default;

  // Linear interpolation through (r_k, v_k); power-law extrapolation past the last node.
  static Profile sampled(std::vector<double> r, std::vector<double> v);
  // Nodes uniform in u = log(1 + r^2 / scale) on [0, r_max]; `beyond` is used for r > r_max.
  static Profile log_grid(double scale, double r_max, std::vector<double> v, std::function<double(double)> beyond);
  static Profile closed(std::function<double(double)> f);

  double operator()(double r) const;
  // Evaluation from a squared radius, used by the hot loops.
  double from_sq(double r2) const;

  bool empty() const { return kind_ == Kind::Empty; }
  int size() const { return static_cast<int>(v_.size()); }

  // Grid data for log_grid profiles.
  double scale() const { return scale_; }
  double r_max() const { return r_max_; }
  const std::vector<double>& values() const { return v_; }

 private:
  enum class Kind { Empty, Sampled, LogGrid, Closed };
  Kind kind_ = Kind::Empty;
  std::vector<double> r_, v_;
  double scale_ = 1.0, r_max_ = 0.0, r2_max_ = 0.0, u_step_inv_ = 0.0;
  double tail_power_ = 0.0;
  std::function<double(double)> f_;
};

struct TabulatedData {
  // One profile of |x| (radial layout) or one per axis of |x_i| (product layout).
  std::vector<Profile> gamma;
  std::vector<Profile> spectral;
  bool per_axis = false;
  double fourier_constant = 1.0;
  bool singular_at_zero = false;
  // When positive, gamma is exactly the centred Gaussian density with this variance per axis.
  double gaussian_variance = 0.0;
  // Exponent p with shell density ~ r^p near the origin (frequency side).
  double spectral_origin_power = 0.0;
  // Tail exponent of mu-hat for the power-counting classifier; NaN if unknown.
  double spectral_tail_power = 0.0;
  bool spectral_tail_known = false;
  std::string origin = "user";
};

struct Dirac {};
struct Riesz {
  double alpha = 0.5;
};
struct FractionalProduct {
  std::vector<double> hurst;
};
struct Cauchy {};
struct Poisson {};
struct OrnsteinUhlenbeck {
  double alpha = 1.0;
};
struct Tabulated {
  std::shared_ptr<const TabulatedData> data;
};

using KernelVariant = std::variant<Dirac, Riesz, FractionalProduct, Cauchy, Poisson, OrnsteinUhlenbeck, Tabulated>;

struct CovarianceKernel {
  KernelVariant kind;
  int dim = 1;

  static CovarianceKernel dirac(int d = 1);
  static CovarianceKernel riesz(double alpha, int d = 1);
  static CovarianceKernel fractional(std::vector<double> hurst);
  static CovarianceKernel cauchy(int d = 1);
  static CovarianceKernel poisson(int d = 1);
  static CovarianceKernel ornstein_uhlenbeck(double alpha, int d = 1);
  static CovarianceKernel tabulated(std::shared_ptr<const TabulatedData> data, int d);

  bool singular_at_zero() const;
  bool is_dirac() const { return std::holds_alternative<Dirac>(kind); }
  // gamma depends on x only through |x|.
  bool is_radial() const;
  // gamma(x) = prod_i g_i(|x_i|).
  bool is_product() const;
  std::string name() const;
};

double gamma_eval(const CovarianceKernel& k, const Eigen::Ref<const Eigen::VectorXd>& x);
double gamma_eval(const CovarianceKernel& k, double x);

// Catalog spectral density mu-hat (Dirac returns 1, Riesz |xi|^{alpha-d}, and so on).
double spectral_density(const CovarianceKernel& k, const Eigen::Ref<const Eigen::VectorXd>& xi);
double spectral_density(const CovarianceKernel& k, double xi);

// Constant c with F gamma = c * mu-hat under F f(xi) = int exp(-i x.xi) f(x) dx.
double fourier_constant(const CovarianceKernel& k);

// F gamma(xi).
double fourier_transform(const CovarianceKernel& k, const Eigen::Ref<const Eigen::VectorXd>& xi);

enum class SpectralScale {
  Catalog,  // mu-hat as listed in the kernel catalog
  Measure,  // (2 pi)^{-d} F gamma, the measure paired with gamma in the noise covariance
};

// Integral of the spectral density over the sphere of radius r (times r^{d-1}).
double spectral_shell(const CovarianceKernel& k, double r, SpectralScale scale = SpectralScale::Catalog);

// p with spectral_shell(r) ~ r^p as r -> 0.
double spectral_shell_origin_power(const CovarianceKernel& k);

// Tail exponent q with spectral_shell(r) ~ r^q at infinity; -inf for exponential decay,
// NaN when unknown.
double spectral_shell_tail_power(const CovarianceKernel& k);

double unit_sphere_area(int d);

}  // namespace fkspde
