#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "fkspde/kernel.hpp"
#include "fkspde/process.hpp"
#include "fkspde/spectral.hpp"

namespace fkspde {

struct Regularization {
  enum class Mode { None, SpatialMollify, SpectralCutoff, Cap };
  enum class Diagonal { ExactTimeWeight, SkipDiagonal };

  Mode mode = Mode::SpatialMollify;
  // epsilon, N or eta depending on mode; for SpatialMollify a value of 0 means epsilon = dt.
  double parameter = 0.0;
  Diagonal diagonal = Diagonal::ExactTimeWeight;

  static Regularization none() { return {Mode::None, 0.0, Diagonal::ExactTimeWeight}; }
  static Regularization mollify(double eps = 0.0) { return {Mode::SpatialMollify, eps, Diagonal::ExactTimeWeight}; }
  static Regularization cutoff(double n) { return {Mode::SpectralCutoff, n, Diagonal::ExactTimeWeight}; }
  static Regularization cap(double eta) { return {Mode::Cap, eta, Diagonal::ExactTimeWeight}; }

  std::string describe() const;
};

struct HamiltonianValue {
  double value = 0.0;
  Regularization reg;
  int n_steps = 0;
  // |H(full grid) - H(every other grid point)|; NaN when n_steps is odd.
  double discretization = 0.0;
};

// Integral of u^{-beta0} over [a, b].
double singular_time_weight(double a, double b, double beta0);

// Integral of |r - s|^{-beta0} over the cell pair [0,1] x [k, k+1].
double unit_cell_weight(int k, double beta0);

// gamma convolved with the centred Gaussian density of variance eps per axis.
CovarianceKernel mollified_kernel(const CovarianceKernel& k, double eps);

// Inverse transform of the spectral measure restricted to |xi| <= N (per axis for product kernels).
CovarianceKernel cutoff_kernel(const CovarianceKernel& k, double N);

// Vectorised evaluation of a bounded kernel on blocks of differences.
class KernelEvaluator {
 public:
  KernelEvaluator() = default;
  explicit KernelEvaluator(const CovarianceKernel& k, double cap = 0.0);

  // diff: d x m differences; out: m values.
  void eval(const Eigen::Ref<const Eigen::MatrixXd>& diff, Eigen::Ref<Eigen::ArrayXd> out) const;
  double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // gamma(x) = c exp(k |x|^2) with no cap.
  bool gaussian() const { return kind_ == Kind::Gaussian && cap_ <= 0.0; }
  double gaussian_c() const { return gauss_c_; }
  double gaussian_k() const { return gauss_k_; }

 private:
  enum class Kind { Gaussian, Radial, Product };
  Kind kind_ = Kind::Radial;
  int dim_ = 1;
  double gauss_c_ = 0.0, gauss_k_ = 0.0;
  double cap_ = 0.0;
  CovarianceKernel kernel_;
  std::vector<std::function<double(double)>> axis_;
  std::function<double(double)> radial_sq_;
};

class HamiltonianContext {
 public:
  HamiltonianContext(const NoiseSpec& noise, const Regularization& reg, double t_end, int n_steps);

  // Midpoint positions (d x n_steps) used as the cell values.
  static Eigen::MatrixXd midpoints(const PathGrid& path);

  double self(const PathGrid& path) const;
  double cross(const PathGrid& a, const PathGrid& b) const;
  double self_mid(const Eigen::MatrixXd& ya) const;
  double cross_mid(const Eigen::MatrixXd& ya, const Eigen::MatrixXd& yb) const;
  // Sum of W * gamma(Y_r - Y_s + z) over all cell pairs.
  double shifted_mid(const Eigen::MatrixXd& ya, const Eigen::VectorXd& z) const;

  // Same sums on the half-resolution grid; requires an even step count.
  double self_half(const PathGrid& path) const;
  double cross_half(const PathGrid& a, const PathGrid& b) const;

  const CovarianceKernel& kernel() const { return kernel_; }
  const NoiseSpec& noise() const { return noise_; }
  const Regularization& regularization() const { return reg_; }
  int n_steps() const { return n_; }
  double t_end() const { return t_; }
  double epsilon() const { return eps_; }
  // Cell weights W_k for |i - j| = k.
  const Eigen::VectorXd& weights() const { return w_; }

  void check_grid(const PathGrid& p) const;

 private:
  double pair_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, bool same, const Eigen::VectorXd& w) const;

  NoiseSpec noise_;
  Regularization reg_;
  double t_ = 0.0;
  int n_ = 0;
  double eps_ = 0.0;
  CovarianceKernel kernel_;
  KernelEvaluator eval_;
  Eigen::VectorXd w_, w_half_;
  bool skip_diag_ = false;
};

HamiltonianValue self_hamiltonian(const PathGrid& path, const NoiseSpec& noise, const Regularization& reg);
HamiltonianValue cross_hamiltonian(const PathGrid& a, const PathGrid& b, const NoiseSpec& noise,
                                   const Regularization& reg);

struct CovarianceFactor {
  Eigen::MatrixXd q;  // without jitter
  Eigen::MatrixXd l;  // lower Cholesky factor of q + jitter I
  double jitter = 0.0;
  double min_eigenvalue = 0.0;  // of q before jitter
};

CovarianceFactor covariance_matrix(const std::vector<PathGrid>& paths, const HamiltonianContext& ctx,
                                   double jitter = 0.0, int workers = 1);
CovarianceFactor covariance_matrix(const std::vector<PathGrid>& paths, const NoiseSpec& noise,
                                   const Regularization& reg, double jitter = 0.0);

// Cholesky of q + jitter I, escalating the jitter by x10 from 1e-12 trace/K until it succeeds.
CovarianceFactor factor_covariance(Eigen::MatrixXd q, double jitter);

}  // namespace fkspde
