#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "fkspde/estimate.hpp"
#include "fkspde/hamiltonian.hpp"
#include "fkspde/process.hpp"
#include "fkspde/rng.hpp"
#include "fkspde/spectral.hpp"

namespace fkspde {

class InitialCondition {
 public:
  enum class Kind { Constant, Indicator, Tabulated };

  InitialCondition() = default;
  static InitialCondition constant(double c);
  // 1 on the closed box [lo, hi]; entries may be infinite.
  static InitialCondition indicator(Eigen::VectorXd lo, Eigen::VectorXd hi);
  // |f| <= bound is declared by the caller and checked on every evaluation.
  static InitialCondition tabulated(std::function<double(const Point&)> f, double bound, std::string label = "user");

  // Throws InvalidParameter when a value exceeds the declared bound.
  double operator()(const Point& x) const;

  Kind kind() const { return kind_; }
  double bound() const { return bound_; }
  double constant_value() const { return c_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::Constant;
  double c_ = 1.0;
  double bound_ = 1.0;
  Eigen::VectorXd lo_, hi_;
  std::function<double(const Point&)> f_;
  std::string label_;
};

struct SolverOptions {
  int n_steps = 512;
  double jitter = 0.0;
  int workers = 1;
  // Refuse runs outside the required Dalang condition.
  bool check_dalang = true;
  std::string fingerprint;
};

// Throws DalangViolation unless the condition for `mode` holds for (noise, process).
void require_dalang(const NoiseSpec& noise, const ProcessSpec& process, Calculus mode);

struct SolutionSample {
  double value = 0.0;
  double log_value = 0.0;  // log of value when positive
  Calculus mode = Calculus::Stratonovich;
  int inner_paths = 0;
  Eigen::VectorXd v;  // the Gaussian draw V ~ N(0, Q)
  Eigen::VectorXd q_diag;
  double jitter = 0.0;
};

SolutionSample sample_solution(double t, const Point& x, Calculus mode, int K, const NoiseSpec& noise,
                               const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg,
                               Stream& stream, const SolverOptions& opt = {});

// Same, with a prebuilt context whose grid fixes t and the step count; no Dalang check.
SolutionSample sample_solution(const HamiltonianContext& ctx, const Point& x, Calculus mode, int K,
                               const ProcessSpec& process, const InitialCondition& u0, Stream& stream,
                               double jitter = 0.0);

enum class PairSet {
  AllOrdered,   // every (i, j), diagonal included
  StrictUpper,  // i < j
};

// weight * sum of H over the pair set; H symmetric.
double pair_exponent(const Eigen::MatrixXd& h, PairSet set, double weight);

// Mean of the self Hamiltonian, or of the cross Hamiltonian of independent path pairs.
MCEstimate hamiltonian_mean(bool cross, double t, const Point& x, const NoiseSpec& noise, const ProcessSpec& process,
                            const Regularization& reg, long n_samples, std::uint64_t seed, const SolverOptions& opt = {});

struct SolutionSummary {
  MCEstimate estimate;
  double positive_fraction = 0.0;
};

// Independent sample_solution draws with K inner paths each.
SolutionSummary simulate_solution(double t, const Point& x, Calculus mode, int K, const NoiseSpec& noise,
                                  const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg,
                                  long n_samples, std::uint64_t seed, const SolverOptions& opt = {});

MCEstimate moment_fk(int p, double t, const Point& x, Calculus mode, const NoiseSpec& noise,
                     const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg, long n_samples,
                     std::uint64_t seed, const SolverOptions& opt = {});

MCEstimate mixed_moment(double t, const Point& x1, const Point& x2, Calculus mode, const NoiseSpec& noise,
                        const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg,
                        long n_samples, std::uint64_t seed, const SolverOptions& opt = {});

// E prod u(t, x_i) over the given start points.
MCEstimate product_moment(double t, const std::vector<Point>& starts, Calculus mode, const NoiseSpec& noise,
                          const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg,
                          long n_samples, std::uint64_t seed, const SolverOptions& opt = {});

struct ExpMomentReport {
  MCEstimate estimate;  // on n samples
  MCEstimate first_half, second_half;
  MCEstimate doubled;  // on 2n samples, the first n shared with `estimate`
  double half_gap_se = 0.0;  // |first - second| in combined standard errors
  bool unstable = false;     // half_gap_se > 5
};

ExpMomentReport exp_moment(double beta, double t, const Point& x, const NoiseSpec& noise, const ProcessSpec& process,
                           const Regularization& reg, long n_samples, std::uint64_t seed, const SolverOptions& opt = {});

// int p_t(x, y) u0(y) dy.
double skorohod_mean(double t, const Point& x, const ProcessSpec& process, const InitialCondition& u0);

struct DeterministicReport {
  MCEstimate estimate;
  bool clipped = false;
  double clipped_fraction = 0.0;  // share of grid evaluations that were clipped
};

// E u0(X_t) exp(int_0^t f(t - s, X_s) ds), f clipped to [-bound, bound].
DeterministicReport fk_deterministic(const std::function<double(double, const Point&)>& f, double bound, double t,
                                     const Point& x, const ProcessSpec& process, const InitialCondition& u0,
                                     long n_samples, std::uint64_t seed, const SolverOptions& opt = {});

}  // namespace fkspde
