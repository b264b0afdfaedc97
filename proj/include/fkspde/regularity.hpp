#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fkspde/estimate.hpp"
#include "fkspde/hamiltonian.hpp"
#include "fkspde/process.hpp"
#include "fkspde/solver.hpp"
#include "fkspde/spectral.hpp"

namespace fkspde {

struct IncrementCurve {
  std::vector<double> lags;
  std::vector<double> values;
  std::vector<double> std_errors;
};

struct HolderReport {
  double exponent = 0.0;  // variance slope / 2
  double slope = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95% interval for the exponent
  double residual = 0.0;               // weighted rms of the log-log fit
  double theoretical = 0.0;            // NaN when no bound is supplied
  bool consistent = true;              // |exponent - theoretical| <= tolerance
  int n_lags = 0;
};

struct RegularityOptions {
  int n_steps = 1024;
  int workers = 1;
};

// 2 E int int |r - s|^{-beta0} [gamma(X_r - X_s) - gamma(X_r - X_s + z)] dr ds on common paths.
MCEstimate v_space_increment(const Point& z, double t, const NoiseSpec& noise, const ProcessSpec& process,
                             const Regularization& reg, long n_samples, std::uint64_t seed,
                             const RegularityOptions& opt = {});

struct TimeIncrement {
  // E |int_0^t [delta(X_{t+h-s}) - delta(X_{t-s})] W(ds)|^2.
  MCEstimate a;
  // E |int_t^{t+h} delta(X_{t+h-s}) W(ds)|^2.
  MCEstimate b;
};

// h must be a whole number of steps t / n_steps.
TimeIncrement v_time_increment(double h, double t, const NoiseSpec& noise, const ProcessSpec& process,
                               const Regularization& reg, long n_samples, std::uint64_t seed,
                               const RegularityOptions& opt = {});

// Weighted log-log fit over the positive lags; tolerance applies to |exponent - theoretical|.
HolderReport holder_fit(const IncrementCurve& curve, double theoretical = std::numeric_limits<double>::quiet_NaN(),
                        double tolerance = 0.15);

// Lags 2^{-1}, ..., 2^{-levels} times L.
std::vector<double> dyadic_lags(double L, int levels = 6);

struct MalliavinSample {
  double stratonovich = 0.0;
  double skorohod = 0.0;
};

// Per-pair integrands u0 u0 exp(.) Q_XX~ of both modes on the same paths.
std::vector<MalliavinSample> malliavin_samples(double t, const Point& x, const NoiseSpec& noise,
                                               const ProcessSpec& process, const InitialCondition& u0,
                                               const Regularization& reg, long n_samples, std::uint64_t seed,
                                               const RegularityOptions& opt = {});

MCEstimate malliavin_norm_sq(double t, const Point& x, Calculus mode, const NoiseSpec& noise,
                             const ProcessSpec& process, const InitialCondition& u0, const Regularization& reg,
                             long n_samples, std::uint64_t seed, const RegularityOptions& opt = {});

// E gamma(X_r - X~_s)^{-p} with r, s uniform on [0, t].
MCEstimate negative_moment(double p, double t, const Point& x, const CovarianceKernel& kernel,
                           const ProcessSpec& process, long n_samples, std::uint64_t seed, int workers = 1);

}  // namespace fkspde
