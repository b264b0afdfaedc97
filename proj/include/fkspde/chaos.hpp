#pragma once

#include <cstdint>
#include <vector>

#include "fkspde/process.hpp"
#include "fkspde/solver.hpp"
#include "fkspde/spectral.hpp"

namespace fkspde {

enum class ChaosMethod { Deterministic, ImportanceSampled };

const char* chaos_method_name(ChaosMethod m);

struct ChaosKernelNorm {
  int n = 0;
  double value = 0.0;      // n! |f~_n|^2
  double std_error = 0.0;  // zero for deterministic quadrature
  ChaosMethod method = ChaosMethod::Deterministic;
  long samples = 0;
};

struct ChaosOptions {
  int max_order = 8;
  long is_samples = 200000;
  // Tensor Gauss-Legendre sizes for the n = 2 quadrature.
  int time_nodes = 24;
  int freq_nodes = 32;
  // Use importance sampling even where a deterministic rule exists.
  bool force_sampling = false;
  int workers = 1;
};

// n! |f~_n(., t, x)|^2 for a constant initial condition; equals E[H_12^n] / n! times u0^2,
// H_12 the cross Hamiltonian of two independent paths from x.
ChaosKernelNorm chaos_kernel_norm(int n, double t, const Point& x, const NoiseSpec& noise, const ProcessSpec& process,
                                  const InitialCondition& u0, std::uint64_t seed, const ChaosOptions& opt = {});

struct SeriesTail {
  int n_trunc = 0;
  double partial_sum = 0.0;
  double bound = 0.0;  // sum over n > n_trunc of the per-order bound
  double split_N = 0.0;
  double m_N = 0.0;        // mu mass of |xi| <= N
  double eps_tilde = 0.0;  // int_{|xi| > N} mu / (2 Psi)
  double eps_N = 0.0;      // int_{|xi| > N} mu Psi^{-(1 - beta0)}
  double c0 = 0.0;         // eps_tilde / eps_N
  double a_t = 0.0;
};

struct SecondMomentSeries {
  std::vector<ChaosKernelNorm> terms;
  double estimate = 0.0;  // partial sum, the estimate of E[u^2]
  double std_error = 0.0;
  SeriesTail tail;
  double upper = 0.0;  // partial sum + tail bound
  // Partial sums of 3^{n/2} (n! |f~_n|^2)^{1/2}.
  std::vector<double> hypercontractive_partials;
};

SecondMomentSeries chaos_second_moment(double t, const Point& x, int n_trunc, const NoiseSpec& noise,
                                       const ProcessSpec& process, const InitialCondition& u0, std::uint64_t seed,
                                       const ChaosOptions& opt = {});

// Bound on n! |f~_n|^2: A_t^n sum_k C(n, k) (t m_N)^k / k! eps_tilde^{n - k}, times u0^2.
double chaos_order_bound(int n, double a_t, double t, double m_N, double eps_tilde);

// Split N minimising the tail bound over a log grid; throws TailBoundUnavailable when no N has
// 2 A_t eps_tilde < 1.
SeriesTail chaos_tail(double t, int n_trunc, const NoiseSpec& noise, const ProcessSpec& process);

// prod Gamma(1 - a_i) / Gamma(n - a + 1) t^{n - a}, a = sum a_i: the integral over the ordered
// simplex 0 < r_1 < ... < r_n < t of prod (r_i - r_{i-1})^{-a_i}.
double simplex_dirichlet(const std::vector<double>& alphas, double t);

}  // namespace fkspde
