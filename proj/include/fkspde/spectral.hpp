#pragma once

#include <functional>
#include <vector>

#include "fkspde/kernel.hpp"
#include "fkspde/process.hpp"

namespace fkspde {

struct NoiseSpec {
  CovarianceKernel kernel;
  double beta0 = 0.0;

  NoiseSpec() : kernel(CovarianceKernel::dirac(1)) {}
  NoiseSpec(CovarianceKernel k, double b0);

  int dim() const { return kernel.dim; }
  // A_t = 2 t^{1-beta0} / (1 - beta0).
  double a_t(double t) const;
};

enum class Calculus { Stratonovich, Skorohod };
enum class Verdict { Finite, Divergent, Inconclusive };

const char* verdict_name(Verdict v);
const char* calculus_name(Calculus c);

struct DalangOptions {
  double rel_threshold = 1e-3;
  double abs_tol = 1e-8;
  double rel_tol = 1e-6;
  // Fitted tail slopes below -finite_margin count as convergent; above -divergent_margin as divergent.
  double finite_margin = 0.05;
  double divergent_margin = 0.01;
  SpectralScale scale = SpectralScale::Catalog;
};

struct DalangResult {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<double> cutoffs;
  std::vector<double> partial;  // I(R_k), nondecreasing
  double tail_slope = 0.0;      // fitted exponent of the shell increments over the last decade
  double value() const { return partial.empty() ? 0.0 : partial.back(); }
};

// 10^{k/4}, k = 0..32.
std::vector<double> default_cutoffs();

DalangResult dalang_integral(const NoiseSpec& noise, const ProcessSpec& process, Calculus mode,
                             const std::vector<double>& cutoffs = default_cutoffs(), const DalangOptions& opt = {});

// Verdict from the tail exponents of mu-hat and Psi; catalog kernels only.
Verdict power_counting_verdict(const NoiseSpec& noise, const ProcessSpec& process, Calculus mode);

struct SpectralSplit {
  double N = 0.0;
  double m_N = 0.0;
  double eps_N = 0.0;
};

SpectralSplit tail_split(const NoiseSpec& noise, const ProcessSpec& process, double N,
                         SpectralScale scale = SpectralScale::Catalog);

// Integral of shell(r) over [0, N].
double spectral_mass(const CovarianceKernel& k, double N, SpectralScale scale = SpectralScale::Catalog);

// Integral of shell(r) * weight(r) over [N, inf); throws DivergentTail.
double spectral_tail(const CovarianceKernel& k, double N, const std::function<double(double)>& weight,
                     SpectralScale scale = SpectralScale::Catalog);

struct HolderExponents {
  double theta1 = 0.0;
  bool theta1_positive = false;  // false reports NoPositiveExponent
  double theta2 = 0.0;
  bool theta2_available = false;
  bool theta2_positive = false;
};

HolderExponents holder_exponents(const NoiseSpec& noise, const ProcessSpec& process);

// int exp(-2 t Psi(xi + a)) mu-hat(xi) d xi in d = 1.
double shifted_heat_integral(const CovarianceKernel& k, const ProcessSpec& process, double t, double shift);

}  // namespace fkspde
