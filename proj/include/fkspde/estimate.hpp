#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fkspde {

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  long n_samples = 0;
  std::uint64_t seed = 0;
  std::string config_fingerprint;
  // Standard error from 100 contiguous batch means; NaN below 200 samples.
  double batch_std_error = 0.0;
  // log |mean|, meaningful when the mean itself overflows.
  double log_mean = 0.0;
};

// Plain sample statistics; the sum is a fixed-shape pairwise reduction.
MCEstimate summarize(const std::vector<double>& values, std::uint64_t seed = 0, const std::string& fingerprint = "");

// Statistics of sign_i * exp(log_i), computed with a max shift. Throws NumericalFailure
// when a log value is NaN or +inf.
MCEstimate summarize_log(const std::vector<double>& logs, const std::vector<int>& signs, std::uint64_t seed = 0,
                         const std::string& fingerprint = "");

}  // namespace fkspde
