#include "fkspde/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fkspde/errors.hpp"
#include "fkspde/parallel.hpp"

namespace fkspde {

namespace {

constexpr int kBatches = 100;

// mean, sample sd / sqrt(n), batch-means se of y.
void moments(const std::vector<double>& y, double& mean, double& se, double& batch_se) {
  const size_t n = y.size();
  mean = pairwise_sum(y) / n;
  std::vector<double> dev(n);
  for (size_t i = 0; i < n; ++i) dev[i] = (y[i] - mean) * (y[i] - mean);
  se = n > 1 ? std::sqrt(pairwise_sum(dev) / (n - 1) / n) : 0.0;
  batch_se = std::numeric_limits<double>::quiet_NaN();
  if (n >= 2 * kBatches) {
    std::vector<double> bm(kBatches);
    for (int b = 0; b < kBatches; ++b) {
      const size_t lo = n * b / kBatches, hi = n * (b + 1) / kBatches;
      bm[b] = pairwise_sum(y.data() + lo, hi - lo) / (hi - lo);
    }
    const double mb = pairwise_sum(bm) / kBatches;
    for (double& v : bm) v = (v - mb) * (v - mb);
    batch_se = std::sqrt(pairwise_sum(bm) / (kBatches - 1) / kBatches);
  }
}

}  // namespace

MCEstimate summarize(const std::vector<double>& values, std::uint64_t seed, const std::string& fingerprint) {
  require(!values.empty(), ErrorKind::InvalidParameter, "no samples to summarize");
  for (double v : values)
    if (!std::isfinite(v)) throw Error(ErrorKind::NumericalFailure, "NonFinite: sample value is not finite");
  MCEstimate e;
  moments(values, e.mean, e.std_error, e.batch_std_error);
  e.n_samples = static_cast<long>(values.size());
  e.seed = seed;
  e.config_fingerprint = fingerprint;
  e.log_mean = std::log(std::abs(e.mean));
  return e;
}

MCEstimate summarize_log(const std::vector<double>& logs, const std::vector<int>& signs, std::uint64_t seed,
                         const std::string& fingerprint) {
  require(!logs.empty() && logs.size() == signs.size(), ErrorKind::InvalidParameter, "bad log-sample arrays");
  double shift = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < logs.size(); ++i) {
    if (signs[i] == 0) continue;
    if (std::isnan(logs[i]) || logs[i] == std::numeric_limits<double>::infinity())
      throw Error(ErrorKind::NumericalFailure, "NonFinite: log sample value is not finite");
    shift = std::max(shift, logs[i]);
  }
  if (!std::isfinite(shift)) shift = 0.0;
  std::vector<double> y(logs.size());
  for (size_t i = 0; i < logs.size(); ++i) y[i] = signs[i] == 0 ? 0.0 : signs[i] * std::exp(logs[i] - shift);
  MCEstimate e;
  double m, se, bse;
  moments(y, m, se, bse);
  const double scale = std::exp(shift);
  e.mean = m * scale;
  e.std_error = se * scale;
  e.batch_std_error = bse * scale;
  e.log_mean = shift + std::log(std::abs(m));
  e.n_samples = static_cast<long>(logs.size());
  e.seed = seed;
  e.config_fingerprint = fingerprint;
  return e;
}

}  // namespace fkspde
