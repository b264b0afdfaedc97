#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fkspde/config.hpp"

namespace fkspde {

inline constexpr int kSchemaVersion = 1;

struct ResultRow {
  std::string experiment_id;
  std::string fingerprint;
  std::string quantity;
  std::string parameters;  // "key=value;key=value"
  double estimate = 0.0;
  double std_error = 0.0;
  long n = 0;
  double wall_time = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  // "# name: value" lines written above the CSV header.
  std::vector<std::string> header;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// CSV text; wall_time is written as NA unless record_time is set, so reruns compare byte for byte.
std::string format_csv(const ExperimentResult& r, bool record_time = false);

// Writes <dir>/<id>.csv and <dir>/<id>.jsonl via temporary files and rename; returns the CSV path.
std::string write_results(const std::string& dir, const ExperimentConfig& cfg, const ExperimentResult& r,
                          bool record_time = false);

}  // namespace fkspde
