#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fkspde/hamiltonian.hpp"
#include "fkspde/process.hpp"
#include "fkspde/solver.hpp"
#include "fkspde/spectral.hpp"

namespace fkspde {

struct ExperimentConfig {
  std::string kind;
  std::string id;
  // Every known key as "section.key", defaults filled in and numbers in canonical form.
  std::map<std::string, std::string> entries;
  std::string fingerprint;

  double t = 1.0;
  Point x;
  std::uint64_t seed = 1;
  int workers = 1;
  Calculus mode = Calculus::Skorohod;
  std::string statistic;

  NoiseSpec noise;
  ProcessSpec process;
  InitialCondition u0;
  Regularization reg;

  int n_steps = 512;
  long n_samples = 1000;
  int inner_paths = 16;
  int p = 2;
  double beta = 1.0;
  int n_trunc = 8;
  long is_samples = 200000;
  double jitter = 0.0;

  std::string lag_kind;
  double lag_scale = 1.0;
  int levels = 6;

  std::vector<double> alpha_grid, beta0_grid;

  double amplitude = 0.5;
  double wavenumber = 1.0;
  int pde_points = 2001;
  double pde_halfwidth = 10.0;
  int pde_steps = 2000;

  std::string get(const std::string& key) const { return entries.at(key); }
};

// Strict INI parsing; unknown sections or keys and out-of-range values throw ConfigError with the line.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::string& path);

// Re-validate after editing entries (seed or workers overrides) and refresh the fingerprint.
ExperimentConfig rebuild_config(std::map<std::string, std::string> entries, const std::string& origin);

// 64-bit FNV-1a over the sorted entries, workers excluded; 16 hex digits.
std::string config_fingerprint(const std::map<std::string, std::string>& entries);

// Documented keys with their defaults, one "section.key = default" per line.
std::string config_reference();

}  // namespace fkspde
