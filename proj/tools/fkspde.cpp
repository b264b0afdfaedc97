#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fkspde/config.hpp"
#include "fkspde/errors.hpp"
#include "fkspde/experiment.hpp"

#ifndef FKSPDE_PRESET_DIR
#define FKSPDE_PRESET_DIR "presets"
#endif

namespace {

struct Globals {
  std::string config;
  std::optional<long long> seed;
  std::optional<int> workers;
  std::string out = "results";
  bool record_time = false;
  std::string presets = FKSPDE_PRESET_DIR;
};

std::string out_dir(const Globals& g) {
  if (const char* env = std::getenv("FKSPDE_OUT"); env && *env) return env;
  return g.out;
}

fkspde::ExperimentConfig prepare(const std::string& path, const Globals& g) {
  fkspde::ExperimentConfig c = fkspde::load_config(path);
  if (!g.seed && !g.workers) return c;
  auto e = c.entries;
  if (g.seed) e["experiment.seed"] = std::to_string(*g.seed);
  if (g.workers) e["experiment.workers"] = std::to_string(*g.workers);
  return fkspde::rebuild_config(std::move(e), path);
}

int run_one(const std::string& path, const std::string& expected_kind, const Globals& g) {
  const fkspde::ExperimentConfig c = prepare(path, g);
  if (!expected_kind.empty() && c.kind != expected_kind)
    throw fkspde::Error(fkspde::ErrorKind::ConfigError,
                        path + ": experiment.kind is " + c.kind + " but the subcommand is " + expected_kind);
  const fkspde::ExperimentResult r = fkspde::run_experiment(c);
  const std::string csv = fkspde::write_results(out_dir(g), c, r, g.record_time);
  for (const auto& row : r.rows)
    std::cout << c.id << "  " << row.quantity << "  " << row.parameters << "  " << row.estimate << " +- "
              << row.std_error << "\n";
  std::cout << "wrote " << csv << "\n";
  return 0;
}

int report(const std::exception& e) {
  if (auto err = dynamic_cast<const fkspde::Error*>(&e)) {
    std::cerr << "error: " << err->what() << "\n";
    return fkspde::is_precondition(err->kind()) ? 2 : 1;
  }
  std::cerr << "error: " << e.what() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feynman-Kac Monte Carlo for stochastic heat equations with colored noise"};
  app.require_subcommand(1);
  // Global flags may follow the subcommand.
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Override the master seed");
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)");
  app.add_option("--out", g.out, "Output directory (FKSPDE_OUT takes precedence)");
  app.add_flag("--record-time", g.record_time, "Write wall times into the CSV");

  const std::vector<std::string> kinds = {"dalang", "simulate", "moments", "chaos", "holder", "malliavin", "fk-pde"};
  std::vector<CLI::App*> subs;
  for (const auto& k : kinds) {
    auto* s = app.add_subcommand(k, "Run a " + k + " experiment");
    s->add_option("--config", g.config, "Experiment configuration file")->required()->check(CLI::ExistingFile);
    subs.push_back(s);
  }
  auto* self = app.add_subcommand("selftest", "Run every preset and write its results");
  self->add_option("--presets", g.presets, "Preset directory")->check(CLI::ExistingDirectory);
  auto* keys = app.add_subcommand("keys", "List configuration keys with defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (keys->parsed()) {
      std::cout << fkspde::config_reference();
      return 0;
    }
    if (self->parsed()) {
      std::vector<std::string> files;
      for (const auto& e : std::filesystem::directory_iterator(g.presets))
        if (e.path().extension() == ".ini") files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
      int worst = 0;
      for (const auto& f : files) {
        try {
          run_one(f, "", g);
        } catch (const std::exception& e) {
          std::cerr << f << ": ";
          worst = std::max(worst, report(e));
        }
      }
      return worst;
    }
    for (size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) return run_one(g.config, kinds[i], g);
  } catch (const std::exception& e) {
    return report(e);
  }
  return 0;
}
