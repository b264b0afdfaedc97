#include "fkspde/experiment.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fkspde/chaos.hpp"
#include "fkspde/errors.hpp"
#include "fkspde/pde.hpp"
#include "fkspde/regularity.hpp"
#include "fkspde/solver.hpp"
#include "json.hpp"

namespace fkspde {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Rows {
 public:
  explicit Rows(const ExperimentConfig& c) : c_(c), start_(Clock::now()) {}
  void add(const std::string& quantity, const std::string& params, double est, double se, long n) {
    const auto now = Clock::now();
    ResultRow r{c_.id, c_.fingerprint, quantity, params, est, se, n,
                std::chrono::duration<double>(now - start_).count(), c_.seed};
    start_ = now;
    out_.push_back(std::move(r));
  }
  void add(const std::string& quantity, const std::string& params, const MCEstimate& e) {
    add(quantity, params, e.mean, e.std_error, e.n_samples);
  }
  std::vector<ResultRow> take() { return std::move(out_); }

 private:
  const ExperimentConfig& c_;
  Clock::time_point start_;
  std::vector<ResultRow> out_;
};

std::string verdict_of(const NoiseSpec& noise, const ProcessSpec& process, Calculus mode) {
  try {
    Verdict v = dalang_integral(noise, process, mode).verdict;
    if (v == Verdict::Inconclusive) {
      try {
        v = power_counting_verdict(noise, process, mode);
      } catch (const Error&) {
      }
    }
    return verdict_name(v);
  } catch (const Error& e) {
    return std::string("Unavailable(") + error_name(e.kind()) + ")";
  }
}

SolverOptions solver_options(const ExperimentConfig& c) {
  SolverOptions o;
  o.n_steps = c.n_steps;
  o.jitter = c.jitter;
  o.workers = c.workers;
  o.fingerprint = c.fingerprint;
  return o;
}

void run_dalang(const ExperimentConfig& c, Rows& rows) {
  const bool riesz = std::holds_alternative<Riesz>(c.noise.kernel.kind);
  std::vector<double> alphas = c.alpha_grid, betas = c.beta0_grid;
  if (alphas.empty() || !riesz) alphas = {riesz ? std::get<Riesz>(c.noise.kernel.kind).alpha : NAN};
  if (betas.empty()) betas = {c.noise.beta0};
  for (double a : alphas)
    for (double b : betas) {
      const CovarianceKernel k = riesz ? CovarianceKernel::riesz(a, c.noise.dim()) : c.noise.kernel;
      const NoiseSpec noise(k, b);
      const DalangResult r = dalang_integral(noise, c.process, c.mode);
      std::string pc;
      try {
        pc = verdict_name(power_counting_verdict(noise, c.process, c.mode));
      } catch (const Error& e) {
        pc = error_name(e.kind());
      }
      std::string params = "kernel=" + k.name() + ";beta0=" + short_num(b) + ";mode=" + calculus_name(c.mode) +
                           ";verdict=" + verdict_name(r.verdict) + ";power_counting=" + pc +
                           ";tail_slope=" + short_num(r.tail_slope);
      rows.add("dalang_integral", params, r.value(), 0.0, static_cast<long>(r.partial.size()));
    }
}

void run_holder(const ExperimentConfig& c, Rows& rows) {
  RegularityOptions o;
  o.n_steps = c.n_steps;
  o.workers = c.workers;
  HolderExponents th;
  bool have_th = true;
  try {
    th = holder_exponents(c.noise, c.process);
  } catch (const Error&) {
    have_th = false;
  }
  auto fit = [&](const IncrementCurve& curve, const std::string& name, double theory) {
    try {
      const HolderReport r = holder_fit(curve, theory);
      rows.add(name,
               "theoretical=" + short_num(theory) + ";slope=" + short_num(r.slope) + ";ci_low=" +
                   short_num(r.ci_low) + ";ci_high=" + short_num(r.ci_high) + ";residual=" + short_num(r.residual) +
                   ";verdict=" + (r.consistent ? "consistent" : "inconsistent"),
               r.exponent, 0.5 * r.slope_se, r.n_lags);
    } catch (const Error& e) {
      rows.add(name, std::string("error=") + error_name(e.kind()), NAN, NAN, 0);
    }
  };
  const auto lags = dyadic_lags(c.lag_scale, c.levels);
  if (c.lag_kind == "space") {
    IncrementCurve curve;
    for (double L : lags) {
      Point z = Point::Zero(c.noise.dim());
      z(0) = L;
      const MCEstimate e = v_space_increment(z, c.t, c.noise, c.process, c.reg, c.n_samples, c.seed, o);
      rows.add("space_increment", "lag=" + short_num(L), e);
      curve.lags.push_back(L);
      curve.values.push_back(e.mean);
      curve.std_errors.push_back(e.std_error);
    }
    fit(curve, "holder_exponent_space", have_th && th.theta1_positive ? th.theta1 : NAN);
    return;
  }
  IncrementCurve ca, cb;
  for (double h : lags) {
    const TimeIncrement e = v_time_increment(h, c.t, c.noise, c.process, c.reg, c.n_samples, c.seed, o);
    rows.add("time_increment_a", "lag=" + short_num(h), e.a);
    rows.add("time_increment_b", "lag=" + short_num(h), e.b);
    for (auto [curve, est] : {std::pair{&ca, &e.a}, std::pair{&cb, &e.b}}) {
      curve->lags.push_back(h);
      curve->values.push_back(est->mean);
      curve->std_errors.push_back(est->std_error);
    }
  }
  fit(ca, "holder_exponent_time_a", have_th && th.theta2_available ? th.theta2 : NAN);
  fit(cb, "holder_exponent_time_b", 0.5);
}

void run_chaos(const ExperimentConfig& c, Rows& rows) {
  ChaosOptions o;
  o.max_order = std::stoi(c.get("numerics.max_order"));
  o.is_samples = c.is_samples;
  o.workers = c.workers;
  const SecondMomentSeries s = chaos_second_moment(c.t, c.x, c.n_trunc, c.noise, c.process, c.u0, c.seed, o);
  for (const auto& term : s.terms)
    rows.add("chaos_norm", "n=" + std::to_string(term.n) + ";method=" + chaos_method_name(term.method), term.value,
             term.std_error, term.samples);
  rows.add("second_moment", "n_trunc=" + std::to_string(c.n_trunc), s.estimate, s.std_error, c.n_trunc + 1);
  rows.add("tail_bound",
           "split_N=" + short_num(s.tail.split_N) + ";eps_tilde=" + short_num(s.tail.eps_tilde) +
               ";c0=" + short_num(s.tail.c0),
           s.tail.bound, 0.0, 0);
  rows.add("second_moment_upper", "", s.upper, s.std_error, c.n_trunc + 1);
  rows.add("hypercontractive_partial", "n_trunc=" + std::to_string(c.n_trunc), s.hypercontractive_partials.back(),
           0.0, c.n_trunc + 1);
}

void run_fk_pde(const ExperimentConfig& c, Rows& rows) {
  require(c.noise.dim() == 1 && std::holds_alternative<Brownian>(c.process.kind), ErrorKind::UnsupportedCombination,
          "the PDE comparison is one-dimensional Brownian");
  const double A = c.amplitude, k = c.wavenumber;
  auto f = [&](double, const Point& y) { return A * std::cos(k * y(0)); };
  const DeterministicReport fk =
      fk_deterministic(f, std::abs(A), c.t, c.x, c.process, c.u0, c.n_samples, c.seed, solver_options(c));
  rows.add("fk_deterministic", "clipped_fraction=" + short_num(fk.clipped_fraction), fk.estimate);
  PdeGrid g;
  g.points = c.pde_points;
  g.halfwidth = c.pde_halfwidth;
  g.steps = c.pde_steps;
  const InitialCondition& u0 = c.u0;
  const double pde = crank_nicolson_1d([&](double y) { return A * std::cos(k * y); },
                                       [&](double y) { return u0(Point::Constant(1, y)); },
                                       c.process.h.psi.scale, c.t, c.x(0), g);
  rows.add("crank_nicolson", "points=" + std::to_string(g.points) + ";steps=" + std::to_string(g.steps), pde, 0.0,
           g.points);
  rows.add("relative_error", "", std::abs(fk.estimate.mean - pde) / std::abs(pde),
           fk.estimate.std_error / std::abs(pde), fk.estimate.n_samples);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c) {
  ExperimentResult out;
  out.header.push_back("experiment: " + c.id);
  out.header.push_back("kind: " + c.kind);
  out.header.push_back("fingerprint: " + c.fingerprint);
  const bool noisy = c.kind != "dalang" && c.kind != "fk-pde";
  if (noisy) {
    out.header.push_back("noise: " + c.noise.kernel.name() + ", beta0 = " + short_num(c.noise.beta0));
    out.header.push_back("process: " + c.process.name());
    out.header.push_back("dalang_stratonovich: " + verdict_of(c.noise, c.process, Calculus::Stratonovich));
    out.header.push_back("dalang_skorohod: " + verdict_of(c.noise, c.process, Calculus::Skorohod));
  }
  Rows rows(c);
  const SolverOptions so = solver_options(c);
  if (c.kind == "dalang") {
    run_dalang(c, rows);
  } else if (c.kind == "simulate") {
    const SolutionSummary s =
        simulate_solution(c.t, c.x, c.mode, c.inner_paths, c.noise, c.process, c.u0, c.reg, c.n_samples, c.seed, so);
    const std::string params = std::string("mode=") + calculus_name(c.mode) + ";K=" + std::to_string(c.inner_paths);
    rows.add("u_mean", params, s.estimate);
    rows.add("positive_fraction", params, s.positive_fraction, 0.0, c.n_samples);
  } else if (c.kind == "moments") {
    if (c.statistic == "hamiltonian_self" || c.statistic == "hamiltonian_cross") {
      const bool cross = c.statistic == "hamiltonian_cross";
      const MCEstimate e = hamiltonian_mean(cross, c.t, c.x, c.noise, c.process, c.reg, c.n_samples, c.seed, so);
      rows.add(c.statistic, "reg=" + c.reg.describe() + ";n_steps=" + std::to_string(c.n_steps), e);
    } else if (c.statistic == "exp_moment") {
      const ExpMomentReport r = exp_moment(c.beta, c.t, c.x, c.noise, c.process, c.reg, c.n_samples, c.seed, so);
      const std::string params = "beta=" + short_num(c.beta) + ";half_gap_se=" + short_num(r.half_gap_se) +
                                 ";unstable=" + (r.unstable ? "1" : "0");
      rows.add("exp_moment", params, r.estimate);
      rows.add("exp_moment_doubled", params, r.doubled);
    } else {
      const MCEstimate e =
          moment_fk(c.p, c.t, c.x, c.mode, c.noise, c.process, c.u0, c.reg, c.n_samples, c.seed, so);
      rows.add("moment", std::string("p=") + std::to_string(c.p) + ";mode=" + calculus_name(c.mode), e);
    }
  } else if (c.kind == "chaos") {
    run_chaos(c, rows);
  } else if (c.kind == "holder") {
    run_holder(c, rows);
  } else if (c.kind == "malliavin") {
    RegularityOptions o;
    o.n_steps = c.n_steps;
    o.workers = c.workers;
    const MCEstimate e =
        malliavin_norm_sq(c.t, c.x, c.mode, c.noise, c.process, c.u0, c.reg, c.n_samples, c.seed, o);
    rows.add("malliavin_norm_sq", std::string("mode=") + calculus_name(c.mode), e);
  } else if (c.kind == "fk-pde") {
    run_fk_pde(c, rows);
  } else {
    throw Error(ErrorKind::ConfigError, "unknown experiment kind " + c.kind);
  }
  out.rows = rows.take();
  return out;
}

std::string format_csv(const ExperimentResult& r, bool record_time) {
  std::ostringstream os;
  for (const auto& h : r.header) os << "# " << h << "\n";
  os << "schema_version,experiment_id,fingerprint,quantity,parameters,estimate,std_error,n,wall_time,seed\n";
  for (const auto& row : r.rows) {
    os << kSchemaVersion << ',' << row.experiment_id << ',' << row.fingerprint << ',' << row.quantity << ','
       << row.parameters << ',' << num(row.estimate) << ',' << num(row.std_error) << ',' << row.n << ','
       << (record_time ? num(row.wall_time) : std::string("NA")) << ',' << row.seed << "\n";
  }
  return os.str();
}

namespace {

void atomic_write(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::ConfigError, "cannot write " + tmp.string());
    f << text;
    f.flush();
    if (!f) throw Error(ErrorKind::ConfigError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string write_results(const std::string& dir, const ExperimentConfig& cfg, const ExperimentResult& r,
                          bool record_time) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base = std::filesystem::path(dir) / cfg.id;
  nlohmann::ordered_json head;
  head["schema_version"] = kSchemaVersion;
  head["experiment_id"] = cfg.id;
  head["fingerprint"] = cfg.fingerprint;
  head["config"] = cfg.entries;
  head["header"] = r.header;
  std::string jsonl = head.dump() + "\n";
  for (const auto& row : r.rows) {
    nlohmann::ordered_json j;
    j["quantity"] = row.quantity;
    j["parameters"] = row.parameters;
    j["estimate"] = row.estimate;
    j["std_error"] = row.std_error;
    j["n"] = row.n;
    j["wall_time"] = row.wall_time;
    j["seed"] = row.seed;
    jsonl += j.dump() + "\n";
  }
  atomic_write(base.string() + ".jsonl", jsonl);
  const std::string csv = base.string() + ".csv";
  atomic_write(csv, format_csv(r, record_time));
  return csv;
}

}  // namespace fkspde
