#include "fkspde/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fkspde/errors.hpp"

namespace fkspde {

namespace {

enum class Type { Real, Int, List, Choice, Text };

struct KeySpec {
  const char* key;
  const char* def;
  Type type;
  double lo = -INFINITY, hi = INFINITY;
  std::vector<std::string> choices = {};
};

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = {
      {"experiment.kind", "", Type::Choice, 0, 0,
       {"dalang", "simulate", "moments", "chaos", "holder", "malliavin", "fk-pde"}},
      {"experiment.id", "", Type::Text},
      {"experiment.t", "1", Type::Real, 1e-12, 1e6},
      {"experiment.x", "0", Type::List},
      {"experiment.dim", "1", Type::Int, 1, 3},
      {"experiment.seed", "1", Type::Int, 0, 9.007199254740992e15},
      {"experiment.workers", "1", Type::Int, 0, 1024},
      {"experiment.mode", "skorohod", Type::Choice, 0, 0, {"stratonovich", "skorohod"}},
      {"experiment.statistic", "moment", Type::Choice, 0, 0,
       {"moment", "hamiltonian_self", "hamiltonian_cross", "exp_moment", "solution"}},
      {"noise.kernel", "dirac", Type::Choice, 0, 0, {"dirac", "riesz", "fractional", "cauchy", "poisson", "ou"}},
      {"noise.alpha", "0.5", Type::Real, 0, INFINITY},
      {"noise.hurst", "0.75", Type::List},
      {"noise.beta0", "0", Type::Real, 0, 1},
      {"noise.mollify", "0", Type::Real, 0, INFINITY},
      {"process.type", "brownian", Type::Choice, 0, 0, {"brownian", "stable"}},
      {"process.alpha", "1.5", Type::Real, 0, 2},
      {"initial.type", "constant", Type::Choice, 0, 0, {"constant", "indicator"}},
      {"initial.value", "1", Type::Real},
      {"initial.lo", "-1", Type::List},
      {"initial.hi", "1", Type::List},
      {"numerics.n_steps", "512", Type::Int, 2, 65536},
      {"numerics.n_samples", "1000", Type::Int, 2, 1e9},
      {"numerics.inner_paths", "16", Type::Int, 1, 4096},
      {"numerics.regularization", "mollify", Type::Choice, 0, 0, {"none", "mollify", "cutoff", "cap"}},
      {"numerics.reg_parameter", "0", Type::Real, 0, INFINITY},
      {"numerics.p", "2", Type::Int, 1, 16},
      {"numerics.beta", "1", Type::Real, 0, INFINITY},
      {"numerics.n_trunc", "8", Type::Int, 0, 64},
      {"numerics.max_order", "8", Type::Int, 0, 64},
      {"numerics.is_samples", "200000", Type::Int, 100, 1e9},
      {"numerics.jitter", "0", Type::Real, 0, INFINITY},
      {"holder.lags", "space", Type::Choice, 0, 0, {"space", "time"}},
      {"holder.lag_scale", "1", Type::Real, 1e-12, INFINITY},
      {"holder.levels", "6", Type::Int, 4, 30},
      {"dalang.alpha_grid", "", Type::List},
      {"dalang.beta0_grid", "", Type::List},
      {"fkpde.amplitude", "0.5", Type::Real},
      {"fkpde.wavenumber", "1", Type::Real},
      {"fkpde.points", "2001", Type::Int, 11, 1e6},
      {"fkpde.halfwidth", "10", Type::Real, 1e-6, INFINITY},
      {"fkpde.steps", "2000", Type::Int, 1, 1e7},
  };
  return s;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  std::string where = origin;
  if (line > 0) where += ":" + std::to_string(line);
  throw Error(ErrorKind::ConfigError, where + ": " + what);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string canonical_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_real(const std::string& s, double& v) {
  if (s.empty()) return false;
  size_t pos = 0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size() && std::isfinite(v);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!parse_real(trim(item), v)) throw std::invalid_argument(item);
    out.push_back(v);
  }
  return out;
}

// Validates one raw value and returns its canonical form.
std::string normalize(const KeySpec& k, const std::string& raw, const std::string& origin, int line) {
  const std::string v = trim(raw);
  switch (k.type) {
    case Type::Text:
      return v;
    case Type::Choice:
      for (const auto& c : k.choices)
        if (c == v) return v;
      fail(origin, line, std::string("key ") + k.key + " has unknown value '" + v + "'");
    case Type::Real: {
      double d;
      if (!parse_real(v, d)) fail(origin, line, std::string("key ") + k.key + " needs a real number, got '" + v + "'");
      if (d < k.lo || d > k.hi)
        fail(origin, line, std::string("key ") + k.key + " = " + v + " is out of range");
      return canonical_real(d);
    }
    case Type::Int: {
      double d;
      if (!parse_real(v, d) || d != std::floor(d))
        fail(origin, line, std::string("key ") + k.key + " needs an integer, got '" + v + "'");
      if (d < k.lo || d > k.hi) fail(origin, line, std::string("key ") + k.key + " = " + v + " is out of range");
      return std::to_string(static_cast<long long>(d));
    }
    case Type::List: {
      std::vector<double> xs;
      try {
        xs = parse_list(v);
      } catch (const std::invalid_argument&) {
        fail(origin, line, std::string("key ") + k.key + " needs a comma-separated list of reals");
      }
      std::string out;
      for (size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + canonical_real(xs[i]);
      return out;
    }
  }
  return v;
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : schema())
    if (key == k.key) return &k;
  return nullptr;
}

Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Typed view of normalized entries.
ExperimentConfig build(std::map<std::string, std::string> e, const std::string& origin) {
  for (const auto& k : schema())
    if (!e.count(k.key)) e[k.key] = normalize(k, k.def, origin, 0);
  ExperimentConfig c;
  auto real = [&](const char* k) { return std::stod(e.at(k)); };
  auto integer = [&](const char* k) { return std::stoll(e.at(k)); };
  auto list = [&](const char* k) { return parse_list(e.at(k)); };
  c.kind = e.at("experiment.kind");
  if (c.kind.empty()) fail(origin, 0, "experiment.kind is required");
  if (e.at("experiment.id").empty()) {
    const std::string stem = std::filesystem::path(origin).stem().string();
    e["experiment.id"] = stem.empty() || stem[0] == '<' ? c.kind : stem;
  }
  c.id = e.at("experiment.id");
  const int d = static_cast<int>(integer("experiment.dim"));
  c.t = real("experiment.t");
  const auto xs = list("experiment.x");
  if (static_cast<int>(xs.size()) == 1 && d > 1)
    c.x = Point::Constant(d, xs[0]);
  else if (static_cast<int>(xs.size()) == d)
    c.x = vec(xs);
  else
    fail(origin, 0, "experiment.x must have 1 or dim entries");
  c.seed = static_cast<std::uint64_t>(integer("experiment.seed"));
  c.workers = static_cast<int>(integer("experiment.workers"));
  c.mode = e.at("experiment.mode") == "stratonovich" ? Calculus::Stratonovich : Calculus::Skorohod;
  c.statistic = e.at("experiment.statistic");
  try {
    const std::string kern = e.at("noise.kernel");
    const double a = real("noise.alpha");
    CovarianceKernel k = kern == "dirac"        ? CovarianceKernel::dirac(d)
                         : kern == "riesz"      ? CovarianceKernel::riesz(a, d)
                         : kern == "cauchy"     ? CovarianceKernel::cauchy(d)
                         : kern == "poisson"    ? CovarianceKernel::poisson(d)
                         : kern == "ou"         ? CovarianceKernel::ornstein_uhlenbeck(a, d)
                                                : CovarianceKernel::fractional([&] {
                                                    auto h = list("noise.hurst");
                                                    if (h.size() == 1) h.assign(d, h[0]);
                                                    return h;
                                                  }());
    if (k.dim != d) fail(origin, 0, "noise.hurst must have 1 or dim entries");
    const double eps = real("noise.mollify");
    if (eps > 0) k = mollified_kernel(k, eps);
    c.noise = NoiseSpec(k, real("noise.beta0"));
    c.process = e.at("process.type") == "stable" ? ProcessSpec::stable(real("process.alpha"), d)
                                                 : ProcessSpec::brownian(d);
    if (e.at("initial.type") == "constant") {
      c.u0 = InitialCondition::constant(real("initial.value"));
    } else {
      auto lo = list("initial.lo"), hi = list("initial.hi");
      if (lo.size() == 1) lo.assign(d, lo[0]);
      if (hi.size() == 1) hi.assign(d, hi[0]);
      if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
        fail(origin, 0, "initial.lo and initial.hi must have 1 or dim entries");
      c.u0 = InitialCondition::indicator(vec(lo), vec(hi));
    }
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::ConfigError) throw;
    fail(origin, 0, err.what());
  }
  const std::string r = e.at("numerics.regularization");
  const double rp = real("numerics.reg_parameter");
  c.reg = r == "none"     ? Regularization::none()
          : r == "cutoff" ? Regularization::cutoff(rp)
          : r == "cap"    ? Regularization::cap(rp)
                          : Regularization::mollify(rp);
  if ((r == "cutoff" || r == "cap") && rp <= 0) fail(origin, 0, "numerics.reg_parameter must be positive for " + r);
  c.n_steps = static_cast<int>(integer("numerics.n_steps"));
  c.n_samples = static_cast<long>(integer("numerics.n_samples"));
  c.inner_paths = static_cast<int>(integer("numerics.inner_paths"));
  c.p = static_cast<int>(integer("numerics.p"));
  c.beta = real("numerics.beta");
  c.n_trunc = static_cast<int>(integer("numerics.n_trunc"));
  c.is_samples = static_cast<long>(integer("numerics.is_samples"));
  c.jitter = real("numerics.jitter");
  c.lag_kind = e.at("holder.lags");
  c.lag_scale = real("holder.lag_scale");
  c.levels = static_cast<int>(integer("holder.levels"));
  c.alpha_grid = list("dalang.alpha_grid");
  c.beta0_grid = list("dalang.beta0_grid");
  c.amplitude = real("fkpde.amplitude");
  c.wavenumber = real("fkpde.wavenumber");
  c.pde_points = static_cast<int>(integer("fkpde.points"));
  c.pde_halfwidth = real("fkpde.halfwidth");
  c.pde_steps = static_cast<int>(integer("fkpde.steps"));
  c.entries = std::move(e);
  c.fingerprint = config_fingerprint(c.entries);
  return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> e;
  std::istringstream in(text);
  std::string line, section;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(origin, no, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      bool known = false;
      for (const auto& k : schema()) known = known || std::string(k.key).rfind(section + ".", 0) == 0;
      if (!known) fail(origin, no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(origin, no, "expected key = value");
    if (section.empty()) fail(origin, no, "key outside of any section");
    const std::string key = section + "." + trim(s.substr(0, eq));
    const KeySpec* k = find_key(key);
    if (!k) fail(origin, no, "unknown key " + key);
    if (e.count(key)) fail(origin, no, "duplicate key " + key);
    e[key] = normalize(*k, s.substr(eq + 1), origin, no);
  }
  return build(std::move(e), origin);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ConfigError, path + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

ExperimentConfig rebuild_config(std::map<std::string, std::string> entries, const std::string& origin) {
  for (auto& [key, v] : entries) {
    const KeySpec* k = find_key(key);
    if (!k) fail(origin, 0, "unknown key " + key);
    v = normalize(*k, v, origin, 0);
  }
  return build(std::move(entries), origin);
}

std::string config_fingerprint(const std::map<std::string, std::string>& entries) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [k, v] : entries) {
    if (k == "experiment.workers") continue;
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_reference() {
  std::string out;
  for (const auto& k : schema()) out += std::string(k.key) + " = " + k.def + "\n";
  return out;
}

}  // namespace fkspde
