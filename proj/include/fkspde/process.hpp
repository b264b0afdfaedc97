#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "fkspde/rng.hpp"

namespace fkspde {

using Point = Eigen::VectorXd;

// Psi(xi) = scale * |xi|^power.
struct CharacteristicExponent {
  double scale = 0.5;
  double power = 2.0;
  double operator()(double r) const;
  // Inverse on [0, inf): the radius where Psi reaches v.
  double radius_at(double v) const;
};

struct AssumptionH {
  double c0 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  CharacteristicExponent psi;
};

struct Brownian {};

struct IsotropicStable {
  double alpha = 2.0;
};

struct DiffusionSDE {
  std::function<Point(const Point&)> drift;
  std::function<Eigen::MatrixXd(const Point&)> dispersion;
  double ellipticity = 1.0;
  // Optional transition density p_t(x, y).
  std::function<double(double, const Point&, const Point&)> density;
};

struct ProcessSpec {
  std::variant<Brownian, IsotropicStable, DiffusionSDE> kind;
  int dim = 1;
  AssumptionH h;

  static ProcessSpec brownian(int d = 1);
  static ProcessSpec stable(double alpha, int d = 1);
  static ProcessSpec diffusion(DiffusionSDE sde, int d, AssumptionH h);

  double psi(double r) const { return h.psi(r); }
  // Closed-form characteristic function exp(-t Psi) is available.
  bool is_levy() const { return !std::holds_alternative<DiffusionSDE>(kind); }
  std::string name() const;
};

struct PathGrid {
  Point x0;
  double t_end = 0.0;
  int n_steps = 0;
  Eigen::VectorXd times;      // n_steps + 1
  Eigen::MatrixXd positions;  // d x (n_steps + 1), one column per time

  double dt() const { return t_end / n_steps; }
  int dim() const { return static_cast<int>(positions.rows()); }
  Point end() const { return positions.col(n_steps); }
};

PathGrid sample_path(const ProcessSpec& spec, const Point& x0, double t_end, int n_steps, Stream& stream);

// Endpoint only; same law as sample_path(...).end() for Levy processes.
Point sample_endpoint(const ProcessSpec& spec, const Point& x0, double t_end, Stream& stream);

// Symmetric stable variate with E exp(i xi S) = exp(-|xi|^alpha), d = 1.
double stable_variate(double alpha, Stream& stream);

// Isotropic stable vector with E exp(i xi.S) = exp(-|xi|^alpha).
void stable_vector(double alpha, Stream& stream, Eigen::Ref<Eigen::VectorXd> out);

double transition_density(const ProcessSpec& spec, double t, const Point& x, const Point& y);

// exp(-t Psi(|xi|)) for Levy processes.
double characteristic_function(const ProcessSpec& spec, double t, double r);

struct DominationViolation {
  double t;
  double xi;
  double value;
  double bound;
  double std_error;
};

struct DominationReport {
  std::vector<DominationViolation> violations;
  double max_relative_violation = 0.0;
  bool empirical = false;
};

struct DominationOptions {
  int n_samples = 100000;
  int n_steps = 64;
  std::uint64_t seed = 1;
  double tolerance = 1e-12;
};

DominationReport heat_domination_check(const ProcessSpec& spec, const std::vector<double>& t_list,
                                       const std::vector<double>& xi_list, const DominationOptions& opt = {});

// CSV dump with columns path_id, step, t, x_1..x_d.
void write_paths_csv(std::ostream& os, const std::vector<PathGrid>& paths);

}  // namespace fkspde
