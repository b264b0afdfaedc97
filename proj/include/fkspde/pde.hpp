#pragma once

#include <functional>

namespace fkspde {

struct PdeGrid {
  double halfwidth = 10.0;  // solve on [-halfwidth, halfwidth] with zero boundary values
  int points = 2001;
  int steps = 2000;
  int implicit_start = 4;  // backward Euler half-steps before Crank-Nicolson
};

// u_t = diffusion * u_xx + f(x) u, u(0) = u0; value at x by linear interpolation.
double crank_nicolson_1d(const std::function<double(double)>& f, const std::function<double(double)>& u0,
                         double diffusion, double t, double x, const PdeGrid& grid = {});

}  // namespace fkspde
