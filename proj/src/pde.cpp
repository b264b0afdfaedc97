#include "fkspde/pde.hpp"

#include <cmath>
#include <vector>

#include "fkspde/errors.hpp"

namespace fkspde {

namespace {

// Solves a tridiagonal system with constant off-diagonals in place.
void thomas(double off, const std::vector<double>& diag, std::vector<double>& rhs) {
  const size_t n = diag.size();
  std::vector<double> c(n);
  double b = diag[0];
  rhs[0] /= b;
  for (size_t i = 1; i < n; ++i) {
    c[i] = off / b;
    b = diag[i] - off * c[i];
    rhs[i] = (rhs[i] - off * rhs[i - 1]) / b;
  }
  for (size_t i = n - 1; i-- > 0;) rhs[i] -= c[i + 1] * rhs[i + 1];
}

}  // namespace

double crank_nicolson_1d(const std::function<double(double)>& f, const std::function<double(double)>& u0,
                         double diffusion, double t, double x, const PdeGrid& g) {
  require(g.points >= 5 && g.steps >= 1 && t > 0.0 && diffusion > 0.0, ErrorKind::InvalidParameter,
          "bad finite-difference grid");
  require(std::abs(x) < g.halfwidth, ErrorKind::InvalidParameter, "evaluation point outside the PDE domain");
  const int n = g.points - 2;
  const double h = 2.0 * g.halfwidth / (g.points - 1);
  const double dt = t / g.steps;
  std::vector<double> xs(n), fv(n), u(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = -g.halfwidth + (i + 1) * h;
    fv[i] = f(xs[i]);
    u[i] = u0(xs[i]);
  }
  const double r = diffusion / (h * h);
  // theta-scheme step of size tau: (I - theta tau A) u' = (I + (1 - theta) tau A) u.
  auto step = [&](double tau, double theta) {
    std::vector<double> rhs(n), diag(n);
    for (int i = 0; i < n; ++i) {
      const double left = i > 0 ? u[i - 1] : 0.0, right = i + 1 < n ? u[i + 1] : 0.0;
      const double au = r * (left - 2.0 * u[i] + right) + fv[i] * u[i];
      rhs[i] = u[i] + (1.0 - theta) * tau * au;
      diag[i] = 1.0 - theta * tau * (-2.0 * r + fv[i]);
    }
    thomas(-theta * tau * r, diag, rhs);
    u.swap(rhs);
  };
  int done = 0;
  for (int k = 0; k < g.implicit_start && done < g.steps; ++k, ++done) {
    step(0.5 * dt, 1.0);
    step(0.5 * dt, 1.0);
  }
  for (; done < g.steps; ++done) step(dt, 0.5);
  const double s = (x + g.halfwidth) / h - 1.0;
  const int i = static_cast<int>(std::floor(s));
  const double w = s - i;
  auto at = [&](int j) { return j < 0 || j >= n ? 0.0 : u[j]; };
  return (1.0 - w) * at(i) + w * at(i + 1);
}

}  // namespace fkspde
