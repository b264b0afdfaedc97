#include "fkspde/quadrature.hpp"

#include "fkspde/errors.hpp"

namespace fkspde {

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  require(n >= 1, ErrorKind::InvalidParameter, "gauss_legendre needs n >= 1");
  nodes.resize(n);
  weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    nodes(i) = -z;
    nodes(n - 1 - i) = z;
    weights(i) = 2.0 / ((1.0 - z * z) * pp * pp);
    weights(n - 1 - i) = weights(i);
  }
}

void gauss_legendre(int n, double a, double b, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  gauss_legendre(n, nodes, weights);
  const double h = 0.5 * (b - a);
  nodes = (nodes.array() * h + 0.5 * (a + b)).matrix();
  weights *= h;
}

}  // namespace fkspde
