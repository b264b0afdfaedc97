#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace fkspde {

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_intervals = 4000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    evaluations += o.evaluations;
    converged = converged && o.converged;
    return *this;
  }
};

namespace detail {

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// 15-point Kronrod with embedded 7-point Gauss; QUADPACK error heuristic.
template <class F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::abs(resk);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double mean = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));
  resk *= h;
  resabs *= std::abs(h);
  resasc *= std::abs(h);
  double err = std::abs((resk - resg * h));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(err, 50 * eps * resabs);
  if (!std::isfinite(resk)) err = std::numeric_limits<double>::infinity();
  return {a, b, resk, err};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod on [a, b]; each entry of `breaks` seeds a panel boundary.
template <class F>
QuadResult integrate(F&& f, const std::vector<double>& breaks, const QuadOptions& opt = {}) {
  std::vector<double> pts(breaks);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  QuadResult out;
  if (pts.size() < 2) return out;
  std::priority_queue<detail::Panel> heap;
  double total = 0.0, err = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    auto p = detail::gk15(f, pts[i], pts[i + 1]);
    total += p.value;
    err += p.error;
    heap.push(p);
  }
  int evals = 15 * static_cast<int>(heap.size());
  int intervals = static_cast<int>(heap.size());
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) && intervals < opt.max_intervals) {
    auto p = heap.top();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) break;
    heap.pop();
    auto l = detail::gk15(f, p.a, m);
    auto r = detail::gk15(f, m, p.b);
    total += l.value + r.value - p.value;
    err += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
    evals += 30;
    ++intervals;
  }
  // Re-sum to shed drift from the running updates.
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = err;
  out.evaluations = evals;
  out.converged = std::isfinite(total) && err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) * 1.0000001;
  return out;
}

template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  if (a == b) return {};
  if (a > b) {
    auto r = integrate(f, b, a, opt);
    r.value = -r.value;
    return r;
  }
  return integrate(f, std::vector<double>{a, b}, opt);
}

// Integral over [a, inf) through x = a + scale * s / (1 - s).
template <class F>
QuadResult integrate_to_infinity(F&& f, double a, double scale = 1.0, const QuadOptions& opt = {}) {
  auto g = [&](double s) {
    const double om = 1.0 - s;
    const double x = a + scale * s / om;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * scale / (om * om);
  };
  return integrate(g, 0.0, 1.0, opt);
}

// Integral over [a, b] of f with f(x) ~ (x - a)^p near a, p > -1.
template <class F>
QuadResult integrate_left_power(F&& f, double a, double b, double p, const QuadOptions& opt = {}) {
  const double q = 1.0 / (p + 1.0);
  const double len = b - a;
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double x = a + len * std::pow(u, q);
    // x can round onto the singular end when q is large; the integrand in u is bounded there.
    if (x == a && p < 0.0) return 0.0;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * len * q * std::pow(u, q - 1.0);
  };
  return integrate(g, 0.0, 1.0, opt);
}

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

// Nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace fkspde
