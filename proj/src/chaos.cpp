#include "fkspde/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fkspde/errors.hpp"
#include "fkspde/estimate.hpp"
#include "fkspde/parallel.hpp"
#include "fkspde/quadrature.hpp"
#include "fkspde/rng.hpp"

namespace fkspde {

namespace {

enum : std::uint64_t { kTagChaos = 21 };

// Spectral density of the noise in the measure scale, (2 pi)^{-d} F gamma, for scalar xi (d = 1).
std::function<double(double)> measure_density_1d(const CovarianceKernel& k) {
  const double c = fourier_constant(k) / (2.0 * M_PI);
  if (k.is_dirac()) return [c](double) { return c; };
  if (auto rz = std::get_if<Riesz>(&k.kind)) {
    const double e = rz->alpha - 1.0;
    return [c, e](double x) { return c * std::pow(std::abs(x), e); };
  }
  if (auto t = std::get_if<Tabulated>(&k.kind)) {
    auto data = t->data;
    if (data->gaussian_variance > 0) {
      const double v = data->gaussian_variance;
      return [c, v](double x) { return c * std::exp(-0.5 * v * x * x); };
    }
  }
  CovarianceKernel kc = k;
  return [c, kc](double x) { return c * spectral_density(kc, x); };
}

struct PsiFn {
  double c = 0.5, a = 2.0;
  double operator()(double r) const {
    r = std::abs(r);
    return a == 2.0 ? c * r * r : c * std::pow(r, a);
  }
  double radius_at(double v) const { return std::pow(v / c, 1.0 / a); }
};

PsiFn psi_of(const ProcessSpec& p) { return {p.h.psi.scale, p.h.psi.power}; }

// Antiderivative of |x|^{-b}.
double G(double x, double b) {
  const double e = 1.0 - b;
  return (x < 0 ? -1.0 : 1.0) * std::pow(std::abs(x), e) / e;
}

// int_a^b f where f may carry an |x - s|^{-b0} singularity at either end.
template <class F>
double singular_piece(F&& f, double a, double b, bool sing_a, bool sing_b, double b0, const QuadOptions& q) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  const double pa = sing_a ? -b0 : 0.0, pb = sing_b ? -b0 : 0.0;
  // Nodes within an ulp of a singular end round onto it; that sliver carries no mass.
  auto safe = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : 0.0;
  };
  double v = integrate_left_power(safe, a, m, pa, q).value;
  v += integrate_left_power([&](double x) { return safe(a + b - x); }, a, a + b - m, pb, q).value;
  return v;
}

// Nodes on (0, inf) graded toward 0: xi = s / (1 - s), s = u^2.
void half_line_rule(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  Eigen::VectorXd u, wu;
  gauss_legendre(n, 0.0, 1.0, u, wu);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    const double s = u(i) * u(i);
    x(i) = s / (1.0 - s);
    w(i) = wu(i) * 2.0 * u(i) / ((1.0 - s) * (1.0 - s));
  }
}

// Nodes on (0, 1) graded toward 0: y = u^2.
void graded_unit_rule(int n, Eigen::VectorXd& y, Eigen::VectorXd& w) {
  Eigen::VectorXd u, wu;
  gauss_legendre(n, 0.0, 1.0, u, wu);
  y = u.array().square();
  w = (wu.array() * 2.0 * u.array()).matrix();
}

// ---- n = 1 ----

double norm_order1(double t, const NoiseSpec& noise, const ProcessSpec& process) {
  const auto& k = noise.kernel;
  const PsiFn psi = psi_of(process);
  const double b0 = noise.beta0;
  const double p0 = std::max(spectral_shell_origin_power(k), -0.999999);
  QuadOptions q;
  q.abs_tol = 0.0;
  q.rel_tol = 1e-9;
  // F(U) = int mu(d xi) exp(-U Psi(xi)).
  auto F = [&](double U) {
    auto f = [&](double r) { return r <= 0 ? 0.0 : spectral_shell(k, r, SpectralScale::Measure) * std::exp(-U * psi(r)); };
    const double L = psi.radius_at(1.0 / U);
    return integrate_left_power(f, 0.0, L, p0, q).value + integrate_to_infinity(f, L, L, q).value;
  };
  auto outer = [&](double U) {
    const double m = std::min(U, 2.0 * t - U);
    if (m <= 0) return 0.0;
    return F(U) * std::pow(m, 1.0 - b0) / (1.0 - b0);
  };
  double qt = spectral_shell_tail_power(k);
  if (std::isnan(qt)) qt = k.dim - 1.0;
  double p_left = 1.0 - b0 - (std::isinf(qt) ? 0.0 : (qt + 1.0) / psi.a);
  p_left = std::max(p_left, -0.999);
  QuadOptions qo;
  qo.abs_tol = 0.0;
  qo.rel_tol = 1e-8;
  const QuadResult a = integrate_left_power(outer, 0.0, t, std::min(p_left, 0.0), qo);
  const QuadResult b = integrate(outer, t, 2.0 * t, qo);
  if (!std::isfinite(a.value + b.value)) throw Error(ErrorKind::QuadratureFailure, "first chaos norm is not finite");
  return a.value + b.value;
}

// ---- n = 2, d = 1 ----

double norm_order2(double t, const NoiseSpec& noise, const ProcessSpec& process, const ChaosOptions& opt) {
  const auto nu = measure_density_1d(noise.kernel);
  const PsiFn psi = psi_of(process);
  const double b0 = noise.beta0;
  QuadOptions q;
  q.abs_tol = 0.0;
  q.rel_tol = 1e-9;

  Eigen::VectorXd hx, hw, ty, tw;
  half_line_rule(opt.freq_nodes, hx, hw);
  graded_unit_rule(opt.time_nodes, ty, tw);
  const int nf = static_cast<int>(hx.size());

  // Symmetric frequency nodes for scale L.
  auto axis = [&](double L, Eigen::VectorXd& x, Eigen::VectorXd& w) {
    x.resize(2 * nf);
    w.resize(2 * nf);
    for (int i = 0; i < nf; ++i) {
      x(i) = L * hx(i);
      x(nf + i) = -L * hx(i);
      w(i) = w(nf + i) = L * hw(i);
    }
  };

  // Identity pairing: S_e = B, S_l = B + A.
  auto phi_id = [&](double A, double B) {
    Eigen::VectorXd xe, we, x2, w2;
    axis(psi.radius_at(1.0 / B), xe, we);
    axis(psi.radius_at(1.0 / A), x2, w2);
    double s = 0.0;
    for (int j = 0; j < x2.size(); ++j) {
      const double f2 = w2(j) * nu(x2(j)) * std::exp(-A * psi(x2(j)));
      if (f2 == 0.0) continue;
      double inner = 0.0;
      for (int i = 0; i < xe.size(); ++i) inner += we(i) * nu(xe(i) - x2(j)) * std::exp(-B * psi(xe(i)));
      s += f2 * inner;
    }
    return s;
  };
  auto kappa_id = [&](double se, double sl) {
    const double delta = sl - se;
    const double ml = std::min(sl, 2.0 * t - sl);
    if (ml <= 0) return 0.0;
    auto J = [&](double D) {
      const double hi = std::min(se, D + delta), lo = std::max(-se, D - delta);
      if (hi <= lo) return 0.0;
      return b0 == 0.0 ? hi - lo : G(hi, b0) - G(lo, b0);
    };
    auto f = [&](double D) { return (b0 == 0.0 ? 1.0 : std::pow(D, -b0)) * J(D); };
    std::vector<double> br{0.0, ml};
    for (double c : {se - delta, se + delta, delta - se, delta})
      if (c > 0 && c < ml) br.push_back(c);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    double v = integrate_left_power(f, br[0], br[1], -b0, q).value;
    if (br.size() > 2) v += integrate(f, std::vector<double>(br.begin() + 1, br.end()), q).value;
    return 0.5 * v;
  };
  double id = 0.0;
  for (int i = 0; i < ty.size(); ++i) {
    const double B = 2.0 * t * ty(i), wB = 2.0 * t * tw(i);
    for (int j = 0; j < ty.size(); ++j) {
      const double A = (2.0 * t - B) * ty(j), wA = (2.0 * t - B) * tw(j);
      const double kap = kappa_id(B, B + A);
      if (kap == 0.0) continue;
      id += wB * wA * kap * phi_id(A, B);
    }
  }

  // Swapped pairing: g = r_2 - r_1, h = s_1 - s_2, C = r_1 + s_2.
  auto phi_sw = [&](double g, double h, double C) {
    Eigen::VectorXd x1, w1, x2, w2;
    axis(psi.radius_at(1.0 / (h + C)), x1, w1);
    axis(psi.radius_at(1.0 / (g + C)), x2, w2);
    Eigen::VectorXd f1(x1.size());
    for (int i = 0; i < x1.size(); ++i) f1(i) = w1(i) * nu(x1(i)) * std::exp(-h * psi(x1(i)));
    double s = 0.0;
    for (int j = 0; j < x2.size(); ++j) {
      const double f2 = w2(j) * nu(x2(j)) * std::exp(-g * psi(x2(j)));
      if (f2 == 0.0) continue;
      double inner = 0.0;
      for (int i = 0; i < x1.size(); ++i) inner += f1(i) * std::exp(-C * psi(x1(i) + x2(j)));
      s += f2 * inner;
    }
    return s;
  };
  auto kappa_sw = [&](double g, double h, double C) {
    const double lo = std::max(-C, C - 2.0 * (t - h)), hi = std::min(C, 2.0 * (t - g) - C);
    if (hi <= lo) return 0.0;
    if (b0 == 0.0) return 0.5 * (hi - lo);
    auto f = [&](double D) { return std::pow(std::abs(D - h), -b0) * std::pow(std::abs(D + g), -b0); };
    std::vector<double> br{lo, hi};
    for (double c : {-g, h})
      if (c > lo && c < hi) br.push_back(c);
    std::sort(br.begin(), br.end());
    double v = 0.0;
    for (size_t m = 0; m + 1 < br.size(); ++m) {
      auto sing = [&](double x) { return std::abs(x + g) < 1e-15 * (1 + g) || std::abs(x - h) < 1e-15 * (1 + h); };
      v += singular_piece(f, br[m], br[m + 1], sing(br[m]), sing(br[m + 1]), b0, q);
    }
    return 0.5 * v;
  };
  double sw = 0.0;
  for (int i = 0; i < ty.size(); ++i) {
    const double g = t * ty(i), wg = t * tw(i);
    for (int j = 0; j < ty.size(); ++j) {
      const double h = t * ty(j), wh = t * tw(j);
      const double cmax = 2.0 * t - g - h;
      if (cmax <= 0) continue;
      for (int l = 0; l < ty.size(); ++l) {
        const double C = cmax * ty(l), wC = cmax * tw(l);
        const double kap = kappa_sw(g, h, C);
        if (kap == 0.0) continue;
        sw += wg * wh * wC * kap * phi_sw(g, h, C);
      }
    }
  }
  const double v = id + sw;
  if (!std::isfinite(v)) throw Error(ErrorKind::QuadratureFailure, "second chaos norm is not finite");
  return v;
}

// ---- importance sampling ----

ChaosKernelNorm norm_sampled(int n, double t, const NoiseSpec& noise, const ProcessSpec& process, std::uint64_t seed,
                             const ChaosOptions& opt) {
  const auto& k = noise.kernel;
  const int d = k.dim;
  const PsiFn psi = psi_of(process);
  const double b0 = noise.beta0;
  const double shape = d / psi.a;
  // Z(g) = int exp(-g Psi) = S_{d-1} Gamma(d / a) / (a (g c)^{d/a}).
  const double log_z0 = std::log(unit_sphere_area(d)) + std::lgamma(shape) - std::log(psi.a) - shape * std::log(psi.c);
  const double kappa = std::min(shape, 0.95);
  const double log_dir = std::log(simplex_dirichlet(std::vector<double>(n, kappa), t));
  const double nu_scale = std::log(fourier_constant(k)) - d * std::log(2.0 * M_PI);
  require(fourier_constant(k) > 0, ErrorKind::ProposalUnnormalizable, "spectral measure has no positive density");

  const long m = opt.is_samples;
  std::vector<double> logs(m);
  std::vector<int> signs(m);
  parallel_for(static_cast<size_t>(m), opt.workers, [&](size_t idx) {
    Stream st(seed, {kTagChaos, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(idx)});
    // Gaps of the r-simplex from Dirichlet(1 - kappa, ..., 1 - kappa, 1).
    std::vector<double> gap(n + 1);
    double tot = 0.0;
    for (int j = 0; j <= n; ++j) {
      gap[j] = j < n ? st.gamma(1.0 - kappa) : st.exponential();
      tot += gap[j];
    }
    std::vector<double> r(n);
    double acc = 0.0, lw = log_dir;
    for (int j = 0; j < n; ++j) {
      gap[j] *= t / tot;
      acc += gap[j];
      r[j] = acc;
      lw += kappa * std::log(gap[j]);
    }
    // s_j with density |s - r_j|^{-b0} on [0, t].
    std::vector<double> s(n);
    for (int j = 0; j < n; ++j) {
      const double e = 1.0 - b0;
      const double left = std::pow(r[j], e) / e, right = std::pow(t - r[j], e) / e;
      const double w = left + right;
      lw += std::log(w);
      const double u = st.uniform() * w;
      s[j] = u < left ? r[j] - std::pow((left - u) * e, 1.0 / e) : r[j] + std::pow((u - left) * e, 1.0 / e);
    }
    // Tail sums eta_j = xi_j + ... + xi_n with density exp(-g_j Psi) / Z(g_j).
    Eigen::MatrixXd eta(d, n + 1);
    eta.col(n).setZero();
    Eigen::VectorXd dir(d);
    for (int j = 0; j < n; ++j) {
      const double g = gap[j];
      const double rad = std::pow(st.gamma(shape) / (g * psi.c), 1.0 / psi.a);
      if (d == 1) dir(0) = st.uniform() < 0.5 ? -1.0 : 1.0;
      else {
        for (int i = 0; i < d; ++i) dir(i) = st.normal();
        dir.normalize();
      }
      eta.col(j) = rad * dir;
      lw += log_z0 - shape * std::log(g);
    }
    int sign = 1;
    Eigen::MatrixXd xi(d, n);
    for (int j = 0; j < n; ++j) {
      xi.col(j) = eta.col(j) - eta.col(j + 1);
      const double v = spectral_density(k, xi.col(j));
      if (v == 0.0) {
        sign = 0;
        break;
      }
      if (v < 0) sign = -sign;
      lw += nu_scale + std::log(std::abs(v));
    }
    if (sign != 0) {
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return s[a] < s[b]; });
      Eigen::VectorXd tail = Eigen::VectorXd::Zero(d);
      for (int j = n - 1; j >= 0; --j) {
        tail += xi.col(order[j]);
        const double h = s[order[j]] - (j ? s[order[j - 1]] : 0.0);
        lw -= h * psi(tail.norm());
      }
    }
    logs[idx] = sign ? lw : 0.0;
    signs[idx] = sign;
  });
  const MCEstimate e = summarize_log(logs, signs, seed);
  ChaosKernelNorm out;
  out.n = n;
  out.value = e.mean;
  out.std_error = e.std_error;
  out.method = ChaosMethod::ImportanceSampled;
  out.samples = m;
  return out;
}

}  // namespace

const char* chaos_method_name(ChaosMethod m) {
  return m == ChaosMethod::Deterministic ? "deterministic" : "importance_sampled";
}

double simplex_dirichlet(const std::vector<double>& alphas, double t) {
  require(t > 0.0, ErrorKind::InvalidParameter, "simplex size must be positive");
  double a = 0.0, lg = 0.0;
  for (double x : alphas) {
    require(x < 1.0, ErrorKind::InvalidParameter, "simplex exponents must be below 1");
    a += x;
    lg += std::lgamma(1.0 - x);
  }
  const double n = static_cast<double>(alphas.size());
  return std::exp(lg - std::lgamma(n - a + 1.0) + (n - a) * std::log(t));
}

ChaosKernelNorm chaos_kernel_norm(int n, double t, const Point& x, const NoiseSpec& noise, const ProcessSpec& process,
                                  const InitialCondition& u0, std::uint64_t seed, const ChaosOptions& opt) {
  require(n >= 0, ErrorKind::InvalidParameter, "chaos order must be nonnegative");
  if (n > opt.max_order) throw Error(ErrorKind::OrderTooHigh, "chaos order exceeds the configured maximum");
  require(t > 0.0, ErrorKind::InvalidParameter, "time must be positive");
  require(x.size() == process.dim && noise.dim() == process.dim, ErrorKind::InvalidParameter,
          "dimensions of start point, noise and process differ");
  require(u0.kind() == InitialCondition::Kind::Constant, ErrorKind::UnsupportedCombination,
          "chaos norms are implemented for constant initial conditions");
  require(process.is_levy(), ErrorKind::UnsupportedCombination, "chaos norms need a closed-form characteristic function");
  const double c2 = u0.constant_value() * u0.constant_value();
  ChaosKernelNorm out;
  out.n = n;
  if (n == 0) {
    out.value = c2;
    return out;
  }
  if (!opt.force_sampling && n == 1) {
    out.value = c2 * norm_order1(t, noise, process);
    return out;
  }
  if (!opt.force_sampling && n == 2 && process.dim == 1) {
    out.value = c2 * norm_order2(t, noise, process, opt);
    return out;
  }
  require(!noise.kernel.is_dirac() || process.dim / process.h.psi.power < 1.0, ErrorKind::ProposalUnnormalizable,
          "white-in-space noise has no normalizable proposal in this dimension");
  out = norm_sampled(n, t, noise, process, seed, opt);
  out.value *= c2;
  out.std_error *= c2;
  return out;
}

double chaos_order_bound(int n, double a_t, double t, double m_N, double eps_tilde) {
  if (n == 0) return 1.0;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  for (int k = 0; k <= n; ++k) {
    if ((k > 0 && m_N <= 0) || (k < n && eps_tilde <= 0)) continue;
    const double l = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                     (k ? k * std::log(t * m_N) : 0.0) - std::lgamma(k + 1.0) +
                     (n - k ? (n - k) * std::log(eps_tilde) : 0.0);
    terms.push_back(l);
    best = std::max(best, l);
  }
  if (terms.empty()) return 0.0;
  double s = 0.0;
  for (double l : terms) s += std::exp(l - best);
  return std::exp(n * std::log(a_t) + best + std::log(s));
}

SeriesTail chaos_tail(double t, int n_trunc, const NoiseSpec& noise, const ProcessSpec& process) {
  require(n_trunc >= 0, ErrorKind::InvalidParameter, "truncation must be nonnegative");
  const double a = noise.a_t(t);
  const double e = 1.0 - noise.beta0;
  SeriesTail best;
  best.bound = std::numeric_limits<double>::infinity();
  for (int kk = -24; kk <= 48; ++kk) {
    const double N = std::pow(10.0, kk / 8.0);
    double eps_tilde, eps_n, m;
    try {
      eps_tilde = spectral_tail(noise.kernel, N, [&](double r) { return 0.5 / process.psi(r); }, SpectralScale::Measure);
      eps_n = spectral_tail(noise.kernel, N, [&](double r) { return std::pow(process.psi(r), -e); },
                            SpectralScale::Measure);
      m = spectral_mass(noise.kernel, N, SpectralScale::Measure);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::DivergentTail) continue;
      throw;
    }
    if (!(2.0 * a * eps_tilde < 1.0)) continue;
    double tail = 0.0, prev = std::numeric_limits<double>::infinity();
    bool done = false;
    for (int n = n_trunc + 1; n <= n_trunc + 4000 && tail < best.bound; ++n) {
      const double b = chaos_order_bound(n, a, t, m, eps_tilde);
      tail += b;
      const double rho = b / prev;
      if (n > n_trunc + 1 && rho < 1.0 && b * rho / (1.0 - rho) <= 1e-10 * tail) {
        tail += b * rho / (1.0 - rho);
        done = true;
        break;
      }
      prev = b;
    }
    if (!done) continue;
    if (tail < best.bound) {
      best.bound = tail;
      best.split_N = N;
      best.m_N = m;
      best.eps_tilde = eps_tilde;
      best.eps_N = eps_n;
      best.c0 = eps_n > 0 ? eps_tilde / eps_n : 0.0;
    }
  }
  if (!std::isfinite(best.bound))
    throw Error(ErrorKind::TailBoundUnavailable, "no spectral split gives 2 A_t eps_N < 1 in the search range");
  best.n_trunc = n_trunc;
  best.a_t = a;
  return best;
}

SecondMomentSeries chaos_second_moment(double t, const Point& x, int n_trunc, const NoiseSpec& noise,
                                       const ProcessSpec& process, const InitialCondition& u0, std::uint64_t seed,
                                       const ChaosOptions& opt) {
  require(n_trunc >= 0, ErrorKind::InvalidParameter, "truncation must be nonnegative");
  if (n_trunc > opt.max_order) throw Error(ErrorKind::OrderTooHigh, "truncation exceeds the configured maximum order");
  require_dalang(noise, process, Calculus::Skorohod);
  SecondMomentSeries s;
  s.terms.resize(n_trunc + 1);
  parallel_for(static_cast<size_t>(n_trunc + 1), opt.workers > 1 ? std::min(opt.workers, n_trunc + 1) : 1,
               [&](size_t n) {
                 ChaosOptions o = opt;
                 o.workers = 1;
                 s.terms[n] = chaos_kernel_norm(static_cast<int>(n), t, x, noise, process, u0, seed, o);
               });
  double var = 0.0, hyper = 0.0;
  for (const auto& term : s.terms) {
    s.estimate += term.value;
    var += term.std_error * term.std_error;
    hyper += std::pow(3.0, 0.5 * term.n) * std::sqrt(std::max(term.value, 0.0));
    s.hypercontractive_partials.push_back(hyper);
  }
  s.std_error = std::sqrt(var);
  s.tail = chaos_tail(t, n_trunc, noise, process);
  const double c2 = u0.constant_value() * u0.constant_value();
  s.tail.bound *= c2;
  s.tail.partial_sum = s.estimate;
  s.upper = s.estimate + s.tail.bound;
  return s;
}

}  // namespace fkspde
