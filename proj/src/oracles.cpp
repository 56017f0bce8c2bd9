#include "pphi2/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pphi2 {

using std::numbers::pi;
using Complex = std::complex<double>;

DispersionParams make_dispersion_params(double beta, double mass) {
  require(beta > 0 && mass > 0, ErrorCode::NonPositiveParameter,
          "beta and mass must be > 0");
  return DispersionParams{beta, mass};
}

double dispersion_eps(double k, const DispersionParams& p) {
  return std::sqrt(k * k + p.mass * p.mass);
}

double dispersion_nu(int n, const DispersionParams& p) {
  double k = 2.0 * pi * n / p.beta;
  return std::sqrt(k * k + p.mass * p.mass);
}

double cov_thermal_c0(double k, const DispersionParams& p) {
  double eps = dispersion_eps(k, p);
  double denom = -std::expm1(-p.beta * eps);  // 1 - e^{-beta eps}
  return (1.0 + std::exp(-p.beta * eps)) / (2.0 * eps * denom);
}

double cov_thermal_c0_coth(double k, const DispersionParams& p) {
  double eps = dispersion_eps(k, p);
  return 1.0 / (2.0 * eps * std::tanh(0.5 * p.beta * eps));
}

double cov_circle_cbeta(int n, const DispersionParams& p) {
  return 1.0 / (2.0 * dispersion_nu(n, p));
}

double cov_mixed_sharp_time(double d_alpha, double k,
                            const DispersionParams& p) {
  require(d_alpha >= 0 && d_alpha <= p.beta, ErrorCode::ArgumentOutsidePeriod,
          "time separation must lie in [0, beta]");
  double eps = dispersion_eps(k, p);
  double denom = -std::expm1(-p.beta * eps);
  return (std::exp(-d_alpha * eps) + std::exp(-(p.beta - d_alpha) * eps)) /
         (2.0 * eps * denom);
}

double cov_spatial_circle(double d_x, int n, const DispersionParams& p) {
  require(d_x >= 0, ErrorCode::NonPositiveParameter,
          "spatial separation must be >= 0");
  double nu = dispersion_nu(n, p);
  return std::exp(-d_x * nu) / (2.0 * nu);
}

RegionSpec make_region_spec(double beta, std::vector<double> lambdas) {
  require(beta > 0, ErrorCode::NonPositiveParameter, "beta must be > 0");
  double sum = 0;
  for (double l : lambdas) {
    require(l > 0, ErrorCode::ValidationError, "lambdas must be > 0");
    sum += l;
  }
  require(std::abs(sum - 1.0) <= 1e-12, ErrorCode::ValidationError,
          "lambdas must sum to 1");
  return RegionSpec{beta, std::move(lambdas)};
}

bool in_v_beta(double alpha, double s, double beta) {
  return std::abs(s) < alpha && alpha < beta - std::abs(s);
}

bool in_jn(const std::vector<std::pair<double, double>>& points,
           const RegionSpec& spec) {
  require(points.size() >= 2, ErrorCode::LambdaMismatch,
          "need at least two points");
  require(spec.lambdas.size() == points.size() - 1, ErrorCode::LambdaMismatch,
          "need one lambda per consecutive difference");
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    double da = points[i + 1].first - points[i].first;
    double ds = points[i + 1].second - points[i].second;
    if (!in_v_beta(da, ds, spec.lambdas[i] * spec.beta)) return false;
  }
  return true;
}

bool in_relativistic_tube(const std::vector<TubePoint>& z,
                          const RegionSpec& spec) {
  require(spec.lambdas.size() == z.size(), ErrorCode::LambdaMismatch,
          "need one lambda per tube point");
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!in_v_beta(-z[j].s.imag(), -z[j].y.imag(),
                   spec.lambdas[j] * spec.beta))
      return false;
  }
  return true;
}

namespace {

// Damping rates of the four exponential branches of the thermal integrand at
// large |k|; all positive exactly when (-Im t, -Im x) is inside V_beta.
struct TailRates {
  double a1, a2, a3, a4;
  double min() const { return std::min(std::min(a1, a2), std::min(a3, a4)); }
};

TailRates tail_rates(const TubePoint& z, const DispersionParams& p) {
  double st = z.s.imag(), sx = z.y.imag();
  return TailRates{sx - st, -sx - st, p.beta + st - sx, p.beta + st + sx};
}

double tail_bound_at(double K, const TailRates& r, const TubePoint& z,
                     const DispersionParams& p) {
  double cn = 1.0 / -std::expm1(-p.beta * p.mass);  // bounds 1 + n_eps
  double drift = std::exp(std::abs(z.s.imag()) * p.mass * p.mass / (2.0 * K));
  auto piece = [&](double a) { return std::exp(-a * K) / a; };
  return (cn * drift / (4.0 * pi * K)) *
         (piece(r.a1) + piece(r.a2) + piece(r.a3) + piece(r.a4));
}

Complex thermal_integrand(double k, const TubePoint& z,
                          const DispersionParams& p) {
  // (1 + n_eps) e^{-i eps t + i k x} + n_eps e^{+i eps t - i k x} with
  // n_eps = 1/(e^{beta eps} - 1), assembled in log space: the thermal
  // weights would overflow as bare factors deep inside the strip.
  const Complex i(0.0, 1.0);
  double eps = dispersion_eps(k, p);
  double log_denom = std::log1p(-std::exp(-p.beta * eps));  // ln(1-e^{-be})
  Complex t = z.s, x = z.y;
  Complex plus = std::exp(-i * eps * t + i * k * x - log_denom);
  Complex minus =
      std::exp(i * eps * t - i * k * x - p.beta * eps - log_denom);
  return (plus + minus) / (2.0 * eps) / (2.0 * pi);
}

}  // namespace

WightmanValue free_thermal_wightman(const TubePoint& z,
                                    const DispersionParams& p,
                                    const WightmanQuadrature& quad) {
  require(in_v_beta(-z.s.imag(), -z.y.imag(), p.beta),
          ErrorCode::PointOutsideAnalyticityDomain,
          "imaginary part must lie in -V_beta");
  TailRates rates = tail_rates(z, p);
  double K = std::max({4.0 * p.mass, 4.0 / p.beta, 2.0 / rates.min()});
  double bound = tail_bound_at(K, rates, z, p);
  while (bound > quad.tail_tol && K < quad.k_max) {
    K = std::min(K * 1.5, quad.k_max);
    bound = tail_bound_at(K, rates, z, p);
  }
  require(bound <= quad.tail_tol, ErrorCode::QuadratureTailTooLarge,
          "certified tail bound above tolerance at the window cap");
  auto f = [&](double k) { return thermal_integrand(k, z, p); };
  QuadratureResult res = integrate_gk(f, -K, K, quad.abs_tol,
                                      quad.max_intervals);
  return WightmanValue{res.value, bound, res.error};
}

std::complex<double> free_thermal_wightman_windowed(const TubePoint& z,
                                                    const DispersionParams& p,
                                                    double k_window,
                                                    double abs_tol) {
  auto f = [&](double k) { return thermal_integrand(k, z, p); };
  return integrate_gk(f, -k_window, k_window, abs_tol, 8000).value;
}

std::complex<double> free_thermal_wightman_torus(const TubePoint& z,
                                                 const DispersionParams& p,
                                                 double half_length,
                                                 int j_cut) {
  Complex sum = 0;
  for (int j = -j_cut; j <= j_cut; ++j) {
    double k = pi * j / half_length;
    sum += thermal_integrand(k, z, p);
  }
  // modes are spaced pi / half_length apart
  return sum * (2.0 * pi) / (2.0 * half_length);
}

CircleWightmanValue free_circle_wightman(double alpha,
                                         std::complex<double> z_s,
                                         const DispersionParams& p, int n_cut,
                                         double tail_tol) {
  require(z_s.imag() <= 0, ErrorCode::TubeViolation,
          "circle Wightman function needs Im z_s <= 0");
  const Complex i(0.0, 1.0);
  Complex sum = 0;
  for (int n = -n_cut; n <= n_cut; ++n) {
    double k = 2.0 * pi * n / p.beta;
    double nu = dispersion_nu(n, p);
    sum += std::exp(i * k * alpha - i * nu * z_s) / (2.0 * p.beta * nu);
  }
  // |term n| = e^{-nu_n |Im z_s|} / (2 beta nu_n); bound the remainder by a
  // geometric series in e^{-(2 pi / beta) |Im z_s|}.
  double sigma = -z_s.imag();
  double tail = std::numeric_limits<double>::infinity();
  if (sigma > 0) {
    double rate = 2.0 * pi * sigma / p.beta;
    double nu_next = dispersion_nu(n_cut + 1, p);
    tail = std::exp(-nu_next * sigma) /
           (p.beta * nu_next * -std::expm1(-rate));
  }
  require(tail <= tail_tol, ErrorCode::TailTooLarge,
          "mode-sum tail above tolerance");
  return CircleWightmanValue{sum, tail};
}

}  // namespace pphi2
