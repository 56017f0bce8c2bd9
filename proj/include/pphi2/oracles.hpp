#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "pphi2/error.hpp"
#include "pphi2/quadrature.hpp"

namespace pphi2 {

struct DispersionParams {
  double beta = 0;
  double mass = 0;
};

DispersionParams make_dispersion_params(double beta, double mass);

// eps(k) = sqrt(k^2 + m^2), nu_n = sqrt((2 pi n / beta)^2 + m^2).
double dispersion_eps(double k, const DispersionParams& p);
double dispersion_nu(int n, const DispersionParams& p);

// Sharp-time thermal covariance kernel at spatial frequency k:
// (1 + e^{-beta eps}) / (2 eps (1 - e^{-beta eps})).
double cov_thermal_c0(double k, const DispersionParams& p);
// Equivalent coth form, coth(beta eps / 2) / (2 eps).
double cov_thermal_c0_coth(double k, const DispersionParams& p);

// Circle covariance 1 / (2 nu_n).
double cov_circle_cbeta(int n, const DispersionParams& p);

// Mixed sharp-time kernel at time separation d_alpha in [0, beta]:
// (e^{-d eps} + e^{-(beta - d) eps}) / (2 eps (1 - e^{-beta eps})).
double cov_mixed_sharp_time(double d_alpha, double k,
                            const DispersionParams& p);

// Sharp-space kernel on the circle, e^{-d_x nu_n} / (2 nu_n).
double cov_spatial_circle(double d_x, int n, const DispersionParams& p);

// A complex space-time difference (s time-like, y space-like).
struct TubePoint {
  std::complex<double> s;
  std::complex<double> y;
};

// Weights for the per-difference scaling of the double cone; lambdas > 0,
// sum = 1.
struct RegionSpec {
  double beta = 0;
  std::vector<double> lambdas;
};

RegionSpec make_region_spec(double beta, std::vector<double> lambdas);

// Open double cone { (alpha, s) : |s| < alpha < beta - |s| }.
bool in_v_beta(double alpha, double s, double beta);

// True iff consecutive differences of the ordered points lie in
// lambda_i V_beta.
bool in_jn(const std::vector<std::pair<double, double>>& points,
           const RegionSpec& spec);

// True iff, for each j, the imaginary part of the j-th difference lies in
// -lambda_j V_beta (i.e. (-Im s_j, -Im y_j) in lambda_j V_beta).
bool in_relativistic_tube(const std::vector<TubePoint>& z,
                          const RegionSpec& spec);

struct WightmanQuadrature {
  double abs_tol = 1e-11;
  double tail_tol = 1e-11;
  double k_max = 400.0;     // hard cap on the momentum window
  int max_intervals = 4000;
};

struct WightmanValue {
  std::complex<double> value;
  double tail_bound = 0;   // certified bound on the discarded |k| > K tail
  double quad_error = 0;
};

// Free thermal two-point function
//   W(t, x) = int dk/(2 pi) (1/(2 eps)) [ (1+n_eps) e^{-i eps t + i k x}
//                                         + n_eps e^{+i eps t - i k x} ],
// n_eps = 1/(e^{beta eps} - 1), evaluated at complex (t, x) = (z.s, z.y).
// Requires (-Im t, -Im x) inside V_beta so the integrand is damped; the
// returned tail bound certifies the truncation.
WightmanValue free_thermal_wightman(const TubePoint& z,
                                    const DispersionParams& p,
                                    const WightmanQuadrature& quad = {});

// Same integrand, fixed window |k| <= k_window, no domain or tail checks.
// Diagnostic use only: outside the tube this blows up instead of failing.
std::complex<double> free_thermal_wightman_windowed(const TubePoint& z,
                                                    const DispersionParams& p,
                                                    double k_window,
                                                    double abs_tol = 1e-9);

// Mode-sum variant with the spatial line replaced by a circle of
// circumference 2 * half_length (momenta k_j = pi j / half_length).
std::complex<double> free_thermal_wightman_torus(const TubePoint& z,
                                                 const DispersionParams& p,
                                                 double half_length,
                                                 int j_cut);

struct CircleWightmanValue {
  std::complex<double> value;
  double tail_bound = 0;
};

// Free two-point function of the circle theory,
//   sum_{|n| <= n_cut} e^{i k_n alpha - i nu_n z_s} / (2 beta nu_n),
// absolutely convergent for Im z_s < 0.
CircleWightmanValue free_circle_wightman(double alpha,
                                         std::complex<double> z_s,
                                         const DispersionParams& p, int n_cut,
                                         double tail_tol = 1e-10);

}  // namespace pphi2
