#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "pphi2/fock.hpp"
#include "pphi2/oracles.hpp"

namespace pphi2 {

using ComplexFn =
    std::function<std::complex<double>(const std::vector<std::complex<double>>&)>;

struct HolomorphyReport {
  std::vector<std::complex<double>> point;
  double cr_residual = 0;       // max over coordinates of |d/d zbar| * 2
  double contour_residual = 0;  // max over coordinates of |contour integral|
  bool converged = false;
};

// Central-difference Cauchy-Riemann residual plus a small-square Morera
// contour, per complex coordinate with the others held fixed.
HolomorphyReport holomorphy_probe(const ComplexFn& f,
                                  const std::vector<std::complex<double>>& point,
                                  double step, double tolerance = 1e-6);

struct KmsBoundaryReport {
  double deviation = 0;        // extrapolated two-sided mismatch, max on grid
  double richardson_ratio = 0; // residual shrink per halving of the regulator
  int grid_points = 0;
};

// KMS boundary condition of the free thermal two-point function on a grid of
// real (s, y): both one-sided boundary values are approached from inside the
// analyticity strip with regulators delta in {1e-2, 5e-3, 2.5e-3} and
// Richardson-extrapolated to delta = 0 before comparing.
KmsBoundaryReport kms_boundary_check(const DispersionParams& p, int grid_n,
                                     double s_range, double y_range);

struct TubeScanPoint {
  TubePoint z;
  bool inside = false;          // ground truth used to generate the point
  bool classified_inside = false;
  double cr_residual = 0;
  double tail_bound = 0;
};

struct TubeScanReport {
  std::vector<TubeScanPoint> points;
  int correct = 0;
  int total = 0;
};

// Samples points inside R^2 - i V_beta and outside its closure; inside ones
// must evaluate with certified tails and pass the holomorphy probe, outside
// ones must be rejected.
TubeScanReport tube_scan(const DispersionParams& p, int n_inside,
                         int n_outside, std::uint64_t seed);

// Quasi-free n-point in complex time: Isserlis pairing sum of two-point
// evaluations at ordered differences.  All consecutive differences must lie
// in the tube (checked by the two-point evaluations themselves).
std::complex<double> quasifree_npoint(const std::vector<TubePoint>& points,
                                      const DispersionParams& p,
                                      const WightmanQuadrature& quad = {});
// Same sum accumulated in reversed pairing order (independent route for the
// pairing bookkeeping).
std::complex<double> quasifree_npoint_reversed(
    const std::vector<TubePoint>& points, const DispersionParams& p,
    const WightmanQuadrature& quad = {});

struct SpectralSupportReport {
  int checked = 0;
  int violations = 0;
  double worst_margin = 0;  // min of E - |p| over retained eigenvalues
  bool truncation_flagged = false;
};

// Free variant: nu_n >= sqrt(k_n^2 + m^2) > |k_n| for |n| <= n_cut.
SpectralSupportReport spectral_support_check(const DispersionParams& p,
                                             int n_cut);

// Fock variant: diagonalises H_C in each momentum sector and checks the
// joint (P, E) spectrum against E >= |p|, excluding the truncation-polluted
// top decile.
SpectralSupportReport spectral_support_check(const FockModel& model,
                                             double tol_truncation = 1e-9);

}  // namespace pphi2
