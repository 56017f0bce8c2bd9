#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pphi2/measure.hpp"
#include "pphi2/oracles.hpp"

namespace pphi2 {

// A sharp-time smeared field phi(alpha, h) = sum_x a_x h(x) phi(slice, x);
// alpha snaps to the nearest lattice slice.
struct SmearedPoint {
  double alpha = 0;
  std::vector<double> profile;
  double normalization = 0;  // sum a_x h^2
  int slice = 0;
};

SmearedPoint make_smeared_point(const CylinderLattice& lat, double alpha,
                                std::vector<double> profile);

double smeared_field(const FieldConfiguration& config, const SmearedPoint& p);

enum class ReflectionAxis { AlphaReflection, XReflection };

FieldConfiguration reflect_configuration(const FieldConfiguration& config,
                                         ReflectionAxis axis);

// Monte Carlo estimate of E[prod_j phi(alpha_j, h_j)], 1 <= n <= 8.
Estimate schwinger_npoint(const std::vector<SmearedPoint>& points,
                          const MeasureSpec& spec, const RunParams& run);

// Exact free-measure value of the same product: Isserlis pairing sum over
// dense-oracle covariances (test oracle; n <= 8).
double schwinger_npoint_free_oracle(const std::vector<SmearedPoint>& points,
                                    const CylinderLattice& lat);
double schwinger_npoint_free_oracle(const std::vector<SmearedPoint>& points,
                                    const Eigen::MatrixXd& green,
                                    const CylinderLattice& lat);

// Two-point at fixed spatial profile versus alpha separation, one entry per
// lattice slice distance.
struct TwoPointProfile {
  std::vector<double> separations;
  std::vector<Estimate> estimates;
  std::vector<double> lattice_exact;   // free spectral value, same smearing
  std::vector<double> continuum_value; // mode sum of the sharp-time kernel
};

TwoPointProfile sharp_time_two_point_profile(const std::vector<double>& h,
                                             const MeasureSpec& spec,
                                             const RunParams& run);

// A measurable function of the configuration together with its declared
// support (slices for the alpha reflection, columns for the x reflection).
struct ConfigFunctional {
  Observable eval;
  std::vector<int> alpha_slices;
  std::vector<int> x_columns;
  std::string name;
};

ConfigFunctional smeared_field_functional(const CylinderLattice& lat,
                                          double alpha,
                                          std::vector<double> profile);

struct GramResult {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd errors;
  double min_eigenvalue = 0;
  double error_scale = 0;  // Frobenius norm of the entry errors
};

// Gram matrix M_ij = E[R(F_i) F_j] for reflection-positive functionals.
GramResult os_positivity_gram(const std::vector<ConfigFunctional>& functionals,
                              ReflectionAxis axis, const MeasureSpec& spec,
                              const RunParams& run);

struct NelsonReport {
  double exact_deviation = 0;       // free, symmetric torus, per-sample swap
  Estimate first;                   // ordered-and-estimated one way
  Estimate second;                  // swapped axes, converted ordering
  bool consistent = false;
  std::string variant;
};

// Free exact variant: on a symmetric torus (beta = 2L, n_alpha = n_x) the
// axis swap is a lattice symmetry; swapping every sample and both test
// functions reproduces <phi(f) phi(g)> exactly.
NelsonReport nelson_symmetry_check_free(const CylinderLattice& lat,
                                        const std::vector<double>& f,
                                        const std::vector<double>& g,
                                        const RunParams& run);

// Interacting variant on the symmetric torus: the polynomial is specified
// once, ordered against the alpha-resummed constant for one run and
// rewick-converted to the x-resummed constant for the swapped run.
NelsonReport nelson_symmetry_check_interacting(
    const CylinderLattice& lat, const std::vector<double>& coefficients,
    const RunParams& run);

// Paired asymmetric tori (beta, 2L) and (2L, beta): the same physical
// polynomial drives both runs and two-point functions at swapped arguments
// must agree.
NelsonReport nelson_symmetry_check_paired(const CylinderLattice& lat,
                                          const std::vector<double>& coefficients,
                                          const RunParams& run);

struct MomentGrowthRow {
  int p = 0;
  Estimate moment;
  double bound = 0;
  bool ok = false;
};

struct MomentGrowthReport {
  double fitted_k = 0;
  std::vector<MomentGrowthRow> rows;
};

// E[phi(0,h)^p] <= p! K^p with K fitted at p = 2 and then frozen.
MomentGrowthReport moment_growth_check(const std::vector<double>& h,
                                       const std::vector<int>& p_list,
                                       const MeasureSpec& spec,
                                       const RunParams& run);

struct HolderChainReport {
  std::vector<int> exponents;     // p_i per factor
  Estimate lhs_plus, lhs_minus;   // |E[prod phi_sigma(alpha_i, h_i)]|
  std::vector<Estimate> norms_plus, norms_minus;
  double rhs_plus = 0, rhs_minus = 0;
  double rhs_plus_error = 0, rhs_minus_error = 0;
  bool ok = false;
};

// Staggered-product Hoelder bound: |E[prod_i phi_pm(alpha_i, h_i)]| is
// bounded by the product of the staggered p_i-norms
// E[prod_{k=1..p} phi_pm(k beta / p, h)]^{1/p}, with p_i fixed by the
// neighbouring gaps (wrap-around included).
HolderChainReport holder_chain_check(const std::vector<std::vector<double>>& h_list,
                                     const std::vector<double>& alpha_list,
                                     const MeasureSpec& spec,
                                     const RunParams& run);

}  // namespace pphi2
