#pragma once

#include <vector>

#include "pphi2/error.hpp"
#include "pphi2/lattice.hpp"

namespace pphi2 {

enum class WickLabel { CFull, CZero, CBeta, Custom };

// A bounded-below polynomial P(lambda) = sum_j coefficients[j] lambda^j whose
// powers are normal-ordered against the covariance constant wick_constant.
struct WickPolynomial {
  std::vector<double> coefficients;
  double wick_constant = 0;
  WickLabel label = WickLabel::Custom;

  int degree() const;
  bool is_zero() const;
};

// Validating constructor: degree <= 20, wick_constant >= 0, bounded below
// (even degree with positive leading coefficient, or a constant).
WickPolynomial make_wick_polynomial(std::vector<double> coefficients,
                                    double wick_constant,
                                    WickLabel label = WickLabel::Custom);

// :phi^n:_c via the explicit combinatorial sum.
double wick_power(double phi, double c, int n);
// Same quantity via Hermite polynomials, c^{n/2} He_n(phi / sqrt(c)).
double wick_power_hermite(double phi, double c, int n);
// Same quantity via :phi^{n+1}: = phi :phi^n: - n c :phi^{n-1}:.
double wick_power_recursive(double phi, double c, int n);

double wick_polynomial_eval(const WickPolynomial& poly, double phi);

// Re-expresses the polynomial against a new ordering constant without
// changing it as a function of the field.
WickPolynomial rewick(const WickPolynomial& poly, double c_new);

// Plain monomial coefficients of the ordered polynomial (the function of
// the field it actually is); rewick leaves these invariant.
std::vector<double> monomial_coefficients(const WickPolynomial& poly);

// The coincident-point covariance at this lattice cutoff.
double lattice_wick_constant(const SpectralCovariance& cov);

// Sharp-line ordering constants at the lattice cutoff: the alpha direction
// resummed exactly (thermal kernel at each spatial mode) and the x direction
// resummed exactly (2L-periodic kernel at each Matsubara mode).  These are
// the finite-cutoff stand-ins for the two iterated sharp-time limits.
double lattice_c0_constant(const CylinderLattice& lat);
double lattice_cbeta_constant(const CylinderLattice& lat);

}  // namespace pphi2
