#include "pphi2/wick.hpp"

#include <cmath>

namespace pphi2 {

namespace {

constexpr int kMaxDegree = 20;

// n! for n <= 20 fits in a double exactly (and in uint64).
constexpr double kFactorial[kMaxDegree + 1] = {
    1.,
    1.,
    2.,
    6.,
    24.,
    120.,
    720.,
    5040.,
    40320.,
    362880.,
    3628800.,
    39916800.,
    479001600.,
    6227020800.,
    87178291200.,
    1307674368000.,
    20922789888000.,
    355687428096000.,
    6402373705728000.,
    121645100408832000.,
    2432902008176640000.,
};

}  // namespace

int WickPolynomial::degree() const {
  for (int j = static_cast<int>(coefficients.size()) - 1; j >= 0; --j)
    if (coefficients[j] != 0.0) return j;
  return 0;
}

bool WickPolynomial::is_zero() const {
  for (double c : coefficients)
    if (c != 0.0) return false;
  return true;
}

WickPolynomial make_wick_polynomial(std::vector<double> coefficients,
                                    double wick_constant, WickLabel label) {
  require(wick_constant >= 0, ErrorCode::NegativeCovariance,
          "ordering constant must be >= 0");
  WickPolynomial poly{std::move(coefficients), wick_constant, label};
  if (poly.coefficients.empty()) poly.coefficients.push_back(0.0);
  int deg = poly.degree();
  require(deg <= kMaxDegree, ErrorCode::DegreeTooLarge,
          "polynomial degree above 20 not supported");
  bool bounded = deg == 0 || (deg % 2 == 0 && poly.coefficients[deg] > 0);
  require(bounded, ErrorCode::BoundedBelowViolation,
          "interaction polynomial must be bounded from below");
  return poly;
}

double wick_power(double phi, double c, int n) {
  require(n >= 0, ErrorCode::NegativeOrder, "wick power order must be >= 0");
  require(c >= 0, ErrorCode::NegativeCovariance,
          "ordering constant must be >= 0");
  require(n <= kMaxDegree, ErrorCode::DegreeTooLarge,
          "wick power order above 20 not supported");
  double sum = 0;
  for (int m = 0; 2 * m <= n; ++m) {
    double coeff = kFactorial[n] / (kFactorial[m] * kFactorial[n - 2 * m]);
    sum += coeff * std::pow(phi, n - 2 * m) * std::pow(-0.5 * c, m);
  }
  return sum;
}

double wick_power_hermite(double phi, double c, int n) {
  require(n >= 0, ErrorCode::NegativeOrder, "wick power order must be >= 0");
  require(c >= 0, ErrorCode::NegativeCovariance,
          "ordering constant must be >= 0");
  if (c == 0.0) return std::pow(phi, n);
  // He_{k+1}(x) = x He_k(x) - k He_{k-1}(x), probabilist's normalisation.
  double x = phi / std::sqrt(c);
  double prev = 1.0, cur = x;
  if (n == 0) return 1.0;
  for (int k = 1; k < n; ++k) {
    double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return std::pow(c, 0.5 * n) * cur;
}

double wick_power_recursive(double phi, double c, int n) {
  require(n >= 0, ErrorCode::NegativeOrder, "wick power order must be >= 0");
  require(c >= 0, ErrorCode::NegativeCovariance,
          "ordering constant must be >= 0");
  if (n == 0) return 1.0;
  double prev = 1.0, cur = phi;
  for (int k = 1; k < n; ++k) {
    double next = phi * cur - k * c * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double wick_polynomial_eval(const WickPolynomial& poly, double phi) {
  double sum = 0;
  for (int j = 0; j < static_cast<int>(poly.coefficients.size()); ++j)
    if (poly.coefficients[j] != 0.0)
      sum += poly.coefficients[j] * wick_power(phi, poly.wick_constant, j);
  return sum;
}

WickPolynomial rewick(const WickPolynomial& poly, double c_new) {
  require(c_new >= 0, ErrorCode::NegativeCovariance,
          "ordering constant must be >= 0");
  // From the generating identity :e^{t lambda}:_c = e^{t lambda - t^2 c / 2}:
  // :lambda^n:_old = sum_m n! / (m! (n-2m)!) (delta/2)^m :lambda^{n-2m}:_new
  // with delta = c_new - c_old.
  const double delta = c_new - poly.wick_constant;
  const int size = static_cast<int>(poly.coefficients.size());
  std::vector<double> out(size, 0.0);
  for (int j = 0; j < size; ++j) {
    if (poly.coefficients[j] == 0.0) continue;
    for (int m = 0; 2 * m <= j; ++m) {
      double coeff = kFactorial[j] / (kFactorial[m] * kFactorial[j - 2 * m]);
      out[j - 2 * m] += poly.coefficients[j] * coeff * std::pow(0.5 * delta, m);
    }
  }
  WickPolynomial result{std::move(out), c_new, WickLabel::Custom};
  return result;
}

std::vector<double> monomial_coefficients(const WickPolynomial& poly) {
  // Ordering against c = 0 is the identity, so the conversion to constant 0
  // yields the plain monomial expansion.
  return rewick(poly, 0.0).coefficients;
}

double lattice_wick_constant(const SpectralCovariance& cov) {
  return cov.site_variance;
}

namespace {

// (1 + e^{-P w}) / (2 w (1 - e^{-P w})): coincident-point kernel of the
// P-periodic direction at transverse frequency w.
double periodic_kernel(double period, double w) {
  double e = -std::expm1(-period * w);  // 1 - e^{-P w}, stable for small P w
  return (1.0 + std::exp(-period * w)) / (2.0 * w * e);
}

}  // namespace

double lattice_c0_constant(const CylinderLattice& lat) {
  const auto wx = x_frequencies_sq(lat);
  const double m2 = lat.mass * lat.mass;
  double sum = 0;
  for (double w2 : wx) sum += periodic_kernel(lat.beta, std::sqrt(w2 + m2));
  return sum / (2.0 * lat.half_length);
}

double lattice_cbeta_constant(const CylinderLattice& lat) {
  const auto wa = alpha_frequencies_sq(lat);
  const double m2 = lat.mass * lat.mass;
  double sum = 0;
  for (double w2 : wa)
    sum += periodic_kernel(2.0 * lat.half_length, std::sqrt(w2 + m2));
  return sum / lat.beta;
}

}  // namespace pphi2
