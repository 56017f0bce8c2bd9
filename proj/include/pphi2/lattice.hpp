#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "pphi2/error.hpp"
#include "pphi2/rng.hpp"

namespace pphi2 {

enum class Dispersion { LatticeLaplacian, ContinuumModes };

// Discretised Euclidean cylinder: thermal circle of circumference beta
// (alpha direction, n_alpha sites) times a spatial circle of circumference
// 2L (x direction, n_x sites).  Site (i, j) sits at
// (alpha, x) = (i * a_alpha, -L + j * a_x).
struct CylinderLattice {
  double beta = 0;
  double half_length = 0;  // L; the x period is 2L
  int n_alpha = 0;
  int n_x = 0;
  double mass = 0;
  Dispersion dispersion = Dispersion::LatticeLaplacian;

  double a_alpha() const { return beta / n_alpha; }
  double a_x() const { return 2.0 * half_length / n_x; }
  double cell_volume() const { return a_alpha() * a_x(); }
  int sites() const { return n_alpha * n_x; }
  int site(int i, int j) const { return i * n_x + j; }
  double alpha_coord(int i) const { return i * a_alpha(); }
  double x_coord(int j) const { return -half_length + j * a_x(); }

  bool same_geometry(const CylinderLattice& o) const {
    return beta == o.beta && half_length == o.half_length &&
           n_alpha == o.n_alpha && n_x == o.n_x && mass == o.mass &&
           dispersion == o.dispersion;
  }
};

CylinderLattice build_lattice(double beta, double half_length, int n_alpha,
                              int n_x, double mass, Dispersion dispersion);

// One real field value per site, row-major (alpha major, x minor).
struct FieldConfiguration {
  CylinderLattice lattice;
  std::vector<double> values;

  double& at(int i, int j) { return values[lattice.site(i, j)]; }
  double at(int i, int j) const { return values[lattice.site(i, j)]; }
};

// Per-Fourier-mode multipliers of (-Laplacian + m^2)^{-1}.  Mode (n, j) has
// multiplier 1 / (nu_n^2 + k_j^2 + m^2) with the dispersion fixed by the
// lattice.  site_variance is the field variance at a single site under the
// matching Gaussian measure (the regularised coincident-point covariance).
struct SpectralCovariance {
  CylinderLattice lattice;
  std::vector<double> multipliers;  // n_alpha * n_x, index n * n_x + j
  double site_variance = 0;
};

SpectralCovariance spectral_multipliers(const CylinderLattice& lat);

// Squared frequencies of the two directions for the given dispersion.
std::vector<double> alpha_frequencies_sq(const CylinderLattice& lat);
std::vector<double> x_frequencies_sq(const CylinderLattice& lat);

// Streaming sampler of the free Gaussian field: independent standard normals
// per mode, scaled by sqrt(multiplier), conjugate-symmetrised so the inverse
// transform is real.  Bit-reproducible for a fixed (seed, stream).
class GaussianSampler {
 public:
  GaussianSampler(const SpectralCovariance& cov, std::uint64_t seed,
                  std::uint64_t stream = 0);
  ~GaussianSampler();
  GaussianSampler(const GaussianSampler&) = delete;
  GaussianSampler& operator=(const GaussianSampler&) = delete;

  FieldConfiguration next();
  // Max |imaginary part| left behind by the last inverse transform.
  double last_imag_residue() const { return last_imag_residue_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double last_imag_residue_ = 0;
};

std::vector<FieldConfiguration> sample_gaussian(const SpectralCovariance& cov,
                                                std::uint64_t seed, int count);

// Covariance matrix of the site values, computed as the explicit inverse of
// the lattice operator and rescaled to the smearing convention
// phi(f) = sum_sites a_alpha a_x f phi.  Independent of the spectral path.
Eigen::MatrixXd dense_green_oracle(const CylinderLattice& lat);

// Same covariance assembled from the multipliers by discrete transform;
// entry (r, r') depends only on the separation.
Eigen::MatrixXd spectral_green_matrix(const SpectralCovariance& cov);

// Separation kernel of the above: entry site(di, dj) is the covariance of
// two sites di rows and dj columns apart.
std::vector<double> spectral_green_kernel(const SpectralCovariance& cov);

// The site matrix of (-Laplacian + m^2) itself (no smearing rescale).
Eigen::MatrixXd dense_lattice_operator(const CylinderLattice& lat);

}  // namespace pphi2
