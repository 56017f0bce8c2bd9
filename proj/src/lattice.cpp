#include "pphi2/lattice.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace pphi2 {

namespace {

// FFTW plan creation is not thread-safe.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

CylinderLattice build_lattice(double beta, double half_length, int n_alpha,
                              int n_x, double mass, Dispersion dispersion) {
  require(beta > 0 && half_length > 0 && mass > 0,
          ErrorCode::NonPositiveParameter,
          "beta, L and mass must all be > 0");
  require(n_alpha >= 4 && n_x >= 4, ErrorCode::NonPositiveParameter,
          "need at least 4 sites per direction");
  require(n_alpha % 2 == 0 && n_x % 2 == 0, ErrorCode::OddLatticeSize,
          "n_alpha and n_x must be even");
  return CylinderLattice{beta, half_length, n_alpha, n_x, mass, dispersion};
}

std::vector<double> alpha_frequencies_sq(const CylinderLattice& lat) {
  std::vector<double> w(lat.n_alpha);
  const double a = lat.a_alpha();
  for (int n = 0; n < lat.n_alpha; ++n) {
    if (lat.dispersion == Dispersion::LatticeLaplacian) {
      w[n] = (2.0 / (a * a)) *
             (1.0 - std::cos(2.0 * std::numbers::pi * n / lat.n_alpha));
    } else {
      int ns = n <= lat.n_alpha / 2 ? n : n - lat.n_alpha;  // signed index
      double nu = 2.0 * std::numbers::pi * ns / lat.beta;
      w[n] = nu * nu;
    }
  }
  return w;
}

std::vector<double> x_frequencies_sq(const CylinderLattice& lat) {
  std::vector<double> w(lat.n_x);
  const double a = lat.a_x();
  for (int j = 0; j < lat.n_x; ++j) {
    if (lat.dispersion == Dispersion::LatticeLaplacian) {
      w[j] = (2.0 / (a * a)) *
             (1.0 - std::cos(2.0 * std::numbers::pi * j / lat.n_x));
    } else {
      int js = j <= lat.n_x / 2 ? j : j - lat.n_x;
      double k = 2.0 * std::numbers::pi * js / (2.0 * lat.half_length);
      w[j] = k * k;
    }
  }
  return w;
}

SpectralCovariance spectral_multipliers(const CylinderLattice& lat) {
  SpectralCovariance cov;
  cov.lattice = lat;
  cov.multipliers.resize(lat.sites());
  const auto wa = alpha_frequencies_sq(lat);
  const auto wx = x_frequencies_sq(lat);
  const double m2 = lat.mass * lat.mass;
  double sum = 0;
  for (int n = 0; n < lat.n_alpha; ++n)
    for (int j = 0; j < lat.n_x; ++j) {
      double mu = 1.0 / (wa[n] + wx[j] + m2);
      cov.multipliers[lat.site(n, j)] = mu;
      sum += mu;
    }
  cov.site_variance = sum / (lat.sites() * lat.cell_volume());
  return cov;
}

struct GaussianSampler::Impl {
  SpectralCovariance cov;
  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};
  std::vector<std::complex<double>> spectrum;
  std::vector<std::complex<double>> out;
  std::vector<double> scale;  // sqrt(N * multiplier / cell_volume) per mode
  fftw_plan plan = nullptr;

  Impl(const SpectralCovariance& c, std::uint64_t seed, std::uint64_t stream)
      : cov(c), rng(make_stream(seed, stream)) {
    const auto& lat = cov.lattice;
    const int n = lat.sites();
    spectrum.resize(n);
    out.resize(n);
    scale.resize(n);
    for (int q = 0; q < n; ++q)
      scale[q] = std::sqrt(n * cov.multipliers[q] / lat.cell_volume());
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_2d(
        lat.n_alpha, lat.n_x, reinterpret_cast<fftw_complex*>(spectrum.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
        FFTW_ESTIMATE);
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
};

GaussianSampler::GaussianSampler(const SpectralCovariance& cov,
                                 std::uint64_t seed, std::uint64_t stream)
    : impl_(std::make_unique<Impl>(cov, seed, stream)) {}

GaussianSampler::~GaussianSampler() = default;

FieldConfiguration GaussianSampler::next() {
  auto& im = *impl_;
  const auto& lat = im.cov.lattice;
  const int na = lat.n_alpha, nx = lat.n_x;
  const double inv_n = 1.0 / lat.sites();

  // Fill modes in canonical order; a mode and its conjugate partner share one
  // complex normal so the configuration comes out real.
  for (int n = 0; n < na; ++n) {
    for (int j = 0; j < nx; ++j) {
      int nc = (na - n) % na, jc = (nx - j) % nx;
      int q = lat.site(n, j), qc = lat.site(nc, jc);
      if (q == qc) {
        im.spectrum[q] = im.normal(im.rng) * im.scale[q];
      } else if (q < qc) {
        double xr = im.normal(im.rng), xi = im.normal(im.rng);
        std::complex<double> z(xr, xi);
        z *= im.scale[q] / std::numbers::sqrt2;
        im.spectrum[q] = z;
        im.spectrum[qc] = std::conj(z);
      }
    }
  }
  fftw_execute(im.plan);

  FieldConfiguration config{lat, std::vector<double>(lat.sites())};
  double residue = 0;
  for (int r = 0; r < lat.sites(); ++r) {
    config.values[r] = im.out[r].real() * inv_n;
    residue = std::max(residue, std::abs(im.out[r].imag()) * inv_n);
  }
  last_imag_residue_ = residue;
  return config;
}

std::vector<FieldConfiguration> sample_gaussian(const SpectralCovariance& cov,
                                                std::uint64_t seed, int count) {
  require(count >= 1, ErrorCode::NonPositiveParameter, "count must be >= 1");
  GaussianSampler sampler(cov, seed);
  std::vector<FieldConfiguration> result;
  result.reserve(count);
  for (int i = 0; i < count; ++i) result.push_back(sampler.next());
  return result;
}

Eigen::MatrixXd dense_lattice_operator(const CylinderLattice& lat) {
  const int n = lat.sites();
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
  const double m2 = lat.mass * lat.mass;

  if (lat.dispersion == Dispersion::LatticeLaplacian) {
    const double ia2 = 1.0 / (lat.a_alpha() * lat.a_alpha());
    const double ix2 = 1.0 / (lat.a_x() * lat.a_x());
    for (int i = 0; i < lat.n_alpha; ++i)
      for (int j = 0; j < lat.n_x; ++j) {
        int r = lat.site(i, j);
        op(r, r) += 2.0 * ia2 + 2.0 * ix2 + m2;
        op(r, lat.site((i + 1) % lat.n_alpha, j)) -= ia2;
        op(r, lat.site((i - 1 + lat.n_alpha) % lat.n_alpha, j)) -= ia2;
        op(r, lat.site(i, (j + 1) % lat.n_x)) -= ix2;
        op(r, lat.site(i, (j - 1 + lat.n_x) % lat.n_x)) -= ix2;
      }
    return op;
  }

  // Continuum-mode dispersion: the operator is the circulant with symbol
  // nu_n^2 + k_j^2 + m^2; assemble its separation kernel by direct mode sums.
  const auto wa = alpha_frequencies_sq(lat);
  const auto wx = x_frequencies_sq(lat);
  std::vector<double> kernel(n);
  for (int di = 0; di < lat.n_alpha; ++di)
    for (int dj = 0; dj < lat.n_x; ++dj) {
      double s = 0;
      for (int a = 0; a < lat.n_alpha; ++a)
        for (int b = 0; b < lat.n_x; ++b)
          s += (wa[a] + wx[b] + m2) *
               std::cos(2.0 * std::numbers::pi *
                        (double(a) * di / lat.n_alpha +
                         double(b) * dj / lat.n_x));
      kernel[lat.site(di, dj)] = s / n;
    }
  for (int i = 0; i < lat.n_alpha; ++i)
    for (int j = 0; j < lat.n_x; ++j)
      for (int i2 = 0; i2 < lat.n_alpha; ++i2)
        for (int j2 = 0; j2 < lat.n_x; ++j2) {
          int di = (i - i2 + lat.n_alpha) % lat.n_alpha;
          int dj = (j - j2 + lat.n_x) % lat.n_x;
          op(lat.site(i, j), lat.site(i2, j2)) = kernel[lat.site(di, dj)];
        }
  return op;
}

Eigen::MatrixXd dense_green_oracle(const CylinderLattice& lat) {
  require(lat.sites() <= 4096, ErrorCode::LatticeTooLargeForDenseOracle,
          "dense oracle limited to n_alpha*n_x <= 4096");
  Eigen::MatrixXd op = dense_lattice_operator(lat);
  Eigen::MatrixXd green = op.inverse() / lat.cell_volume();
  return green;
}

std::vector<double> spectral_green_kernel(const SpectralCovariance& cov) {
  const auto& lat = cov.lattice;
  const int n = lat.sites();
  // G(d) = (1/(N a_alpha a_x)) sum_q mu_q e^{i q.d}
  std::vector<std::complex<double>> in(n), out(n);
  for (int q = 0; q < n; ++q) in[q] = cov.multipliers[q];
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_plan plan = fftw_plan_dft_2d(
        lat.n_alpha, lat.n_x, reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
        FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  const double norm = 1.0 / (n * lat.cell_volume());
  std::vector<double> kernel(n);
  for (int d = 0; d < n; ++d) kernel[d] = out[d].real() * norm;
  return kernel;
}

Eigen::MatrixXd spectral_green_matrix(const SpectralCovariance& cov) {
  const auto& lat = cov.lattice;
  const int n = lat.sites();
  const auto kernel = spectral_green_kernel(cov);
  Eigen::MatrixXd green(n, n);
  for (int i = 0; i < lat.n_alpha; ++i)
    for (int j = 0; j < lat.n_x; ++j)
      for (int i2 = 0; i2 < lat.n_alpha; ++i2)
        for (int j2 = 0; j2 < lat.n_x; ++j2) {
          int di = (i - i2 + lat.n_alpha) % lat.n_alpha;
          int dj = (j - j2 + lat.n_x) % lat.n_x;
          green(lat.site(i, j), lat.site(i2, j2)) =
              kernel[lat.site(di, dj)];
        }
  return green;
}

}  // namespace pphi2
