#include "pphi2/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>

#include "pphi2/rng.hpp"

namespace pphi2 {

using Complex = std::complex<double>;

HolomorphyReport holomorphy_probe(const ComplexFn& f,
                                  const std::vector<std::complex<double>>& point,
                                  double step, double tolerance) {
  require(step >= 1e-6 && step <= 1e-2, ErrorCode::ValidationError,
          "probe step must lie in [1e-6, 1e-2]");
  HolomorphyReport report;
  report.point = point;

  auto eval = [&](const std::vector<Complex>& z) {
    try {
      return f(z);
    } catch (const Error&) {
      fail(ErrorCode::StencilOutsideDomain,
           "probe stencil left the evaluable domain");
    }
  };

  const Complex i(0.0, 1.0);
  for (std::size_t c = 0; c < point.size(); ++c) {
    auto shifted = [&](Complex dz) {
      std::vector<Complex> z = point;
      z[c] += dz;
      return eval(z);
    };
    // Central-difference Cauchy-Riemann residual, 2 |d f / d zbar|.
    Complex along_re = shifted(step) - shifted(-step);
    Complex along_im = shifted(i * step) - shifted(-i * step);
    double cr = std::abs(along_re + i * along_im) / (2.0 * step);
    report.cr_residual = std::max(report.cr_residual, cr);

    // Morera witness: Simpson rule along the edges of a square of half-side
    // step, normalised by the perimeter.
    const Complex corners[4] = {Complex(step, step), Complex(-step, step),
                                Complex(-step, -step), Complex(step, -step)};
    Complex contour = 0;
    for (int e = 0; e < 4; ++e) {
      Complex a = corners[e], b = corners[(e + 1) % 4];
      contour += (b - a) / 6.0 *
                 (shifted(a) + 4.0 * shifted(0.5 * (a + b)) + shifted(b));
    }
    report.contour_residual =
        std::max(report.contour_residual, std::abs(contour) / (8.0 * step));
  }
  report.converged = report.cr_residual < tolerance &&
                     report.contour_residual < tolerance;
  return report;
}

namespace {

// One-sided boundary values of the KMS pair, approached from inside the
// analyticity strip with regulator delta.
Complex kms_side_one(double s, double y, double delta,
                     const DispersionParams& p, const WightmanQuadrature& q) {
  return free_thermal_wightman({Complex(s, -p.beta + delta), Complex(y, 0)}, p,
                               q)
      .value;
}

Complex kms_side_two(double s, double y, double delta,
                     const DispersionParams& p, const WightmanQuadrature& q) {
  return free_thermal_wightman({Complex(-s, -delta), Complex(-y, 0)}, p, q)
      .value;
}

}  // namespace

KmsBoundaryReport kms_boundary_check(const DispersionParams& p, int grid_n,
                                     double s_range, double y_range) {
  require(grid_n >= 2, ErrorCode::ValidationError, "need at least a 2x2 grid");
  // Near-boundary evaluation damps only at rate delta, so the window must be
  // allowed to grow well beyond the default cap.
  WightmanQuadrature quad;
  quad.abs_tol = 1e-12;
  quad.tail_tol = 1e-11;
  quad.k_max = 12000.0;
  quad.max_intervals = 30000;

  const double deltas[3] = {1e-2, 5e-3, 2.5e-3};
  double deviation = 0;
  double resid_coarse = 0, resid_fine = 0;

  for (int a = 0; a < grid_n; ++a) {
    for (int b = 0; b < grid_n; ++b) {
      // Offset grids keep |s| away from |y| (the light cone).
      double s = -s_range + (2.0 * s_range) * (a + 0.5) / grid_n;
      double y = -y_range + (2.0 * y_range) * (b + 0.25) / grid_n;
      Complex f1[3], f2[3];
      for (int d = 0; d < 3; ++d) {
        f1[d] = kms_side_one(s, y, deltas[d], p, quad);
        f2[d] = kms_side_two(s, y, deltas[d], p, quad);
      }
      // One-step Richardson pairs and the second-order extrapolant.
      Complex r1a = 2.0 * f1[1] - f1[0], r1b = 2.0 * f1[2] - f1[1];
      Complex r2a = 2.0 * f2[1] - f2[0], r2b = 2.0 * f2[2] - f2[1];
      Complex b1 = (4.0 * r1b - r1a) / 3.0;
      Complex b2 = (4.0 * r2b - r2a) / 3.0;
      auto guard = [](double v) {
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
      };
      deviation = std::max(deviation, guard(std::abs(b1 - b2)));
      // Convergence of side one towards side two's boundary value.
      resid_coarse = std::max(resid_coarse, guard(std::abs(r1a - b2)));
      resid_fine = std::max(resid_fine, guard(std::abs(r1b - b2)));
    }
  }
  KmsBoundaryReport report;
  report.deviation = deviation;
  report.richardson_ratio = resid_fine > 0 ? resid_coarse / resid_fine : 1e30;
  report.grid_points = grid_n * grid_n;
  return report;
}

TubeScanReport tube_scan(const DispersionParams& p, int n_inside,
                         int n_outside, std::uint64_t seed) {
  require(n_inside >= 10 && n_outside >= 10, ErrorCode::ValidationError,
          "scan needs at least 10 points per class");
  std::mt19937_64 rng = make_stream(seed, 17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * unit(rng);
  };

  TubeScanReport report;
  const double beta = p.beta;

  for (int k = 0; k < n_inside + n_outside; ++k) {
    bool want_inside = k < n_inside;
    double a, s;
    if (want_inside) {
      // Interior with a safety margin so the probe stencil stays inside.
      a = uniform(0.2 * beta, 0.8 * beta);
      double room = std::min(a, beta - a) - 0.1 * beta;
      s = uniform(-1.0, 1.0) * std::max(room, 0.0);
    } else {
      switch (k % 3) {
        case 0:  // light-cone violating: |s| exceeds a
          a = uniform(0.05 * beta, 0.45 * beta);
          s = (unit(rng) < 0.5 ? -1 : 1) * (a + uniform(0.05, 0.6) * beta);
          break;
        case 1:  // wrong side of the strip
          a = -uniform(0.05, 0.9) * beta;
          s = uniform(-0.3, 0.3) * beta;
          break;
        default:  // light-like boundary, |s| = a exactly
          a = uniform(0.1 * beta, 0.4 * beta);
          s = (unit(rng) < 0.5 ? -a : a);
          break;
      }
    }
    TubeScanPoint pt;
    pt.inside = want_inside;
    pt.z = TubePoint{Complex(uniform(-2, 2), -a), Complex(uniform(-2, 2), -s)};

    bool evaluated = false;
    try {
      WightmanValue w = free_thermal_wightman(pt.z, p);
      pt.tail_bound = w.tail_bound;
      evaluated = true;
    } catch (const Error&) {
      evaluated = false;
    }
    if (evaluated) {
      ComplexFn f = [&p](const std::vector<Complex>& z) {
        return free_thermal_wightman(TubePoint{z[0], z[1]}, p).value;
      };
      HolomorphyReport probe =
          holomorphy_probe(f, {pt.z.s, pt.z.y}, 1e-4, 1e-6);
      pt.cr_residual = probe.cr_residual;
      pt.classified_inside = probe.converged;
    } else {
      pt.classified_inside = false;
    }
    if (pt.classified_inside == pt.inside) ++report.correct;
    ++report.total;
    report.points.push_back(pt);
  }
  return report;
}

namespace {

// Recursion over pair partitions; "reversed" anchors the recursion at the
// other end so the bookkeeping differs while the summed terms agree.
Complex pairing_sum(const Eigen::MatrixXcd& cov, std::vector<int>& alive,
                    bool reversed) {
  if (alive.size() % 2 == 1) return Complex(0.0, 0.0);
  std::function<Complex(std::vector<int>&)> rec =
      [&](std::vector<int>& left) -> Complex {
    if (left.empty()) return Complex(1.0, 0.0);
    int anchor_pos = reversed ? static_cast<int>(left.size()) - 1 : 0;
    int anchor = left[anchor_pos];
    Complex total = 0;
    for (std::size_t m = 0; m < left.size(); ++m) {
      if (static_cast<int>(m) == anchor_pos) continue;
      int partner = left[m];
      std::vector<int> rest;
      rest.reserve(left.size() - 2);
      for (std::size_t q = 0; q < left.size(); ++q)
        if (static_cast<int>(q) != anchor_pos && q != m)
          rest.push_back(left[q]);
      int lo = std::min(anchor, partner), hi = std::max(anchor, partner);
      total += cov(lo, hi) * rec(rest);
    }
    return total;
  };
  return rec(alive);
}

Eigen::MatrixXcd pair_two_points(const std::vector<TubePoint>& points,
                                 const DispersionParams& p,
                                 const WightmanQuadrature& quad) {
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXcd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      TubePoint diff{points[i].s - points[j].s, points[i].y - points[j].y};
      cov(i, j) = free_thermal_wightman(diff, p, quad).value;
    }
  return cov;
}

}  // namespace

std::complex<double> quasifree_npoint(const std::vector<TubePoint>& points,
                                      const DispersionParams& p,
                                      const WightmanQuadrature& quad) {
  Eigen::MatrixXcd cov = pair_two_points(points, p, quad);
  std::vector<int> alive(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    alive[i] = static_cast<int>(i);
  return pairing_sum(cov, alive, false);
}

std::complex<double> quasifree_npoint_reversed(
    const std::vector<TubePoint>& points, const DispersionParams& p,
    const WightmanQuadrature& quad) {
  Eigen::MatrixXcd cov = pair_two_points(points, p, quad);
  std::vector<int> alive(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    alive[i] = static_cast<int>(i);
  return pairing_sum(cov, alive, true);
}

SpectralSupportReport spectral_support_check(const DispersionParams& p,
                                             int n_cut) {
  SpectralSupportReport report;
  double worst = std::numeric_limits<double>::infinity();
  for (int n = -n_cut; n <= n_cut; ++n) {
    double k = 2.0 * std::numbers::pi * n / p.beta;
    double nu = std::sqrt(k * k + p.mass * p.mass);
    double margin = nu - std::abs(k);
    worst = std::min(worst, margin);
    ++report.checked;
    if (margin <= 0) ++report.violations;
  }
  report.worst_margin = worst;
  return report;
}

SpectralSupportReport spectral_support_check(const FockModel& model,
                                             double tol_truncation) {
  // Group basis states by integer momentum; H commutes with P, so the
  // Hamiltonian is block diagonal over these sectors.
  std::map<long long, std::vector<int>> sectors;
  for (int i = 0; i < model.dim; ++i) {
    long long mom = 0;
    for (std::size_t m = 0; m < model.mode_numbers.size(); ++m)
      mom += static_cast<long long>(model.basis[i][m]) * model.mode_numbers[m];
    sectors[mom].push_back(i);
  }

  std::vector<std::pair<double, double>> joint;  // (|p|, E)
  for (const auto& [mom, idx] : sectors) {
    const int ns = static_cast<int>(idx.size());
    Eigen::MatrixXd block(ns, ns);
    for (int a = 0; a < ns; ++a)
      for (int b = 0; b < ns; ++b)
        block(a, b) = model.hamiltonian(idx[a], idx[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
    double p_abs =
        std::abs(2.0 * std::numbers::pi * mom / model.beta);
    for (int a = 0; a < ns; ++a)
      joint.emplace_back(p_abs, solver.eigenvalues()(a));
  }

  std::sort(joint.begin(), joint.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  const int total = static_cast<int>(joint.size());
  const int retained = total - total / 10;  // drop the top decile

  SpectralSupportReport report;
  double worst = std::numeric_limits<double>::infinity();
  bool top_failure = false;
  for (int i = 0; i < total; ++i) {
    double margin = joint[i].second - joint[i].first;
    if (i < retained) {
      ++report.checked;
      worst = std::min(worst, margin);
      if (margin < -tol_truncation) ++report.violations;
    } else if (margin < -tol_truncation) {
      top_failure = true;
    }
  }
  report.worst_margin = worst;
  report.truncation_flagged = report.violations == 0 && top_failure;
  return report;
}

}  // namespace pphi2
