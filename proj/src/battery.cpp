#include "pphi2/battery.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pphi2/continuation.hpp"
#include "pphi2/estimate.hpp"

namespace pphi2 {

namespace {

using Complex = std::complex<double>;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double rel_dev(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double double_factorial(int n) {  // n!! with (-1)!! = 1
  double r = 1;
  for (int k = n; k >= 2; k -= 2) r *= k;
  return r;
}

// Runs independent checks on a small pool; results keep task order.
BatteryReport run_tasks(const std::string& subcommand,
                        std::vector<std::function<CheckResult()>> tasks,
                        int threads) {
  BatteryReport report;
  report.subcommand = subcommand;
  report.checks.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      try {
        report.checks[k] = tasks[k]();
      } catch (const std::exception& e) {
        report.checks[k] =
            CheckResult{"task_" + std::to_string(k), 0, 0, 0, false,
                        std::string("exception: ") + e.what()};
      }
    }
  };
  int n_threads = std::max(1, std::min<int>(threads, tasks.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return report;
}

std::vector<double> bump_profile(int n_x, int where, int width = 2) {
  std::vector<double> h(n_x, 0.0);
  for (int w = 0; w < width; ++w) h[(where + w) % n_x] = 1.0;
  return h;
}

// ---------------------------------------------------------------------------
// battery checks
// ---------------------------------------------------------------------------

CheckResult check_spectral_vs_dense(double ts) {
  double worst = 0;
  const CylinderLattice lats[2] = {
      build_lattice(2.0, 2.0, 12, 16, 1.0, Dispersion::LatticeLaplacian),
      build_lattice(2.5, 1.5, 8, 8, 0.8, Dispersion::ContinuumModes)};
  for (const auto& lat : lats) {
    Eigen::MatrixXd dense = dense_green_oracle(lat);
    Eigen::MatrixXd spectral = spectral_green_matrix(spectral_multipliers(lat));
    worst = std::max(worst, (dense - spectral).cwiseAbs().maxCoeff());
  }
  return CheckResult{"free_exactness_spectral_vs_dense", worst, 0, 1e-10 * ts,
                     worst <= 1e-10 * ts, "max entrywise deviation"};
}

CheckResult check_oracle_identities(double ts, std::uint64_t seed) {
  std::mt19937_64 rng = make_stream(seed, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    DispersionParams p{0.5 + 5.0 * unit(rng), 0.2 + 2.5 * unit(rng)};
    double k = -6.0 + 12.0 * unit(rng);
    double d = p.beta * unit(rng);
    int n = static_cast<int>(20 * unit(rng)) - 10;
    worst = std::max(worst,
                     rel_dev(cov_thermal_c0(k, p), cov_thermal_c0_coth(k, p)));
    worst = std::max(worst, rel_dev(cov_mixed_sharp_time(0.0, k, p),
                                    cov_thermal_c0(k, p)));
    worst = std::max(worst, rel_dev(cov_mixed_sharp_time(d, k, p),
                                    cov_mixed_sharp_time(p.beta - d, k, p)));
    worst = std::max(worst,
                     rel_dev(cov_circle_cbeta(n, p), cov_circle_cbeta(-n, p)));
    worst = std::max(worst, rel_dev(cov_spatial_circle(0.0, n, p),
                                    cov_circle_cbeta(n, p)));
  }
  return CheckResult{"covariance_oracle_identities", worst, 0, 1e-14 * ts,
                     worst <= 1e-14 * ts,
                     "coth form, coinciding points, beta reflection, parity"};
}

CheckResult check_gauss_moments(double ts, std::uint64_t seed) {
  auto lat = build_lattice(2.0, 2.0, 8, 8, 1.0, Dispersion::LatticeLaplacian);
  auto cov = spectral_multipliers(lat);
  SmearedPoint point = make_smeared_point(lat, 0.0, bump_profile(lat.n_x, 2));

  const int n_samples = 100000;
  GaussianSampler sampler(cov, seed, 3);
  std::vector<double> smeared(n_samples);
  for (int i = 0; i < n_samples; ++i)
    smeared[i] = smeared_field(sampler.next(), point);

  std::vector<SmearedPoint> pts = {point, point};
  double variance = schwinger_npoint_free_oracle(pts, lat);

  double worst_z = 0;
  std::string detail;
  std::vector<double> powers(n_samples);
  for (int p : {1, 2, 3, 4, 5, 6}) {
    for (int i = 0; i < n_samples; ++i) powers[i] = std::pow(smeared[i], p);
    Estimate est = jackknife_mean(powers);
    double expected =
        p % 2 == 1 ? 0.0 : double_factorial(p - 1) * std::pow(variance, p / 2);
    double z = std::abs(est.value - expected) / est.std_error;
    worst_z = std::max(worst_z, z);
    detail += "p" + std::to_string(p) + ":z=" + fmt(z) + " ";
  }
  return CheckResult{"gaussian_moment_law", worst_z, 0, 3.0 * ts,
                     worst_z <= 3.0 * ts, detail};
}

CheckResult check_wick_implementations(double ts) {
  double worst = 0;
  for (int n = 0; n <= 10; ++n)
    for (double phi = -10.0; phi <= 10.0; phi += 2.5)
      for (double c : {0.0, 0.25, 1.0, 3.5, 10.0}) {
        double a = wick_power(phi, c, n);
        double b = wick_power_hermite(phi, c, n);
        double r = wick_power_recursive(phi, c, n);
        worst = std::max(worst, rel_dev(a, b));
        worst = std::max(worst, rel_dev(a, r));
      }
  return CheckResult{"wick_three_routes", worst, 0, 1e-12 * ts,
                     worst <= 1e-12 * ts,
                     "explicit sum vs Hermite vs recursion, n <= 10"};
}

CheckResult check_wick_centering(double ts, std::uint64_t seed) {
  auto lat = build_lattice(2.0, 2.0, 8, 8, 1.0, Dispersion::LatticeLaplacian);
  auto cov = spectral_multipliers(lat);
  const double c = lattice_wick_constant(cov);
  const int n_samples = 40000;
  GaussianSampler sampler(cov, seed, 4);
  std::vector<std::vector<double>> series(6);
  for (int i = 0; i < n_samples; ++i) {
    double phi = sampler.next().at(0, 0);
    for (int n = 1; n <= 6; ++n)
      series[n - 1].push_back(wick_power(phi, c, n));
  }
  double worst_z = 0;
  for (int n = 1; n <= 6; ++n) {
    Estimate est = jackknife_mean(series[n - 1]);
    worst_z = std::max(worst_z, std::abs(est.value) / est.std_error);
  }
  return CheckResult{"wick_centering", worst_z, 0, 3.0 * ts,
                     worst_z <= 3.0 * ts,
                     "Monte Carlo mean of :phi^n: for n = 1..6"};
}

CheckResult check_wick_orthogonality(double ts, std::uint64_t seed) {
  auto lat = build_lattice(2.0, 2.0, 8, 8, 1.0, Dispersion::LatticeLaplacian);
  auto cov = spectral_multipliers(lat);
  const double c = lattice_wick_constant(cov);
  Eigen::MatrixXd green = dense_green_oracle(lat);
  const int site_a = lat.site(0, 0), site_b = lat.site(1, 2);
  const double g_ab = green(site_a, site_b);

  const int n_samples = 60000;
  GaussianSampler sampler(cov, seed, 5);
  const std::vector<std::pair<int, int>> zero_pairs = {{1, 2}, {2, 3}, {1, 3},
                                                       {2, 4}};
  const std::vector<int> diag_orders = {1, 2, 3, 4};
  std::vector<std::vector<double>> zero_series(zero_pairs.size());
  std::vector<std::vector<double>> diag_series(diag_orders.size());
  for (int i = 0; i < n_samples; ++i) {
    FieldConfiguration config = sampler.next();
    double pa = config.values[site_a], pb = config.values[site_b];
    for (std::size_t k = 0; k < zero_pairs.size(); ++k)
      zero_series[k].push_back(wick_power(pa, c, zero_pairs[k].first) *
                               wick_power(pb, c, zero_pairs[k].second));
    for (std::size_t k = 0; k < diag_orders.size(); ++k)
      diag_series[k].push_back(wick_power(pa, c, diag_orders[k]) *
                               wick_power(pb, c, diag_orders[k]));
  }
  double worst_z = 0;
  for (std::size_t k = 0; k < zero_pairs.size(); ++k) {
    Estimate est = jackknife_mean(zero_series[k]);
    worst_z = std::max(worst_z, std::abs(est.value) / est.std_error);
  }
  double fact = 1;
  for (std::size_t k = 0; k < diag_orders.size(); ++k) {
    int n = diag_orders[k];
    fact *= n;
    Estimate est = jackknife_mean(diag_series[k]);
    double expected = fact * std::pow(g_ab, n);
    worst_z =
        std::max(worst_z, std::abs(est.value - expected) / est.std_error);
  }
  return CheckResult{"wick_orthogonality", worst_z, 0, 3.0 * ts,
                     worst_z <= 3.0 * ts,
                     "<:phi^n:(a) :phi^m:(b)> vs delta_nm n! G^n"};
}

CheckResult check_rewick_roundtrip(double ts, std::uint64_t seed) {
  std::mt19937_64 rng = make_stream(seed, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    int degree = 2 * (1 + static_cast<int>(4 * unit(rng)));
    std::vector<double> coeffs(degree + 1);
    for (double& x : coeffs) x = -1.0 + 2.0 * unit(rng);
    coeffs[degree] = 0.5 + unit(rng);
    double c_old = 5.0 * unit(rng), c_new = 5.0 * unit(rng);
    WickPolynomial poly = make_wick_polynomial(coeffs, c_old);
    WickPolynomial converted = rewick(poly, c_new);
    WickPolynomial back = rewick(converted, c_old);
    for (std::size_t j = 0; j < coeffs.size(); ++j)
      worst = std::max(worst, rel_dev(back.coefficients[j], coeffs[j]));
    for (int k = 0; k < 10; ++k) {
      double phi = -10.0 + 20.0 * unit(rng);
      worst = std::max(worst, rel_dev(wick_polynomial_eval(poly, phi),
                                      wick_polynomial_eval(converted, phi)));
    }
  }
  return CheckResult{"rewick_roundtrip", worst, 0, 1e-12 * ts,
                     worst <= 1e-12 * ts,
                     "coefficient roundtrip and pointwise identity"};
}

CheckResult check_estimator_agreement(const RunConfig& config, double ts) {
  MeasureSpec spec = config.measure_spec();
  const auto& lat = spec.lattice;
  auto h = bump_profile(lat.n_x, lat.n_x / 2);
  SmearedPoint p0 = make_smeared_point(lat, 0.0, h);

  std::vector<Observable> observables;
  observables.push_back([p0](const FieldConfiguration& c) {
    double v = smeared_field(c, p0);
    return v * v;
  });
  observables.push_back([p0](const FieldConfiguration& c) {
    return std::pow(smeared_field(c, p0), 4);
  });
  for (int d = 0; d < 5; ++d) {
    SmearedPoint pd = make_smeared_point(lat, d * lat.a_alpha(), h);
    observables.push_back([p0, pd](const FieldConfiguration& c) {
      return smeared_field(c, p0) * smeared_field(c, pd);
    });
  }

  RunParams run_a = config.run_params();
  run_a.stream = 100;
  RunParams run_b = config.run_params();
  run_b.stream = 101;
  auto rw = reweighted_expectations(observables, spec, run_a);
  auto mc = metropolis_expectations(observables, spec, run_b);
  double worst_z = 0;
  for (std::size_t k = 0; k < observables.size(); ++k) {
    double err = std::hypot(rw[k].std_error, mc[k].std_error);
    worst_z = std::max(worst_z, std::abs(rw[k].value - mc[k].value) / err);
  }
  return CheckResult{"estimator_agreement", worst_z, 0, 3.0 * ts,
                     worst_z <= 3.0 * ts,
                     "reweighting vs Metropolis, moments and two-point"};
}

CheckResult check_reweighting_ess(const RunConfig& config, double ts) {
  MeasureSpec spec = config.measure_spec();
  RunParams run = config.run_params();
  run.stream = 102;
  double ess = reweighting_ess(spec, run);
  double needed = ts > 0 ? 100.0 / ts : std::numeric_limits<double>::infinity();
  return CheckResult{"reweighting_ess", ess, 0, needed, ess >= needed,
                     "effective sample size of the reweighting run"};
}

CheckResult check_detailed_balance(const RunConfig& config, double ts) {
  // Explicit transition matrix on a 2x2 lattice over a discretised field
  // range; single-site moves with a uniform proposal over the grid.
  CylinderLattice lat{1.0, 1.0, 2, 2, 1.0, Dispersion::LatticeLaplacian};
  double c_site = lattice_wick_constant(spectral_multipliers(lat));
  WickPolynomial poly =
      make_wick_polynomial(config.coefficients, c_site, WickLabel::CFull);
  MeasureSpec spec{lat, poly, lat.half_length, EstimatorKind::Metropolis};

  const int grid = 5;
  const double span = 2.0;
  std::vector<double> levels(grid);
  for (int g = 0; g < grid; ++g)
    levels[g] = -span + 2.0 * span * g / (grid - 1);

  const int sites = 4;
  int states = 1;
  for (int s = 0; s < sites; ++s) states *= grid;

  auto decode = [&](int code) {
    FieldConfiguration config_s{lat, std::vector<double>(sites)};
    for (int s = 0; s < sites; ++s) {
      config_s.values[s] = levels[code % grid];
      code /= grid;
    }
    return config_s;
  };
  auto total_action = [&](const FieldConfiguration& c) {
    return free_action(c) + interaction_action(c, spec);
  };

  std::vector<double> action(states);
  for (int s = 0; s < states; ++s) action[s] = total_action(decode(s));

  Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(states, states);
  const double site_prob = 1.0 / sites;
  const double prop_prob = 1.0 / (grid - 1);
  for (int s = 0; s < states; ++s) {
    double stay = 1.0;
    int scale = 1;
    for (int site = 0; site < sites; ++site) {
      int level = (s / scale) % grid;
      for (int g = 0; g < grid; ++g) {
        if (g == level) continue;
        int target = s + (g - level) * scale;
        double accept = std::min(1.0, std::exp(-(action[target] - action[s])));
        double prob = site_prob * prop_prob * accept;
        transition(s, target) += prob;
        stay -= prob;
      }
      scale *= grid;
    }
    transition(s, s) += stay;
  }

  // Stationary distribution from the eigenvector at eigenvalue 1.
  Eigen::EigenSolver<Eigen::MatrixXd> solver(transition.transpose());
  int best = 0;
  for (int i = 1; i < states; ++i)
    if (std::abs(solver.eigenvalues()(i) - 1.0) <
        std::abs(solver.eigenvalues()(best) - 1.0))
      best = i;
  Eigen::VectorXd pi = solver.eigenvectors().col(best).real();
  if (pi.sum() < 0) pi = -pi;
  pi /= pi.sum();

  double a_min = *std::min_element(action.begin(), action.end());
  Eigen::VectorXd boltzmann(states);
  for (int s = 0; s < states; ++s) boltzmann(s) = std::exp(-(action[s] - a_min));
  boltzmann /= boltzmann.sum();

  double tv = 0.5 * (pi - boltzmann).cwiseAbs().sum();
  return CheckResult{"detailed_balance_tv", tv, 0, 1e-3 * ts, tv <= 1e-3 * ts,
                     "stationary distribution vs Boltzmann, 2x2 lattice"};
}

CheckResult check_os_gram(const RunConfig& config, ReflectionAxis axis,
                          double ts) {
  MeasureSpec spec = config.measure_spec();
  const auto& lat = spec.lattice;
  std::vector<ConfigFunctional> functionals;
  if (axis == ReflectionAxis::AlphaReflection) {
    auto h = bump_profile(lat.n_x, lat.n_x / 2);
    functionals.push_back(
        smeared_field_functional(lat, lat.a_alpha(), h));
    functionals.push_back(
        smeared_field_functional(lat, 2.0 * lat.a_alpha(), h));
  } else {
    auto h = bump_profile(lat.n_x, lat.n_x / 2 + 1);  // columns with x >= 0
    functionals.push_back(smeared_field_functional(lat, lat.a_alpha(), h));
    functionals.push_back(
        smeared_field_functional(lat, 3.0 * lat.a_alpha(), h));
  }
  RunParams run = config.run_params();
  run.stream = axis == ReflectionAxis::AlphaReflection ? 103 : 104;
  GramResult gram = os_positivity_gram(functionals, axis, spec, run);
  double bound = -3.0 * gram.error_scale * ts;
  std::string name = axis == ReflectionAxis::AlphaReflection
                         ? "os_positivity_alpha"
                         : "os_positivity_x";
  return CheckResult{name, gram.min_eigenvalue, gram.error_scale, bound,
                     gram.min_eigenvalue >= bound,
                     "Gram minimum eigenvalue vs -3 sigma"};
}

CheckResult check_kms_free_exact(double ts) {
  auto lat = build_lattice(2.0, 2.0, 16, 8, 1.0, Dispersion::ContinuumModes);
  auto cov = spectral_multipliers(lat);
  const auto kernel = spectral_green_kernel(cov);
  double worst = 0;
  for (int d = 1; d < lat.n_alpha; ++d)
    for (int dx = 0; dx < lat.n_x; ++dx)
      worst = std::max(
          worst, rel_dev(kernel[lat.site(d, dx)],
                         kernel[lat.site(lat.n_alpha - d, dx)]));
  return CheckResult{"kms_periodicity_free", worst, 0, 1e-12 * ts,
                     worst <= 1e-12 * ts,
                     "free two-point symmetric under d -> beta - d"};
}

CheckResult check_kms_interacting(const RunConfig& config, double ts) {
  MeasureSpec spec = config.measure_spec();
  RunParams run = config.run_params();
  run.stream = 105;
  auto profile = sharp_time_two_point_profile(
      bump_profile(spec.lattice.n_x, spec.lattice.n_x / 2), spec, run);
  double worst_z = 0;
  const int n = spec.lattice.n_alpha;
  for (int d = 1; d < n / 2; ++d) {
    const Estimate& a = profile.estimates[d];
    const Estimate& b = profile.estimates[n - d];
    double err = std::hypot(a.std_error, b.std_error);
    worst_z = std::max(worst_z, std::abs(a.value - b.value) / err);
  }
  return CheckResult{"kms_periodicity_interacting", worst_z, 0, 3.0 * ts,
                     worst_z <= 3.0 * ts,
                     "S(d) vs S(beta - d) on the interacting measure"};
}

CheckResult check_moment_growth(const RunConfig& config, double ts) {
  MeasureSpec spec = config.measure_spec();
  RunParams run = config.run_params();
  run.stream = 106;
  auto h = bump_profile(spec.lattice.n_x, spec.lattice.n_x / 2);
  auto report = moment_growth_check(h, {2, 4, 6, 8}, spec, run);

  // Free analytic case: (p-1)!! v^{p/2} <= p! v^{p/2} holds identically.
  bool free_ok = true;
  for (int p : {2, 4, 6, 8})
    free_ok = free_ok && double_factorial(p - 1) <=
                             std::tgamma(p + 1.0) * (1.0 + 1e-15);

  double worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& row : report.rows) {
    double err = std::max(row.moment.std_error, 1e-300);
    worst_margin = std::max(worst_margin, (row.moment.value - row.bound) / err);
  }
  bool pass = free_ok && worst_margin <= 3.0 * ts;
  return CheckResult{"moment_growth", worst_margin, 0, 3.0 * ts, pass,
                     "p! K^p bound with K fitted at p = 2, p = 2..8"};
}

CheckResult check_holder_chain(const RunConfig& config, double ts) {
  // Dedicated lattice whose slice count divides the staggered exponents.
  auto lat = build_lattice(2.0, 1.5, 12, 8, 1.0, Dispersion::LatticeLaplacian);
  double c_lat = lattice_wick_constant(spectral_multipliers(lat));
  WickPolynomial poly =
      make_wick_polynomial(config.coefficients, c_lat, WickLabel::CFull);
  MeasureSpec spec{lat, poly, lat.half_length, EstimatorKind::Reweighting};

  std::vector<std::vector<double>> h_list = {bump_profile(lat.n_x, 2),
                                             bump_profile(lat.n_x, 4)};
  std::vector<double> alphas = {lat.beta / 4.0, lat.beta / 2.0};
  RunParams run = config.run_params();
  run.stream = 110;
  auto report = holder_chain_check(h_list, alphas, spec, run);

  auto margin = [](const Estimate& lhs, double rhs, double rhs_err) {
    double err = std::max(std::hypot(lhs.std_error, rhs_err), 1e-300);
    return (lhs.value - rhs) / err;
  };
  double worst =
      std::max(margin(report.lhs_plus, report.rhs_plus, report.rhs_plus_error),
               margin(report.lhs_minus, report.rhs_minus,
                      report.rhs_minus_error));
  std::string detail = "exponents:";
  for (int p : report.exponents) detail += " " + std::to_string(p);
  return CheckResult{"holder_chain", worst, 0, 3.0 * ts, worst <= 3.0 * ts,
                     detail};
}

// ---------------------------------------------------------------------------
// tube scan checks
// ---------------------------------------------------------------------------

CheckResult check_kms_boundary(double ts) {
  DispersionParams p{2.0, 1.0};
  auto report = kms_boundary_check(p, 10, 1.3, 1.1);
  bool pass = report.deviation <= 1e-8 * ts;
  return CheckResult{"kms_boundary_condition", report.deviation, 0, 1e-8 * ts,
                     pass, "extrapolated two-sided deviation, 10x10 grid"};
}

CheckResult check_kms_richardson(double /*ts*/) {
  DispersionParams p{2.0, 1.0};
  auto report = kms_boundary_check(p, 4, 1.0, 0.8);
  return CheckResult{"kms_richardson_ratio", report.richardson_ratio, 0, 3.0,
                     report.richardson_ratio >= 3.0,
                     "residual shrink per halving of the regulator"};
}

CheckResult check_tube_classification(const RunConfig& config, double ts) {
  DispersionParams p{2.0, 1.0};
  auto report = tube_scan(p, 50, 50, config.seed);
  double worst_cr = 0;
  for (const auto& pt : report.points)
    if (pt.inside) worst_cr = std::max(worst_cr, pt.cr_residual);
  bool pass = report.correct == report.total && worst_cr <= 1e-6 * ts;
  return CheckResult{"tube_classification",
                     static_cast<double>(report.correct), 0,
                     static_cast<double>(report.total), pass,
                     "inside/outside classification, max CR residual " +
                         fmt(worst_cr)};
}

CheckResult check_cr_outside_growth(const RunConfig& config, double /*ts*/) {
  DispersionParams p{2.0, 1.0};
  std::mt19937_64 rng = make_stream(config.seed, 18);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10; ++k) {
    double a = 0.25 * p.beta + 0.25 * p.beta * unit(rng);
    double s = 0.5 * a * unit(rng);
    Complex zs(2.0 * unit(rng) - 1.0, -a), zy(2.0 * unit(rng) - 1.0, -s);
    // Fixed-window evaluation; the mirrored point swaps the imaginary parts
    // and leaves the double cone.
    double window = 40.0;
    ComplexFn f = [&](const std::vector<Complex>& z) {
      return free_thermal_wightman_windowed(TubePoint{z[0], z[1]}, p, window,
                                            1e-12);
    };
    double inside =
        holomorphy_probe(f, {zs, zy}, 1e-4).cr_residual;
    Complex ms(zs.real(), -s), my(zy.real(), -a);
    double outside =
        holomorphy_probe(f, {ms, my}, 1e-4).cr_residual;
    worst_ratio = std::min(worst_ratio, outside / std::max(inside, 1e-300));
  }
  return CheckResult{"cr_residual_outside_growth", worst_ratio, 0, 1e3,
                     worst_ratio >= 1e3,
                     "CR residual ratio at mirrored out-of-cone points"};
}

CheckResult check_quasifree_consistency(double ts) {
  DispersionParams p{2.0, 1.0};
  // Four points with consecutive differences inside lambda_i V_beta.
  std::vector<TubePoint> pts;
  Complex t(0.3, -0.10), x(0.1, 0.02);
  pts.push_back(TubePoint{t, x});
  const double da[3] = {0.45, 0.50, 0.40};
  const double ds[3] = {0.08, -0.06, 0.05};
  for (int i = 0; i < 3; ++i) {
    // consecutive difference xi_i = z_i - z_{i+1} has Im = (-da, -ds)
    t = Complex(t.real() - 0.2, t.imag() + da[i]);
    x = Complex(x.real() + 0.1, x.imag() + ds[i]);
    pts.push_back(TubePoint{t, x});
  }
  Complex w1 = quasifree_npoint(pts, p);
  Complex w2 = quasifree_npoint_reversed(pts, p);
  double dev = std::abs(w1 - w2) / std::max(1.0, std::abs(w1));
  return CheckResult{"quasifree_pairing_consistency", dev, 0, 1e-10 * ts,
                     dev <= 1e-10 * ts,
                     "two pairing routes for the 4-point value " + fmt(std::abs(w1))};
}

CheckResult check_free_spectral_support(double ts) {
  DispersionParams p{2.0, 1.0};
  auto report = spectral_support_check(p, 200);
  double worst_identity = 0;
  for (int n = -200; n <= 200; ++n) {
    double k = 2.0 * std::numbers::pi * n / p.beta;
    double nu = std::sqrt(k * k + p.mass * p.mass);
    // identity up to rounding at the scale of k^2
    worst_identity = std::max(
        worst_identity,
        std::abs(nu * nu - k * k - p.mass * p.mass) / std::max(1.0, k * k));
  }
  bool pass = report.violations == 0 && worst_identity <= 1e-12 * ts;
  return CheckResult{"free_spectral_support", worst_identity, 0, 1e-12 * ts,
                     pass, "nu_n^2 - k_n^2 = m^2, margin " +
                               fmt(report.worst_margin)};
}

CheckResult check_circle_tail(double ts) {
  DispersionParams p{2.0 * std::numbers::pi, 1.0};
  auto value = free_circle_wightman(0.7, Complex(0.4, -1.0), p, 200, 1e-60);
  return CheckResult{"circle_wightman_tail", value.tail_bound, 0, 1e-60 * ts,
                     value.tail_bound <= 1e-60 * ts,
                     "certified mode-sum tail at n_cut = 200"};
}

CheckResult check_nelson_correspondence(const RunConfig& config, double ts) {
  DispersionParams p{2.0, 1.0};
  const double half_length = 12.0;
  const int j_cut = 3600, n_cut = 120;
  std::mt19937_64 rng = make_stream(config.seed, 19);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    double y = 0.15 + 0.55 * unit(rng);
    double alpha = y + 0.08 + (p.beta - 2.0 * y - 0.16) * unit(rng);
    // (alpha, y) inside V_beta with a margin
    Complex thermal = free_thermal_wightman_torus(
        TubePoint{Complex(0.0, -alpha), Complex(y, 0.0)}, p, half_length,
        j_cut);
    Complex circle =
        free_circle_wightman(alpha, Complex(0.0, -y), p, n_cut).value;
    worst = std::max(worst, std::abs(thermal - circle));
  }
  return CheckResult{"nelson_correspondence_free", worst, 0, 1e-8 * ts,
                     worst <= 1e-8 * ts,
                     "thermal mode sum vs circle mode sum at Euclidean points"};
}

// ---------------------------------------------------------------------------
// fock checks
// ---------------------------------------------------------------------------

CheckResult check_fock_algebra(double ts) {
  FockModel model = build_fock(2.0, 1.0, 1, 2);
  bool dim_ok = model.dim == 10;
  // Commutator on the sub-sector with occupation <= T-1.
  std::vector<int> keep;
  for (int i = 0; i < model.dim; ++i)
    if (model.total_occupation[i] <= model.occ_cut - 1) keep.push_back(i);
  double worst = 0;
  const int modes = 2 * model.mode_cut + 1;
  for (int n = 0; n < modes; ++n)
    for (int m = 0; m < modes; ++m) {
      Eigen::MatrixXd comm =
          model.annihilators[n] * model.creators[m] -
          model.creators[m] * model.annihilators[n];
      double want = n == m ? 1.0 : 0.0;
      for (int a : keep)
        for (int b : keep)
          worst = std::max(worst,
                           std::abs(comm(a, b) - (a == b ? want : 0.0)));
    }
  bool pass = dim_ok && worst <= 1e-12 * ts;
  return CheckResult{"fock_ladder_algebra", worst, 0, 1e-12 * ts, pass,
                     "dim(N=1,T=2) = 10 and [a, a*] = delta below the cut"};
}

CheckResult check_fock_interaction(const RunConfig& config, double ts) {
  FockModel model = build_fock(2.0, 1.0, 2, 4);
  WickPolynomial poly = make_wick_polynomial(
      config.coefficients, model.circle_wick_constant(), WickLabel::CBeta);
  build_interaction(model, poly);

  Eigen::MatrixXd p_op = model.momentum_diagonal.asDiagonal();
  double comm = (model.interaction * p_op - p_op * model.interaction)
                    .cwiseAbs()
                    .maxCoeff();
  double overlap2 = model.vacuum_overlap * model.vacuum_overlap;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.hamiltonian);
  double min_eig = solver.eigenvalues().minCoeff();
  bool pass = comm <= 1e-12 * ts && overlap2 >= 0.9 &&
              std::abs(min_eig) <= 1e-10;
  return CheckResult{"fock_interaction_build", comm, 0, 1e-12 * ts, pass,
                     "[V, P] norm; vacuum overlap^2 = " + fmt(overlap2) +
                         ", min eig H_C = " + fmt(min_eig)};
}

CheckResult check_spectrum_condition(const RunConfig& config, double /*ts*/) {
  FockModel model = build_fock(2.0, 1.0, 2, 4);
  WickPolynomial poly = make_wick_polynomial(
      config.coefficients, model.circle_wick_constant(), WickLabel::CBeta);
  build_interaction(model, poly);
  auto report = spectral_support_check(model);
  bool pass = report.violations == 0;
  return CheckResult{"spectrum_condition", report.worst_margin, 0, 0.0, pass,
                     "E >= |p| over retained joint spectrum (" +
                         std::to_string(report.checked) + " states)"};
}

CheckResult check_phi_bounds(const RunConfig& config, double /*ts*/) {
  FockModel model = build_fock(2.0, 1.0, 2, 4);
  WickPolynomial poly = make_wick_polynomial(
      config.coefficients, model.circle_wick_constant(), WickLabel::CBeta);
  FockModel interacting = model;
  build_interaction(interacting, poly);

  std::mt19937_64 rng = make_stream(config.seed, 21);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int modes = 2 * model.mode_cut + 1;
  int found = 0, wanted = 0;
  double worst_c1 = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd g(modes);
    for (int m = 0; m < modes; ++m) g(m) = normal(rng);
    for (double eps : {0.0, 0.5}) {
      ++wanted;
      auto search = phi_bound_search(model, g, eps);
      worst_c1 = std::max(worst_c1, search.c1);
      ++found;
      if (trial < 5) {
        ++wanted;
        auto si = phi_bound_search(interacting, g, eps, true);
        worst_c1 = std::max(worst_c1, si.c1);
        ++found;
      }
    }
    // eps = 1: the linear form
    ++wanted;
    auto lin = phi_bound_search(model, g, 1.0, false, true);
    worst_c1 = std::max(worst_c1, lin.c1);
    ++found;
  }
  return CheckResult{"phi_bounds", static_cast<double>(found), 0,
                     static_cast<double>(wanted), found == wanted,
                     "constants found on the grid, largest c1 = " +
                         fmt(worst_c1)};
}

CheckResult check_gibbs_holder(const RunConfig& config, double /*ts*/) {
  std::mt19937_64 rng = make_stream(config.seed, 22);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int violations = 0;
  double worst_ratio = 0;

  for (int trial = 0; trial < 200; ++trial) {
    int dim = 2 + static_cast<int>(unit(rng) * 38);
    Eigen::MatrixXd h(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j <= i; ++j) {
        h(i, j) = normal(rng);
        h(j, i) = h(i, j);
      }
    GibbsSpec spec = make_gibbs_spec(h, 0.2 + 2.8 * unit(rng));
    int n = static_cast<int>(unit(rng) * 3);  // up to 3 propagator weights
    std::vector<Eigen::MatrixXd> a_list;
    for (int j = 0; j <= n; ++j) {
      Eigen::MatrixXd b(dim, dim);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) b(r, c) = normal(rng);
      a_list.push_back(b * b.transpose());
    }
    // Feasible weights: each of the two blocks sums to at most 1/2.
    std::vector<double> z(n);
    int split = n / 2;
    for (int block = 0; block < 2; ++block) {
      int lo = block == 0 ? 0 : split;
      int hi = block == 0 ? split : n;
      if (lo >= hi) continue;
      double raw_sum = 0;
      for (int j = lo; j < hi; ++j) {
        z[j] = 0.3 + 0.7 * unit(rng);
        raw_sum += z[j];
      }
      double target = 0.5 * (0.4 + 0.55 * unit(rng));
      for (int j = lo; j < hi; ++j) z[j] *= target / raw_sum;
    }
    auto report = gibbs_holder_check(spec, a_list, z);
    if (!report.ok) ++violations;
    if (report.rhs > 0)
      worst_ratio = std::max(worst_ratio, report.lhs / report.rhs);
  }

  // All-identity equality case.
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
  h(0, 0) = 0.3;
  h(1, 1) = 1.1;
  h(2, 2) = 2.2;
  GibbsSpec spec = make_gibbs_spec(h, 1.4);
  std::vector<Eigen::MatrixXd> ones = {Eigen::MatrixXd::Identity(3, 3),
                                       Eigen::MatrixXd::Identity(3, 3)};
  auto equality = gibbs_holder_check(spec, ones, {0.4});
  bool equality_ok = std::abs(equality.lhs - 1.0) <= 1e-10 &&
                     std::abs(equality.rhs - 1.0) <= 1e-10;

  bool pass = violations == 0 && equality_ok;
  return CheckResult{"gibbs_holder_trials", static_cast<double>(violations), 0,
                     0.0, pass,
                     "violations out of 200 randomized trials, worst lhs/rhs = " +
                         fmt(worst_ratio)};
}

// ---------------------------------------------------------------------------
// nelson checks
// ---------------------------------------------------------------------------

CheckResult check_nelson_free(const RunConfig& config, double ts) {
  auto lat = build_lattice(2.0, 1.0, 12, 12, 1.0, config.dispersion);
  std::vector<double> f(lat.sites(), 0.0), g(lat.sites(), 0.0);
  f[lat.site(1, 2)] = 1.0;
  f[lat.site(2, 2)] = 0.5;
  g[lat.site(5, 7)] = 1.0;
  g[lat.site(5, 8)] = -0.25;
  RunParams run = config.run_params();
  run.n_samples = std::min(run.n_samples, 5000);
  run.stream = 120;
  auto report = nelson_symmetry_check_free(lat, f, g, run);
  return CheckResult{"nelson_free_exact_swap", report.exact_deviation, 0,
                     1e-12 * ts, report.exact_deviation <= 1e-12 * ts,
                     "per-sample axis-swap deviation"};
}

CheckResult check_nelson_interacting(const RunConfig& config, double ts) {
  auto lat = build_lattice(2.0, 1.0, 12, 12, 1.0,
                           Dispersion::LatticeLaplacian);
  RunParams run = config.run_params();
  run.stream = 121;
  auto report =
      nelson_symmetry_check_interacting(lat, config.coefficients, run);
  double err = std::hypot(report.first.std_error, report.second.std_error);
  double z = std::abs(report.first.value - report.second.value) / err;
  return CheckResult{"nelson_interacting_orderings", z, 0, 3.0 * ts,
                     z <= 3.0 * ts,
                     "C_beta-ordered vs rewicked C_0-ordered runs"};
}

CheckResult check_nelson_paired(const RunConfig& config, double ts) {
  auto lat = build_lattice(2.0, 2.0, 8, 16, 1.0, Dispersion::LatticeLaplacian);
  RunParams run = config.run_params();
  run.stream = 123;
  auto report = nelson_symmetry_check_paired(lat, config.coefficients, run);
  double err = std::hypot(report.first.std_error, report.second.std_error);
  double z = std::abs(report.first.value - report.second.value) / err;
  return CheckResult{"nelson_paired_asymmetric", z, 0, 3.0 * ts, z <= 3.0 * ts,
                     "(beta, 2L) run vs (2L, beta) run at swapped arguments"};
}

// ---------------------------------------------------------------------------
// sample checks
// ---------------------------------------------------------------------------

CheckResult check_sample_statistics(const RunConfig& config, double ts) {
  auto lat = config.lattice();
  auto cov = spectral_multipliers(lat);
  GaussianSampler sampler(cov, config.seed, 130);
  const int n = std::max(1000, config.samples);
  std::vector<double> site(n), pair(n);
  double residue = 0;
  for (int i = 0; i < n; ++i) {
    FieldConfiguration c = sampler.next();
    residue = std::max(residue, sampler.last_imag_residue());
    site[i] = c.at(0, 0);
    pair[i] = c.at(0, 0) * c.at(1, 1);
  }
  Estimate mean_est = jackknife_mean(site);
  Estimate pair_est = jackknife_mean(pair);
  const auto kernel = spectral_green_kernel(cov);
  double expected = kernel[lat.site(1, 1)];
  double z1 = std::abs(mean_est.value) / mean_est.std_error;
  double z2 = std::abs(pair_est.value - expected) / pair_est.std_error;
  bool pass = z1 <= 3.0 * ts && z2 <= 3.0 * ts && residue <= 1e-12;
  return CheckResult{"free_sampling_statistics", std::max(z1, z2), 0, 3.0 * ts,
                     pass,
                     "site mean, two-point vs spectral kernel, imag residue " +
                         fmt(residue)};
}

CheckResult check_sample_determinism(const RunConfig& config, double /*ts*/) {
  auto cov = spectral_multipliers(config.lattice());
  auto a = sample_gaussian(cov, config.seed, 3);
  auto b = sample_gaussian(cov, config.seed, 3);
  bool identical = true;
  for (int k = 0; k < 3; ++k)
    identical = identical && a[k].values == b[k].values;
  return CheckResult{"sampler_determinism", identical ? 0.0 : 1.0, 0, 0.0,
                     identical, "same seed twice gives bitwise-equal draws"};
}

}  // namespace

BatteryReport run_battery(const RunConfig& config) {
  const double ts = config.tolerance_scale;
  std::uint64_t seed = config.seed;
  std::vector<std::function<CheckResult()>> tasks = {
      [=] { return check_spectral_vs_dense(ts); },
      [=] { return check_oracle_identities(ts, seed); },
      [=] { return check_gauss_moments(ts, seed); },
      [=] { return check_wick_implementations(ts); },
      [=] { return check_wick_centering(ts, seed); },
      [=] { return check_wick_orthogonality(ts, seed); },
      [=] { return check_rewick_roundtrip(ts, seed); },
      [=] { return check_estimator_agreement(config, ts); },
      [=] { return check_reweighting_ess(config, ts); },
      [=] { return check_detailed_balance(config, ts); },
      [=] { return check_os_gram(config, ReflectionAxis::AlphaReflection, ts); },
      [=] { return check_os_gram(config, ReflectionAxis::XReflection, ts); },
      [=] { return check_kms_free_exact(ts); },
      [=] { return check_kms_interacting(config, ts); },
      [=] { return check_moment_growth(config, ts); },
      [=] { return check_holder_chain(config, ts); },
  };
  return run_tasks("battery", std::move(tasks), config.threads);
}

BatteryReport run_sample(const RunConfig& config) {
  const double ts = config.tolerance_scale;
  std::vector<std::function<CheckResult()>> tasks = {
      [=] { return check_sample_statistics(config, ts); },
      [=] { return check_sample_determinism(config, ts); },
  };
  return run_tasks("sample", std::move(tasks), config.threads);
}

BatteryReport run_tube_scan(const RunConfig& config) {
  const double ts = config.tolerance_scale;
  std::vector<std::function<CheckResult()>> tasks = {
      [=] { return check_kms_boundary(ts); },
      [=] { return check_kms_richardson(ts); },
      [=] { return check_tube_classification(config, ts); },
      [=] { return check_cr_outside_growth(config, ts); },
      [=] { return check_quasifree_consistency(ts); },
      [=] { return check_free_spectral_support(ts); },
      [=] { return check_circle_tail(ts); },
      [=] { return check_nelson_correspondence(config, ts); },
  };
  return run_tasks("tube-scan", std::move(tasks), config.threads);
}

BatteryReport run_fock_checks(const RunConfig& config) {
  const double ts = config.tolerance_scale;
  std::vector<std::function<CheckResult()>> tasks = {
      [=] { return check_fock_algebra(ts); },
      [=] { return check_fock_interaction(config, ts); },
      [=] { return check_spectrum_condition(config, ts); },
      [=] { return check_phi_bounds(config, ts); },
      [=] { return check_gibbs_holder(config, ts); },
  };
  return run_tasks("fock", std::move(tasks), config.threads);
}

BatteryReport run_nelson(const RunConfig& config) {
  const double ts = config.tolerance_scale;
  std::vector<std::function<CheckResult()>> tasks = {
      [=] { return check_nelson_free(config, ts); },
      [=] { return check_nelson_interacting(config, ts); },
      [=] { return check_nelson_paired(config, ts); },
  };
  return run_tasks("nelson", std::move(tasks), config.threads);
}

BatteryReport run_tabulate_oracles(const RunConfig& config) {
  DispersionParams p{config.beta, config.mass};
  BatteryReport report;
  report.subcommand = "tabulate-oracles";
  for (int i = 0; i <= 16; ++i) {
    double k = -4.0 + 0.5 * i;
    CheckResult row;
    row.name = "c0_k_" + fmt(k);
    row.value = cov_thermal_c0(k, p);
    row.bound = row.value;
    row.pass = true;
    row.detail = "sharp-time thermal kernel";
    report.checks.push_back(row);
  }
  for (int d = 0; d <= 8; ++d) {
    double da = config.beta * d / 8.0;
    CheckResult row;
    row.name = "mixed_d_" + fmt(da);
    row.value = cov_mixed_sharp_time(da, 1.0, p);
    row.bound = row.value;
    row.pass = true;
    row.detail = "mixed kernel at k = 1";
    report.checks.push_back(row);
  }
  for (int n = 0; n <= 8; ++n) {
    CheckResult row;
    row.name = "cbeta_n_" + std::to_string(n);
    row.value = cov_circle_cbeta(n, p);
    row.bound = row.value;
    row.pass = true;
    row.detail = "circle covariance";
    report.checks.push_back(row);
  }
  return report;
}

std::string battery_csv(const BatteryReport& report) {
  std::ostringstream os;
  os << "name,value,error,bound,pass\n";
  for (const auto& c : report.checks)
    os << c.name << "," << fmt(c.value) << "," << fmt(c.error) << ","
       << fmt(c.bound) << "," << (c.pass ? "1" : "0") << "\n";
  return os.str();
}

std::string battery_summary_json(const BatteryReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["version"] = kVersion;
  j["subcommand"] = report.subcommand;
  j["all_pass"] = report.all_pass();
  int n_pass = 0;
  for (const auto& c : report.checks) n_pass += c.pass ? 1 : 0;
  j["n_checks"] = report.checks.size();
  j["n_pass"] = n_pass;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["value"] = c.value;
    jc["error"] = c.error;
    jc["bound"] = c.bound;
    jc["pass"] = c.pass;
    jc["detail"] = c.detail;
    j["checks"].push_back(jc);
  }
  return j.dump(2) + "\n";
}

std::string manifest_json(const RunConfig& config,
                          const std::string& subcommand) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["version"] = kVersion;
  j["subcommand"] = subcommand;
  j["seed"] = config.seed;
  j["threads"] = config.threads;
  j["tolerance_scale"] = config.tolerance_scale;
  j["out_dir"] = config.out_dir;
  j["config_text"] = config.to_text();
  return j.dump(2) + "\n";
}

int run_subcommand(const std::string& name, const RunConfig& config) {
  BatteryReport report;
  if (name == "battery")
    report = run_battery(config);
  else if (name == "sample")
    report = run_sample(config);
  else if (name == "tube-scan")
    report = run_tube_scan(config);
  else if (name == "fock")
    report = run_fock_checks(config);
  else if (name == "nelson")
    report = run_nelson(config);
  else if (name == "tabulate-oracles")
    report = run_tabulate_oracles(config);
  else
    fail(ErrorCode::ValidationError, "unknown subcommand: " + name);

  namespace fs = std::filesystem;
  fs::path out(config.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream stream(out / file, std::ios::binary);
    if (!stream.good())
      throw std::runtime_error("cannot write " + (out / file).string());
    stream << text;
    if (!stream.good())
      throw std::runtime_error("failed writing " + (out / file).string());
  };
  write("results.csv", battery_csv(report));
  write("summary.json", battery_summary_json(report));
  write("manifest.json", manifest_json(config, name));
  return report.all_pass() ? 0 : 1;
}

}  // namespace pphi2
