#include "pphi2/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pphi2 {

namespace {

double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

int snap_slice(const CylinderLattice& lat, double alpha) {
  int idx = static_cast<int>(std::lround(alpha / lat.a_alpha()));
  idx %= lat.n_alpha;
  if (idx < 0) idx += lat.n_alpha;
  return idx;
}

// Unnormalised spatial DFT magnitude |h_hat(q)|^2 of a real profile.
std::vector<double> profile_mode_power(const std::vector<double>& h) {
  const int n = static_cast<int>(h.size());
  std::vector<double> power(n);
  for (int q = 0; q < n; ++q) {
    double re = 0, im = 0;
    for (int j = 0; j < n; ++j) {
      double phase = -2.0 * std::numbers::pi * q * j / n;
      re += h[j] * std::cos(phase);
      im += h[j] * std::sin(phase);
    }
    power[q] = re * re + im * im;
  }
  return power;
}

}  // namespace

SmearedPoint make_smeared_point(const CylinderLattice& lat, double alpha,
                                std::vector<double> profile) {
  require(static_cast<int>(profile.size()) == lat.n_x,
          ErrorCode::ValidationError, "profile length must equal n_x");
  double norm = 0;
  bool nonzero = false;
  for (double v : profile) {
    require(std::isfinite(v), ErrorCode::ValidationError,
            "profile entries must be finite");
    if (v != 0) nonzero = true;
    norm += lat.a_x() * v * v;
  }
  require(nonzero, ErrorCode::ValidationError, "profile must not vanish");
  SmearedPoint p{alpha, std::move(profile), norm, snap_slice(lat, alpha)};
  return p;
}

double smeared_field(const FieldConfiguration& config, const SmearedPoint& p) {
  const auto& lat = config.lattice;
  double sum = 0;
  for (int j = 0; j < lat.n_x; ++j)
    sum += p.profile[j] * config.at(p.slice, j);
  return sum * lat.a_x();
}

FieldConfiguration reflect_configuration(const FieldConfiguration& config,
                                         ReflectionAxis axis) {
  const auto& lat = config.lattice;
  FieldConfiguration out{lat, std::vector<double>(lat.sites())};
  for (int i = 0; i < lat.n_alpha; ++i)
    for (int j = 0; j < lat.n_x; ++j) {
      int ir = axis == ReflectionAxis::AlphaReflection
                   ? (lat.n_alpha - i) % lat.n_alpha
                   : i;
      int jr = axis == ReflectionAxis::XReflection ? (lat.n_x - j) % lat.n_x
                                                   : j;
      out.at(i, j) = config.at(ir, jr);
    }
  return out;
}

Estimate schwinger_npoint(const std::vector<SmearedPoint>& points,
                          const MeasureSpec& spec, const RunParams& run) {
  require(!points.empty() && points.size() <= 8, ErrorCode::ValidationError,
          "schwinger_npoint supports 1 <= n <= 8");
  Observable obs = [points](const FieldConfiguration& config) {
    double prod = 1;
    for (const auto& p : points) prod *= smeared_field(config, p);
    return prod;
  };
  return measure_expectations(std::span(&obs, 1), spec, run)[0];
}

namespace {

double isserlis_sum(const Eigen::MatrixXd& cov, std::vector<int>& alive) {
  if (alive.empty()) return 1.0;
  if (alive.size() % 2 == 1) return 0.0;
  int first = alive[0];
  double total = 0;
  for (std::size_t k = 1; k < alive.size(); ++k) {
    std::vector<int> rest;
    rest.reserve(alive.size() - 2);
    for (std::size_t m = 1; m < alive.size(); ++m)
      if (m != k) rest.push_back(alive[m]);
    total += cov(first, alive[k]) * isserlis_sum(cov, rest);
  }
  return total;
}

}  // namespace

double schwinger_npoint_free_oracle(const std::vector<SmearedPoint>& points,
                                    const Eigen::MatrixXd& green,
                                    const CylinderLattice& lat) {
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd cov(n, n);
  const double ax2 = lat.a_x() * lat.a_x();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double sum = 0;
      for (int j = 0; j < lat.n_x; ++j)
        for (int j2 = 0; j2 < lat.n_x; ++j2)
          sum += points[a].profile[j] * points[b].profile[j2] *
                 green(lat.site(points[a].slice, j),
                       lat.site(points[b].slice, j2));
      cov(a, b) = ax2 * sum;
    }
  std::vector<int> alive(n);
  for (int i = 0; i < n; ++i) alive[i] = i;
  return isserlis_sum(cov, alive);
}

double schwinger_npoint_free_oracle(const std::vector<SmearedPoint>& points,
                                    const CylinderLattice& lat) {
  return schwinger_npoint_free_oracle(points, dense_green_oracle(lat), lat);
}

TwoPointProfile sharp_time_two_point_profile(const std::vector<double>& h,
                                             const MeasureSpec& spec,
                                             const RunParams& run) {
  const auto& lat = spec.lattice;
  SmearedPoint base = make_smeared_point(lat, 0.0, h);
  std::vector<Observable> observables;
  TwoPointProfile profile;
  for (int d = 0; d < lat.n_alpha; ++d) {
    SmearedPoint other = make_smeared_point(lat, d * lat.a_alpha(), h);
    observables.push_back([base, other](const FieldConfiguration& config) {
      return smeared_field(config, base) * smeared_field(config, other);
    });
    profile.separations.push_back(d * lat.a_alpha());
  }
  profile.estimates = measure_expectations(observables, spec, run);

  // Free lattice-exact values from the spectral kernel.
  auto cov = spectral_multipliers(lat);
  const auto kernel = spectral_green_kernel(cov);
  const double ax2 = lat.a_x() * lat.a_x();
  for (int d = 0; d < lat.n_alpha; ++d) {
    double sum = 0;
    for (int j = 0; j < lat.n_x; ++j)
      for (int j2 = 0; j2 < lat.n_x; ++j2) {
        int dj = (j - j2 + lat.n_x) % lat.n_x;
        sum += h[j] * h[j2] * kernel[lat.site(d, dj)];
      }
    profile.lattice_exact.push_back(ax2 * sum);
  }

  // Continuum sharp-time kernel summed over the profile's spatial modes.
  DispersionParams params{lat.beta, lat.mass};
  const auto power = profile_mode_power(h);
  const auto wx = x_frequencies_sq(lat);
  for (int d = 0; d < lat.n_alpha; ++d) {
    double sum = 0;
    for (int j = 0; j < lat.n_x; ++j)
      sum += power[j] *
             cov_mixed_sharp_time(d * lat.a_alpha(), std::sqrt(wx[j]), params);
    profile.continuum_value.push_back(sum * lat.a_x() / lat.n_x);
  }
  return profile;
}

ConfigFunctional smeared_field_functional(const CylinderLattice& lat,
                                          double alpha,
                                          std::vector<double> profile) {
  SmearedPoint p = make_smeared_point(lat, alpha, std::move(profile));
  std::vector<int> columns;
  for (int j = 0; j < lat.n_x; ++j)
    if (p.profile[j] != 0) columns.push_back(j);
  ConfigFunctional f;
  f.eval = [p](const FieldConfiguration& config) {
    return smeared_field(config, p);
  };
  f.alpha_slices = {p.slice};
  f.x_columns = columns;
  f.name = "phi(alpha=" + std::to_string(p.alpha) + ", h)";
  return f;
}

GramResult os_positivity_gram(const std::vector<ConfigFunctional>& functionals,
                              ReflectionAxis axis, const MeasureSpec& spec,
                              const RunParams& run) {
  const auto& lat = spec.lattice;
  for (const auto& f : functionals) {
    if (axis == ReflectionAxis::AlphaReflection) {
      for (int s : f.alpha_slices)
        require(s >= 0 && s <= lat.n_alpha / 2, ErrorCode::SupportViolation,
                "functional must be supported on alpha in [0, beta/2]");
    } else {
      for (int j : f.x_columns)
        require(lat.x_coord(j) >= -1e-12, ErrorCode::SupportViolation,
                "functional must be supported on x >= 0");
    }
  }

  const int nf = static_cast<int>(functionals.size());
  std::vector<Observable> observables;
  observables.reserve(nf * nf);
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b) {
      auto fa = functionals[a].eval;
      auto fb = functionals[b].eval;
      observables.push_back([fa, fb, axis](const FieldConfiguration& config) {
        return fa(reflect_configuration(config, axis)) * fb(config);
      });
    }
  auto estimates = measure_expectations(observables, spec, run);

  GramResult result;
  result.matrix.resize(nf, nf);
  result.errors.resize(nf, nf);
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b) {
      result.matrix(a, b) = estimates[a * nf + b].value;
      result.errors(a, b) = estimates[a * nf + b].std_error;
    }
  Eigen::MatrixXd sym = 0.5 * (result.matrix + result.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  result.min_eigenvalue = solver.eigenvalues().minCoeff();
  result.error_scale = result.errors.norm();
  return result;
}

namespace {

FieldConfiguration transpose_configuration(const FieldConfiguration& config) {
  const auto& lat = config.lattice;
  FieldConfiguration out{lat, std::vector<double>(lat.sites())};
  for (int i = 0; i < lat.n_alpha; ++i)
    for (int j = 0; j < lat.n_x; ++j) out.at(i, j) = config.at(j, i);
  return out;
}

std::vector<double> transpose_function(const std::vector<double>& f, int n) {
  std::vector<double> out(f.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i * n + j] = f[j * n + i];
  return out;
}

double pair_with(const FieldConfiguration& config,
                 const std::vector<double>& f) {
  double sum = 0;
  for (int r = 0; r < config.lattice.sites(); ++r)
    sum += f[r] * config.values[r];
  return sum * config.lattice.cell_volume();
}

void require_symmetric_torus(const CylinderLattice& lat) {
  require(lat.n_alpha == lat.n_x &&
              std::abs(lat.beta - 2.0 * lat.half_length) <=
                  1e-12 * lat.beta,
          ErrorCode::AsymmetricLatticeForExactVariant,
          "exact Nelson variant needs beta = 2L and n_alpha = n_x");
}

}  // namespace

NelsonReport nelson_symmetry_check_free(const CylinderLattice& lat,
                                        const std::vector<double>& f,
                                        const std::vector<double>& g,
                                        const RunParams& run) {
  require_symmetric_torus(lat);
  require(static_cast<int>(f.size()) == lat.sites() &&
              static_cast<int>(g.size()) == lat.sites(),
          ErrorCode::ValidationError, "test functions must cover the lattice");
  const auto ft = transpose_function(f, lat.n_alpha);
  const auto gt = transpose_function(g, lat.n_alpha);

  GaussianSampler sampler(spectral_multipliers(lat), run.seed, run.stream);
  std::vector<double> direct(run.n_samples), swapped(run.n_samples);
  double deviation = 0;
  for (int i = 0; i < run.n_samples; ++i) {
    FieldConfiguration config = sampler.next();
    FieldConfiguration configT = transpose_configuration(config);
    direct[i] = pair_with(config, f) * pair_with(config, g);
    swapped[i] = pair_with(configT, ft) * pair_with(configT, gt);
    deviation = std::max(deviation, std::abs(direct[i] - swapped[i]));
  }
  NelsonReport report;
  report.variant = "free-exact-swap";
  report.exact_deviation = deviation;
  report.first = jackknife_mean(direct);
  report.second = jackknife_mean(swapped);
  report.consistent = consistent(report.first, report.second);
  return report;
}

NelsonReport nelson_symmetry_check_interacting(
    const CylinderLattice& lat, const std::vector<double>& coefficients,
    const RunParams& run) {
  require_symmetric_torus(lat);
  const double c_beta = lattice_cbeta_constant(lat);
  const double c_zero = lattice_c0_constant(lat);

  // One physical polynomial, two orderings: alpha-first uses the
  // alpha-resummed constant, x-first the x-resummed one.
  WickPolynomial alpha_first =
      make_wick_polynomial(coefficients, c_beta, WickLabel::CBeta);
  WickPolynomial x_first = rewick(alpha_first, c_zero);

  MeasureSpec spec_a = make_measure_spec(lat, alpha_first, lat.half_length,
                                         EstimatorKind::Reweighting, true);
  MeasureSpec spec_b = make_measure_spec(lat, x_first, lat.half_length,
                                         EstimatorKind::Reweighting, true);

  // Bump profile and its image under the axis swap.
  std::vector<double> h(lat.n_x, 0.0);
  h[lat.n_x / 4] = 1.0;
  h[lat.n_x / 4 + 1] = 1.0;
  SmearedPoint p1 = make_smeared_point(lat, lat.beta / 4, h);
  SmearedPoint p2 = make_smeared_point(lat, lat.beta / 2, h);

  Observable obs_a = [p1, p2](const FieldConfiguration& config) {
    return smeared_field(config, p1) * smeared_field(config, p2);
  };
  // Swapped-axis observable evaluated through the transpose.
  Observable obs_b = [p1, p2](const FieldConfiguration& config) {
    FieldConfiguration t = transpose_configuration(config);
    return smeared_field(t, p1) * smeared_field(t, p2);
  };

  RunParams run_b = run;
  run_b.stream = run.stream + 1;
  NelsonReport report;
  report.variant = "interacting-symmetric-torus";
  report.first = reweighted_expectation(obs_a, spec_a, run);
  report.second = reweighted_expectation(obs_b, spec_b, run_b);
  report.consistent = consistent(report.first, report.second);
  return report;
}

NelsonReport nelson_symmetry_check_paired(
    const CylinderLattice& lat, const std::vector<double>& coefficients,
    const RunParams& run) {
  CylinderLattice swapped = build_lattice(
      2.0 * lat.half_length, 0.5 * lat.beta, lat.n_x, lat.n_alpha, lat.mass,
      lat.dispersion);

  // The input polynomial is ordered against the alpha-resummed constant of
  // the first lattice; on the swapped lattice that same number is its
  // x-resummed constant.  Both runs convert to their own full-lattice
  // constant, so they realise the same function of the field.
  const double c_in = lattice_cbeta_constant(lat);
  WickPolynomial input =
      make_wick_polynomial(coefficients, c_in, WickLabel::CBeta);
  WickPolynomial p_first =
      rewick(input, lattice_wick_constant(spectral_multipliers(lat)));
  WickPolynomial p_second =
      rewick(input, lattice_wick_constant(spectral_multipliers(swapped)));

  MeasureSpec spec_a = make_measure_spec(lat, p_first, lat.half_length,
                                         EstimatorKind::Reweighting, true);
  MeasureSpec spec_b = make_measure_spec(swapped, p_second,
                                         swapped.half_length,
                                         EstimatorKind::Reweighting, true);

  // Site two-point at a fixed separation and its swapped image.
  int i1 = 1, j1 = 2, i2 = lat.n_alpha / 2, j2 = lat.n_x / 2 + 1;
  Observable obs_a = [=](const FieldConfiguration& config) {
    return config.at(i1, j1) * config.at(i2, j2);
  };
  Observable obs_b = [=](const FieldConfiguration& config) {
    return config.at(j1, i1) * config.at(j2, i2);
  };

  RunParams run_b = run;
  run_b.stream = run.stream + 1;
  NelsonReport report;
  report.variant = "paired-asymmetric";
  report.first = reweighted_expectation(obs_a, spec_a, run);
  report.second = reweighted_expectation(obs_b, spec_b, run_b);
  report.consistent = consistent(report.first, report.second);
  return report;
}

MomentGrowthReport moment_growth_check(const std::vector<double>& h,
                                       const std::vector<int>& p_list,
                                       const MeasureSpec& spec,
                                       const RunParams& run) {
  for (int p : p_list)
    require(p >= 2 && p % 2 == 0 && p <= 8, ErrorCode::ValidationError,
            "moment orders must be even and <= 8");
  SmearedPoint point = make_smeared_point(spec.lattice, 0.0, h);

  std::vector<Observable> observables;
  observables.push_back([point](const FieldConfiguration& config) {
    double v = smeared_field(config, point);
    return v * v;
  });
  for (int p : p_list)
    observables.push_back([point, p](const FieldConfiguration& config) {
      return std::pow(smeared_field(config, point), p);
    });
  auto estimates = measure_expectations(observables, spec, run);

  MomentGrowthReport report;
  const Estimate& second = estimates[0];
  report.fitted_k = std::sqrt(second.value);
  const double k_err = second.std_error / (2.0 * report.fitted_k);
  for (std::size_t idx = 0; idx < p_list.size(); ++idx) {
    int p = p_list[idx];
    const Estimate& est = estimates[idx + 1];
    double bound = factorial(p) * std::pow(report.fitted_k, p);
    double bound_err =
        factorial(p) * p * std::pow(report.fitted_k, p - 1) * k_err;
    bool ok = est.value <=
              bound + 3.0 * std::hypot(est.std_error, bound_err) + 1e-12;
    report.rows.push_back(MomentGrowthRow{p, est, bound, ok});
  }
  return report;
}

namespace {

// Smallest even p with 1/p strictly below gap / beta.
int holder_exponent(double gap, double beta) {
  for (int p = 2; p <= 12; p += 2)
    if (1.0 / p < gap / beta) return p;
  fail(ErrorCode::GapTooSmall,
       "needed exponent above 12; gaps statistically infeasible");
}

}  // namespace

HolderChainReport holder_chain_check(
    const std::vector<std::vector<double>>& h_list,
    const std::vector<double>& alpha_list, const MeasureSpec& spec,
    const RunParams& run) {
  const auto& lat = spec.lattice;
  const int n = static_cast<int>(alpha_list.size());
  require(n >= 1 && static_cast<int>(h_list.size()) == n,
          ErrorCode::ValidationError, "need one profile per alpha");
  for (int i = 0; i < n; ++i) {
    require(alpha_list[i] > 0 && alpha_list[i] < lat.beta,
            ErrorCode::ValidationError, "alphas must lie in (0, beta)");
    if (i > 0)
      require(alpha_list[i] > alpha_list[i - 1], ErrorCode::ValidationError,
              "alphas must be strictly increasing");
  }

  HolderChainReport report;
  for (int i = 0; i < n; ++i) {
    double left =
        i == 0 ? alpha_list[0] + lat.beta - alpha_list[n - 1]
               : alpha_list[i] - alpha_list[i - 1];
    double right =
        i == n - 1 ? lat.beta - alpha_list[n - 1] + alpha_list[0]
                   : alpha_list[i + 1] - alpha_list[i];
    report.exponents.push_back(
        holder_exponent(std::min(left, right), lat.beta));
  }

  std::vector<SmearedPoint> points;
  for (int i = 0; i < n; ++i)
    points.push_back(make_smeared_point(lat, alpha_list[i], h_list[i]));

  auto chain_observable = [points, n](double sign) {
    return Observable([points, n, sign](const FieldConfiguration& config) {
      double prod = 1;
      for (int i = 0; i < n; ++i)
        prod *= std::max(sign * smeared_field(config, points[i]), 0.0);
      return prod;
    });
  };
  Observable obs_plus = chain_observable(+1.0);
  Observable obs_minus = chain_observable(-1.0);
  std::vector<Observable> lhs_obs = {obs_plus, obs_minus};
  auto lhs = measure_expectations(lhs_obs, spec, run);
  report.lhs_plus = lhs[0];
  report.lhs_minus = lhs[1];
  report.lhs_plus.value = std::abs(report.lhs_plus.value);
  report.lhs_minus.value = std::abs(report.lhs_minus.value);

  // Staggered p-norm of each factor, each from its own stream.
  double rhs_plus = 1, rhs_minus = 1, rel2_plus = 0, rel2_minus = 0;
  for (int i = 0; i < n; ++i) {
    int p = report.exponents[i];
    std::vector<SmearedPoint> stagger;
    for (int k = 1; k <= p; ++k)
      stagger.push_back(
          make_smeared_point(lat, k * lat.beta / p, h_list[i]));
    auto norm_observable = [stagger](double sign) {
      return Observable([stagger, sign](const FieldConfiguration& config) {
        double prod = 1;
        for (const auto& pt : stagger)
          prod *= std::max(sign * smeared_field(config, pt), 0.0);
        return prod;
      });
    };
    RunParams sub = run;
    sub.stream = run.stream + 1 + i;
    std::vector<Observable> norm_obs = {norm_observable(+1.0),
                                        norm_observable(-1.0)};
    auto est = measure_expectations(norm_obs, spec, sub);
    for (int sgn = 0; sgn < 2; ++sgn) {
      Estimate& e = est[sgn];
      double value = std::max(e.value, 1e-300);
      Estimate norm{std::pow(value, 1.0 / p),
                    std::pow(value, 1.0 / p) * e.std_error / (p * value),
                    e.n_eff, e.method};
      if (sgn == 0) {
        report.norms_plus.push_back(norm);
        rhs_plus *= norm.value;
        rel2_plus += std::pow(norm.std_error / norm.value, 2);
      } else {
        report.norms_minus.push_back(norm);
        rhs_minus *= norm.value;
        rel2_minus += std::pow(norm.std_error / norm.value, 2);
      }
    }
  }
  report.rhs_plus = rhs_plus;
  report.rhs_minus = rhs_minus;
  report.rhs_plus_error = rhs_plus * std::sqrt(rel2_plus);
  report.rhs_minus_error = rhs_minus * std::sqrt(rel2_minus);

  auto holds = [](const Estimate& lhs_est, double rhs, double rhs_err) {
    return lhs_est.value <=
           rhs + 3.0 * std::hypot(lhs_est.std_error, rhs_err) + 1e-12;
  };
  report.ok = holds(report.lhs_plus, report.rhs_plus, report.rhs_plus_error) &&
              holds(report.lhs_minus, report.rhs_minus,
                    report.rhs_minus_error);
  return report;
}

}  // namespace pphi2
