#include "pphi2/measure.hpp"

#include <cmath>

namespace pphi2 {

namespace {

// Plain monomial form of the ordered polynomial, for hot loops.
struct MonomialPoly {
  std::vector<double> c;

  static MonomialPoly from(const WickPolynomial& poly) {
    return MonomialPoly{monomial_coefficients(poly)};
  }

  double eval(double x) const {
    double acc = 0;
    for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j)
      acc = acc * x + c[j];
    return acc;
  }
};

double ess_of(std::span<const double> weights) {
  double s = 0, s2 = 0;
  for (double w : weights) {
    s += w;
    s2 += w * w;
  }
  return s * s / s2;
}

}  // namespace

MeasureSpec make_measure_spec(const CylinderLattice& lattice,
                              const WickPolynomial& interaction,
                              double spatial_cutoff_l, EstimatorKind estimator,
                              bool allow_custom_constant) {
  require(spatial_cutoff_l > 0 && spatial_cutoff_l <= lattice.half_length,
          ErrorCode::ValidationError, "need 0 < l <= L");
  if (!allow_custom_constant && !interaction.is_zero()) {
    double c_lat = lattice_wick_constant(spectral_multipliers(lattice));
    require(std::abs(interaction.wick_constant - c_lat) <=
                1e-10 * std::max(1.0, c_lat),
            ErrorCode::ValidationError,
            "interaction ordering constant differs from the lattice one; "
            "pass a rewick-converted polynomial explicitly");
  }
  return MeasureSpec{lattice, interaction, spatial_cutoff_l, estimator};
}

std::vector<bool> cutoff_window(const CylinderLattice& lat, double l) {
  std::vector<bool> window(lat.n_x);
  for (int j = 0; j < lat.n_x; ++j)
    window[j] = std::abs(lat.x_coord(j)) <= l + 1e-9 * lat.a_x();
  return window;
}

double interaction_action(const FieldConfiguration& config,
                          const MeasureSpec& spec) {
  require(config.lattice.same_geometry(spec.lattice),
          ErrorCode::LatticeMismatch,
          "configuration lives on a different lattice");
  const auto& lat = spec.lattice;
  const auto window = cutoff_window(lat, spec.spatial_cutoff_l);
  const double vol = lat.cell_volume();
  double action = 0;
  for (int i = 0; i < lat.n_alpha; ++i)
    for (int j = 0; j < lat.n_x; ++j)
      if (window[j])
        action += vol * wick_polynomial_eval(spec.interaction, config.at(i, j));
  return action;
}

double free_action(const FieldConfiguration& config) {
  const auto& lat = config.lattice;
  require(lat.dispersion == Dispersion::LatticeLaplacian,
          ErrorCode::ValidationError,
          "local free action requires the lattice Laplacian dispersion");
  const double vol = lat.cell_volume();
  const double ia2 = 1.0 / (lat.a_alpha() * lat.a_alpha());
  const double ix2 = 1.0 / (lat.a_x() * lat.a_x());
  const double m2 = lat.mass * lat.mass;
  double action = 0;
  for (int i = 0; i < lat.n_alpha; ++i)
    for (int j = 0; j < lat.n_x; ++j) {
      double phi = config.at(i, j);
      double da = config.at((i + 1) % lat.n_alpha, j) - phi;
      double dx = config.at(i, (j + 1) % lat.n_x) - phi;
      action += vol * (0.5 * m2 * phi * phi + 0.5 * ia2 * da * da +
                       0.5 * ix2 * dx * dx);
    }
  return action;
}

std::vector<Estimate> reweighted_expectations(
    std::span<const Observable> observables, const MeasureSpec& spec,
    const RunParams& run) {
  require(run.n_samples >= 100, ErrorCode::ValidationError,
          "reweighting needs at least 100 samples");
  const int n_obs = static_cast<int>(observables.size());
  GaussianSampler sampler(spectral_multipliers(spec.lattice), run.seed,
                          run.stream);
  std::vector<double> weights(run.n_samples);
  std::vector<std::vector<double>> values(n_obs);
  for (auto& v : values) v.resize(run.n_samples);

  for (int i = 0; i < run.n_samples; ++i) {
    FieldConfiguration config = sampler.next();
    weights[i] = std::exp(-interaction_action(config, spec));
    for (int k = 0; k < n_obs; ++k) values[k][i] = observables[k](config);
  }
  double ess = ess_of(weights);
  require(ess >= 10.0, ErrorCode::DegenerateWeights,
          "reweighting ESS below 10; shrink the coupling or the volume");

  std::vector<Estimate> result(n_obs);
  std::vector<double> num(run.n_samples);
  for (int k = 0; k < n_obs; ++k) {
    for (int i = 0; i < run.n_samples; ++i) num[i] = values[k][i] * weights[i];
    result[k] = jackknife_ratio(num, weights);
    result[k].n_eff = ess;
  }
  return result;
}

Estimate reweighted_expectation(const Observable& observable,
                                const MeasureSpec& spec,
                                const RunParams& run) {
  return reweighted_expectations(std::span(&observable, 1), spec, run)[0];
}

double reweighting_ess(const MeasureSpec& spec, const RunParams& run) {
  GaussianSampler sampler(spectral_multipliers(spec.lattice), run.seed,
                          run.stream);
  std::vector<double> weights(run.n_samples);
  for (int i = 0; i < run.n_samples; ++i)
    weights[i] = std::exp(-interaction_action(sampler.next(), spec));
  return ess_of(weights);
}

namespace {

struct MetropolisChain {
  const CylinderLattice& lat;
  const MonomialPoly poly;
  const std::vector<bool> window;
  const double vol, ia2, ix2, m2;
  FieldConfiguration config;
  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};
  std::uniform_real_distribution<double> uniform{0.0, 1.0};
  double step = 1.0;
  long long accepted = 0, proposed = 0;

  MetropolisChain(const MeasureSpec& spec, const RunParams& run)
      : lat(spec.lattice),
        poly(MonomialPoly::from(spec.interaction)),
        window(cutoff_window(spec.lattice, spec.spatial_cutoff_l)),
        vol(spec.lattice.cell_volume()),
        ia2(1.0 / (spec.lattice.a_alpha() * spec.lattice.a_alpha())),
        ix2(1.0 / (spec.lattice.a_x() * spec.lattice.a_x())),
        m2(spec.lattice.mass * spec.lattice.mass),
        config{spec.lattice, std::vector<double>(spec.lattice.sites(), 0.0)},
        rng(make_stream(run.seed, run.stream)) {}

  double action_delta(int i, int j, double phi_new) const {
    const double phi = config.at(i, j);
    const double up = config.at((i + 1) % lat.n_alpha, j);
    const double down = config.at((i - 1 + lat.n_alpha) % lat.n_alpha, j);
    const double right = config.at(i, (j + 1) % lat.n_x);
    const double left = config.at(i, (j - 1 + lat.n_x) % lat.n_x);
    auto pair_term = [](double a, double b, double c) {
      return (a - b) * (a - b) + (a - c) * (a - c);
    };
    double dfree = 0.5 * m2 * (phi_new * phi_new - phi * phi) +
                   0.5 * ia2 * (pair_term(phi_new, up, down) -
                                pair_term(phi, up, down)) +
                   0.5 * ix2 * (pair_term(phi_new, right, left) -
                                pair_term(phi, right, left));
    double dint = window[j] ? poly.eval(phi_new) - poly.eval(phi) : 0.0;
    return vol * (dfree + dint);
  }

  void sweep() {
    for (int i = 0; i < lat.n_alpha; ++i)
      for (int j = 0; j < lat.n_x; ++j) {
        double phi = config.at(i, j);
        double phi_new = phi + step * normal(rng);
        double delta = action_delta(i, j, phi_new);
        ++proposed;
        if (delta <= 0 || uniform(rng) < std::exp(-delta)) {
          config.at(i, j) = phi_new;
          ++accepted;
        }
      }
  }

  double acceptance() const {
    return proposed ? static_cast<double>(accepted) / proposed : 0.0;
  }

  void reset_counters() { accepted = proposed = 0; }
};

}  // namespace

std::vector<Estimate> metropolis_expectations(
    std::span<const Observable> observables, const MeasureSpec& spec,
    const RunParams& run, MetropolisDiagnostics* diag) {
  require(run.n_sweeps > run.burn_in, ErrorCode::ValidationError,
          "n_sweeps must exceed burn_in");
  require(spec.lattice.dispersion == Dispersion::LatticeLaplacian,
          ErrorCode::ValidationError,
          "Metropolis requires the lattice Laplacian (local action)");
  MetropolisChain chain(spec, run);

  // Burn-in with step tuning towards mid-range acceptance.
  const int tune_interval = 25;
  for (int s = 0; s < run.burn_in; ++s) {
    chain.sweep();
    if ((s + 1) % tune_interval == 0) {
      double acc = chain.acceptance();
      if (acc < 0.35)
        chain.step *= 0.8;
      else if (acc > 0.55)
        chain.step *= 1.25;
      chain.reset_counters();
    }
  }
  chain.reset_counters();

  const int n_measured = run.n_sweeps - run.burn_in;
  const int thin = std::max(1, run.thin);
  const int n_obs = static_cast<int>(observables.size());
  std::vector<std::vector<double>> series(n_obs);
  for (int s = 0; s < n_measured; ++s) {
    chain.sweep();
    if (s % thin == 0)
      for (int k = 0; k < n_obs; ++k)
        series[k].push_back(observables[k](chain.config));
  }

  double acc = chain.acceptance();
  require(acc >= 0.3 && acc <= 0.6, ErrorCode::AcceptanceOutOfRange,
          "Metropolis acceptance outside 30-60% after tuning");

  std::vector<Estimate> result(n_obs);
  double tau_max = 0;
  for (int k = 0; k < n_obs; ++k) {
    result[k] = autocorrelated_mean(series[k]);
    tau_max = std::max(tau_max, integrated_autocorrelation(series[k]));
  }
  if (diag) *diag = MetropolisDiagnostics{acc, chain.step, tau_max};
  return result;
}

Estimate metropolis_expectation(const Observable& observable,
                                const MeasureSpec& spec,
                                const RunParams& run) {
  return metropolis_expectations(std::span(&observable, 1), spec, run)[0];
}

Estimate partition_ratio(const MeasureSpec& spec, const RunParams& run) {
  require(run.n_samples >= 100, ErrorCode::ValidationError,
          "partition estimate needs at least 100 samples");
  GaussianSampler sampler(spectral_multipliers(spec.lattice), run.seed,
                          run.stream);
  std::vector<double> weights(run.n_samples);
  for (int i = 0; i < run.n_samples; ++i)
    weights[i] = std::exp(-interaction_action(sampler.next(), spec));
  double ess = ess_of(weights);
  require(ess >= 10.0, ErrorCode::DegenerateWeights,
          "reweighting ESS below 10; shrink the coupling or the volume");
  Estimate est = jackknife_mean(weights);
  est.method = EstimateMethod::Reweighting;
  est.n_eff = ess;
  return est;
}

std::vector<Estimate> measure_expectations(
    std::span<const Observable> observables, const MeasureSpec& spec,
    const RunParams& run) {
  if (spec.estimator == EstimatorKind::Reweighting)
    return reweighted_expectations(observables, spec, run);
  return metropolis_expectations(observables, spec, run);
}

}  // namespace pphi2
