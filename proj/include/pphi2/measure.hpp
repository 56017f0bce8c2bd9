#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pphi2/lattice.hpp"
#include "pphi2/stats.hpp"
#include "pphi2/wick.hpp"

namespace pphi2 {

enum class EstimatorKind { Reweighting, Metropolis };

// Interacting measure at finite spatial cut-off: the Gaussian measure
// reweighted by exp(-S_int) with
//   S_int = sum_{sites, |x| <= l} a_alpha a_x P_wick(phi(site)).
struct MeasureSpec {
  CylinderLattice lattice;
  WickPolynomial interaction;
  double spatial_cutoff_l = 0;
  EstimatorKind estimator = EstimatorKind::Reweighting;
};

// Validates and defaults the ordering constant to the lattice one unless the
// caller explicitly keeps a different constant (Nelson bookkeeping does).
MeasureSpec make_measure_spec(const CylinderLattice& lattice,
                              const WickPolynomial& interaction,
                              double spatial_cutoff_l, EstimatorKind estimator,
                              bool allow_custom_constant = false);

// True for columns inside the cut-off window |x| <= l.
std::vector<bool> cutoff_window(const CylinderLattice& lat, double l);

double interaction_action(const FieldConfiguration& config,
                          const MeasureSpec& spec);

// Free part of the lattice action; local form, LatticeLaplacian only.
double free_action(const FieldConfiguration& config);

using Observable = std::function<double(const FieldConfiguration&)>;

struct RunParams {
  std::uint64_t seed = 1;
  int n_samples = 10000;    // reweighting
  int n_sweeps = 10000;     // metropolis, measured sweeps after burn-in
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t stream = 0;
};

// Importance-sampled estimate (sum O_i w_i) / (sum w_i), w = e^{-S_int},
// with jackknife errors; throws DegenerateWeights below ESS 10.
std::vector<Estimate> reweighted_expectations(
    std::span<const Observable> observables, const MeasureSpec& spec,
    const RunParams& run);
Estimate reweighted_expectation(const Observable& observable,
                                const MeasureSpec& spec,
                                const RunParams& run);
// Effective sample size (sum w)^2 / sum w^2 of a reweighting run.
double reweighting_ess(const MeasureSpec& spec, const RunParams& run);

// Site-wise Metropolis against the full action, proposal width auto-tuned
// to 30-60% acceptance during burn-in.
struct MetropolisDiagnostics {
  double acceptance = 0;
  double step = 0;
  double tau_int_max = 0;
};

std::vector<Estimate> metropolis_expectations(
    std::span<const Observable> observables, const MeasureSpec& spec,
    const RunParams& run, MetropolisDiagnostics* diag = nullptr);
Estimate metropolis_expectation(const Observable& observable,
                                const MeasureSpec& spec, const RunParams& run);

// Z_l = E_gauss[e^{-S_int}] with jackknife error.
Estimate partition_ratio(const MeasureSpec& spec, const RunParams& run);

// Runs the configured estimator on a batch of observables.
std::vector<Estimate> measure_expectations(
    std::span<const Observable> observables, const MeasureSpec& spec,
    const RunParams& run);

}  // namespace pphi2
