#pragma once

#include <span>
#include <string>
#include <vector>

namespace pphi2 {

enum class EstimateMethod { Exact, PlainMC, Reweighting, Metropolis };

struct Estimate {
  double value = 0;
  double std_error = 0;
  double n_eff = 1;
  EstimateMethod method = EstimateMethod::PlainMC;
};

// |a - b| within n_sigma combined standard errors (plus an absolute floor
// so exact zeros compare cleanly).
bool consistent(const Estimate& a, const Estimate& b, double n_sigma = 3.0,
                double floor_abs = 1e-12);
bool consistent_with(const Estimate& a, double target, double n_sigma = 3.0,
                     double floor_abs = 1e-12);

double mean(std::span<const double> xs);

// Jackknife standard error of the mean over n_blocks blocks.
Estimate jackknife_mean(std::span<const double> xs, int n_blocks = 50);

// Jackknife for the ratio sum(num) / sum(den) (reweighted estimators).
Estimate jackknife_ratio(std::span<const double> num,
                         std::span<const double> den, int n_blocks = 50);

// Integrated autocorrelation time with a self-consistent window
// (window = first W with W >= c * tau_int(W)); >= 0.5 by construction.
double integrated_autocorrelation(std::span<const double> xs, double c = 6.0);

// Mean with the naive error inflated by sqrt(2 tau_int).
Estimate autocorrelated_mean(std::span<const double> xs);

}  // namespace pphi2
