#include "pphi2/stats.hpp"

#include <algorithm>
#include <cmath>

namespace pphi2 {

bool consistent(const Estimate& a, const Estimate& b, double n_sigma,
                double floor_abs) {
  double err = std::hypot(a.std_error, b.std_error);
  return std::abs(a.value - b.value) <= n_sigma * err + floor_abs;
}

bool consistent_with(const Estimate& a, double target, double n_sigma,
                     double floor_abs) {
  return std::abs(a.value - target) <= n_sigma * a.std_error + floor_abs;
}

double mean(std::span<const double> xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

Estimate jackknife_mean(std::span<const double> xs, int n_blocks) {
  const int n = static_cast<int>(xs.size());
  n_blocks = std::min(n_blocks, n);
  double total = 0;
  for (double x : xs) total += x;
  const double full = total / n;

  std::vector<double> leave_out(n_blocks);
  double acc = 0;
  for (int b = 0; b < n_blocks; ++b) {
    int lo = static_cast<int>(static_cast<long long>(b) * n / n_blocks);
    int hi = static_cast<int>(static_cast<long long>(b + 1) * n / n_blocks);
    double block = 0;
    for (int i = lo; i < hi; ++i) block += xs[i];
    leave_out[b] = (total - block) / (n - (hi - lo));
    acc += leave_out[b];
  }
  acc /= n_blocks;
  double var = 0;
  for (double v : leave_out) var += (v - acc) * (v - acc);
  var *= static_cast<double>(n_blocks - 1) / n_blocks;
  return Estimate{full, std::sqrt(var), static_cast<double>(n),
                  EstimateMethod::PlainMC};
}

Estimate jackknife_ratio(std::span<const double> num,
                         std::span<const double> den, int n_blocks) {
  const int n = static_cast<int>(num.size());
  n_blocks = std::min(n_blocks, n);
  double num_total = 0, den_total = 0;
  for (int i = 0; i < n; ++i) {
    num_total += num[i];
    den_total += den[i];
  }
  const double full = num_total / den_total;

  std::vector<double> leave_out(n_blocks);
  double acc = 0;
  for (int b = 0; b < n_blocks; ++b) {
    int lo = static_cast<int>(static_cast<long long>(b) * n / n_blocks);
    int hi = static_cast<int>(static_cast<long long>(b + 1) * n / n_blocks);
    double bn = 0, bd = 0;
    for (int i = lo; i < hi; ++i) {
      bn += num[i];
      bd += den[i];
    }
    leave_out[b] = (num_total - bn) / (den_total - bd);
    acc += leave_out[b];
  }
  acc /= n_blocks;
  double var = 0;
  for (double v : leave_out) var += (v - acc) * (v - acc);
  var *= static_cast<double>(n_blocks - 1) / n_blocks;
  return Estimate{full, std::sqrt(var), static_cast<double>(n),
                  EstimateMethod::Reweighting};
}

double integrated_autocorrelation(std::span<const double> xs, double c) {
  const int n = static_cast<int>(xs.size());
  if (n < 8) return 0.5;
  const double mu = mean(xs);
  double var = 0;
  for (double x : xs) var += (x - mu) * (x - mu);
  var /= n;
  if (var <= 0) return 0.5;

  double tau = 0.5;
  int max_lag = n / 4;
  for (int t = 1; t <= max_lag; ++t) {
    double rho = 0;
    for (int i = 0; i + t < n; ++i) rho += (xs[i] - mu) * (xs[i + t] - mu);
    rho /= (n - t) * var;
    tau += rho;
    if (t >= c * tau) break;  // self-consistent window
  }
  return std::max(tau, 0.5);
}

Estimate autocorrelated_mean(std::span<const double> xs) {
  const int n = static_cast<int>(xs.size());
  const double mu = mean(xs);
  double var = 0;
  for (double x : xs) var += (x - mu) * (x - mu);
  var /= std::max(1, n - 1);
  double tau = integrated_autocorrelation(xs);
  double err = std::sqrt(var / n) * std::sqrt(2.0 * tau);
  return Estimate{mu, err, n / (2.0 * tau), EstimateMethod::Metropolis};
}

}  // namespace pphi2
