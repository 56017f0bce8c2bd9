#pragma once

#include <string>
#include <vector>

#include "pphi2/config.hpp"

namespace pphi2 {

inline constexpr const char* kVersion = "pphi2 0.1.0";

struct CheckResult {
  std::string name;
  double value = 0;   // measured deviation / statistic
  double error = 0;   // its statistical error, 0 for exact checks
  double bound = 0;   // acceptance threshold after tolerance scaling
  bool pass = false;
  std::string detail;
};

struct BatteryReport {
  std::string subcommand;
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// Statistical verification battery on the configured measure: free-field
// exactness, covariance identities, Gaussian moments, Wick machinery,
// estimator agreement, detailed balance, OS positivity, imaginary-time
// periodicity, moment growth and the Hoelder chain.
BatteryReport run_battery(const RunConfig& config);

// Free-field sampling summary: moments and covariance spot checks.
BatteryReport run_sample(const RunConfig& config);

// Complex-time verification: KMS boundary condition, tube classification,
// holomorphy probes, quasi-free pairing consistency, free spectral support.
BatteryReport run_tube_scan(const RunConfig& config);

// Truncated Fock checks: ladder algebra, interacting spectrum condition,
// field bounds, Gibbs Hoelder trials.
BatteryReport run_fock_checks(const RunConfig& config);

// Nelson symmetry: exact free swap, interacting symmetric torus, paired
// asymmetric tori.
BatteryReport run_nelson(const RunConfig& config);

// Oracle tabulation (always passes; emits values as CSV detail rows).
BatteryReport run_tabulate_oracles(const RunConfig& config);

std::string battery_csv(const BatteryReport& report);
std::string battery_summary_json(const BatteryReport& report);
std::string manifest_json(const RunConfig& config,
                          const std::string& subcommand);

// Executes a subcommand, writes results.csv, summary.json and manifest.json
// into the configured output directory; returns 0 if every check passed and
// 1 otherwise.  Filesystem or runtime failures surface as exceptions.
int run_subcommand(const std::string& name, const RunConfig& config);

}  // namespace pphi2
