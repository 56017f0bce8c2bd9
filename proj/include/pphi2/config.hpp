#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pphi2/measure.hpp"

namespace pphi2 {

// Parsed and validated run configuration.  The file format is sectioned
// "key = value" text: sections in brackets, '#' comments, numeric arrays in
// square brackets.  See README for the grammar.
struct RunConfig {
  // [lattice]
  double beta = 2.0;
  double half_length = 2.0;
  int n_alpha = 8;
  int n_x = 16;
  double mass = 1.0;
  Dispersion dispersion = Dispersion::LatticeLaplacian;

  // [interaction]
  std::vector<double> coefficients = {0.0};
  WickLabel ordering = WickLabel::CFull;
  double custom_wick_constant = 0.0;
  double cutoff_l = 1.0;
  EstimatorKind estimator = EstimatorKind::Reweighting;

  // [run]
  std::uint64_t seed = 1;
  int samples = 20000;
  int sweeps = 20000;
  int burn_in = 2000;
  int thin = 1;
  int threads = 1;
  std::string out_dir = "out";

  // [battery]
  double tolerance_scale = 1.0;

  CylinderLattice lattice() const;
  WickPolynomial interaction() const;
  MeasureSpec measure_spec() const;
  RunParams run_params() const;

  // Normalised config text; parsing it back reproduces this object.
  std::string to_text() const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace pphi2
