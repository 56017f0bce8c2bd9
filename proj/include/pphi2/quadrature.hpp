#pragma once

#include <complex>
#include <functional>

namespace pphi2 {

struct QuadratureResult {
  std::complex<double> value;
  double error = 0;       // accumulated local error estimate
  int evaluations = 0;
};

// Adaptive Gauss-Kronrod (7, 15) on [a, b] for complex-valued integrands.
QuadratureResult integrate_gk(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double abs_tol, int max_intervals = 2000);

}  // namespace pphi2
