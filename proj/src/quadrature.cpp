#include "pphi2/quadrature.hpp"

#include <cmath>
#include <queue>

namespace pphi2 {

namespace {

// Gauss-Kronrod (7, 15) nodes and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000,
};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
};

struct Interval {
  double a, b;
  std::complex<double> value;
  double error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

template <typename F>
Interval evaluate(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::complex<double> fc = f(center);
  std::complex<double> kron = kWgk[7] * fc;
  std::complex<double> gauss = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    double dx = half * kXgk[i];
    std::complex<double> fsum = f(center - dx) + f(center + dx);
    kron += kWgk[i] * fsum;
    if (i % 2 == 1) gauss += kWg[i / 2] * fsum;
  }
  kron *= half;
  gauss *= half;
  return Interval{a, b, kron, std::abs(kron - gauss)};
}

}  // namespace

QuadratureResult integrate_gk(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double abs_tol, int max_intervals) {
  std::priority_queue<Interval> queue;
  Interval first = evaluate(f, a, b);
  int evals = 15;
  queue.push(first);
  std::complex<double> total = first.value;
  double total_err = first.error;

  while (total_err > abs_tol &&
         static_cast<int>(queue.size()) < max_intervals) {
    Interval worst = queue.top();
    queue.pop();
    double mid = 0.5 * (worst.a + worst.b);
    Interval left = evaluate(f, worst.a, mid);
    Interval right = evaluate(f, mid, worst.b);
    evals += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    if (mid == worst.a || mid == worst.b) break;  // cannot refine further
  }
  return QuadratureResult{total, total_err, evals};
}

}  // namespace pphi2
