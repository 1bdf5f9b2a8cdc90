#pragma once

#include <cmath>
#include <functional>

#include "latbound/errors.hpp"

namespace latbound {

inline constexpr double kGoldenTol = 1e-10;

struct Maximum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section maximization of a unimodal function on [a, b]; the
/// endpoints are compared as well so boundary maxima are found exactly.
inline Maximum golden_section_max(const std::function<double(double)>& f, double a, double b,
                                  double tol = kGoldenTol, bool include_a = true, bool include_b = true) {
  if (!(b > a)) throw DomainError("golden-section bracket must satisfy a < b");
  const double a0 = a, b0 = b;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  Maximum best = fc >= fd ? Maximum{c, fc} : Maximum{d, fd};
  if (include_a) {
    const double fa = f(a0);
    if (fa > best.value) best = {a0, fa};
  }
  if (include_b) {
    const double fb = f(b0);
    if (fb > best.value) best = {b0, fb};
  }
  return best;
}

/// Scan [a, b] on a uniform grid, then refine around the best grid point.
inline Maximum scan_then_golden(const std::function<double(double)>& f, double a, double b, int steps,
                                double tol = kGoldenTol) {
  const double h = (b - a) / steps;
  int best_i = 0;
  double best_v = f(a);
  for (int i = 1; i <= steps; ++i) {
    const double v = f(a + i * h);
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }
  const double lo = std::max(a, a + (best_i - 1) * h);
  const double hi = std::min(b, a + (best_i + 1) * h);
  return golden_section_max(f, lo, hi, tol);
}

}  // namespace latbound
