#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "latbound/random.hpp"
#include "latbound/test_functions.hpp"

namespace latbound {

inline constexpr double kHypothesisMargin = 1e-9;

struct ConditionTally {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<double> witness;  // point attaining the worst margin
  double witness_u = 0.0;
  double witness_t = 0.0;

  void record(double margin, const std::vector<double>& x, double u = 0.0, double t = 0.0) {
    ++checked;
    if (margin < -kHypothesisMargin) ++violations;
    if (margin < worst_margin) {
      worst_margin = margin;
      witness = x;
      witness_u = u;
      witness_t = t;
    }
  }
};

struct HypothesisReport {
  Family family = Family::gaussian;
  double p = 2.0;
  int dim = 1;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  ConditionTally fhat_nonnegative;  // fhat(x) / fhat(0) >= 0
  ConditionTally ray_monotone;      // (fhat(x) - fhat(t x)) / fhat(0) >= 0, t >= 1
  ConditionTally ratio_concave;     // log f(ux) - log f(x) - log f(utx) + log f(tx) >= 0, u, t in (0, 1]

  std::uint64_t total_violations() const {
    return fhat_nonnegative.violations + ray_monotone.violations + ratio_concave.violations;
  }
};

/// Sampled check of the analytic hypotheses on f and fhat. Points are drawn
/// as a log-uniform radius in [1e-2, 10] times a uniform direction in the cube.
inline HypothesisReport check_hypotheses(const TestFunctionSpec& spec, std::uint64_t samples, std::uint64_t seed) {
  HypothesisReport rep;
  rep.family = spec.family;
  rep.p = spec.p;
  rep.dim = spec.dim;
  rep.samples = samples;
  rep.seed = seed;
  Rng rng(seed);
  const int n = spec.dim;
  const double fhat0 = eval_fhat(spec, std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<double> x(static_cast<std::size_t>(n)), y(x.size()), z(x.size()), w(x.size());
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double scale = std::exp(rng.uniform(std::log(1e-2), std::log(10.0)));
    for (auto& xi : x) xi = scale * rng.uniform(-1.0, 1.0);
    const double t_up = 1.0 + rng.uniform() * 4.0;
    const double u = 1.0 - rng.uniform();
    const double t = 1.0 - rng.uniform();

    const double fx = eval_fhat(spec, x);
    rep.fhat_nonnegative.record(fx / fhat0, x);

    for (int i = 0; i < n; ++i) y[i] = t_up * x[i];
    rep.ray_monotone.record((fx - eval_fhat(spec, y)) / fhat0, x, 0.0, t_up);

    for (int i = 0; i < n; ++i) {
      y[i] = u * x[i];
      z[i] = u * t * x[i];
      w[i] = t * x[i];
    }
    const double margin = (log_f(spec, y) - log_f(spec, x)) - (log_f(spec, z) - log_f(spec, w));
    const double scale_ref = std::max(1.0, std::abs(log_f(spec, x)));
    rep.ratio_concave.record(margin / scale_ref, x, u, t);
  }
  return rep;
}

}  // namespace latbound
