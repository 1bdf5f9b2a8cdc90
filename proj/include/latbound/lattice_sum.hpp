#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "latbound/enumerate.hpp"
#include "latbound/errors.hpp"
#include "latbound/lattice.hpp"
#include "latbound/norms.hpp"
#include "latbound/test_functions.hpp"

namespace latbound {

/// Relative allowance for rounding in term evaluation and summation.
inline constexpr double kRoundingRel = 1e-14;
inline constexpr double kLadderRatio = 1.25;
inline constexpr int kMaxRungs = 400;

struct SumOptions {
  double tol = 1e-10;  // remainder target relative to the sum
  std::uint64_t node_budget = kDefaultNodeBudget;
  std::uint64_t max_points = 10'000'000;
  double min_radius = 0.0;      // truncation box must reach at least this far (in x)
  bool allow_estimate = false;  // fall back to an uncertified tail estimate when the budget is too small
};

/// Enclosure of sum_{m in M} h((m + w)/s) [cos(2 pi (m + w).theta)].
/// Truncation is on the l_inf box ||(m + w)/s||_inf <= truncation_radius.
struct CertifiedSum {
  double partial = 0.0;
  double remainder_bound = 0.0;  // bound on |omitted terms| plus rounding
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double truncation_radius = 0.0;
  double norm_p = kInf;
  std::uint64_t points = 0;
  bool certified = true;
  double tail_estimate = 0.0;  // only nonzero for uncertified sums
  double abs_partial = 0.0;
  double imag_residue = 0.0;  // sine part of a phased sum

  double lower() const { return lower_bound; }
  double upper() const { return upper_bound; }
  /// Best point estimate: the partial sum, plus the tail estimate when uncertified.
  double value() const { return partial + tail_estimate; }
};

/// Same pass, also summing the terms whose point satisfies a predicate. Every
/// omitted point is assumed to satisfy it (the predicate selects an exterior).
struct SplitSum {
  CertifiedSum all;
  double selected_partial = 0.0;
  double selected_abs = 0.0;
  std::uint64_t selected_points = 0;
  double omitted_bound = 0.0;  // bound on the terms outside the truncation box

  double selected_lower() const { return selected_partial - kRoundingRel * selected_abs; }
  double selected_upper() const { return selected_partial + kRoundingRel * selected_abs + omitted_bound; }
};

namespace detail {

/// Bound on sum over points x of a discrete set with l_inf separation delta and
/// ||x||_inf > a of prod_i g(x_i), for g even and non-increasing on [0, inf).
inline double cube_packing_tail(const Profile1D& g, int n, double delta, double a) {
  const double j = delta * g.at_zero() + 2.0 * g.tail(0.0);
  const double b = a - 0.5 * delta;
  double t;
  if (b >= 0.5 * delta)
    t = g.tail(a - delta);
  else
    t = (0.5 * delta - std::max(b, 0.0)) * g.at_zero() + g.tail(0.0);
  const double ratio = std::min(2.0 * t / j, 1.0);
  const double frac = ratio >= 1.0 ? 1.0 : -std::expm1(n * std::log1p(-ratio));
  return std::exp(n * (std::log(j) - std::log(delta))) * frac;
}

/// (1/covol) int_{||y||_inf > a} prod g: the smoothed size of the omitted tail.
inline double integral_tail_estimate(const Profile1D& g, int n, double covol, double a) {
  const double total = 2.0 * g.tail(0.0);
  const double outer = 2.0 * g.tail(a);
  const double frac = -std::expm1(n * std::log1p(-std::min(outer / total, 1.0)));
  return std::exp(n * std::log(total)) * frac / covol;
}

inline double product_value(const Profile1D& g, std::span<const double> x) {
  switch (g.kind) {
    case Profile1D::Kind::gaussian: {
      double s = 0.0;
      for (double xi : x) s += xi * xi;
      return std::exp(-M_PI * s);
    }
    case Profile1D::Kind::exp_abs: {
      double s = 0.0;
      for (double xi : x) s += std::abs(xi);
      return std::exp(-s);
    }
    case Profile1D::Kind::power_exp: {
      double s = 0.0;
      for (double xi : x) s += std::pow(std::abs(xi), g.p);
      return std::exp(-s);
    }
    default: {
      double v = 1.0;
      for (double xi : x) v *= g.value(xi);
      return v;
    }
  }
}

SplitSum factorized_sum(const Lattice& lattice, const Profile1D& g, const Vector& w, double s, const Vector* theta,
                        const SumOptions& opt);

}  // namespace detail

/// Sum of prod_i g(((m + w)/s)_i) over m in the lattice, optionally with the
/// phase cos(2 pi (m + w).theta), and the sub-sum over points where
/// `exterior(x)` holds (x = (m + w)/s).
inline SplitSum certified_profile_sum(const Lattice& lattice, const Profile1D& g, const Vector& w, double s,
                                      const Vector* theta, const SumOptions& opt,
                                      const std::function<bool(std::span<const double>)>& exterior = nullptr) {
  const int n = lattice.dim();
  detail::check_vector_dim(lattice, w, "shift vector");
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("t > 0 required");
  if (!(opt.tol > 0.0)) throw DomainError("sum tolerance must be positive");
  if (theta) detail::check_vector_dim(lattice, *theta, "phase vector");

  const Matrix& b = lattice.basis();
  if (n > 1 && !exterior && b.isDiagonal(0.0)) return detail::factorized_sum(lattice, g, w, s, theta, opt);

  const double delta = shortest_vector(lattice, kInf, opt.node_budget).sigma / s;
  const double covol_x = lattice.covolume() / std::pow(s, n);
  const double a0 = std::max({1.0, delta, opt.min_radius});

  std::vector<double> radii(kMaxRungs + 1), env(kMaxRungs + 1), counts(kMaxRungs + 1);
  for (int k = 0; k <= kMaxRungs; ++k) {
    radii[k] = a0 * std::pow(kLadderRatio, k);
    env[k] = detail::cube_packing_tail(g, n, delta, radii[k]);
    // Box volume over covolume, padded for the boundary layer.
    counts[k] = std::pow(2.0 * radii[k] + 2.0 * delta, n) / covol_x;
  }

  // Scale of the sum: the first rung's partial.
  BallEnumerator en(lattice);
  en.set_budget(opt.node_budget);
  std::vector<double> x(static_cast<std::size_t>(n));
  auto box_pass = [&](int k, auto&& on_point) {
    const double box = s * radii[k];
    en.run(std::span<const double>(w.data(), static_cast<std::size_t>(n)), box * l2_over_lp_factor(n, kInf),
           [&](std::span<const std::int64_t>, std::span<const double> y) {
             double inf = 0.0;
             for (double yi : y) inf = std::max(inf, std::abs(yi));
             if (inf > box) return;
             for (int i = 0; i < n; ++i) x[i] = y[i] / s;
             on_point(y, inf / s);
           });
  };
  auto term_of = [&](std::span<const double> y, double& cos_part, double& sin_part) {
    const double v = detail::product_value(g, x);
    if (theta) {
      double ph = 0.0;
      for (int i = 0; i < n; ++i) ph += y[i] * (*theta)(i);
      ph = 2.0 * M_PI * ph;
      cos_part = v * std::cos(ph);
      sin_part = v * std::sin(ph);
    } else {
      cos_part = v;
      sin_part = 0.0;
    }
    return v;
  };

  double scale = 0.0;
  {
    NeumaierSum p0, a0sum;
    try {
      box_pass(0, [&](std::span<const double> y, double) {
        double c, si;
        a0sum.add(term_of(y, c, si));
        p0.add(c);
      });
    } catch (const BudgetExceeded& e) {
      throw BudgetExceeded(e.what(), e.partial_count(), env[0]);
    }
    scale = std::abs(p0.value());
    if (scale < 1e-3 * a0sum.value()) scale = a0sum.value();
  }

  // Smallest rung meeting the tolerance, and the largest rung the point cap allows.
  int k_cert = -1, k_cap = -1;
  for (int k = 0; k <= kMaxRungs; ++k) {
    if (counts[k] <= static_cast<double>(opt.max_points)) k_cap = k;
    if (k_cert < 0 && env[k] <= opt.tol * scale) k_cert = k;
  }
  int k_use;
  bool certified;
  if (k_cert >= 0 && k_cert <= std::max(k_cap, 0)) {
    k_use = k_cert;
    certified = true;
  } else if (opt.allow_estimate) {
    k_use = std::max(k_cap, 0);
    certified = false;
  } else {
    const int k_best = std::max(k_cap, 0);
    throw BudgetExceeded("certified sum needs more than " + std::to_string(opt.max_points) +
                             " points for relative remainder " + std::to_string(opt.tol),
                         0, env[k_best] / std::max(scale, 1e-300));
  }

  std::vector<NeumaierSum> bucket(static_cast<std::size_t>(k_use) + 1);
  NeumaierSum abs_sum, sin_sum, selected, selected_abs;
  std::uint64_t points = 0, selected_points = 0;
  const double log_ratio = std::log(kLadderRatio);
  try {
    box_pass(k_use, [&](std::span<const double> y, double inf) {
      double c, si;
      abs_sum.add(term_of(y, c, si));
      if (theta) sin_sum.add(si);
      int j = inf <= radii[0] ? 0 : static_cast<int>(std::ceil(std::log(inf / radii[0]) / log_ratio));
      j = std::clamp(j, 0, k_use);
      while (j > 0 && inf <= radii[j - 1]) --j;
      while (j < k_use && inf > radii[j]) ++j;
      bucket[j].add(c);
      ++points;
      if (exterior && exterior(x)) {
        selected.add(c);
        selected_abs.add(std::abs(c));
        ++selected_points;
      }
    });
  } catch (const BudgetExceeded& e) {
    throw BudgetExceeded(e.what(), e.partial_count(), env[k_use] / std::max(scale, 1e-300));
  }

  SplitSum out;
  CertifiedSum& cs = out.all;
  double running = 0.0, best_upper = kInf;
  const double rounding = kRoundingRel * abs_sum.value();
  for (int j = 0; j <= k_use; ++j) {
    running += bucket[j].value();
    if (!theta) best_upper = std::min(best_upper, running + env[j] + rounding);
  }
  cs.partial = running;
  cs.abs_partial = abs_sum.value();
  cs.points = points;
  cs.truncation_radius = radii[k_use];
  cs.certified = certified;
  if (theta) {
    cs.remainder_bound = env[k_use] + rounding;
    cs.lower_bound = running - cs.remainder_bound;
    cs.upper_bound = running + cs.remainder_bound;
    cs.imag_residue = sin_sum.value();
  } else {
    cs.upper_bound = best_upper;
    cs.remainder_bound = best_upper - running;
    cs.lower_bound = running - rounding;
    if (!certified) {
      const double a_eff = 0.5 * std::pow(static_cast<double>(points) * covol_x, 1.0 / n);
      cs.tail_estimate = detail::integral_tail_estimate(g, n, covol_x, a_eff);
    }
  }
  out.selected_partial = selected.value();
  out.selected_abs = selected_abs.value();
  out.selected_points = selected_points;
  out.omitted_bound = env[k_use];
  return out;
}

namespace detail {

/// A diagonal basis splits the sum into one-dimensional sums whose product is
/// taken in interval (and, for phased sums, complex) arithmetic.
inline SplitSum factorized_sum(const Lattice& lattice, const Profile1D& g, const Vector& w, double s,
                               const Vector* theta, const SumOptions& opt) {
  const int n = lattice.dim();
  SumOptions sub = opt;
  sub.tol = opt.tol / n;
  std::complex<double> partial = 1.0, value = 1.0;
  double lo = 1.0, hi = 1.0, abs_partial = 1.0, radius = kInf;
  double disc_outer = 1.0, disc_inner = 1.0;
  bool certified = true;
  std::uint64_t points = 0;
  for (int i = 0; i < n; ++i) {
    const Lattice line(Matrix::Constant(1, 1, lattice.basis()(i, i)));
    const Vector wi = Vector::Constant(1, w(i));
    const Vector ti = theta ? Vector::Constant(1, (*theta)(i)) : Vector();
    const CertifiedSum c = certified_profile_sum(line, g, wi, s, theta ? &ti : nullptr, sub).all;
    partial *= std::complex<double>(c.partial, c.imag_residue);
    value *= std::complex<double>(c.value(), c.imag_residue);
    const double cand[] = {lo * c.lower(), lo * c.upper(), hi * c.lower(), hi * c.upper()};
    lo = *std::min_element(std::begin(cand), std::end(cand));
    hi = *std::max_element(std::begin(cand), std::end(cand));
    const double modulus = std::abs(std::complex<double>(c.partial, c.imag_residue));
    disc_outer *= modulus + c.remainder_bound;
    disc_inner *= modulus;
    abs_partial *= c.abs_partial;
    radius = std::min(radius, c.truncation_radius);
    certified = certified && c.certified;
    points += c.points;
  }
  SplitSum out;
  CertifiedSum& cs = out.all;
  cs.partial = partial.real();
  cs.imag_residue = partial.imag();
  cs.tail_estimate = value.real() - partial.real();
  if (theta) {
    // Complex factors: |prod S_i - prod P_i| <= prod(|P_i| + E_i) - prod |P_i|.
    const double err = (disc_outer - disc_inner) * (1.0 + 4.0 * n * kRoundingRel);
    lo = cs.partial - err;
    hi = cs.partial + err;
  }
  cs.lower_bound = lo;
  cs.upper_bound = hi;
  cs.remainder_bound = std::max(hi - cs.partial, cs.partial - lo);
  cs.abs_partial = abs_partial;
  cs.truncation_radius = radius;
  cs.points = points;
  cs.certified = certified;
  return out;
}

}  // namespace detail

/// sum_{lambda} f((lambda + v)/t), certified.
inline CertifiedSum certified_sum(const Lattice& lattice, const TestFunctionSpec& spec, const Vector& v, double t,
                                  const SumOptions& opt = {}) {
  if (spec.dim != lattice.dim()) throw DomainError("test function and lattice dimensions differ");
  return certified_profile_sum(lattice, spec.f_profile(), v, t, nullptr, opt).all;
}

/// sum_{lambda in the given lattice} fhat((lambda + v)/t), certified.
inline CertifiedSum certified_fhat_sum(const Lattice& lattice, const TestFunctionSpec& spec, const Vector& v,
                                       double t, const SumOptions& opt = {}) {
  if (spec.dim != lattice.dim()) throw DomainError("test function and lattice dimensions differ");
  return certified_profile_sum(lattice, spec.fhat_profile(), v, t, nullptr, opt).all;
}

}  // namespace latbound
