#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "latbound/bounds.hpp"
#include "latbound/enumerate.hpp"
#include "latbound/lattice.hpp"
#include "latbound/lattice_sum.hpp"
#include "latbound/test_functions.hpp"

namespace latbound {

/// |margin| below this counts as exact equality in identity cases.
inline constexpr double kIdentityMargin = 1e-12;

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

inline Interval interval_of(const CertifiedSum& s) { return {s.lower(), s.upper()}; }

inline Interval scaled(const Interval& i, double c) {
  return c >= 0.0 ? Interval{c * i.lower, c * i.upper} : Interval{c * i.upper, c * i.lower};
}

/// a <= b with interval pessimism: PASS if certainly, FAIL if certainly not.
inline Verdict compare_le(const Interval& a, const Interval& b) {
  if (a.upper <= b.lower) return Verdict::pass;
  if (a.lower > b.upper) return Verdict::fail;
  return Verdict::inconclusive;
}

struct Part1Report {
  CertifiedSum lhs;  // sum f((lambda + v)/t)
  CertifiedSum rhs;  // sum f(lambda)
  double t = 1.0;
  Interval lhs_interval, rhs_interval;  // rhs scaled by t^n
  double margin = 0.0;
  bool identity = false;
  Verdict verdict = Verdict::inconclusive;
};

inline Part1Report check_part1(const Lattice& lattice, const TestFunctionSpec& spec, const Vector& v, double t,
                               const SumOptions& opt = {}) {
  if (!(t >= 1.0)) throw DomainError("part 1 requires t >= 1");
  Part1Report rep;
  rep.t = t;
  const int n = lattice.dim();
  rep.lhs = certified_sum(lattice, spec, v, t, opt);
  rep.rhs = certified_sum(lattice, spec, Vector::Zero(n), 1.0, opt);
  const double tn = std::pow(t, n);
  rep.lhs_interval = interval_of(rep.lhs);
  rep.rhs_interval = scaled(interval_of(rep.rhs), tn);
  rep.identity = t == 1.0 && lattice.contains(v);
  if (rep.identity) {
    // Both sides run over the same point set; only summation order differs.
    rep.margin = tn * rep.rhs.partial - rep.lhs.partial;
    rep.verdict = std::abs(rep.margin) <= kIdentityMargin ? Verdict::pass : Verdict::fail;
  } else {
    rep.margin = rep.rhs_interval.lower - rep.lhs_interval.upper;
    rep.verdict = compare_le(rep.lhs_interval, rep.rhs_interval);
  }
  return rep;
}

struct TailBoundReport {
  Interval lhs;      // sum over lambda + v outside K of f(lambda + v)
  CertifiedSum full_shifted;
  CertifiedSum rhs_sum;  // sum f(lambda)
  NuBound rhs_factor;
  Interval rhs;  // nu * rhs_sum
  std::uint64_t inside_points = 0;
  double margin = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

inline TailBoundReport check_tail_inequality(const Lattice& lattice, const TestFunctionSpec& spec,
                                             const BodySpec& body, const Vector& v, const NuBound& nu,
                                             SumOptions opt = {}) {
  if (spec.dim != lattice.dim()) throw DomainError("test function and lattice dimensions differ");
  if (!(nu.value >= 0.0)) throw DomainError("nu must be nonnegative");
  opt.min_radius = std::max(opt.min_radius, body.radius);
  // The omitted mass is compared against nu * sum, so the target shrinks with nu.
  opt.tol *= std::clamp(nu.value, 1e-280, 1.0);
  const double q = body.p, r = body.radius;
  auto outside = [q, r](std::span<const double> x) { return lp_norm(x, q) > r; };
  const SplitSum split = certified_profile_sum(lattice, spec.f_profile(), v, 1.0, nullptr, opt, outside);

  TailBoundReport rep;
  rep.full_shifted = split.all;
  rep.lhs = {split.selected_lower(), split.selected_upper()};
  rep.inside_points = split.all.points - split.selected_points;
  rep.rhs_sum = v.isZero(0.0) ? split.all : certified_sum(lattice, spec, Vector::Zero(lattice.dim()), 1.0, opt);
  rep.rhs_factor = nu;
  rep.rhs = scaled(interval_of(rep.rhs_sum), nu.value);
  rep.margin = rep.rhs.lower - rep.lhs.upper;
  rep.verdict = compare_le(rep.lhs, rep.rhs);
  return rep;
}

struct Part3Report {
  CertifiedSum lhs;  // sum over the dual of fhat(lambda + v)
  CertifiedSum rhs;  // sum over the dual of fhat(lambda)
  NuBound nu;
  double factor = 0.0;  // 1 - 2 nu
  Interval lhs_interval, rhs_interval;
  double margin = 0.0;
  bool identity = false;
  bool trivial = false;
  std::string note;
  Verdict verdict = Verdict::inconclusive;
};

inline std::string format_vector(const Vector& x) {
  std::ostringstream os;
  os.precision(12);
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ')';
  return os.str();
}

inline Part3Report check_part3(const Lattice& lattice, const TestFunctionSpec& spec, const BodySpec& body,
                               const Vector& v, const NuBound& nu, const SumOptions& opt = {}) {
  if (spec.dim != lattice.dim()) throw DomainError("test function and lattice dimensions differ");
  const int n = lattice.dim();
  for (const auto& pt : enumerate_in_ball(lattice, Vector::Zero(n), body.radius, body.p, opt.node_budget))
    if (!pt.coords.isZero())
      throw DomainError("body contains the nonzero lattice vector " + format_vector(pt.embedding));

  Part3Report rep;
  rep.nu = nu;
  rep.factor = 1.0 - 2.0 * nu.value;
  const Lattice d = dual(lattice);
  rep.lhs = certified_fhat_sum(d, spec, v, 1.0, opt);
  rep.rhs = certified_fhat_sum(d, spec, Vector::Zero(n), 1.0, opt);
  rep.lhs_interval = interval_of(rep.lhs);
  rep.rhs_interval = scaled(interval_of(rep.rhs), rep.factor);
  rep.identity = d.contains(v);
  if (rep.factor <= 0.0) {
    rep.trivial = true;
    rep.note = "1 - 2 nu <= 0, inequality holds trivially";
    rep.margin = rep.lhs_interval.lower - rep.rhs_interval.upper;
    rep.verdict = Verdict::pass;
  } else if (rep.identity) {
    rep.note = "v lies in the dual lattice, both sums coincide";
    rep.margin = rep.lhs.partial - rep.factor * rep.rhs.partial;
    rep.verdict = rep.margin >= -kIdentityMargin ? Verdict::pass : Verdict::fail;
  } else {
    rep.margin = rep.lhs_interval.lower - rep.rhs_interval.upper;
    rep.verdict = compare_le(rep.rhs_interval, rep.lhs_interval);
  }
  return rep;
}

struct PsfReport {
  CertifiedSum lhs;      // sum f((lambda + v)/t)
  CertifiedSum dual_sum; // sum over the dual of fhat(t lambda) cos(2 pi t lambda.v)
  double prefactor = 1.0;  // t^n / covolume
  double lhs_value = 0.0, rhs_value = 0.0;
  Interval rhs_interval;
  double imag_residue = 0.0;  // |sine part| relative to |rhs|
  double residual = 0.0;
  bool certified = true;
};

inline bool slowly_decaying_transform(const TestFunctionSpec& spec) {
  return spec.family == Family::exp_l1 || spec.family == Family::supergaussian;
}

inline PsfReport psf_residual(const Lattice& lattice, const TestFunctionSpec& spec, const Vector& v, double t,
                              double tol = 1e-10, SumOptions opt = {}) {
  if (spec.dim != lattice.dim()) throw DomainError("test function and lattice dimensions differ");
  if (!(t > 0.0)) throw DomainError("t > 0 required");
  opt.tol = tol;
  PsfReport rep;
  const int n = lattice.dim();
  rep.lhs = certified_sum(lattice, spec, v, t, opt);
  SumOptions dopt = opt;
  dopt.allow_estimate = opt.allow_estimate || slowly_decaying_transform(spec);
  const Lattice d = dual(lattice);
  const Vector theta = v;
  const bool phased = !v.isZero(0.0);
  rep.dual_sum = certified_profile_sum(d, spec.fhat_profile(), Vector::Zero(n), 1.0 / t, phased ? &theta : nullptr,
                                       dopt)
                     .all;
  rep.prefactor = std::pow(t, n) / lattice.covolume();
  rep.lhs_value = rep.lhs.value();
  rep.rhs_value = rep.prefactor * rep.dual_sum.value();
  rep.rhs_interval = scaled(interval_of(rep.dual_sum), rep.prefactor);
  rep.imag_residue = std::abs(rep.prefactor * rep.dual_sum.imag_residue) / std::abs(rep.rhs_value);
  rep.residual = std::abs(rep.lhs_value - rep.rhs_value) / std::abs(rep.rhs_value);
  rep.certified = rep.lhs.certified && rep.dual_sum.certified;
  return rep;
}

struct HandshakeReport {
  double sigma = 0.0;
  std::uint64_t count = 0;
  double bound = 0.0;
  bool pass = false;
  bool even = false;
};

inline HandshakeReport handshake_census(const Lattice& lattice, double p, double u,
                                        std::uint64_t node_budget = kDefaultNodeBudget) {
  const double bound = handshake_bound(lattice.dim(), p, u);
  HandshakeReport rep;
  rep.sigma = shortest_vector(lattice, p, node_budget).sigma;
  const auto pts = enumerate_in_ball(lattice, Vector::Zero(lattice.dim()), u * rep.sigma * (1.0 + kTieRelTol), p,
                                     node_budget);
  rep.count = pts.size() - 1;
  rep.bound = bound;
  rep.pass = static_cast<double>(rep.count) <= bound;
  rep.even = rep.count % 2 == 0;
  return rep;
}

struct TransferenceReport {
  double p = 2.0;
  double sigma = 0.0;
  CoveringBracket rho;
  double product_lower = 0.0;
  double product_upper = 0.0;
  double bound = 0.0;    // the bound checked against
  double ceiling = 0.0;  // advertised l1 ceiling (equal to bound for p = 2)
  Verdict verdict = Verdict::inconclusive;
};

inline TransferenceReport transference_check(const Lattice& lattice, double p, int resolution,
                                             std::uint64_t grid_budget = kDefaultGridBudget,
                                             std::uint64_t node_budget = kDefaultNodeBudget) {
  if (p != 1.0 && p != 2.0) throw DomainError("transference check supports p = 1 or p = 2");
  const int n = lattice.dim();
  TransferenceReport rep;
  rep.p = p;
  rep.sigma = shortest_vector(lattice, p, node_budget).sigma;
  rep.rho = covering_radius_estimate(dual(lattice), p, resolution, grid_budget, node_budget);
  rep.product_lower = rep.sigma * rep.rho.lower;
  rep.product_upper = rep.sigma * rep.rho.upper;
  if (p == 2.0) {
    rep.bound = rep.ceiling = transference_bound_l2(n);
  } else {
    const auto b = transference_bound_l1(n);
    rep.bound = b.exact;
    rep.ceiling = b.ceiling;
  }
  rep.verdict = compare_le({rep.product_lower, rep.product_upper}, {rep.bound, rep.bound});
  return rep;
}

struct TailCurveRow {
  double radius = 0.0;
  Interval tail;
  double bound = 0.0;  // nu(radius) * sum f(lambda), upper end
};

/// Tail sums and their bounds over a list of body radii, for plotting.
inline std::vector<TailCurveRow> tail_curve(const Lattice& lattice, const TestFunctionSpec& spec, double q,
                                            const Vector& v, const std::vector<double>& radii,
                                            const SumOptions& opt = {}) {
  std::vector<TailCurveRow> rows;
  for (double r : radii) {
    const BodySpec body(q, r);
    NuBound nu;
    try {
      nu = nu_for_body(spec, body);
    } catch (const DomainError&) {
      continue;
    }
    const auto rep = check_tail_inequality(lattice, spec, body, v, nu, opt);
    rows.push_back({r, rep.lhs, rep.rhs.upper});
  }
  return rows;
}

}  // namespace latbound
