#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "latbound/errors.hpp"
#include "latbound/lattice.hpp"
#include "latbound/optimize.hpp"
#include "latbound/test_functions.hpp"

namespace latbound {

enum class Verdict { pass, fail, inconclusive };

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

enum class NuMethod { closed_form, norm_optimizer, cosh_lemma };

inline std::string_view nu_method_name(NuMethod m) {
  switch (m) {
    case NuMethod::closed_form: return "closed_form";
    case NuMethod::norm_optimizer: return "norm_optimizer";
    case NuMethod::cosh_lemma: return "cosh_lemma";
  }
  return "?";
}

struct NuBound {
  double value = 0.0;
  NuMethod method = NuMethod::norm_optimizer;
  double u_star = 1.0;
};

/// Radial profile g with f(x) = g(||x||_q), as log g.
struct RadialProfile {
  double norm_p = 2.0;
  double coeff = M_PI;  // log g(s) = -coeff * s^exponent
  double exponent = 2.0;

  double log_g(double s) const { return -coeff * std::pow(s, exponent); }
};

inline RadialProfile radial_profile(const TestFunctionSpec& spec) {
  switch (spec.family) {
    case Family::gaussian: return {2.0, M_PI, 2.0};
    case Family::supergaussian: return {spec.p, 1.0, spec.p};
    case Family::exp_l1: return {1.0, 1.0, 1.0};
    default:
      throw DomainError(std::string(family_name(spec.family)) + " is not a function of a single l_p norm");
  }
}

/// mu_g(r) = g(r) / sup_{0 < u <= 1} u^n g(ur), with the sup found by golden section in u.
inline NuBound mu_norm(const TestFunctionSpec& spec, double r, int n) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("mu_norm requires r > 0");
  if (n < 1) throw DomainError("dimension must be >= 1");
  const RadialProfile g = radial_profile(spec);
  auto objective = [&](double u) { return n * std::log(u) + g.log_g(u * r); };
  const Maximum best = golden_section_max(objective, 0.0, 1.0, kGoldenTol, false, true);
  return {std::exp(g.log_g(r) - best.value), NuMethod::norm_optimizer, best.x};
}

/// (2 e^{1 - 2 tau} tau)^{n/2}: mu for the Gaussian at r = sqrt(tau n / pi).
inline double gaussian_nu_closed_form(double tau, int n) {
  if (!(tau >= 0.5)) throw DomainError("gaussian closed form requires tau >= 1/2");
  if (n < 1) throw DomainError("dimension must be >= 1");
  return std::exp(0.5 * n * (std::log(2.0 * tau) + 1.0 - 2.0 * tau));
}

inline double gaussian_radius_for_tau(double tau, int n) { return std::sqrt(tau * n / M_PI); }

/// (e t^p e^{-t^p})^{n/p} with t = r / (n/p)^{1/p}.
inline double supergaussian_mu_closed_form(double p, double r, int n) {
  if (!(p > 0.0 && p <= 2.0)) throw DomainError("supergaussian exponent p must lie in (0, 2]");
  if (n < 1) throw DomainError("dimension must be >= 1");
  const double t = r / std::pow(n / p, 1.0 / p);
  if (!(t >= 1.0)) throw DomainError("supergaussian closed form requires r >= (n/p)^{1/p}");
  const double tp = std::pow(t, p);
  return std::exp((n / p) * (1.0 + std::log(tp) - tp));
}

inline double supergaussian_radius_for_t(double p, double t, int n) { return t * std::pow(n / p, 1.0 / p); }

/// z - z tanh(z) / (1 + sech(z)/2)
inline double cstar_objective(double z) {
  return z - z * std::tanh(z) / (1.0 + 0.5 / std::cosh(z));
}

struct CstarResult {
  double value = 0.0;
  double z_star = 0.0;
};

inline CstarResult cstar_with_argmax() {
  const Maximum m = scan_then_golden(cstar_objective, 0.0, 20.0, 2000, 1e-12);
  return {m.value, m.x};
}

inline double cstar() {
  static const double value = cstar_with_argmax().value;
  return value;
}

/// x^n e^{-(x-1) n} with x = 2 pi alpha / sqrt 3; bounds nu for the inverse-cosh product on K_alpha.
inline double cosh_nu_bound(double alpha, int n) {
  const double x = 2.0 * M_PI * alpha / std::sqrt(3.0);
  if (!(x > 1.0)) throw DomainError("cosh bound requires alpha > sqrt(3)/(2 pi)");
  if (n < 1) throw DomainError("dimension must be >= 1");
  return std::exp(n * (std::log(x) - x + 1.0));
}

/// Radius (1 + C*) alpha n of the l1 body K_alpha.
inline double cosh_body_radius(double alpha, int n) { return (1.0 + cstar()) * alpha * n; }

inline double cosh_alpha_default(int n) { return std::sqrt(3.0) / (2.0 * M_PI) + 3.0 / std::sqrt(double(n)); }

inline double transference_bound_l2(int n) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  return n / (2.0 * M_PI) + 3.0 * std::sqrt(double(n)) / M_PI;
}

inline constexpr double kL1Coefficient = 0.154264;

struct L1Transference {
  double exact = 0.0;    // (1 + C*)^2 alpha^2 n^2
  double ceiling = 0.0;  // 0.154264 n^2 (1 + 2 pi sqrt(3/n))^2
  bool below_ceiling = false;
};

inline L1Transference transference_bound_l1(int n) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  const double alpha = cosh_alpha_default(n);
  const double c = 1.0 + cstar();
  L1Transference out;
  out.exact = c * c * alpha * alpha * n * n;
  const double s = 1.0 + 2.0 * M_PI * std::sqrt(3.0 / n);
  out.ceiling = kL1Coefficient * n * n * s * s;
  out.below_ceiling = out.exact < out.ceiling;
  return out;
}

/// (1 + C*)^2 * 3 / (4 pi^2)
inline double l1_constant_exact() {
  const double c = 1.0 + cstar();
  return c * c * 3.0 / (4.0 * M_PI * M_PI);
}

inline double handshake_bound(int n, double p, double u) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  if (!(p > 0.0 && p <= 2.0)) throw DomainError("handshake bound requires p in (0, 2]");
  if (!(u >= 1.0)) throw DomainError("handshake bound requires u >= 1");
  const double a = std::pow(u, p) * n / p;
  return 10.0 * std::exp(std::pow(u, p)) * (n / p) * std::exp(a);
}

inline constexpr double kConditionMarginalBand = 1e-12;

/// 2 nu_K + nu_K' < 1. Values within 1e-12 below 1 are not trusted.
inline Verdict generic_transference_condition(double nu_k, double nu_kprime) {
  if (!(nu_k >= 0.0) || !(nu_kprime >= 0.0)) throw DomainError("nu values must be nonnegative");
  const double s = 2.0 * nu_k + nu_kprime;
  if (s >= 1.0) return Verdict::fail;
  if (s > 1.0 - kConditionMarginalBand) return Verdict::inconclusive;
  return Verdict::pass;
}

/// nu bound for f against the body K, by the route that applies to the pair.
inline NuBound nu_for_body(const TestFunctionSpec& spec, const BodySpec& body) {
  const int n = spec.dim;
  switch (spec.family) {
    case Family::gaussian:
    case Family::supergaussian:
    case Family::exp_l1: {
      const RadialProfile g = radial_profile(spec);
      if (body.p != g.norm_p)
        throw DomainError(std::string(family_name(spec.family)) + " needs an l_" + std::to_string(g.norm_p) +
                          " body for a radial nu bound");
      return mu_norm(spec, body.radius, n);
    }
    case Family::inv_cosh_product: {
      if (body.p != 1.0) throw DomainError("inverse-cosh nu bound needs an l_1 body");
      const double alpha = body.radius / ((1.0 + cstar()) * n);
      const double x = 2.0 * M_PI * alpha / std::sqrt(3.0);
      return {cosh_nu_bound(alpha, n), NuMethod::cosh_lemma, 1.0 / x};
    }
    case Family::sech_product:
      break;
  }
  throw DomainError("no certified nu bound for " + std::string(family_name(spec.family)));
}

}  // namespace latbound
