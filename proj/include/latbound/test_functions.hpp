#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <boost/math/special_functions/gamma.hpp>

#include "latbound/errors.hpp"
#include "latbound/lattice.hpp"
#include "latbound/transform_table.hpp"

namespace latbound {

enum class Family { gaussian, sech_product, inv_cosh_product, supergaussian, exp_l1 };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::sech_product: return "sech_product";
    case Family::inv_cosh_product: return "inv_cosh_product";
    case Family::supergaussian: return "supergaussian";
    case Family::exp_l1: return "exp_l1";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
  for (Family f : {Family::gaussian, Family::sech_product, Family::inv_cosh_product, Family::supergaussian,
                   Family::exp_l1})
    if (family_name(f) == s) return f;
  return std::nullopt;
}

/// 2 pi / sqrt(3), the rate in 1/(1 + 2 cosh(c x)).
inline constexpr double kInvCoshRate = 3.6275987284684357;

/// One even, positive, non-increasing-on-[0,inf) factor g of a product
/// function prod_i g(x_i).
struct Profile1D {
  enum class Kind { gaussian, sech, inv_cosh, exp_abs, lorentz, power_exp, table };
  Kind kind = Kind::gaussian;
  double p = 2.0;
  std::shared_ptr<const Transform1DTable> table;

  double value(double x) const {
    const double a = std::abs(x);
    switch (kind) {
      case Kind::gaussian: return std::exp(-M_PI * a * a);
      case Kind::sech: return 1.0 / std::cosh(M_PI * a);
      case Kind::inv_cosh: return 1.0 / (1.0 + 2.0 * std::cosh(kInvCoshRate * a));
      case Kind::exp_abs: return std::exp(-a);
      case Kind::lorentz: return 2.0 / (1.0 + 4.0 * M_PI * M_PI * a * a);
      case Kind::power_exp: return std::exp(-std::pow(a, p));
      case Kind::table: return std::max(table->value(a), 0.0);
    }
    return 0.0;
  }

  double log_value(double x) const {
    const double a = std::abs(x);
    switch (kind) {
      case Kind::gaussian: return -M_PI * a * a;
      case Kind::sech: {
        const double y = M_PI * a;
        return M_LN2 - y - std::log1p(std::exp(-2.0 * y));
      }
      case Kind::inv_cosh: {
        const double y = kInvCoshRate * a;
        const double e = std::exp(-y);
        return -y - std::log(1.0 + e + e * e);
      }
      case Kind::exp_abs: return -a;
      case Kind::lorentz: return M_LN2 - std::log1p(4.0 * M_PI * M_PI * a * a);
      case Kind::power_exp: return -std::pow(a, p);
      case Kind::table: return std::log(value(a));
    }
    return 0.0;
  }

  double at_zero() const { return value(0.0); }

  /// int_b^inf g(y) dy for b >= 0.
  double tail(double b) const {
    b = std::max(b, 0.0);
    switch (kind) {
      case Kind::gaussian: return 0.5 * std::erfc(std::sqrt(M_PI) * b);
      case Kind::sech: return (2.0 / M_PI) * std::atan(std::exp(-M_PI * b));
      case Kind::inv_cosh:
        return (2.0 / (kInvCoshRate * std::sqrt(3.0))) *
               std::atan(std::sqrt(3.0) / (2.0 * std::exp(kInvCoshRate * b) + 1.0));
      case Kind::exp_abs: return std::exp(-b);
      case Kind::lorentz: return b == 0.0 ? 0.5 : std::atan(1.0 / (2.0 * M_PI * b)) / M_PI;
      case Kind::power_exp:
        return b == 0.0 ? std::tgamma(1.0 / p) / p : boost::math::tgamma(1.0 / p, std::pow(b, p)) / p;
      case Kind::table: return table->tail_integral(b);
    }
    return 0.0;
  }
};

/// Tagged test function f on R^n together with its Fourier transform.
/// Every family is a product of one-dimensional profiles.
struct TestFunctionSpec {
  Family family = Family::gaussian;
  double p = 2.0;  // supergaussian exponent
  int dim = 1;
  std::shared_ptr<const Transform1DTable> table;  // supergaussian fhat

  TestFunctionSpec() = default;
  TestFunctionSpec(Family f, int n, double p_ = 2.0, std::shared_ptr<const Transform1DTable> t = nullptr)
      : family(f), p(p_), dim(n), table(std::move(t)) {
    if (n < 1) throw DomainError("test function dimension must be >= 1");
    if (family == Family::supergaussian) {
      if (!(p > 0.0 && p <= 2.0)) throw DomainError("supergaussian exponent p must lie in (0, 2]");
      if (table && table->p() != p) throw DomainError("transform table built for a different p");
    }
  }

  bool self_dual() const {
    return family == Family::gaussian || family == Family::sech_product || family == Family::inv_cosh_product;
  }

  /// Norm through which f decays most naturally (used for truncation reports).
  double natural_norm() const {
    switch (family) {
      case Family::gaussian: return 2.0;
      case Family::supergaussian: return p;
      default: return 1.0;
    }
  }

  Profile1D f_profile() const {
    switch (family) {
      case Family::gaussian: return {Profile1D::Kind::gaussian, 2.0, nullptr};
      case Family::sech_product: return {Profile1D::Kind::sech, 1.0, nullptr};
      case Family::inv_cosh_product: return {Profile1D::Kind::inv_cosh, 1.0, nullptr};
      case Family::exp_l1: return {Profile1D::Kind::exp_abs, 1.0, nullptr};
      case Family::supergaussian: return {Profile1D::Kind::power_exp, p, nullptr};
    }
    return {};
  }

  Profile1D fhat_profile() const {
    if (self_dual()) return f_profile();
    if (family == Family::exp_l1) return {Profile1D::Kind::lorentz, 1.0, nullptr};
    if (!table) throw MissingTable("supergaussian transform table for p = " + std::to_string(p) + " not built");
    return {Profile1D::Kind::table, p, table};
  }
};

namespace detail {

inline void check_point_dim(const TestFunctionSpec& spec, std::size_t len) {
  if (static_cast<int>(len) != spec.dim)
    throw DomainError("point has length " + std::to_string(len) + ", test function dimension is " +
                      std::to_string(spec.dim));
}

inline double product(const Profile1D& g, std::span<const double> x) {
  double v = 1.0;
  for (double xi : x) v *= g.value(xi);
  return v;
}

inline double log_product(const Profile1D& g, std::span<const double> x) {
  double v = 0.0;
  for (double xi : x) v += g.log_value(xi);
  return v;
}

}  // namespace detail

inline double eval_f(const TestFunctionSpec& spec, std::span<const double> x) {
  detail::check_point_dim(spec, x.size());
  if (spec.family == Family::gaussian) {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return std::exp(-M_PI * s);
  }
  if (spec.family == Family::supergaussian || spec.family == Family::exp_l1) {
    double s = 0.0;
    for (double xi : x) s += spec.family == Family::exp_l1 ? std::abs(xi) : std::pow(std::abs(xi), spec.p);
    return std::exp(-s);
  }
  return detail::product(spec.f_profile(), x);
}

inline double eval_f(const TestFunctionSpec& spec, const Vector& x) {
  return eval_f(spec, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

inline double log_f(const TestFunctionSpec& spec, std::span<const double> x) {
  detail::check_point_dim(spec, x.size());
  return detail::log_product(spec.f_profile(), x);
}

inline double eval_fhat(const TestFunctionSpec& spec, std::span<const double> x) {
  detail::check_point_dim(spec, x.size());
  if (spec.self_dual()) return eval_f(spec, x);
  return detail::product(spec.fhat_profile(), x);
}

inline double eval_fhat(const TestFunctionSpec& spec, const Vector& x) {
  return eval_fhat(spec, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

/// Supergaussian spec with its transform table taken from the process cache.
inline TestFunctionSpec make_supergaussian(int n, double p, double r_max = kDefaultTableRMax,
                                           double tol = kDefaultTableTol) {
  return TestFunctionSpec(Family::supergaussian, n, p, TransformTableCache::instance().get(p, r_max, tol));
}

}  // namespace latbound
