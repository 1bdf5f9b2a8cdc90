#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <json.hpp>

#include "latbound/errors.hpp"
#include "latbound/norms.hpp"

namespace latbound {

inline constexpr double kDefaultTableTol = 1e-9;
inline constexpr double kDefaultTableRMax = 4.0;
inline constexpr int kMaxTailTerms = 200;

/// Leading coefficient A of the 1D transform of e^{-|t|^p}: fhat(r) ~ A r^{-p-1}.
/// Written as 2 Gamma(p+1) sin(pi p/2) (2 pi)^{-p-1}; equal to
/// -pi^{-p-1/2} Gamma((p+1)/2) / Gamma(-p/2) for p < 2 and to 0 at p = 2.
inline double supergaussian_asymptotic_coeff(double p) {
  if (p == 2.0) return 0.0;
  return 2.0 * std::tgamma(p + 1.0) * std::sin(M_PI * p / 2.0) * std::pow(2.0 * M_PI, -p - 1.0);
}

/// Coefficients a_k of fhat(r) ~ sum_k a_k r^{-kp-1}:
/// a_k = 2 (-1)^{k+1} Gamma(kp+1)/k! sin(k pi p/2) (2 pi)^{-kp-1}.
/// Convergent for p < 1, asymptotic for 1 <= p < 2, identically zero at p = 2.
inline double supergaussian_series_coeff(double p, int k) {
  const double half = 0.5 * k * p;
  if (half == std::floor(half)) return 0.0;
  const double mag = std::lgamma(k * p + 1.0) - std::lgamma(k + 1.0) - (k * p + 1.0) * std::log(2.0 * M_PI);
  const double sign = k % 2 == 1 ? 1.0 : -1.0;
  return 2.0 * sign * std::sin(M_PI * half) * std::exp(mag);
}

/// Same without the sine factor; bounds |a_k|.
inline double supergaussian_series_magnitude(double p, int k) {
  return 2.0 * std::exp(std::lgamma(k * p + 1.0) - std::lgamma(k + 1.0) - (k * p + 1.0) * std::log(2.0 * M_PI));
}

/// Tabulated fhat(r) = int e^{-|t|^p} cos(2 pi r t) dt on [0, r_end] with the
/// truncated series sum_k a_k r^{-kp-1} beyond r_end.
class Transform1DTable {
 public:
  Transform1DTable() = default;
  Transform1DTable(double p, double r_max, double tol, std::vector<double> nodes, std::vector<double> values,
                   std::vector<double> tail_coeffs, double asymptotic_coeff)
      : p_(p), r_max_(r_max), tol_(tol), nodes_(std::move(nodes)), values_(std::move(values)),
        tail_coeffs_(std::move(tail_coeffs)), asymptotic_coeff_(asymptotic_coeff) {
    if (nodes_.size() < 2 || nodes_.size() != values_.size() || nodes_.front() != 0.0)
      throw DomainError("transform table needs matching node/value arrays starting at r = 0");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (!(nodes_[i] > nodes_[i - 1])) throw DomainError("transform table nodes must be strictly ascending");
    cumulative_.assign(nodes_.size(), 0.0);
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      cumulative_[i] = cumulative_[i - 1] +
                       0.5 * (nodes_[i] - nodes_[i - 1]) * (clamped(i - 1) + clamped(i));
  }

  double p() const { return p_; }
  double r_max() const { return r_max_; }
  double tol() const { return tol_; }
  double r_end() const { return nodes_.back(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  /// a_1, a_2, ... of the tail r^{-kp-1} expansion.
  const std::vector<double>& tail_coeffs() const { return tail_coeffs_; }
  double asymptotic_coeff() const { return asymptotic_coeff_; }

  /// Gap between the table end value and the tail series there.
  double junction_gap() const { return std::abs(values_.back() - series(r_end())); }

  double operator()(double r) const { return value(r); }

  double value(double r) const {
    r = std::abs(r);
    if (r >= r_end()) return series(r);
    const std::size_t i = segment(r);
    const double w = (r - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
    return values_[i] + w * (values_[i + 1] - values_[i]);
  }

  /// int_b^inf of max(value, 0); b >= 0.
  double tail_integral(double b) const {
    b = std::max(b, 0.0);
    const double far = series_integral(std::max(b, r_end()));
    if (b >= r_end()) return far;
    const std::size_t i = segment(b);
    const double vb = std::max(value(b), 0.0);
    const double first = 0.5 * (nodes_[i + 1] - b) * (vb + clamped(i + 1));
    return first + (cumulative_.back() - cumulative_[i + 1]) + far;
  }

  nlohmann::json to_json() const {
    return {{"p", p_}, {"r_max", r_max_}, {"tol", tol_}, {"nodes", nodes_}, {"values", values_},
            {"tail_coeffs", tail_coeffs_}, {"asymptotic_coeff", asymptotic_coeff_}};
  }

  static Transform1DTable from_json(const nlohmann::json& j) {
    return Transform1DTable(j.at("p").get<double>(), j.at("r_max").get<double>(), j.at("tol").get<double>(),
                            j.at("nodes").get<std::vector<double>>(), j.at("values").get<std::vector<double>>(),
                            j.at("tail_coeffs").get<std::vector<double>>(), j.at("asymptotic_coeff").get<double>());
  }

 private:
  double clamped(std::size_t i) const { return std::max(values_[i], 0.0); }

  double series(double r) const {
    const double x = std::pow(r, -p_);
    double xk = 1.0, s = 0.0;
    for (double a : tail_coeffs_) {
      xk *= x;
      s += a * xk;
    }
    return s / r;
  }

  // int_b^inf a_k r^{-kp-1} dr = a_k b^{-kp} / (kp); clamped like the table.
  double series_integral(double b) const {
    const double x = std::pow(b, -p_);
    double xk = 1.0, s = 0.0;
    for (std::size_t k = 0; k < tail_coeffs_.size(); ++k) {
      xk *= x;
      s += tail_coeffs_[k] * xk / ((k + 1.0) * p_);
    }
    return std::max(s, 0.0);
  }

  std::size_t segment(double r) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - nodes_.begin()) - 1));
  }

  double p_ = 1.0;
  double r_max_ = 0.0;
  double tol_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> cumulative_;
  std::vector<double> tail_coeffs_;
  double asymptotic_coeff_ = 0.0;
};

namespace detail {

class SupergaussianQuadrature {
 public:
  SupergaussianQuadrature(double p, double tol) : p_(p), tol_(tol), cos_(1e-12, 4) {}

  double at_zero() {
    boost::math::quadrature::exp_sinh<double> es;
    double err = 0.0;
    const double half = es.integrate([this](double t) { return std::exp(-std::pow(t, p_)); }, 1e-14, &err);
    return 2.0 * half;
  }

  double operator()(double r) {
    if (r == 0.0) return at_zero();
    auto [half, rel_err] = cos_.integrate([this](double t) { return std::exp(-std::pow(t, p_)); }, 2.0 * M_PI * r);
    const double v = 2.0 * half;
    const double abs_err = rel_err * std::abs(v);
    if (!std::isfinite(v) || abs_err > tol_)
      throw ToleranceUnreached("transform quadrature at r = " + std::to_string(r) + " did not reach tolerance",
                               abs_err);
    return v;
  }

 private:
  double p_;
  double tol_;
  boost::math::quadrature::ooura_fourier_cos<double> cos_;
};

}  // namespace detail

inline Transform1DTable build_transform_table(double p, double r_max = kDefaultTableRMax,
                                              double tol = kDefaultTableTol) {
  if (!(p > 0.0 && p <= 2.0)) throw DomainError("supergaussian exponent p must lie in (0, 2]");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw DomainError("table r_max must be positive");
  if (!(tol > 0.0)) throw DomainError("table tolerance must be positive");

  detail::SupergaussianQuadrature quad(p, tol);
  const double asym = supergaussian_asymptotic_coeff(p);
  const double v0 = quad.at_zero();
  const double expected0 = 2.0 * std::tgamma(1.0 + 1.0 / p);
  if (std::abs(v0 - expected0) > 1e-8 * expected0)
    throw ToleranceUnreached("transform value at r = 0 disagrees with 2 Gamma(1 + 1/p)", std::abs(v0 - expected0));

  std::map<double, double> pts;
  pts[0.0] = v0;
  auto add_uniform = [&](double a, double b, int count) {
    for (int i = 1; i <= count; ++i) {
      const double r = a + (b - a) * i / count;
      if (!pts.count(r)) pts[r] = quad(r);
    }
  };

  // Tail series at r: coefficients up to the first negligible term, or nothing
  // if the terms stop shrinking before that (r is not yet asymptotic).
  auto series_at = [&](double r, std::vector<double>& coeffs) {
    coeffs.clear();
    double prev = kInf, sum = 0.0;
    for (int k = 1; k <= kMaxTailTerms; ++k) {
      const double mag = supergaussian_series_magnitude(p, k) * std::pow(r, -k * p - 1.0);
      if (p == 2.0 || mag <= 1e-3 * tol) return std::optional<double>(sum);
      if (mag > prev) return std::optional<double>();
      prev = mag;
      coeffs.push_back(supergaussian_series_coeff(p, k));
      sum += coeffs.back() * std::pow(r, -k * p - 1.0);
    }
    return std::optional<double>();
  };

  // Extend the range until the quadrature agrees with the tail series to 2 tol.
  double r_end = r_max;
  add_uniform(0.0, r_end, 64);
  constexpr int kMaxExtensions = 40;
  std::vector<double> coeffs;
  for (int ext = 0;; ++ext) {
    const double v = pts.at(r_end);
    const auto s = series_at(r_end, coeffs);
    if (s && std::abs(v - *s) <= 2.0 * tol) break;
    if (ext == kMaxExtensions)
      throw ToleranceUnreached("transform never settled onto its tail series", s ? std::abs(v - *s) : kInf);
    add_uniform(r_end, 1.5 * r_end, 16);
    r_end *= 1.5;
  }

  // Bisect until linear interpolation matches the midpoint values.
  constexpr std::size_t kMaxNodes = 2'000'000;
  std::vector<std::pair<double, double>> work(pts.begin(), pts.end());
  std::vector<double> nodes, values;
  nodes.reserve(work.size());
  values.reserve(work.size());
  for (std::size_t i = 0; i + 1 < work.size(); ++i) {
    std::vector<std::pair<std::pair<double, double>, std::pair<double, double>>> stack;
    stack.push_back({work[i], work[i + 1]});
    std::vector<std::pair<double, double>> done;
    while (!stack.empty()) {
      auto [lo, hi] = stack.back();
      stack.pop_back();
      const double m = 0.5 * (lo.first + hi.first);
      const double fm = quad(m);
      if (std::abs(fm - 0.5 * (lo.second + hi.second)) > 5.0 * tol && hi.first - lo.first > 1e-12 * (1.0 + m)) {
        stack.push_back({{m, fm}, hi});
        stack.push_back({lo, {m, fm}});
      } else {
        done.push_back(lo);
        done.push_back({m, fm});
      }
      if (nodes.size() + done.size() > kMaxNodes)
        throw ToleranceUnreached("transform table exceeded node cap", tol);
    }
    for (auto& [r, v] : done) {
      nodes.push_back(r);
      values.push_back(v);
    }
  }
  nodes.push_back(work.back().first);
  values.push_back(work.back().second);

  return Transform1DTable(p, r_max, tol, std::move(nodes), std::move(values), std::move(coeffs), asym);
}

inline std::string transform_table_key(double p, double r_max, double tol) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g_%.17g_%.17g", p, r_max, tol);
  return buf;
}

/// Process-wide memo of built tables, optionally backed by files in a directory.
class TransformTableCache {
 public:
  static TransformTableCache& instance() {
    static TransformTableCache cache;
    return cache;
  }

  void set_directory(std::string dir) {
    std::lock_guard lock(mutex_);
    dir_ = std::move(dir);
  }

  void clear() {
    std::lock_guard lock(mutex_);
    tables_.clear();
  }

  std::shared_ptr<const Transform1DTable> get(double p, double r_max = kDefaultTableRMax,
                                              double tol = kDefaultTableTol) {
    const std::string key = transform_table_key(p, r_max, tol);
    std::lock_guard lock(mutex_);
    if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    std::shared_ptr<const Transform1DTable> table;
    const std::string path = dir_.empty() ? std::string() : dir_ + "/fhat_" + key + ".json";
    if (!path.empty()) {
      std::ifstream in(path);
      if (in) {
        try {
          table = std::make_shared<Transform1DTable>(Transform1DTable::from_json(nlohmann::json::parse(in)));
        } catch (const std::exception&) {
          table.reset();
        }
      }
    }
    if (!table) {
      table = std::make_shared<Transform1DTable>(build_transform_table(p, r_max, tol));
      if (!path.empty()) {
        std::ofstream out(path);
        if (out) out << table->to_json().dump();
      }
    }
    tables_.emplace(key, table);
    return table;
  }

 private:
  std::mutex mutex_;
  std::string dir_;
  std::map<std::string, std::shared_ptr<const Transform1DTable>> tables_;
};

}  // namespace latbound
