#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include <Eigen/Dense>

namespace latbound {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// ||x||_p for 0 < p <= inf. For p < 1 this is the usual quasi-norm.
inline double lp_norm(std::span<const double> x, double p) {
  if (p == kInf) {
    double m = 0.0;
    for (double xi : x) m = std::max(m, std::abs(xi));
    return m;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return std::sqrt(s);
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double xi : x) s += std::abs(xi);
    return s;
  }
  // Scale by the largest entry so |x_i|^p neither overflows nor underflows.
  double m = 0.0;
  for (double xi : x) m = std::max(m, std::abs(xi));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double xi : x) s += std::pow(std::abs(xi) / m, p);
  return m * std::pow(s, 1.0 / p);
}

inline double lp_norm(const Eigen::VectorXd& x, double p) {
  return lp_norm(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), p);
}

/// Smallest c with ||x||_2 <= c ||x||_p on R^n.
inline double l2_over_lp_factor(int n, double p) {
  if (p <= 2.0) return 1.0;
  if (p == kInf) return std::sqrt(static_cast<double>(n));
  return std::pow(static_cast<double>(n), 0.5 - 1.0 / p);
}

inline bool valid_norm_exponent(double p) { return p > 0.0 && !std::isnan(p); }

/// Compensated (Neumaier) summation.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace latbound
