#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "latbound/errors.hpp"
#include "latbound/norms.hpp"

namespace latbound {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

inline constexpr double kMaxConditionNumber = 1e12;
inline constexpr double kDefaultLllDelta = 0.99;

/// Gram-Schmidt data of a row basis: b_i = b*_i + sum_{j<i} mu(i,j) b*_j.
struct GramSchmidt {
  Matrix mu;       // strictly lower part used, unit diagonal
  Matrix ortho;    // rows are b*_i
  Vector sqnorms;  // ||b*_i||^2
};

inline GramSchmidt gram_schmidt(const Matrix& basis) {
  const auto n = basis.rows();
  GramSchmidt g{Matrix::Identity(n, n), Matrix::Zero(n, basis.cols()), Vector::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    g.ortho.row(i) = basis.row(i);
    for (Eigen::Index j = 0; j < i; ++j) {
      g.mu(i, j) = basis.row(i).dot(g.ortho.row(j)) / g.sqnorms(j);
      g.ortho.row(i) -= g.mu(i, j) * g.ortho.row(j);
    }
    g.sqnorms(i) = g.ortho.row(i).squaredNorm();
  }
  return g;
}

/// Reduced basis together with the integer transform: basis == transform * input.
struct LllResult {
  Matrix basis;
  IntMatrix transform;
};

inline LllResult lll_reduce_basis(const Matrix& input, double delta = kDefaultLllDelta) {
  if (!(delta > 0.25 && delta < 1.0))
    throw DomainError("LLL delta must lie in (0.25, 1)");
  const auto n = input.rows();
  Matrix b = input;
  IntMatrix u = IntMatrix::Identity(n, n);
  GramSchmidt g = gram_schmidt(b);

  const std::int64_t max_iterations = 100000 * (n + 1) * (n + 1);
  std::int64_t iterations = 0;
  Eigen::Index k = 1;
  while (k < n) {
    if (++iterations > max_iterations)
      throw IllConditionedInput("LLL did not terminate; basis is numerically degenerate");
    for (Eigen::Index j = k - 1; j >= 0; --j) {
      const double m = g.mu(k, j);
      if (std::abs(m) <= 0.5 + 1e-12) continue;
      const double q = std::nearbyint(m);
      b.row(k) -= q * b.row(j);
      u.row(k) -= static_cast<std::int64_t>(q) * u.row(j);
      for (Eigen::Index i = 0; i < j; ++i) g.mu(k, i) -= q * g.mu(j, i);
      g.mu(k, j) -= q;
    }
    const double lhs = g.sqnorms(k);
    const double rhs = (delta - g.mu(k, k - 1) * g.mu(k, k - 1)) * g.sqnorms(k - 1);
    if (lhs >= rhs) {
      ++k;
    } else {
      b.row(k).swap(b.row(k - 1));
      u.row(k).swap(u.row(k - 1));
      g = gram_schmidt(b);
      k = std::max<Eigen::Index>(k - 1, 1);
    }
  }
  // Recompute from the exact integer transform to shed accumulated rounding.
  return {u.cast<double>() * input, u};
}

/// Full-rank lattice in R^n, rows of the basis are the generators.
/// Immutable; construction caches an LLL-reduced basis for enumeration.
class Lattice {
 public:
  explicit Lattice(Matrix basis) : basis_(std::move(basis)) {
    if (basis_.rows() == 0 || basis_.rows() != basis_.cols())
      throw DomainError("lattice basis must be a non-empty square matrix");
    if (!basis_.allFinite()) throw DomainError("lattice basis has non-finite entries");
    Eigen::JacobiSVD<Matrix> svd(basis_);
    const auto& s = svd.singularValues();
    const double smax = s(0), smin = s(s.size() - 1);
    if (!(smin > 0.0) || smax / smin > kMaxConditionNumber)
      throw IllConditionedInput("lattice basis is singular or ill-conditioned (condition number " +
                                std::to_string(smin > 0.0 ? smax / smin : INFINITY) + ")");
    covolume_ = std::abs(basis_.partialPivLu().determinant());
    inverse_ = basis_.inverse();
    auto red = lll_reduce_basis(basis_);
    reduced_ = std::move(red.basis);
    transform_ = std::move(red.transform);
    gso_ = gram_schmidt(reduced_);
  }

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Matrix& basis() const { return basis_; }
  double covolume() const { return covolume_; }

  const Matrix& reduced_basis() const { return reduced_; }
  /// reduced_basis() == reduction_transform() * basis()
  const IntMatrix& reduction_transform() const { return transform_; }
  const GramSchmidt& reduced_gso() const { return gso_; }

  Vector embed(const IntVector& coords) const {
    return (coords.cast<double>().transpose() * basis_).transpose();
  }

  /// Real coefficients of x with respect to basis().
  Vector coefficients_of(const Vector& x) const { return (x.transpose() * inverse_).transpose(); }

  /// Integer coordinates of x if it is a lattice vector (to tol), else nullopt.
  std::optional<IntVector> coordinates_of(const Vector& x, double tol = 1e-9) const {
    const Vector c = coefficients_of(x);
    IntVector out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const double r = std::nearbyint(c(i));
      if (std::abs(c(i) - r) > tol) return std::nullopt;
      out(i) = static_cast<std::int64_t>(r);
    }
    return out;
  }

  bool contains(const Vector& x, double tol = 1e-9) const { return coordinates_of(x, tol).has_value(); }

  Lattice scaled(double t) const {
    if (!(t > 0.0)) throw DomainError("scale factor must be positive");
    return Lattice(t * basis_);
  }

 private:
  Matrix basis_;
  Matrix inverse_;
  double covolume_ = 0.0;
  Matrix reduced_;
  IntMatrix transform_;
  GramSchmidt gso_;
};

/// Basis of the dual lattice: inverse transpose of the basis.
inline Lattice dual(const Lattice& lattice) {
  return Lattice(lattice.basis().inverse().transpose());
}

inline Lattice lll_reduce(const Lattice& lattice, double delta = kDefaultLllDelta) {
  return Lattice(lll_reduce_basis(lattice.basis(), delta).basis);
}

/// Mutual membership of basis vectors.
inline bool same_lattice(const Lattice& a, const Lattice& b, double tol = 1e-9) {
  if (a.dim() != b.dim()) return false;
  for (int i = 0; i < a.dim(); ++i) {
    if (!b.contains(a.basis().row(i).transpose(), tol)) return false;
    if (!a.contains(b.basis().row(i).transpose(), tol)) return false;
  }
  return true;
}

struct LatticePoint {
  IntVector coords;  // with respect to the lattice's input basis
  Vector embedding;  // coords * basis
};

/// K = radius * (unit l_p ball).
struct BodySpec {
  double p = 2.0;
  double radius = 1.0;

  BodySpec(double p_, double radius_) : p(p_), radius(radius_) {
    if (!valid_norm_exponent(p)) throw DomainError("body exponent p must be positive");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("body radius must be positive");
  }

  double norm(std::span<const double> x) const { return lp_norm(x, p) / radius; }
  double norm(const Vector& x) const { return lp_norm(x, p) / radius; }
  bool contains(std::span<const double> x) const { return lp_norm(x, p) <= radius; }
  bool contains(const Vector& x) const { return lp_norm(x, p) <= radius; }
};

}  // namespace latbound
