#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "latbound/errors.hpp"
#include "latbound/lattice.hpp"
#include "latbound/random.hpp"

namespace latbound {

inline Lattice integer_lattice(int n) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  return Lattice(Matrix::Identity(n, n));
}

/// Checkerboard lattice D4 = { x in Z^4 : sum of coordinates even }.
inline Lattice checkerboard_d4() {
  Matrix b(4, 4);
  b << 1, 1, 0, 0,
       1, -1, 0, 0,
       0, 1, -1, 0,
       0, 0, 1, -1;
  return Lattice(b);
}

/// Integer basis of determinant 1: a seeded product of elementary row
/// operations with multipliers in [-3, 3]. The lattice it spans is always
/// Z^n, only the basis is scrambled.
inline IntMatrix random_integer_unimodular_basis(int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  Rng rng(seed);
  IntMatrix u = IntMatrix::Identity(n, n);
  if (n == 1) return u;
  for (int step = 0; step < 2 * n; ++step) {
    const auto i = static_cast<Eigen::Index>(rng.integer(0, n - 1));
    auto j = static_cast<Eigen::Index>(rng.integer(0, n - 2));
    if (j >= i) ++j;
    std::int64_t m = rng.integer(-3, 3);
    if (m == 0) m = 1;
    u.row(i) += m * u.row(j);
  }
  return u;
}

/// Seeded covolume-1 lattice that is genuinely different from Z^n:
/// U * T * D with U integer unimodular, T unit upper triangular with
/// entries in (-1/2, 1/2) and D a positive diagonal of determinant 1.
inline Lattice random_unimodular_lattice(int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  Rng rng(derive_seed(seed, 0x5eed));
  Matrix t = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) t(i, j) = rng.uniform(-0.5, 0.5);
  Vector d(n);
  double log_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    d(i) = rng.uniform(-0.4, 0.4);
    log_sum += d(i);
  }
  for (int i = 0; i < n; ++i) d(i) = std::exp(d(i) - log_sum / n);
  const Matrix u = random_integer_unimodular_basis(n, seed).cast<double>();
  return Lattice(u * t * d.asDiagonal());
}

}  // namespace latbound
