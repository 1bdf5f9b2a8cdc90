#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "latbound/generators.hpp"
#include "latbound/lattice_sum.hpp"

using namespace latbound;

namespace {

// Direct sum of h((lambda + v)/t) over all lambda with ||lambda + v||_2 <= reach,
// scanning the integer coefficient box that contains that ball.
double brute_sum(const Lattice& L, const std::function<double(std::span<const double>)>& h, const Vector& v,
                 double t, double reach) {
  const int n = L.dim();
  const Matrix inv = L.basis().inverse();
  const Vector c0 = -(v.transpose() * inv).transpose();
  std::vector<long> lo(n), hi(n), k(n);
  for (int i = 0; i < n; ++i) {
    const double w = reach * inv.col(i).norm();
    lo[i] = static_cast<long>(std::floor(c0(i) - w));
    hi[i] = static_cast<long>(std::ceil(c0(i) + w));
    k[i] = lo[i];
  }
  std::vector<double> x(n);
  double sum = 0.0, comp = 0.0;
  while (true) {
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) {
      double xj = v(j);
      for (int i = 0; i < n; ++i) xj += static_cast<double>(k[i]) * L.basis()(i, j);
      r2 += xj * xj;
      x[j] = xj / t;
    }
    if (r2 <= reach * reach) {
      const double y = h(x) - comp;
      const double s = sum + y;
      comp = (s - sum) - y;
      sum = s;
    }
    int i = 0;
    while (i < n && ++k[i] > hi[i]) k[i] = lo[i], ++i;
    if (i == n) break;
  }
  return sum;
}

double gauss(std::span<const double> x) {
  double s = 0.0;
  for (double xi : x) s += xi * xi;
  return std::exp(-M_PI * s);
}

}  // namespace

TEST(CertifiedSum, GaussianIntegerLattices) {
  TestFunctionSpec g1(Family::gaussian, 1), g2(Family::gaussian, 2);
  double direct = 0.0;
  for (int k = -10; k <= 10; ++k) direct += std::exp(-M_PI * k * k);
  const auto s1 = certified_sum(integer_lattice(1), g1, Vector::Zero(1), 1.0);
  EXPECT_NEAR(s1.partial, 1.0864348112133, 1e-10);
  EXPECT_LE(s1.lower(), direct);
  EXPECT_GE(s1.upper(), direct);
  EXPECT_LE(s1.remainder_bound, 1e-10 * s1.partial + 1e-13);
  const auto s2 = certified_sum(integer_lattice(2), g2, Vector::Zero(2), 1.0);
  EXPECT_NEAR(s2.partial, direct * direct, 1e-10);
  EXPECT_NEAR(s2.partial, 1.180340599, 1e-9);
}

TEST(CertifiedSum, ContainsZeroTerm) {
  for (Family f : {Family::gaussian, Family::sech_product, Family::inv_cosh_product, Family::exp_l1}) {
    TestFunctionSpec spec(f, 3);
    const auto L = random_unimodular_lattice(3, 7);
    EXPECT_GE(certified_sum(L, spec, Vector::Zero(3), 1.3).lower(), eval_f(spec, Vector::Zero(3)) * (1 - 1e-14));
  }
}

TEST(CertifiedSum, MatchesBruteForce) {
  struct Case {
    Family f;
    double reach;  // omitted mass beyond this l2 radius is below 1e-15
  };
  for (int n = 1; n <= 3; ++n)
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto L = random_unimodular_lattice(n, seed);
      Vector v(n);
      for (int i = 0; i < n; ++i) v(i) = 0.17 * (i + 1) + 0.05 * seed;
      for (double t : {1.0, 1.5}) {
        for (Case c : {Case{Family::gaussian, 4.0}, Case{Family::inv_cosh_product, 11.0}, Case{Family::exp_l1, 42.0}}) {
          if (c.f == Family::exp_l1 && n == 3) continue;
          TestFunctionSpec spec(c.f, n);
          auto h = [&](std::span<const double> x) { return eval_f(spec, x); };
          const double oracle = brute_sum(L, h, v, t, c.reach * t);
          const auto s = certified_sum(L, spec, v, t);
          EXPECT_LE(s.lower(), oracle * (1 + 1e-13)) << n << " " << seed << " " << family_name(c.f);
          EXPECT_GE(s.upper(), oracle * (1 - 1e-13)) << n << " " << seed << " " << family_name(c.f);
          EXPECT_NEAR(s.partial, oracle, 2e-10 * oracle);
        }
      }
    }
}

TEST(CertifiedSum, IntervalsNest) {
  const auto L = random_unimodular_lattice(2, 11);
  TestFunctionSpec spec(Family::sech_product, 2);
  Vector v(2);
  v << 0.3, -0.2;
  SumOptions loose, tight;
  loose.tol = 1e-4;
  tight.tol = 1e-12;
  const auto a = certified_sum(L, spec, v, 1.2, loose);
  const auto b = certified_sum(L, spec, v, 1.2, tight);
  EXPECT_LE(a.truncation_radius, b.truncation_radius);
  EXPECT_GE(b.lower(), a.lower() - 1e-12);
  EXPECT_LE(b.upper(), a.upper() + 1e-12);
  EXPECT_LE(b.remainder_bound, a.remainder_bound);
}

TEST(CertifiedSum, CubePackingBoundsActualTail) {
  // Tail of the Gaussian sum over Z^2 and a skewed lattice outside ||x||_inf > a.
  for (std::uint64_t seed : {0u, 5u}) {
    const Lattice L = seed == 0 ? integer_lattice(2) : random_unimodular_lattice(2, seed);
    const double delta = shortest_vector(L, kInf).sigma;
    const Profile1D g = TestFunctionSpec(Family::gaussian, 2).f_profile();
    for (double a : {0.3, 0.8, 1.5, 2.5}) {
      auto h = [&](std::span<const double> x) { return lp_norm(x, kInf) > a ? gauss(x) : 0.0; };
      const double actual = brute_sum(L, h, Vector::Zero(2), 1.0, 6.0);
      EXPECT_LE(actual, detail::cube_packing_tail(g, 2, delta, a)) << seed << " " << a;
    }
  }
}

TEST(CertifiedSum, PhasedSumAgainstShiftedDual) {
  // sum_k e^{-pi k^2} cos(2 pi k theta) = sum_m e^{-pi (m + theta)^2} on Z.
  const Lattice z = integer_lattice(1);
  Vector theta(1);
  theta << 0.3;
  SumOptions opt;
  const auto phased =
      certified_profile_sum(z, TestFunctionSpec(Family::gaussian, 1).f_profile(), Vector::Zero(1), 1.0, &theta, opt)
          .all;
  double oracle = 0.0;
  for (int m = -12; m <= 12; ++m) oracle += std::exp(-M_PI * (m + 0.3) * (m + 0.3));
  EXPECT_LE(phased.lower(), oracle);
  EXPECT_GE(phased.upper(), oracle);
  EXPECT_NEAR(phased.imag_residue, 0.0, 1e-15);
}

TEST(CertifiedSum, ExpClosedForm) {
  // sum_k e^{-|k|/t} = coth(1/(2t)).
  for (double t : {0.5, 1.0, 3.0}) {
    const auto s = certified_sum(integer_lattice(1), TestFunctionSpec(Family::exp_l1, 1), Vector::Zero(1), t);
    const double exact = 1.0 / std::tanh(0.5 / t);
    EXPECT_LE(s.lower(), exact);
    EXPECT_GE(s.upper(), exact);
    EXPECT_LE(s.upper() - s.lower(), 2e-10 * exact);
  }
}

TEST(CertifiedSum, BudgetAndEstimate) {
  // The Lorentzian needs huge boxes for 1e-10 in two dimensions. A sheared
  // basis of Z^2 forces the general (non-factorized) path.
  Matrix sheared(2, 2);
  sheared << 1, 0, 1, 1;
  const Lattice z2s(sheared);
  SumOptions opt;
  opt.max_points = 10000;
  const auto lor = TestFunctionSpec(Family::exp_l1, 2).fhat_profile();
  try {
    certified_profile_sum(z2s, lor, Vector::Zero(2), 1.0, nullptr, opt);
    FAIL() << "expected BudgetExceeded";
  } catch (const BudgetExceeded& e) {
    EXPECT_GT(e.achieved(), opt.tol);
  }
  opt.allow_estimate = true;
  // sum_k 2/(1 + 4 pi^2 k^2) = coth(1/2) per coordinate.
  const double exact = std::pow(1.0 / std::tanh(0.5), 2);
  const auto est = certified_profile_sum(z2s, lor, Vector::Zero(2), 1.0, nullptr, opt).all;
  EXPECT_FALSE(est.certified);
  EXPECT_GT(est.tail_estimate, 0.0);
  EXPECT_LE(est.lower(), exact);
  EXPECT_GE(est.upper(), exact);
  EXPECT_NEAR(est.value(), exact, 2e-3 * exact);

  const auto fac = certified_profile_sum(integer_lattice(2), lor, Vector::Zero(2), 1.0, nullptr, opt).all;
  EXPECT_FALSE(fac.certified);
  EXPECT_LE(fac.lower(), exact);
  EXPECT_GE(fac.upper(), exact);
  EXPECT_NEAR(fac.value(), exact, 1e-9 * exact);

  SumOptions tiny;
  tiny.node_budget = 10;
  EXPECT_THROW(certified_sum(z2s, TestFunctionSpec(Family::gaussian, 2), Vector::Zero(2), 1.0, tiny), BudgetExceeded);
}

TEST(CertifiedSum, FactorizedMatchesGeneralPath) {
  Matrix diag(3, 3), perm(3, 3);
  diag << 1.3, 0, 0, 0, 0.7, 0, 0, 0, 1.1;
  perm << 0, 0.7, 0, 1.3, 0, 0, 0, 0, 1.1;  // same lattice, not diagonal
  Vector v(3), theta(3);
  v << 0.2, -0.4, 0.1;
  theta << 0.3, 0.05, -0.6;
  for (Family f : {Family::gaussian, Family::sech_product, Family::inv_cosh_product}) {
    const auto g = TestFunctionSpec(f, 3).f_profile();
    SumOptions opt;
    for (const Vector* th : {static_cast<const Vector*>(nullptr), static_cast<const Vector*>(&theta)}) {
      const auto a = certified_profile_sum(Lattice(diag), g, v, 1.4, th, opt).all;
      const auto b = certified_profile_sum(Lattice(perm), g, v, 1.4, th, opt).all;
      EXPECT_NEAR(a.partial, b.partial, 1e-9 * std::abs(b.partial)) << family_name(f);
      EXPECT_LE(a.lower(), b.upper());
      EXPECT_LE(b.lower(), a.upper());
      EXPECT_NEAR(a.imag_residue, b.imag_residue, 1e-12);
    }
  }
}

TEST(CertifiedSum, Preconditions) {
  TestFunctionSpec g(Family::gaussian, 2);
  EXPECT_THROW(certified_sum(integer_lattice(2), g, Vector::Zero(2), 0.0), DomainError);
  EXPECT_THROW(certified_sum(integer_lattice(2), g, Vector::Zero(3), 1.0), DomainError);
  EXPECT_THROW(certified_sum(integer_lattice(3), g, Vector::Zero(3), 1.0), DomainError);
}
