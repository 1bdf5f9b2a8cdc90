#include <gtest/gtest.h>

#include <cmath>

#include "latbound/bounds.hpp"

using namespace latbound;

namespace {

// Independent oracle for mu: dense scan of u in (0, 1] followed by local refinement.
double mu_scan(double coeff, double expo, double r, int n) {
  auto obj = [&](double u) { return n * std::log(u) - coeff * std::pow(u * r, expo); };
  double best_u = 1.0, best = obj(1.0);
  for (int i = 1; i <= 100000; ++i) {
    const double u = i / 100000.0;
    if (obj(u) > best) best = obj(u), best_u = u;
  }
  double h = 1e-5;
  for (int it = 0; it < 60; ++it, h *= 0.5)
    for (double u : {best_u - h, best_u + h})
      if (u > 0 && u <= 1 && obj(u) > best) best = obj(u), best_u = u;
  return std::exp(-coeff * std::pow(r, expo) - best);
}

}  // namespace

TEST(MuNorm, GaussianExampleAndArgmax) {
  const int n = 4;
  const double r = gaussian_radius_for_tau(1.0, n);
  auto nu = mu_norm(TestFunctionSpec(Family::gaussian, n), r, n);
  EXPECT_NEAR(nu.value, std::pow(2.0 * std::exp(-1.0), 2), 1e-9 * nu.value);
  EXPECT_NEAR(nu.value, 0.541341, 1e-6);
  EXPECT_NEAR(nu.u_star, std::sqrt(double(n)) / (std::sqrt(2 * M_PI) * r), 1e-7);
}

TEST(MuNorm, AgreesWithScanOracle) {
  for (int n : {1, 3, 6})
    for (double r : {0.3, 1.0, 2.5}) {
      EXPECT_NEAR(mu_norm(TestFunctionSpec(Family::gaussian, n), r, n).value, mu_scan(M_PI, 2.0, r, n),
                  1e-9 * mu_scan(M_PI, 2.0, r, n));
      for (double p : {0.5, 1.3, 2.0})
        EXPECT_NEAR(mu_norm(TestFunctionSpec(Family::supergaussian, n, p), r, n).value, mu_scan(1.0, p, r, n),
                    1e-9 * mu_scan(1.0, p, r, n));
      EXPECT_NEAR(mu_norm(TestFunctionSpec(Family::exp_l1, n), r, n).value, mu_scan(1.0, 1.0, r, n),
                  1e-9 * mu_scan(1.0, 1.0, r, n));
    }
}

TEST(MuNorm, AtMostOneAndMonotone) {
  for (int n : {1, 2, 5}) {
    TestFunctionSpec g(Family::gaussian, n);
    double prev = 2.0;
    for (double r = 0.05; r < 5; r += 0.05) {
      const double v = mu_norm(g, r, n).value;
      EXPECT_LE(v, 1.0 + 1e-15);
      if (r >= gaussian_radius_for_tau(0.5, n)) EXPECT_LE(v, prev * (1 + 1e-12));
      prev = v;
    }
  }
  EXPECT_THROW(mu_norm(TestFunctionSpec(Family::inv_cosh_product, 2), 1.0, 2), DomainError);
}

TEST(ClosedForms, GaussianExamples) {
  for (int n : {1, 7, 50}) EXPECT_NEAR(gaussian_nu_closed_form(0.5, n), 1.0, 1e-15);
  // tau = 1/2 + 3/sqrt(100): (1.6 e^{-0.6})^{50}.
  const double direct = std::pow(1.6, 50) * std::exp(-30.0);
  EXPECT_NEAR(gaussian_nu_closed_form(0.8, 100), direct, 1e-12 * direct);
  EXPECT_NEAR(direct, 1.50e-3, 0.01e-3);
  EXPECT_NEAR(gaussian_nu_closed_form(M_PI, 1), std::sqrt(2 * M_PI * M_E) * std::exp(-M_PI), 1e-14);
  EXPECT_NEAR(gaussian_nu_closed_form(M_PI, 1), 0.17860, 1e-5);
  EXPECT_THROW(gaussian_nu_closed_form(0.49, 3), DomainError);
}

TEST(ClosedForms, SupergaussianExamples) {
  for (double p : {0.5, 1.0, 2.0})
    for (int n : {1, 4}) EXPECT_NEAR(supergaussian_mu_closed_form(p, supergaussian_radius_for_t(p, 1.0, n), n), 1.0, 1e-13);
  const double v = supergaussian_mu_closed_form(1.0, supergaussian_radius_for_t(1.0, 2.0, 3), 3);
  EXPECT_NEAR(v, std::pow(2.0 * M_E * std::exp(-2.0), 3), 1e-14);
  EXPECT_NEAR(v, 0.39829, 1e-5);
  EXPECT_THROW(supergaussian_mu_closed_form(1.0, 0.5, 3), DomainError);
  // p = 2 supergaussian at r equals the Gaussian at r / sqrt(pi).
  const int n = 4;
  const double r = 2.0;
  EXPECT_NEAR(mu_norm(TestFunctionSpec(Family::supergaussian, n, 2.0), r, n).value,
              gaussian_nu_closed_form(M_PI * (r * r / M_PI) / n, n), 1e-9);
  EXPECT_NEAR(supergaussian_mu_closed_form(2.0, r, n), gaussian_nu_closed_form(r * r / n, n), 1e-13);
}

TEST(ClosedForms, OptimizerEquivalenceGrid) {
  int checked = 0;
  for (int n : {1, 2, 4, 8}) {
    for (double tau : {0.5, 1.0, 2.0}) {
      const double cf = gaussian_nu_closed_form(tau, n);
      const double opt = mu_norm(TestFunctionSpec(Family::gaussian, n), gaussian_radius_for_tau(tau, n), n).value;
      EXPECT_NEAR(opt, cf, 1e-9 * cf);
    }
    for (double p : {0.5, 1.0, 1.5, 2.0})
      for (double t : {1.0, 1.5, 2.0}) {
        const double r = supergaussian_radius_for_t(p, t, n);
        const double cf = supergaussian_mu_closed_form(p, r, n);
        const double opt = mu_norm(TestFunctionSpec(Family::supergaussian, n, p), r, n).value;
        EXPECT_NEAR(opt, cf, 1e-9 * cf) << n << " " << p << " " << t;
        ++checked;
      }
  }
  EXPECT_EQ(checked, 48);
}

TEST(Cstar, ValueAndLocalMaximum) {
  EXPECT_EQ(cstar_objective(0.0), 0.0);
  const auto c = cstar_with_argmax();
  EXPECT_GE(c.value, 0.424785);
  EXPECT_LE(c.value, 0.424795);
  EXPECT_NEAR(c.value, 0.42479, 5e-6);
  const double h = 1e-3;
  EXPECT_LE(cstar_objective(c.z_star + h) - 2 * cstar_objective(c.z_star) + cstar_objective(c.z_star - h), 0.0);
  EXPECT_GE(c.value, cstar_objective(c.z_star + h));
  EXPECT_GE(c.value, cstar_objective(c.z_star - h));
  EXPECT_EQ(cstar(), c.value);
}

TEST(CoshBound, Examples) {
  const double a1 = std::sqrt(3.0) / (2 * M_PI);
  EXPECT_NEAR(cosh_nu_bound(a1 * (1 + 1e-9), 5), 1.0, 1e-12);
  const double a = cosh_alpha_default(100);
  const double x = 2 * M_PI * a / std::sqrt(3.0);
  EXPECT_NEAR(x, 2.0883, 1e-4);
  const double v = cosh_nu_bound(a, 100);
  EXPECT_NEAR(std::log(v), 100 * (std::log(x) - x + 1), 1e-10);
  EXPECT_NEAR(std::log(v), -35.2, 0.05);
  EXPECT_LT(v, 1.0 / 3.0);
  for (int n = 1; n < 40; ++n) EXPECT_LT(cosh_nu_bound(0.5, n + 1), cosh_nu_bound(0.5, n));
  EXPECT_THROW(cosh_nu_bound(a1 * 0.999, 3), DomainError);
}

TEST(Transference, L2Values) {
  EXPECT_NEAR(transference_bound_l2(1), 1.0 / (2 * M_PI) + 3.0 / M_PI, 1e-15);
  EXPECT_NEAR(transference_bound_l2(1), 1.11408, 1e-5);
  EXPECT_NEAR(transference_bound_l2(100), 25.4648, 1e-4);
  EXPECT_GE(transference_bound_l2(1), 0.5);
}

TEST(Transference, L1Values) {
  EXPECT_LT(l1_constant_exact(), kL1Coefficient);
  EXPECT_NEAR(l1_constant_exact(), 0.1542636, 5e-7);
  const auto b3 = transference_bound_l1(3);
  EXPECT_NEAR(b3.ceiling, 0.154264 * 9 * std::pow(1 + 2 * M_PI, 2), 1e-9);
  EXPECT_NEAR(b3.ceiling, 73.646, 0.001);
  EXPECT_LT(b3.exact, b3.ceiling);
  for (int n = 1; n <= 2000; ++n) EXPECT_TRUE(transference_bound_l1(n).below_ceiling) << n;
  // alpha = (sqrt 3 / 2 pi)(1 + 2 pi sqrt(3/n)), so exact / ceiling is a constant.
  for (int n : {1, 10, 1000000})
    EXPECT_NEAR(transference_bound_l1(n).exact / transference_bound_l1(n).ceiling, l1_constant_exact() / kL1Coefficient,
                1e-12);
}

TEST(Handshake, Values) {
  EXPECT_NEAR(handshake_bound(4, 2.0, 1.0), 20 * std::exp(3.0), 1e-10);
  EXPECT_NEAR(handshake_bound(4, 2.0, 1.0), 401.71, 0.01);
  EXPECT_NEAR(handshake_bound(2, 1.0, 1.0), 20 * std::exp(3.0), 1e-10);
  // log bound / (n/p) tends to 1 at u = 1.
  EXPECT_NEAR(std::log(handshake_bound(600, 1.0, 1.0)) / 600.0, 1.0 + std::log(6000 * M_E) / 600.0, 1e-12);
  EXPECT_THROW(handshake_bound(2, 1.0, 0.9), DomainError);
  EXPECT_THROW(handshake_bound(2, 2.5, 1.0), DomainError);
}

TEST(GenericCondition, Verdicts) {
  EXPECT_EQ(generic_transference_condition(0, 0), Verdict::pass);
  EXPECT_EQ(generic_transference_condition(1.0 / 3, 1.0 / 3), Verdict::fail);
  EXPECT_EQ(generic_transference_condition(0.25, 0.5 - 1e-14), Verdict::inconclusive);
  EXPECT_THROW(generic_transference_condition(-0.1, 0), DomainError);
  for (int n = 1; n <= 500; ++n) {
    const double nu = gaussian_nu_closed_form(0.5 + 3 / std::sqrt(double(n)), n);
    EXPECT_EQ(generic_transference_condition(nu, nu), Verdict::pass) << n;
  }
}

TEST(NuForBody, Routes) {
  auto g = nu_for_body(TestFunctionSpec(Family::gaussian, 4), BodySpec(2.0, gaussian_radius_for_tau(1.0, 4)));
  EXPECT_EQ(g.method, NuMethod::norm_optimizer);
  EXPECT_NEAR(g.value, gaussian_nu_closed_form(1.0, 4), 1e-9);
  const double alpha = cosh_alpha_default(2);
  auto c = nu_for_body(TestFunctionSpec(Family::inv_cosh_product, 2), BodySpec(1.0, cosh_body_radius(alpha, 2)));
  EXPECT_EQ(c.method, NuMethod::cosh_lemma);
  EXPECT_NEAR(c.value, cosh_nu_bound(alpha, 2), 1e-12);
  EXPECT_THROW(nu_for_body(TestFunctionSpec(Family::gaussian, 2), BodySpec(1.0, 1.0)), DomainError);
  EXPECT_THROW(nu_for_body(TestFunctionSpec(Family::sech_product, 2), BodySpec(1.0, 1.0)), DomainError);
}
