#include <gtest/gtest.h>

#include "common.hpp"

using namespace hodgemax;
using namespace testing_support;

namespace {

// Independent weak residual of delta d xi = m xi for the linear model f = m t:
// pairing with every unit cochain, assembled from the raw matrices.
double linear_residual(const FormSpaces& sp, int k, const Vector& xi, double m) {
  const Vector lhs = sp.derivative(k).transpose() * (sp.mass(k + 1).matrix * (sp.derivative(k) * xi));
  const Vector rhs = m * (sp.mass(k).matrix * xi);
  return (lhs - rhs).cwiseAbs().maxCoeff() / (lhs.cwiseAbs() + rhs.cwiseAbs()).maxCoeff();
}

NonlinearityModel scaled_linear(double m) {
  return custom_model([m](double t) { return m * t; }, [m](double) { return m; }, [](double) { return 0.0; }, 2.0, m,
                      "linear");
}

}  // namespace

TEST(Reduced, EnvelopeGradientMatchesCentralDifferences) {
  std::mt19937_64 rng(7);
  struct Case {
    std::shared_ptr<const HodgeSpaces> hs;
    NonlinearityModel model;
  };
  const std::vector<Case> cases = {{hodge(torus(3, 3), 1), shifted_power(1.0, 3.0)},
                                   {hodge(torus(3, 2), 1), shifted_power(1.0, 3.0)},
                                   {hodge(torus(3, 3), 1), perturb(power_law(3.0), 0.125)},
                                   {hodge(sphere(1), 1), perturb(power_law(3.0), 0.125)}};
  for (const auto& c : cases) {
    const ReducedFunctional J(c.hs, c.model);
    const Vector b = gaussian(J.dimension(), rng).cwiseQuotient((1.0 + c.hs->w_eigenvalues().array()).sqrt().matrix()) * 4.0;
    const auto ev = J.evaluate(b);
    for (int t = 0; t < 10; ++t) {
      const Vector u = gaussian(J.dimension(), rng).normalized();
      const double h = 1e-4 * std::max(1.0, b.norm());
      const double fd = (J.value(b + h * u) - J.value(b - h * u)) / (2 * h);
      const double an = ev.gradient.dot(u);
      EXPECT_LE(std::abs(fd - an), 1e-5 * std::max(std::abs(an), 1e-8 * ev.gradient.norm()));
    }
  }
}

TEST(Reduced, FunctionalIsEvenAndGradientOdd) {
  std::mt19937_64 rng(8);
  const ReducedFunctional J(hodge(torus(3, 3), 1), shifted_power(1.0, 3.0));
  const Vector b = gaussian(J.dimension(), rng);
  const auto p = J.evaluate(b), m = J.evaluate(-b);
  EXPECT_NEAR(p.value, m.value, 1e-12 * std::abs(p.value));
  EXPECT_LE((p.gradient + m.gradient).norm(), 1e-10 * p.gradient.norm());
  EXPECT_EQ(J.value(Vector::Zero(J.dimension())), 0.0);
}

TEST(Reduced, HessianMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  const ReducedFunctional J(hodge(torus(3, 2), 1), shifted_power(1.0, 3.0));
  const Vector b = gaussian(J.dimension(), rng);
  const auto ev = J.evaluate(b);
  const Matrix h = J.hessian(ev);
  for (int t = 0; t < 4; ++t) {
    const Vector u = gaussian(J.dimension(), rng).normalized();
    const double e = 1e-5;
    const Vector fd = (J.evaluate(b + e * u).gradient - J.evaluate(b - e * u).gradient) / (2 * e);
    EXPECT_LE((fd - h * u).norm(), 1e-5 * fd.norm());
  }
  // Column restriction agrees with the full matrix.
  const std::vector<Index> cols = {0, 3, 5};
  const Matrix hc = J.hessian(ev, cols);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(hc(i, j), h(cols[i], cols[j]), 1e-9 * h.cwiseAbs().maxCoeff());
}

TEST(Reduced, EigenvectorsSolveTheLinearEquation) {
  // For f = m t the equation is delta d xi = m xi; an eigenvector with
  // eigenvalue m solves it and any other m leaves a computable residual.
  const auto hs = hodge(torus(3, 3), 1);
  const auto& sp = hs->spaces();
  const Vector v = hs->w_spectrum().eigenvectors.col(4);
  const double lam = hs->w_spectrum().eigenvalues[4];
  EXPECT_LE(weak_residual(sp, scaled_linear(lam), 1, v), 1e-9);
  EXPECT_NEAR(weak_residual(sp, scaled_linear(lam), 1, v), linear_residual(sp, 1, v, lam), 1e-9);
  const double off = weak_residual(sp, scaled_linear(2.0 * lam), 1, v);
  EXPECT_NEAR(off, linear_residual(sp, 1, v, 2.0 * lam), 1e-12);
  EXPECT_GT(off, 0.1);
  EXPECT_EQ(weak_residual(sp, shifted_power(1.0, 3.0), 1, Vector::Zero(hs->mesh()->count(1))), 0.0);
  // A subset probe cannot exceed the full probe.
  std::mt19937_64 rng(10);
  const Vector xi = gaussian(hs->mesh()->count(1), rng);
  EXPECT_LE(weak_residual(sp, shifted_power(1.0, 3.0), 1, xi, 20, 3),
            weak_residual(sp, shifted_power(1.0, 3.0), 1, xi) * (1 + 1e-15) + 1e-300);
}

TEST(Reduced, CochainInterfaceAgreesWithCoordinates) {
  std::mt19937_64 rng(11);
  const auto hs = hodge(torus(3, 2), 1);
  const ReducedFunctional J(hs, shifted_power(1.0, 3.0));
  const Vector b = gaussian(J.dimension(), rng);
  const Cochain beta(hs->mesh(), 1, hs->from_w_coordinates(b));
  EXPECT_NEAR(J.j_hat(beta).value, J.value(b), 1e-10 * std::abs(J.value(b)));
  const Cochain g = J.j_hat_gradient(beta);
  EXPECT_LE((hs->w_coordinates(g.values) - J.evaluate(b).gradient).norm(), 1e-9 * g.values.norm());
  EXPECT_THROW(ReducedFunctional(hs, power_law(3.0)), ValidationError);
}
