#include <gtest/gtest.h>

#include "common.hpp"

using namespace hodgemax;
using namespace testing_support;

namespace {

std::vector<std::shared_ptr<const HodgeSpaces>> problems() {
  return {hodge(torus(2, 4), 1), hodge(torus(3, 2), 1), hodge(torus(3, 3), 1), hodge(torus(3, 3), 2),
          hodge(sphere(1), 1)};
}

}  // namespace

TEST(Inner, LinearModelGivesZeroPotential) {
  std::mt19937_64 rng(1);
  for (const auto& hs : problems())
    for (int t = 0; t < 20; ++t) {
      const Vector beta = random_coclosed(*hs, rng, 3.0);
      const auto res = phi(*hs, linear_model(), beta);
      EXPECT_LE(res.alpha.values.norm(), 1e-10);
    }
}

TEST(Inner, PotentialIsOddInBeta) {
  std::mt19937_64 rng(2);
  for (const auto& model : {shifted_power(1.0, 3.0), perturb(power_law(3.0), 0.125), perturb(power_law(2.5), 0.5)})
    for (const auto& hs : problems())
      for (int t = 0; t < 4; ++t) {
        const Vector beta = random_coclosed(*hs, rng, 5.0);
        const auto plus = phi(*hs, model, beta);
        const auto minus = phi(*hs, model, Vector(-beta));
        const double tol = std::max(plus.tolerance, minus.tolerance);
        // Dual-norm tolerance on V converts to the potential through the
        // smallest V eigenvalue; compare in the energy norm |d alpha|.
        const Vector sum = plus.exact + minus.exact;
        EXPECT_LE(hs->spaces().norm2(hs->degree(), sum), 2.0 * tol + 1e-12 * hs->spaces().norm2(hs->degree(), plus.exact));
      }
}

TEST(Inner, SatisfiesFirstOrderConditionOnEveryBasisCochain) {
  std::mt19937_64 rng(3);
  const auto model = shifted_power(1.0, 3.0);
  for (const auto& hs : problems()) {
    const auto& sp = hs->spaces();
    const int k = hs->degree();
    const Vector beta = random_coclosed(*hs, rng, 4.0);
    const auto res = phi(*hs, model, beta);
    const Vector r = weak_rhs_vector(sp, model, k, beta + res.exact);
    // (r(xi), d e_j) for every unit (k-1)-cochain e_j.
    const Vector pairing = sp.derivative(k - 1).transpose() * r;
    const Vector scale = sp.derivative(k - 1).cwiseAbs().transpose() * r.cwiseAbs();
    EXPECT_LE(pairing.cwiseAbs().maxCoeff(), 1e-9 * scale.maxCoeff());
    EXPECT_LE(res.iterations, 20);
  }
}

TEST(Inner, PotentialMinimizesAlongRandomExactDirections) {
  std::mt19937_64 rng(4);
  const auto model = perturb(power_law(3.0), 0.25);
  const auto hs = hodge(torus(3, 3), 1);
  const auto& sp = hs->spaces();
  const Vector beta = random_coclosed(*hs, rng, 4.0);
  const auto res = phi(*hs, model, beta);
  const double f0 = F_eval(sp, model, 1, beta + res.exact);
  EXPECT_NEAR(f0, res.value, 1e-12 * std::abs(f0));
  for (int t = 0; t < 10; ++t) {
    const Vector a = sp.derivative(0) * gaussian(hs->mesh()->count(0), rng);
    for (double s : {-1.0, -0.1, -1e-3, 1e-3, 0.1, 1.0})
      EXPECT_GE(F_eval(sp, model, 1, beta + res.exact + s * a), f0 * (1 - 1e-14));
  }
}

TEST(Inner, HessianMatchesFiniteDifferencesOfGradient) {
  std::mt19937_64 rng(5);
  const auto model = shifted_power(1.0, 3.0);
  const auto hs = hodge(torus(3, 2), 1);
  const Vector beta = random_coclosed(*hs, rng, 2.0);
  const Vector a = gaussian(hs->v_dimension(), rng) * 0.1;
  const Matrix h = inner_hessian_coords(*hs, model, a, beta);
  for (int t = 0; t < 5; ++t) {
    const Vector u = gaussian(hs->v_dimension(), rng);
    const double e = 1e-6;
    const Vector fd = (inner_gradient_coords(*hs, model, a + e * u, beta) - inner_gradient_coords(*hs, model, a - e * u, beta)) / (2 * e);
    EXPECT_LE((fd - h * u).norm(), 1e-6 * fd.norm());
    const Cochain alpha(hs->mesh(), 0, hs->from_v_coordinates(a));
    const Cochain dir(hs->mesh(), 0, hs->from_v_coordinates(u));
    const double form = inner_hessian_form(*hs, model, alpha, Cochain(hs->mesh(), 1, beta), dir);
    EXPECT_NEAR(form, u.dot(h * u), 1e-9 * std::abs(form));
  }
}

TEST(Inner, RejectsZeroMassAndExactInput) {
  const auto hs = hodge(torus(3, 2), 1);
  std::mt19937_64 rng(6);
  const Vector beta = random_coclosed(*hs, rng);
  EXPECT_THROW(phi(*hs, power_law(3.0), beta), ValidationError);
  const Vector exact = hs->spaces().derivative(0) * gaussian(hs->mesh()->count(0), rng);
  EXPECT_THROW(phi(*hs, shifted_power(1.0, 3.0), Vector(beta + exact)), ValidationError);
  InnerSolveConfig bad;
  bad.backtrack_factor = 1.5;
  EXPECT_THROW(phi(*hs, shifted_power(1.0, 3.0), beta, bad), ValidationError);
}
