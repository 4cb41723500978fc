#include <gtest/gtest.h>

#include "common.hpp"

using namespace hodgemax;
using namespace testing_support;

namespace {

double lowest_scalar_eigenvalue(int res) {
  const auto m = torus(2, res);
  const auto sb = eigensolve_W(*forms(m), 0, 1);
  return sb.eigenvalues[0];
}

}  // namespace

TEST(Spectral, ScalarLaplacianOnFlatTorusApproachesFourPiSquared) {
  const double exact = 4.0 * M_PI * M_PI;
  const double e12 = std::abs(lowest_scalar_eigenvalue(12) - exact) / exact;
  const double e24 = std::abs(lowest_scalar_eigenvalue(24) - exact) / exact;
  EXPECT_LT(e24, 0.03);
  EXPECT_LT(e24, e12);
}

TEST(Spectral, HarmonicDimensionEqualsBetti) {
  for (const auto& m : {torus(2, 4), torus(3, 3), sphere(1)}) {
    const auto betti = m->betti_numbers();
    for (int k = 0; k < m->dimension(); ++k) {
      const auto sb = eigensolve_W(*forms(m), k, 0);
      EXPECT_EQ(sb.harmonic.cols(), betti[k]) << "k=" << k;
    }
    // Top degree: the kernel of delta d on n-forms is everything; Betti_n
    // counts the kernel of delta instead, which is the constants.
    EXPECT_EQ(betti[m->dimension()], 1);
  }
}

TEST(Spectral, ConstantOneFormsAreHarmonicOnTheTorus) {
  const auto m = torus(3, 3);
  const auto hs = hodge(m, 1);
  const auto& sp = hs->spaces();
  for (int axis = 0; axis < 3; ++axis) {
    Vector xi = Vector::Zero(m->count(1));
    for (const auto& cell : m->cells()) {
      int j = 0;
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) xi[cell.faces[1][j++]] = cell.positions(axis, b) - cell.positions(axis, a);
    }
    const auto parts = hs->decompose(Cochain(m, 1, xi));
    EXPECT_NEAR(sp.norm2(1, parts.harmonic.values - xi), 0.0, 1e-10);
    EXPECT_NEAR(sp.norm2(1, parts.coexact.values), 0.0, 1e-10);
  }
}

TEST(Spectral, BasesAreCompleteAndOrthonormal) {
  const auto m = torus(3, 3);
  const auto hs = hodge(m, 1);
  const auto& sp = hs->spaces();
  // dim W = #edges - rank d_0 and dim V = rank d_0 where rank d_0 = rank of the vertex-edge incidence.
  const Index r0 = detail::rank_mod_p(m->boundary(1));
  EXPECT_EQ(hs->w_dimension(), m->count(1) - r0);
  EXPECT_EQ(hs->v_dimension(), r0);
  const Matrix& b = hs->w_basis();
  const Matrix gram = b.transpose() * (sp.mass(1).matrix * b);
  EXPECT_LE((gram - Matrix::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff(), 1e-9);
  const Matrix cocl = Matrix(sp.derivative(0)).transpose() * (sp.mass(1).matrix * b);
  EXPECT_LE(cocl.cwiseAbs().maxCoeff(), 1e-9);
  // Eigen-equation residuals, recomputed densely.
  const Matrix k = Matrix(sp.derivative(1)).transpose() * Matrix(sp.mass(2).matrix) * Matrix(sp.derivative(1));
  const auto& spec = hs->w_spectrum();
  for (Index i = 0; i < spec.count(); ++i) {
    const Vector r = k * spec.eigenvectors.col(i) - spec.eigenvalues[i] * (sp.mass(1).matrix * spec.eigenvectors.col(i));
    EXPECT_LE(r.norm(), 1e-8 * std::max(1.0, spec.eigenvalues[i]));
  }
  // Exact basis columns d u_i have squared norms lambda_i^V.
  const Matrix& d = hs->exact_basis();
  for (Index i = 0; i < d.cols(); ++i)
    EXPECT_NEAR(sp.inner(1, d.col(i), d.col(i)), hs->v_spectrum().eigenvalues[i],
                1e-9 * hs->v_spectrum().eigenvalues[i]);
}

TEST(Spectral, HodgeDecompositionReconstructsAndIsOrthogonal) {
  std::mt19937_64 rng(2);
  for (const auto& [m, k] : {std::pair{torus(3, 3), 1}, {torus(3, 3), 2}, {sphere(1), 1}}) {
    const auto hs = hodge(m, k);
    const auto& sp = hs->spaces();
    const Cochain xi(m, k, gaussian(m->count(k), rng));
    const auto parts = hs->decompose(xi);
    const Vector sum = parts.exact.values + parts.coexact.values + parts.harmonic.values;
    EXPECT_LE(sp.norm2(k, sum - xi.values), 1e-10 * sp.norm2(k, xi.values));
    EXPECT_NEAR(sp.inner(k, parts.exact.values, parts.coexact.values), 0.0, 1e-10 * sp.norm2(k, xi.values));
    EXPECT_NEAR(sp.inner(k, parts.exact.values, parts.harmonic.values), 0.0, 1e-10 * sp.norm2(k, xi.values));
    // d(harmonic) = 0 and the exact part is closed.
    EXPECT_LE((sp.derivative(k) * parts.harmonic.values).norm(), 1e-9);
    EXPECT_LE((sp.derivative(k) * parts.exact.values).norm(), 1e-9);
    // W projection is idempotent.
    const Cochain w = hs->project_W(xi);
    EXPECT_LE(sp.norm2(k, hs->project_W(w).values - w.values), 1e-10 * sp.norm2(k, w.values));
  }
}

TEST(Spectral, PoincareConstantBoundsV) {
  std::mt19937_64 rng(9);
  const auto hs = hodge(torus(3, 3), 1);
  const auto& sp = hs->spaces();
  const double c = hs->poincare_constant_V();
  for (int t = 0; t < 20; ++t) {
    const Cochain a = hs->project_V(Cochain(hs->mesh(), 0, gaussian(hs->mesh()->count(0), rng)));
    const Vector da = sp.derivative(0) * a.values;
    EXPECT_LE(sp.norm2(0, a.values), c * sp.norm2(1, da) * (1.0 + 1e-10));
  }
}

TEST(Spectral, EmbeddingConstantDominatesProbes) {
  const auto hs = hodge(torus(3, 3), 1);
  const double s = default_sobolev_order(3, 3.0);
  EXPECT_NEAR(s, 0.6, 1e-15);
  const auto emb = estimate_embedding(*hs, 3.0, s, 16, 4);
  std::mt19937_64 rng(123);
  for (int t = 0; t < 10; ++t) {
    const Vector c = gaussian(hs->w_dimension(), rng);
    EXPECT_LE(embedding_ratio(*hs, c, 3.0, s), emb.constant);
  }
  // A harmonic constant form on a unit-volume torus has ratio exactly one.
  EXPECT_GE(emb.max_ratio, 1.0 - 1e-12);
  EXPECT_THROW(estimate_embedding(*hs, 7.0, s), ValidationError);
}

TEST(Spectral, RejectsBadDegree) {
  EXPECT_THROW(HodgeSpaces(forms(torus(2, 4)), 2), ValidationError);
  EXPECT_THROW(HodgeSpaces(forms(torus(2, 4)), 0), ValidationError);
}
