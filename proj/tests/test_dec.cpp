#include <gtest/gtest.h>

#include <sstream>

#include "common.hpp"

using namespace hodgemax;
using namespace testing_support;

namespace {

// Whitney basis forms evaluated at barycentric point `lam` of a tetrahedron,
// written as vectors through the Euclidean identification of 1- and 2-forms.
struct WhitneyOracle {
  Eigen::Matrix3d grads_tail;  // columns: grad lambda_1..3
  Eigen::Vector3d grad[4];
  double vol = 0.0;

  explicit WhitneyOracle(const Eigen::Matrix<double, 3, 4>& p) {
    Eigen::Matrix3d a;
    for (int j = 0; j < 3; ++j) a.col(j) = p.col(j + 1) - p.col(0);
    const Eigen::Matrix3d inv_t = a.inverse().transpose();
    grad[0] = Eigen::Vector3d::Zero();
    for (int j = 1; j <= 3; ++j) {
      grad[j] = inv_t.col(j - 1);
      grad[0] -= grad[j];
    }
    vol = std::abs(a.determinant()) / 6.0;
  }

  std::vector<Eigen::Vector3d> forms(int k, const Eigen::Vector4d& lam) const {
    std::vector<Eigen::Vector3d> out;
    if (k == 1) {
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) out.push_back(lam[i] * grad[j] - lam[j] * grad[i]);
    } else if (k == 2) {
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
          for (int l = j + 1; l < 4; ++l)
            out.push_back(2.0 * (lam[i] * grad[j].cross(grad[l]) - lam[j] * grad[i].cross(grad[l]) +
                                 lam[l] * grad[i].cross(grad[j])));
    }
    return out;
  }

  // Exact for quadratic integrands: the symmetric four-point rule.
  Matrix gram(int k) const {
    const double a = 0.5854101966249685, b = 0.1381966011250105;
    Matrix g;
    for (int q = 0; q < 4; ++q) {
      Eigen::Vector4d lam = Eigen::Vector4d::Constant(b);
      lam[q] = a;
      if (k == 0) {
        const Matrix m = lam * lam.transpose();
        g = q == 0 ? m : Matrix(g + m);
        continue;
      }
      const auto f = forms(k, lam);
      Matrix m(f.size(), f.size());
      for (std::size_t r = 0; r < f.size(); ++r)
        for (std::size_t c = 0; c < f.size(); ++c) m(r, c) = f[r].dot(f[c]);
      g = q == 0 ? m : Matrix(g + m);
    }
    return g * (vol / 4.0);
  }
};

}  // namespace

TEST(Whitney, GramMatchesQuadratureOnSkewTetrahedron) {
  Eigen::Matrix<double, 3, 4> p;
  p << 0.1, 1.3, 0.2, 0.4,  //
      -0.2, 0.1, 0.9, 0.3,  //
      0.0, 0.2, -0.1, 1.1;
  const WhitneyOracle oracle(p);
  for (int k = 0; k <= 2; ++k) {
    const Matrix ours = whitney_gram(p, k);
    const Matrix ref = oracle.gram(k);
    EXPECT_LE((ours - ref).cwiseAbs().maxCoeff(), 1e-12 * ref.cwiseAbs().maxCoeff()) << "k=" << k;
  }
  const Matrix top = whitney_gram(p, 3);
  ASSERT_EQ(top.rows(), 1);
  EXPECT_NEAR(top(0, 0), 1.0 / oracle.vol, 1e-12 / oracle.vol);
}

TEST(Whitney, TriangleScalarMassIsClassicalP1) {
  Eigen::Matrix<double, 2, 3> p;
  p << 0.0, 2.0, 0.5, 0.0, 0.0, 1.5;
  const double area = 1.5;
  const Matrix g = whitney_gram(p, 0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(g(i, j), area / 12.0 * (i == j ? 2.0 : 1.0), 1e-15);
}

TEST(Dec, ConstantFormsHaveUnitDensity) {
  // A constant k-form sampled by integration over simplices is reproduced
  // exactly by Whitney forms, so its density is |c|^2 on every cell.
  const auto m = torus(3, 3);
  const auto sp = forms(m);
  const Eigen::Vector3d c(0.3, -1.2, 0.7);
  Vector xi1 = Vector::Zero(m->count(1)), xi2 = Vector::Zero(m->count(2));
  for (const auto& cell : m->cells()) {
    const auto& p = cell.positions;
    int j = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) xi1[cell.faces[1][j++]] = c.dot(p.col(b) - p.col(a));
    j = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        for (int e = b + 1; e < 4; ++e) {
          const Eigen::Vector3d u = p.col(b) - p.col(a), v = p.col(e) - p.col(a);
          xi2[cell.faces[2][j++]] = 0.5 * c.dot(u.cross(v));
        }
  }
  for (const Vector* xi : {&xi1, &xi2}) {
    const int k = xi == &xi1 ? 1 : 2;
    for (double d : sp->density_values(k, *xi)) EXPECT_NEAR(d, c.squaredNorm(), 1e-12);
    EXPECT_NEAR(sp->lp_norm(Cochain(m, k, *xi), 3.0), c.norm(), 1e-12);
    EXPECT_LE((sp->derivative(k) * *xi).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Dec, ScalarMassIntegratesToVolume) {
  for (const auto& m : {torus(2, 8), sphere(2), torus(3, 2)}) {
    const auto sp = forms(m);
    const Vector one = Vector::Ones(m->count(0));
    EXPECT_NEAR(sp->inner(0, one, one), m->total_volume(), 1e-12);
  }
}

TEST(Dec, CodifferentialMatchesDenseOracleAndSquaresToZero) {
  std::mt19937_64 rng(11);
  for (const auto& m : {torus(2, 4), torus(2, 8), torus(3, 2), torus(3, 4), sphere(0), sphere(1), sphere(2)}) {
    const auto sp = forms(m);
    const int n = m->dimension();
    for (int k = 1; k <= n; ++k) {
      const Vector x = gaussian(m->count(k), rng);
      const Cochain dx = sp->codifferential(Cochain(m, k, x));
      const Matrix mk = Matrix(sp->mass(k).matrix), mk1 = Matrix(sp->mass(k - 1).matrix);
      const Vector ref = mk1.ldlt().solve(Matrix(sp->derivative(k - 1)).transpose() * (mk * x));
      EXPECT_LE((dx.values - ref).norm(), 1e-10 * ref.norm());
      if (k >= 2) {
        const Cochain ddx = sp->codifferential(dx);
        EXPECT_LE(ddx.values.cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, x.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST(Dec, DerivativeAndCodifferentialAreAdjoint) {
  std::mt19937_64 rng(5);
  for (const auto& m : {torus(2, 4), torus(3, 2), sphere(1)}) {
    const auto sp = forms(m);
    for (int k = 0; k < m->dimension(); ++k)
      for (int trial = 0; trial < 100; ++trial) {
        const Cochain a(m, k, gaussian(m->count(k), rng));
        const Cochain x(m, k + 1, gaussian(m->count(k + 1), rng));
        const double lhs = sp->l2_inner(sp->exterior_derivative(a), x);
        const double rhs = sp->l2_inner(a, sp->codifferential(x));
        const double scale = sp->norm2(k + 1, sp->exterior_derivative(a).values) * sp->norm2(k + 1, x.values);
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(scale, 1e-300));
      }
  }
}

TEST(Dec, CochainFilesRoundTripAndCheckMesh) {
  const auto m = torus(2, 4);
  std::mt19937_64 rng(3);
  const Cochain c(m, 1, gaussian(m->count(1), rng));
  std::stringstream buf;
  write_cochain(buf, c);
  const std::string text = buf.str();
  std::istringstream in(text);
  const Cochain back = read_cochain(in, m);
  EXPECT_EQ(back.degree, 1);
  EXPECT_EQ((back.values - c.values).cwiseAbs().maxCoeff(), 0.0);
  std::istringstream other(text);
  EXPECT_THROW(read_cochain(other, torus(2, 8)), ValidationError);
  EXPECT_THROW(Cochain(m, 1, Vector::Zero(3)), ValidationError);
}
