#include <gtest/gtest.h>

#include <sstream>

#include "common.hpp"

using namespace hodgemax;
using namespace testing_support;

namespace {

// Number of surjections from an n-set onto an m-set, by inclusion-exclusion.
long surjections(int n, int m) {
  if (m < 0) return 0;
  if (m == 0) return n == 0 ? 1 : 0;
  long total = 0;
  long binom = 1;
  for (int j = 0; j <= m; ++j) {
    long pw = 1;
    for (int i = 0; i < n; ++i) pw *= (m - j);
    total += (j % 2 ? -1 : 1) * binom * pw;
    binom = binom * (m - j) / (j + 1);
  }
  return total;
}

// Kuhn triangulation of the periodic lattice: k-simplices at a base vertex
// are strict chains of nonempty coordinate subsets of length k.
long kuhn_count(int n, int res, int k) {
  long cells = 1;
  for (int i = 0; i < n; ++i) cells *= res;
  return cells * (k == 0 ? 1 : surjections(n, k) + surjections(n, k + 1));
}

}  // namespace

TEST(Mesh, TorusCountsMatchKuhnFormula) {
  for (auto [n, res] : {std::pair{2, 4}, {2, 8}, {3, 2}, {3, 4}}) {
    const auto m = torus(n, res);
    ASSERT_EQ(m->dimension(), n);
    for (int k = 0; k <= n; ++k) EXPECT_EQ(m->count(k), kuhn_count(n, res, k)) << "n=" << n << " k=" << k;
    EXPECT_EQ(m->euler_characteristic(), 0);
    EXPECT_NEAR(m->total_volume(), 1.0, 1e-13);
  }
  EXPECT_EQ(torus(2, 4)->count(1), 48);
  EXPECT_EQ(torus(3, 2)->count(1), 56);
}

TEST(Mesh, IcosphereCountsAndEmbedding) {
  for (int s = 0; s <= 2; ++s) {
    const auto m = sphere(s);
    long f = 20;
    for (int i = 0; i < s; ++i) f *= 4;
    EXPECT_EQ(m->count(2), f);
    EXPECT_EQ(m->count(1), 3 * f / 2);
    EXPECT_EQ(m->count(0), f / 2 + 2);
    EXPECT_EQ(m->euler_characteristic(), 2);
    const auto& xyz = m->vertex_coordinates();
    for (Eigen::Index v = 0; v < xyz.cols(); ++v) EXPECT_NEAR(xyz.col(v).norm(), 1.0, 1e-12);
    EXPECT_LT(m->total_volume(), 4.0 * M_PI);
  }
}

TEST(Mesh, BoundaryOfBoundaryVanishesExactly) {
  std::vector<std::shared_ptr<const SimplicialComplex>> meshes = {torus(2, 4), torus(2, 8), torus(3, 2),
                                                                 torus(3, 4), sphere(0), sphere(1), sphere(2)};
  for (const auto& m : meshes)
    for (int k = 2; k <= m->dimension(); ++k) {
      const IntSparse dd = m->boundary(k - 1) * m->boundary(k);
      for (int c = 0; c < dd.outerSize(); ++c)
        for (IntSparse::InnerIterator it(dd, c); it; ++it) EXPECT_EQ(it.value(), 0);
    }
}

TEST(Mesh, BettiNumbers) {
  EXPECT_EQ(torus(2, 4)->betti_numbers(), (std::vector<Index>{1, 2, 1}));
  EXPECT_EQ(torus(2, 8)->betti_numbers(), (std::vector<Index>{1, 2, 1}));
  EXPECT_EQ(torus(3, 2)->betti_numbers(), (std::vector<Index>{1, 3, 3, 1}));
  EXPECT_EQ(torus(3, 4)->betti_numbers(), (std::vector<Index>{1, 3, 3, 1}));
  for (int s = 0; s <= 2; ++s) EXPECT_EQ(sphere(s)->betti_numbers(), (std::vector<Index>{1, 0, 1}));
}

TEST(Mesh, ModularRankAgreesWithFloatingRank) {
  // Oracle: rank of the dense real matrix by full-pivot LU.
  for (int k = 1; k <= 2; ++k) {
    const IntSparse& b = torus(2, 4)->boundary(k);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(b.cast<double>());
    Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
    EXPECT_EQ(detail::rank_mod_p(b), lu.rank());
  }
}

TEST(Mesh, ParsesTetrahedronBoundary) {
  std::istringstream in(R"(# surface of a tetrahedron
vertices 4 3
0 0 0 0
1 1 0 0
2 0 1 0
3 0 0 1
cells 4 3
0 2 1
0 1 3
0 3 2
1 2 3
)");
  const SimplicialComplex c = parse_mesh(in);
  EXPECT_EQ(c.count(0), 4);
  EXPECT_EQ(c.count(1), 6);
  EXPECT_EQ(c.count(2), 4);
  EXPECT_EQ(c.betti_numbers(), (std::vector<Index>{1, 0, 1}));
  // Areas: three right triangles of area 1/2 and one equilateral of side sqrt 2.
  EXPECT_NEAR(c.total_volume(), 1.5 + std::sqrt(3.0) / 2.0, 1e-14);
}

TEST(Mesh, RejectsMalformedInput) {
  std::istringstream open_surface("vertices 3 2\n0 0 0\n1 1 0\n2 0 1\ncells 1 3\n0 1 2\n");
  EXPECT_THROW(parse_mesh(open_surface), ValidationError);
  std::istringstream bad_section("triangles 1 3\n");
  EXPECT_THROW(parse_mesh(bad_section), ValidationError);
  std::istringstream short_vertex("vertices 2 3\n0 0 0\n1 1\ncells 1 3\n0 1 0\n");
  EXPECT_THROW(parse_mesh(short_vertex), ValidationError);
  EXPECT_THROW(build_flat_torus(3, 1), ValidationError);
  EXPECT_THROW((void)torus(2, 4)->boundary(3), ValidationError);
}

TEST(Mesh, WriteThenParseRoundTrip) {
  const auto m = torus(3, 3);
  std::stringstream buf;
  write_mesh(buf, *m);
  const SimplicialComplex back = parse_mesh(buf);
  for (int k = 0; k <= 3; ++k) EXPECT_EQ(back.count(k), m->count(k));
  EXPECT_EQ(back.betti_numbers(), m->betti_numbers());
  EXPECT_NEAR(back.total_volume(), m->total_volume(), 1e-13);
}

TEST(Mesh, HashIsStableAndDiscriminating) {
  EXPECT_EQ(build_flat_torus(2, 4).hash(), build_flat_torus(2, 4).hash());
  EXPECT_NE(build_flat_torus(2, 4).hash(), build_flat_torus(2, 5).hash());
  EXPECT_EQ(torus(2, 4)->hash().size(), 16u);
}
