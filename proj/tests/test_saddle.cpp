#include <gtest/gtest.h>

#include "common.hpp"

using namespace hodgemax;
using namespace testing_support;

namespace {

struct Setup {
  std::shared_ptr<const HodgeSpaces> hs;
  NonlinearityModel model = shifted_power(1.0, 3.0);
  GrowthConstants gc;
  EmbeddingEstimate emb;
  std::unique_ptr<ReducedFunctional> J;
};

Setup& setup() {
  static Setup s = [] {
    Setup x;
    x.hs = hodge(torus(3, 3), 1);
    AuditOptions o;
    o.samples = 20000;
    x.gc = GrowthConstants::from_audit(audit_hypotheses(x.model, o), 3.0);
    x.emb = estimate_embedding(*x.hs, 3.0, default_sobolev_order(3, 3.0), 32, 1);
    x.J = std::make_unique<ReducedFunctional>(x.hs, x.model);
    return x;
  }();
  return s;
}

double frame_bound(const Setup& s, double rho) {
  const double mu = std::pow(rho, 2.0 / (1.0 - s.emb.s));
  double lk = std::numeric_limits<double>::infinity();
  const Vector& lam = s.hs->w_spectrum().eigenvalues;
  for (Index i = 0; i < lam.size(); ++i)
    if (lam[i] > mu) lk = std::min(lk, lam[i]);
  const double K = std::pow(lk, s.emb.s) / (std::pow(lk, s.emb.s) + 1.0);
  const double q = s.emb.constant / K;
  return rho * rho - s.gc.a * std::pow(q, 1.5) - s.gc.b * q;  // unit volume, so b' = b
}

}  // namespace

TEST(Frames, RadiusIsTheSmallestGridPointReachingTheLevel) {
  auto& s = setup();
  for (double level : {0.01, 2.0, 6.0}) {
    const auto fr = build_linking_frame(*s.hs, s.emb, s.gc, level);
    EXPECT_TRUE(fr.identity_holds());
    EXPECT_NEAR(fr.geometric_level, frame_bound(s, fr.rho), 1e-9 * std::abs(fr.geometric_level) + 1e-12);
    EXPECT_GE(fr.geometric_level, level);
    if (fr.rho > 0.1 * 1.0001) EXPECT_LT(frame_bound(s, fr.rho / 1.005), level);
    EXPECT_EQ(fr.minus_indices.size() + fr.plus_indices.size(), static_cast<std::size_t>(s.hs->w_dimension()));
    for (Index i : fr.plus_indices) EXPECT_GT(s.hs->w_eigenvalues()[i], fr.mu);
    for (Index i : fr.cluster_indices) EXPECT_NEAR(s.hs->w_eigenvalues()[i], fr.lambda_k, 1e-6 * fr.lambda_k);
    EXPECT_NEAR(fr.mu, std::pow(fr.rho, 2.0 / (1.0 - fr.s)), 1e-12 * fr.mu);
  }
  EXPECT_THROW(build_linking_frame(*s.hs, s.emb, s.gc, 1e12), ValidationError);
}

TEST(Frames, UpperBandEdgeMatchesScalarMaximization) {
  auto& s = setup();
  auto fr = build_linking_frame(*s.hs, s.emb, s.gc, 0.01);
  compute_bands(*s.J, fr, s.gc);
  double best = -1e300;
  for (int i = 1; i <= 400000; ++i) {
    const double t = 1e-4 * i;
    best = std::max(best, fr.lambda_k * t * t - s.gc.c * std::pow(t, 3.0));
  }
  EXPECT_NEAR(fr.band_high, best + s.gc.d, 1e-6 * fr.band_high);
  EXPECT_GE(fr.band_low, fr.geometric_level);
  EXPECT_GE(fr.band_low, fr.sup_L);
  // L holds only harmonic forms here, where J is -F and never positive.
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    Vector b = Vector::Zero(s.J->dimension());
    for (Index i : fr.minus_indices) b[i] = gaussian(1, rng)[0] * 3.0;
    EXPECT_LE(s.J->value(b), fr.sup_L + 1e-12);
  }
}

TEST(Search, FindsSeparatedPairedCriticalPoints) {
  auto& s = setup();
  auto frames = plan_frames(*s.J, s.emb, s.gc, 0.01, 2, 0.05);
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_GE(frames[1].band_low, frames[0].band_high * 1.05);
  const auto res = collect_multiple(*s.J, frames, s.gc, SaddleConfig{});
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_FALSE(res.under_delivered());

  // Oracle: rebuild the discretization from scratch and re-evaluate the
  // residual of the full equation with raw matrices.
  const auto mesh = std::make_shared<const SimplicialComplex>(build_flat_torus(3, 3));
  const FormSpaces fresh(mesh);
  const auto& model = s.model;
  for (const auto& rec : res.records) {
    const Vector& xi = rec.xi;
    const Vector lhs = fresh.derivative(1).transpose() * (fresh.mass(2).matrix * (fresh.derivative(1) * xi));
    Vector rhs = Vector::Zero(xi.size());
    const auto& vol = mesh->volumes(3);
    for (std::size_t t = 0; t < mesh->cells().size(); ++t) {
      const auto& f = mesh->cells()[t].faces[1];
      Vector loc(6);
      for (int j = 0; j < 6; ++j) loc[j] = xi[f[j]];
      const Matrix g = whitney_gram(mesh->cells()[t].positions, 1);
      const Vector gx = g * loc;
      const double w = model.df(loc.dot(gx) / vol[t]);
      for (int j = 0; j < 6; ++j) rhs[f[j]] += w * gx[j];
    }
    const double res_oracle = (lhs - rhs).cwiseAbs().maxCoeff() / (lhs.cwiseAbs() + rhs.cwiseAbs()).maxCoeff();
    EXPECT_LE(res_oracle, 1e-7);
    EXPECT_LE(rec.weak_residual, 1e-7);
    EXPECT_TRUE(rec.in_band);
    EXPECT_TRUE(rec.paired);
    EXPECT_NEAR(rec.negative_value, rec.value, 1e-10 * rec.value);
    EXPECT_GT(rec.value, 0.0);
    // A min-max point has directions of both signs in the Hessian.
    const auto ev = s.J->evaluate(rec.coords);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.J->hessian(ev));
    EXPECT_LT(es.eigenvalues().minCoeff(), 0.0);
    EXPECT_GT(es.eigenvalues().maxCoeff(), 0.0);
  }
  const double a = res.records[0].value, b = res.records[1].value;
  EXPECT_GE(std::abs(b - a) / std::max(a, b), 0.1);
}

TEST(Search, RequiresBands) {
  auto& s = setup();
  const auto fr = build_linking_frame(*s.hs, s.emb, s.gc, 0.01);
  EXPECT_THROW(find_critical_point(*s.J, fr, SaddleConfig{}), ValidationError);
  std::vector<LinkingFrame> none;
  EXPECT_THROW(collect_multiple(*s.J, none, s.gc, SaddleConfig{}), ValidationError);
}
