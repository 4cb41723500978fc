#pragma once

// The nonlinearity f(<xi, xi>): models, the functional F, the weak
// right-hand side, sampling-based hypothesis audits and the pointwise
// convexity inequality audit.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hodgemax/dec.hpp"
#include "hodgemax/error.hpp"
#include "hodgemax/spectral.hpp"

namespace hodgemax {

enum class ModelFamily { power_law, shifted_power, linear, custom };

inline std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::power_law: return "power_law";
    case ModelFamily::shifted_power: return "shifted_power";
    case ModelFamily::linear: return "linear";
    case ModelFamily::custom: return "custom";
  }
  return "unknown";
}

/// f with its first two derivatives, the growth exponent p and the mass:
/// `mass > 0` is the positive-mass case (f' >= mass), `mass == 0` zero mass.
struct NonlinearityModel {
  ModelFamily family = ModelFamily::custom;
  double p = 0.0;
  double mass = 0.0;
  double perturbation = 0.0;  // epsilon added by perturb(), if any
  std::function<double(double)> f, df, d2f;
  std::string name;

  [[nodiscard]] bool positive_mass() const { return mass > 0.0; }
};

/// f(t) = t^{p/2}; zero mass for p > 2.
inline NonlinearityModel power_law(double p) {
  if (p <= 2.0) throw ValidationError("power_law: p must exceed 2");
  NonlinearityModel m;
  m.family = ModelFamily::power_law;
  m.p = p;
  m.f = [p](double t) { return std::pow(t, p / 2.0); };
  m.df = [p](double t) { return (p / 2.0) * std::pow(t, p / 2.0 - 1.0); };
  m.d2f = [p](double t) {
    return t > 0.0 ? (p / 2.0) * (p / 2.0 - 1.0) * std::pow(t, p / 2.0 - 2.0)
                   : (p >= 4.0 ? (p == 4.0 ? 2.0 : 0.0) : std::numeric_limits<double>::infinity());
  };
  m.name = "t^" + std::to_string(p / 2.0);
  return m;
}

/// f(t) = eps t + t^{p/2}; positive mass eps.
inline NonlinearityModel shifted_power(double eps, double p) {
  if (eps <= 0.0) throw ValidationError("shifted_power: epsilon must be positive");
  NonlinearityModel m = power_law(p);
  m.family = ModelFamily::shifted_power;
  m.mass = eps;
  auto f = m.f, df = m.df;
  m.f = [f, eps](double t) { return eps * t + f(t); };
  m.df = [df, eps](double t) { return eps + df(t); };
  m.name = std::to_string(eps) + "t+" + m.name;
  return m;
}

/// f(t) = t; the linear oracle model.
inline NonlinearityModel linear_model() {
  NonlinearityModel m;
  m.family = ModelFamily::linear;
  m.p = 2.0;
  m.mass = 1.0;
  m.f = [](double t) { return t; };
  m.df = [](double) { return 1.0; };
  m.d2f = [](double) { return 0.0; };
  m.name = "t";
  return m;
}

inline NonlinearityModel custom_model(std::function<double(double)> f, std::function<double(double)> df,
                                      std::function<double(double)> d2f, double p, double mass,
                                      std::string name = "custom") {
  NonlinearityModel m;
  m.family = ModelFamily::custom;
  m.p = p;
  m.mass = mass;
  m.f = std::move(f);
  m.df = std::move(df);
  m.d2f = std::move(d2f);
  m.name = std::move(name);
  return m;
}

/// f_eps(t) = f(t) + eps t.
inline NonlinearityModel perturb(const NonlinearityModel& model, double eps) {
  if (!(eps > 0.0)) throw ValidationError("perturb: epsilon must be positive");
  NonlinearityModel m = model;
  auto f = model.f, df = model.df;
  m.f = [f, eps](double t) { return f(t) + eps * t; };
  m.df = [df, eps](double t) { return df(t) + eps; };
  m.mass = model.mass + eps;
  m.perturbation = model.perturbation + eps;
  m.name = model.name + "+" + std::to_string(eps) + "t";
  return m;
}

/// F(xi) = sum_T f(dens_T) vol_T.
inline double F_eval(const FormSpaces& spaces, const NonlinearityModel& model, int k, const Vector& xi) {
  const auto dens = spaces.density_values(k, xi);
  const auto& vol = spaces.mesh()->volumes(spaces.dimension());
  double sum = 0.0;
  for (std::size_t t = 0; t < dens.size(); ++t) sum += model.f(dens[t]) * vol[t];
  return sum;
}
inline double F_eval(const FormSpaces& spaces, const NonlinearityModel& model, const Cochain& xi) {
  return F_eval(spaces, model, xi.degree, xi.values);
}

/// Vector r(xi) with weak_rhs(xi, eta) = eta . r(xi) = sum_T g(dens_T) xi_T . G_T eta_T,
/// where g = f' - shift.
inline Vector weak_rhs_vector(const FormSpaces& spaces, const NonlinearityModel& model, int k, const Vector& xi,
                              double shift = 0.0) {
  const auto& cells = spaces.mesh()->cells();
  const auto& vol = spaces.mesh()->volumes(spaces.dimension());
  Vector out = Vector::Zero(xi.size());
  Vector local;
  for (std::size_t t = 0; t < cells.size(); ++t) {
    spaces.gather(k, t, xi, local);
    const Matrix& g = spaces.cell_gram(k, t);
    const Vector gx = g * local;
    const double dens = std::max(local.dot(gx), 0.0) / vol[t];
    const double w = model.df(dens) - shift;
    const auto& f = cells[t].faces[k];
    for (std::size_t j = 0; j < f.size(); ++j) out[f[j]] += w * gx[static_cast<Eigen::Index>(j)];
  }
  return out;
}

inline double weak_rhs(const FormSpaces& spaces, const NonlinearityModel& model, const Cochain& xi,
                       const Cochain& eta) {
  xi.check_compatible(eta);
  return eta.values.dot(weak_rhs_vector(spaces, model, xi.degree, xi.values));
}

/// Jacobian of r: sum_T f'(dens) G_T + (2 f''(dens) / vol_T) (G_T xi_T)(G_T xi_T)^T.
/// The second variation of F is twice this matrix.
inline SparseMatrix weak_rhs_jacobian(const FormSpaces& spaces, const NonlinearityModel& model, int k,
                                      const Vector& xi) {
  const auto& cells = spaces.mesh()->cells();
  const auto& vol = spaces.mesh()->volumes(spaces.dimension());
  std::vector<Eigen::Triplet<double>> trips;
  Vector local;
  for (std::size_t t = 0; t < cells.size(); ++t) {
    spaces.gather(k, t, xi, local);
    const Matrix& g = spaces.cell_gram(k, t);
    const Vector gx = g * local;
    const double dens = std::max(local.dot(gx), 0.0) / vol[t];
    Matrix block = model.df(dens) * g;
    if (dens > 0.0) block += (2.0 * model.d2f(dens) / vol[t]) * (gx * gx.transpose());
    const auto& f = cells[t].faces[k];
    for (std::size_t a = 0; a < f.size(); ++a)
      for (std::size_t b = 0; b < f.size(); ++b)
        trips.emplace_back(static_cast<int>(f[a]), static_cast<int>(f[b]),
                           block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
  }
  SparseMatrix out(xi.size(), xi.size());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

// ---------------------------------------------------------------------------
// Hypothesis audits

struct HypothesisCheck {
  std::string name;
  bool pass = false;
  double witness_t = 0.0;  // sample where the check is tightest or fails
  double value = 0.0;      // the tight quantity at the witness
  std::string detail;
};

struct HypothesisAuditReport {
  std::vector<HypothesisCheck> checks;
  double growth_a = 0.0, growth_b = 0.0;    // |f'(t)| <= a t^{p/2-1} + b
  double bound_a = 0.0, bound_b = 0.0;      // f(t) <= a t^{p/2} + b t (integrated growth bound)
  double coercive_c = 0.0, coercive_d = 0.0;  // c t^{p/2} <= f(t) + d
  double superlinear_R = 0.0;
  double convexity_cbar = 0.0;              // empirical constant of the pointwise convexity inequality
  bool window_checked = false;
  std::vector<std::string> warnings;

  [[nodiscard]] const HypothesisCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  [[nodiscard]] bool passed(const std::string& name) const {
    const auto* c = find(name);
    return c && c->pass;
  }
};

struct AuditOptions {
  double t_max = 1e4;
  Index samples = 100000;
  int mesh_dimension = 3;  // n, for the exponent window
  unsigned seed = 7;
  Index convexity_pairs = 20000;
  int convexity_dimension = 3;
};

namespace detail {

inline std::vector<double> log_samples(double t_min, double t_max, Index count) {
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(count) + 1);
  ts.push_back(0.0);
  const double a = std::log(t_min), b = std::log(t_max);
  for (Index i = 0; i < count; ++i) ts.push_back(std::exp(a + (b - a) * static_cast<double>(i) / (count - 1)));
  return ts;
}

}  // namespace detail

/// Check f1-f4 and the zero-mass variants on sampled t in [0, t_max].
inline HypothesisAuditReport audit_hypotheses(const NonlinearityModel& model, const AuditOptions& opt = {}) {
  HypothesisAuditReport rep;
  const double p = model.p;
  const double half = p / 2.0;
  const auto ts = detail::log_samples(1e-8, opt.t_max, std::max<Index>(opt.samples, 16));

  if (opt.mesh_dimension >= 3) {
    rep.window_checked = true;
    const bool ok = in_exponent_window(opt.mesh_dimension, p);
    rep.checks.push_back({"p_window", ok, 0.0, p, ok ? "" : "p outside ]2, 2n/(n-2)["});
  } else {
    rep.warnings.push_back("exponent window not checked for mesh dimension " + std::to_string(opt.mesh_dimension));
  }

  const double f0 = model.f(0.0);
  const double df0 = model.df(0.0);
  double min_df = std::numeric_limits<double>::infinity(), min_df_t = 0.0;
  for (double t : ts) {
    const double v = model.df(t);
    if (v < min_df) {
      min_df = v;
      min_df_t = t;
    }
  }
  rep.checks.push_back({"f1", std::abs(f0) <= 1e-14 && min_df > 0.0, min_df_t, min_df,
                        "f(0)=0 and inf f' = " + std::to_string(min_df)});
  rep.checks.push_back({"f1_zero_mass", std::abs(f0) <= 1e-14 && std::abs(df0) <= 1e-14 && min_df >= 0.0, 0.0, df0,
                        "f(0)=f'(0)=0 and f' >= 0"});

  // f2: f'' > 0 on samples and strict midpoint convexity on consecutive triples.
  bool convex = true;
  double worst = std::numeric_limits<double>::infinity(), worst_t = 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double c2 = model.d2f(ts[i]);
    if (!(c2 > 0.0)) {
      convex = false;
      worst = c2;
      worst_t = ts[i];
      break;
    }
    if (c2 < worst) {
      worst = c2;
      worst_t = ts[i];
    }
  }
  for (std::size_t i = 0; convex && i + 2 < ts.size(); i += 2) {
    const double a = ts[i], b = ts[i + 2];
    const double gap = 0.5 * (model.f(a) + model.f(b)) - model.f(0.5 * (a + b));
    if (!(gap > -1e-12 * std::max(1.0, std::abs(model.f(b))))) {
      convex = false;
      worst_t = 0.5 * (a + b);
      worst = gap;
    }
  }
  rep.checks.push_back({"f2", convex, worst_t, worst, "strict convexity (f'' > 0, midpoint test)"});

  // f3: a from the largest sample, then the smallest b making the bound hold.
  const double t_top = ts.back();
  const double t_mid = ts[ts.size() * 9 / 10];
  rep.growth_a = std::abs(model.df(t_top)) / std::pow(t_top, half - 1.0);
  const double ratio_mid = std::abs(model.df(t_mid)) / std::pow(t_mid, half - 1.0);
  double b = 0.0;
  for (double t : ts) b = std::max(b, std::abs(model.df(t)) - rep.growth_a * std::pow(t, half - 1.0));
  rep.growth_b = std::max(b, 0.0);
  const bool growth_ok = std::isfinite(rep.growth_a) && rep.growth_a > 0.0 && rep.growth_a <= ratio_mid * (1.0 + 1e-2);
  rep.checks.push_back({"f3", growth_ok, t_top, rep.growth_a,
                        "|f'| <= a t^{p/2-1} + b with a=" + std::to_string(rep.growth_a) +
                            ", b=" + std::to_string(rep.growth_b)});
  // Integrated form f(t) <= a' t^{p/2} + b t.
  rep.bound_a = model.f(t_top) / std::pow(t_top, half);
  double bb = 0.0;
  for (double t : ts)
    if (t > 0.0) bb = std::max(bb, (model.f(t) - rep.bound_a * std::pow(t, half)) / t);
  rep.bound_b = std::max(bb, 0.0);

  // f4: smallest sampled R beyond which (p/2) f(t) <= f'(t) t holds (and f > 0).
  double R = -1.0;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = ts.size(); i-- > 1;) {
    const double t = ts[i];
    const double lhs = half * model.f(t), rhs = model.df(t) * t;
    if (!(model.f(t) > 0.0) || lhs > rhs * (1.0 + 1e-12)) {
      R = t;
      break;
    }
    min_ratio = std::min(min_ratio, rhs / model.f(t));
  }
  if (R < 0.0) R = 0.0;
  rep.superlinear_R = R;
  const bool f4_ok = R < opt.t_max / 10.0;
  const double ratio_R = R > 0.0 && model.f(R) > 0.0 ? model.df(R) * R / model.f(R) : min_ratio;
  rep.checks.push_back({"f4", f4_ok, R, f4_ok ? min_ratio : ratio_R,
                        f4_ok ? "R=" + std::to_string(R) + ", min f't/f beyond R = " + std::to_string(min_ratio)
                              : "(p/2) f <= f't fails at t=" + std::to_string(R) + " where f't/f = " +
                                    std::to_string(ratio_R) + " < p/2"});

  // Coercive lower bound c t^{p/2} <= f(t) + d.
  rep.coercive_c = model.f(t_top) / std::pow(t_top, half);
  for (double t : ts)
    if (t >= t_mid) rep.coercive_c = std::min(rep.coercive_c, model.f(t) / std::pow(t, half));
  double d = 0.0;
  for (double t : ts) d = std::max(d, rep.coercive_c * std::pow(t, half) - model.f(t));
  rep.coercive_d = d;

  // Zero-mass convexity: f(|x|^2) - f(|y|^2) - 2 f'(|y|^2)(y, x-y) >= cbar |x-y|^p.
  {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    double inf_ratio = std::numeric_limits<double>::infinity();
    bool ok = true;
    double wt = 0.0;
    const int dim = std::max(1, opt.convexity_dimension);
    const double scale_cap = std::sqrt(opt.t_max);
    for (Index s = 0; s < opt.convexity_pairs; ++s) {
      Eigen::VectorXd x(dim), y(dim);
      for (int i = 0; i < dim; ++i) {
        x[i] = normal(rng);
        y[i] = normal(rng);
      }
      const double sc = std::exp(std::uniform_real_distribution<double>(-3.0, std::log(scale_cap / 4.0))(rng));
      x *= sc;
      y *= sc;
      const double diff = (x - y).norm();
      if (diff < 1e-12) continue;
      const double yy = y.squaredNorm();
      const double lhs = model.f(x.squaredNorm()) - model.f(yy) - 2.0 * model.df(yy) * y.dot(x - y);
      const double ratio = lhs / std::pow(diff, p);
      if (ratio < inf_ratio) {
        inf_ratio = ratio;
        wt = diff;
      }
      if (!(lhs > 0.0)) ok = false;
    }
    rep.convexity_cbar = inf_ratio;
    rep.checks.push_back({"f2_zero_mass", ok && inf_ratio > 0.0, wt, inf_ratio,
                          "empirical cbar = " + std::to_string(inf_ratio) +
                              " (per-cell density analogue of the pointwise condition)"});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Pointwise convexity inequality in a Hilbert space

struct InequalityAuditReport {
  Index sampled_pairs = 0;
  Index skipped_pairs = 0;
  double empirical_infimum = std::numeric_limits<double>::infinity();  // of LHS / |x-y|^p
  double grid_infimum = std::numeric_limits<double>::infinity();       // scalar inequality
  std::vector<std::string> violations;

  [[nodiscard]] bool pass() const { return empirical_infimum > 0.0 && grid_infimum > 0.0 && violations.empty(); }
};

/// |x|^p - |y|^p - p |y|^{p-2} (y, x-y); nan when x == y.
inline double convexity_defect(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double p) {
  const double ny = y.norm();
  return std::pow(x.norm(), p) - std::pow(ny, p) - p * std::pow(ny, p - 2.0) * y.dot(x - y);
}

/// Scalar version |a|^p - |b|^p - p |b|^{p-2} b (a - b).
inline double scalar_convexity_defect(double a, double b, double p) {
  return std::pow(std::abs(a), p) - std::pow(std::abs(b), p) - p * std::pow(std::abs(b), p - 2.0) * b * (a - b);
}

/// Sample random pairs (generic, collinear t >= 0, collinear t < 0,
/// orthogonal shifts) plus a deterministic scalar grid, and report the
/// infimum of LHS / |x - y|^p.
inline InequalityAuditReport audit_convexity_inequality(double p, int hilbert_dim, Index sample_count,
                                                       unsigned seed = 1) {
  if (!(p > 2.0)) throw ValidationError("audit_convexity_inequality: p must exceed 2");
  if (hilbert_dim < 1) throw ValidationError("audit_convexity_inequality: dimension must be >= 1");
  InequalityAuditReport rep;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto record = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double diff = (x - y).norm();
    if (diff <= 1e-12 * std::max(1.0, y.norm())) {
      ++rep.skipped_pairs;
      return;
    }
    const double lhs = convexity_defect(x, y, p);
    const double ratio = lhs / std::pow(diff, p);
    ++rep.sampled_pairs;
    rep.empirical_infimum = std::min(rep.empirical_infimum, ratio);
    if (!(lhs > 0.0) && rep.violations.size() < 16)
      rep.violations.push_back("non-positive defect " + std::to_string(lhs) + " at |x-y| = " + std::to_string(diff));
  };

  auto gaussian = [&]() {
    Eigen::VectorXd v(hilbert_dim);
    for (int i = 0; i < hilbert_dim; ++i) v[i] = normal(rng);
    return v;
  };

  for (Index s = 0; s < sample_count; ++s) {
    Eigen::VectorXd y = gaussian();
    Eigen::VectorXd x;
    switch (s % 4) {
      case 0: x = gaussian(); break;                          // generic pair
      case 1: x = (4.0 * unif(rng)) * y; break;               // x = t y, t >= 0
      case 2: x = (-4.0 * unif(rng) - 1e-3) * y; break;       // x = t y, t < 0
      default: {                                               // x = t y + orthogonal shift
        Eigen::VectorXd z = gaussian();
        z -= (z.dot(y) / y.squaredNorm()) * y;  // vanishes in dimension 1
        x = (8.0 * unif(rng) - 4.0) * y + (3.0 * unif(rng)) * z;
        break;
      }
    }
    record(x, y);
  }

  // Deterministic scalar grid, b = 1 by homogeneity, plus b = 0.
  for (int i = 0; i <= 4000; ++i) {
    const double a = -20.0 + 40.0 * i / 4000.0;
    for (double b : {1.0, 0.0}) {
      if (std::abs(a - b) < 1e-9) continue;
      const double lhs = scalar_convexity_defect(a, b, p);
      const double ratio = lhs / std::pow(std::abs(a - b), p);
      rep.grid_infimum = std::min(rep.grid_infimum, ratio);
      if (!(lhs > 0.0) && rep.violations.size() < 16)
        rep.violations.push_back("scalar grid violation at a=" + std::to_string(a) + ", b=" + std::to_string(b));
    }
  }
  return rep;
}

}  // namespace hodgemax
