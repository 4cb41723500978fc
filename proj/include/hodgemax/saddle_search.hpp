#pragma once

// Linking frames H+(mu) / H-(mu) and a local min-max search for critical
// points of the reduced functional: minimize over directions v in H+ the
// maximum of J^ over the half-space {t v + l : t > 0, l in L}, where L holds
// the harmonic forms and the modes with eigenvalue <= mu. A Newton
// iteration on the full gradient finishes the search.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hodgemax/reduced_functional.hpp"

namespace hodgemax {

/// Constants of the model used by the frame bounds:
/// f(t) <= a t^{p/2} + b t and c t^{p/2} <= f(t) + d.
struct GrowthConstants {
  double p = 0.0;
  double a = 0.0, b = 0.0;
  double c = 0.0, d = 0.0;

  static GrowthConstants from_audit(const HypothesisAuditReport& rep, double p) {
    return {p, rep.bound_a, rep.bound_b, rep.coercive_c, rep.coercive_d};
  }
};

struct LinkingFrame {
  double target_level = 0.0;  // C
  double rho = 0.0;
  double mu = 0.0;
  double s = 0.0;
  double K = 0.0;             // min over lambda > mu of lambda^s / (lambda^s + 1)
  double geometric_level = 0.0;  // lower bound on the sphere |d beta| = rho in H+
  double lambda_k = 0.0;
  std::vector<Index> minus_indices;   // W columns spanning L (harmonics and lambda <= mu)
  std::vector<Index> plus_indices;    // W columns with lambda > mu
  std::vector<Index> cluster_indices; // columns of the eigenspace of lambda_k
  Index dim_minus = 0;   // dim H-(mu) = |L| + dim M_{lambda_k}
  Index codim_plus = 0;  // |L|
  double sup_L = 0.0;    // largest value of J^ found on L
  double band_low = 0.0;
  double band_high = 0.0;
  bool bands_computed = false;

  [[nodiscard]] bool identity_holds() const {
    return dim_minus == codim_plus + static_cast<Index>(cluster_indices.size());
  }
  [[nodiscard]] bool in_band(double value) const { return value >= band_low && value <= band_high; }
};

namespace detail {

inline double frame_K(const Vector& lam, double mu, double s, double& lambda_k) {
  lambda_k = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < lam.size(); ++i)
    if (lam[i] > mu) lambda_k = std::min(lambda_k, lam[i]);
  if (!std::isfinite(lambda_k)) return 0.0;
  const double ls = std::pow(lambda_k, s);
  return ls / (ls + 1.0);
}

}  // namespace detail

/// Smallest grid radius rho (grid rho_j = rho_min * growth^j) whose
/// geometric bound rho^2 - a (c~/K)^{p/2} - b' c~/K reaches `level`, with
/// mu = rho^{2/(1-s)} and b' = b |M|^{1-2/p}. Eigenvalue bookkeeping uses the
/// complete W spectrum of `hs`.
inline LinkingFrame build_linking_frame(const HodgeSpaces& hs, const EmbeddingEstimate& emb,
                                        const GrowthConstants& gc, double level, double rho_min = 0.1,
                                        double growth = 1.005) {
  if (!(emb.s > 0.0 && emb.s < 1.0)) throw ValidationError("build_linking_frame: s must lie in (0, 1)");
  if (!(growth > 1.0) || !(rho_min > 0.0)) throw ValidationError("build_linking_frame: bad radius grid");
  const Vector& lam = hs.w_spectrum().eigenvalues;
  const double lam_max = lam.size() ? lam.maxCoeff() : 0.0;
  const double p = gc.p;
  const double bprime = gc.b * std::pow(hs.mesh()->total_volume(), 1.0 - 2.0 / p);
  const double exponent = 2.0 / (1.0 - emb.s);
  LinkingFrame fr;
  fr.target_level = level;
  fr.s = emb.s;
  for (double rho = rho_min;; rho *= growth) {
    const double mu = std::pow(rho, exponent);
    if (mu >= lam_max)
      throw ValidationError("build_linking_frame: spectrum exhausted before reaching level " + std::to_string(level) +
                            " (mu " + std::to_string(mu) + " >= largest eigenvalue " + std::to_string(lam_max) + ")");
    double lk = 0.0;
    const double K = detail::frame_K(lam, mu, emb.s, lk);
    const double q = emb.constant / K;
    const double bound = rho * rho - gc.a * std::pow(q, p / 2.0) - bprime * q;
    if (bound >= level) {
      fr.rho = rho;
      fr.mu = mu;
      fr.K = K;
      fr.geometric_level = bound;
      fr.lambda_k = lk;
      break;
    }
  }
  const Vector& wl = hs.w_eigenvalues();
  const Index coexact = hs.w_spectrum().count();
  for (Index i = 0; i < hs.w_dimension(); ++i) {
    if (i >= coexact || wl[i] <= fr.mu)
      fr.minus_indices.push_back(i);
    else
      fr.plus_indices.push_back(i);
    if (i < coexact && std::abs(wl[i] - fr.lambda_k) <= 1e-6 * fr.lambda_k) fr.cluster_indices.push_back(i);
  }
  fr.codim_plus = static_cast<Index>(fr.minus_indices.size());
  fr.dim_minus = fr.codim_plus + static_cast<Index>(fr.cluster_indices.size());
  return fr;
}

struct SaddleConfig {
  // Local min-max stage.
  int max_descent_steps = 100;
  double descent_tolerance = 1e-4;   // relative H^{-1} gradient size that hands over to Newton
  int max_fiber_steps = 80;
  double fiber_tolerance = 1e-10;    // relative gradient on the fiber
  std::size_t stall_window = 5;      // descent stops when the level drops by less than
  double stall_decrease = 1e-5;      // this fraction over that many steps
  // Newton stage.
  int max_newton_steps = 40;
  double gradient_tolerance = 1e-11; // relative to the size of the quadratic part
  double pseudo_inverse_cutoff = 1e-10;
  // Acceptance.
  double residual_accept = 1e-8;
  double distinct_threshold = 1e-3;
  int max_seeds = 8;
  int points_per_frame = 1;
};

struct SearchDiagnostics {
  std::vector<double> values;          // min-max level along the descent
  std::vector<double> gradient_norms;  // descent gradient size, then Newton gradient norms
  int descent_steps = 0;
  int newton_steps = 0;
  int fiber_evaluations = 0;
};

struct CriticalPointRecord {
  Cochain beta;
  Vector coords;
  Vector xi;                  // beta + d Phi(beta)
  double value = 0.0;
  double gradient_norm = 0.0;
  double weak_residual = 0.0;
  int band = 0;
  double band_low = 0.0, band_high = 0.0;
  bool in_band = false;
  bool paired = false;        // -beta verified as a critical point with the same value
  double negative_value = 0.0;
  double negative_residual = 0.0;
  std::string provenance = "direct";
  int seed = -1;              // W column of the seed direction
  int seed_sign = 1;
  int iterations = 0;
  SearchDiagnostics diagnostics;
};

namespace detail {

inline double h1_weight(const HodgeSpaces& hs, Index i) { return 1.0 + hs.w_eigenvalues()[i]; }

/// Maximum of J^ along the ray t -> t u, t > 0 (bracketing then bisection
/// on the sign of the derivative). Returns t = 0 when the ray decreases.
inline double ray_maximizer(const ReducedFunctional& J, const Vector& u, int& evals) {
  auto slope = [&](double t) {
    ++evals;
    return J.evaluate(t * u).gradient.dot(u);
  };
  double lo = 0.0, hi = 1e-3;
  if (slope(hi) <= 0.0) return 0.0;
  while (slope(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) throw SolverError("ray maximization: functional unbounded above along a ray");
  }
  for (int i = 0; i < 60 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Levenberg-Marquardt ascent of J^ over y -> S y (S has the fiber basis
/// as columns). Returns the maximizing coordinates and the evaluation.
inline ReducedEvaluation ascend(const ReducedFunctional& J, const Matrix& s, Vector& y, const Vector& weights,
                                int max_steps, double tol, int& evals) {
  ReducedEvaluation ev = J.evaluate(s * y);
  ++evals;
  double nu = 1e-3;
  for (int it = 0; it < max_steps; ++it) {
    const Vector g = s.transpose() * ev.gradient;
    const double scale = std::max(1.0, (s.transpose() * ev.l_part).norm());
    if (g.norm() <= tol * scale) break;
    const Matrix h = J.hessian(ev, {}, &s);
    bool accepted = false;
    for (int trial = 0; trial < 40; ++trial) {
      // Solve (-H + nu W) dy = g on the fiber; the shifted matrix must be positive definite.
      Matrix a = -h;
      const double shift = nu * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
      for (Index i = 0; i < a.rows(); ++i) a(i, i) += shift * weights[i];
      Eigen::LLT<Matrix> llt(a);
      if (llt.info() != Eigen::Success) {
        nu *= 10.0;
        continue;
      }
      const Vector dy = llt.solve(g);
      const Vector ytry = y + dy;
      ReducedEvaluation et = J.evaluate(s * ytry);
      ++evals;
      if (et.value >= ev.value - 1e-14 * std::abs(ev.value)) {
        y = ytry;
        ev = std::move(et);
        nu = std::max(nu / 10.0, 1e-12);
        accepted = true;
        break;
      }
      nu *= 10.0;
    }
    if (!accepted) break;
  }
  return ev;
}

inline double weighted_dot(const Vector& a, const Vector& b, const Vector& w) { return (a.cwiseProduct(w)).dot(b); }

}  // namespace detail

/// Largest value of J^ found on L: zero (beta = 0) or the best local maximum
/// reached from each ray through an L basis vector. Any value attained on L is
/// a lower bound for the min-max level since every fiber contains L.
inline double sup_on_L(const ReducedFunctional& J, const LinkingFrame& fr, const SaddleConfig& cfg = {}) {
  const auto& hs = J.spaces();
  const Index w = hs.w_dimension();
  const auto m = static_cast<Index>(fr.minus_indices.size());
  Matrix s = Matrix::Zero(w, m);
  Vector weights(m);
  for (Index j = 0; j < m; ++j) {
    s(fr.minus_indices[static_cast<std::size_t>(j)], j) = 1.0;
    weights[j] = detail::h1_weight(hs, fr.minus_indices[static_cast<std::size_t>(j)]);
  }
  double best = 0.0;
  int evals = 0;
  for (Index j = 0; j < m; ++j) {
    const Vector u = s.col(j);
    const double t = detail::ray_maximizer(J, u, evals);
    if (t <= 0.0) continue;
    Vector y = Vector::Zero(m);
    y[j] = t;
    const auto ev = detail::ascend(J, s, y, weights, cfg.max_fiber_steps, cfg.fiber_tolerance, evals);
    best = std::max(best, ev.value);
  }
  return best;
}

/// Band [c0, c1] of a frame: c0 = max(geometric level, sup over L), and
/// c1 = sup_t (lambda_k t^2 - K2 t^p) + K3 with K2 = c |M|^{1-p/2}, K3 = d |M|.
inline void compute_bands(const ReducedFunctional& J, LinkingFrame& fr, const GrowthConstants& gc,
                          const SaddleConfig& cfg = {}) {
  const double vol = J.spaces().mesh()->total_volume();
  const double p = gc.p;
  const double k2 = gc.c * std::pow(vol, 1.0 - p / 2.0);
  const double k3 = gc.d * vol;
  if (!(k2 > 0.0)) throw ValidationError("compute_bands: coercivity constant must be positive");
  const double tstar = std::pow(2.0 * fr.lambda_k / (p * k2), 1.0 / (p - 2.0));
  fr.band_high = fr.lambda_k * tstar * tstar - k2 * std::pow(tstar, p) + k3;
  fr.sup_L = sup_on_L(J, fr, cfg);
  fr.band_low = std::max(fr.geometric_level, fr.sup_L);
  fr.bands_computed = true;
}

namespace detail {

struct FiberState {
  Vector v;      // unit H1 direction in H+ (W coordinates)
  Vector y;      // (t, l coordinates)
  ReducedEvaluation ev;
  double value = 0.0;
};

inline Matrix fiber_basis(const Vector& v, const LinkingFrame& fr) {
  Matrix s = Matrix::Zero(v.size(), 1 + static_cast<Index>(fr.minus_indices.size()));
  s.col(0) = v;
  for (std::size_t j = 0; j < fr.minus_indices.size(); ++j) s(fr.minus_indices[j], static_cast<Index>(j) + 1) = 1.0;
  return s;
}

inline Vector fiber_weights(const HodgeSpaces& hs, const LinkingFrame& fr) {
  Vector w(1 + static_cast<Index>(fr.minus_indices.size()));
  w[0] = 1.0;
  for (std::size_t j = 0; j < fr.minus_indices.size(); ++j)
    w[static_cast<Index>(j) + 1] = h1_weight(hs, fr.minus_indices[j]);
  return w;
}

inline FiberState fiber_max(const ReducedFunctional& J, const LinkingFrame& fr, const Vector& v,
                            const Vector* warm, const SaddleConfig& cfg, int& evals) {
  FiberState st;
  st.v = v;
  const Matrix s = fiber_basis(v, fr);
  if (warm) {
    st.y = *warm;
  } else {
    st.y = Vector::Zero(s.cols());
    st.y[0] = ray_maximizer(J, v, evals);
    if (st.y[0] <= 0.0) throw SolverError("min-max: functional decreases along a seed direction");
  }
  st.ev = ascend(J, s, st.y, fiber_weights(J.spaces(), fr), cfg.max_fiber_steps, cfg.fiber_tolerance, evals);
  if (st.y[0] < 0.0) {  // evenness: keep t > 0
    st.y = -st.y;
    st.ev = J.evaluate(s * st.y);
    ++evals;
  }
  st.value = st.ev.value;
  return st;
}

}  // namespace detail

/// Newton iteration on the full W gradient, regularized as Levenberg-Marquardt
/// on the equation J^'(b) = 0: step = -sum theta / (theta^2 + nu) (q . g) q over
/// the eigenpairs of the Schur Hessian. nu = 0 is a pseudo-inverse Newton step;
/// nu grows when the gradient norm does not decrease.
inline ReducedEvaluation newton_polish(const ReducedFunctional& J, ReducedEvaluation ev, const SaddleConfig& cfg,
                                       SearchDiagnostics& diag) {
  auto tolerance = [&](const ReducedEvaluation& e) {
    return cfg.gradient_tolerance * std::max(1.0, e.l_part.norm());
  };
  double nu_rel = 0.0;
  for (int it = 0; it < cfg.max_newton_steps; ++it) {
    const double gn = ev.gradient.norm();
    diag.gradient_norms.push_back(gn);
    if (gn <= tolerance(ev)) return ev;
    const Matrix h = J.hessian(ev);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Vector& th = es.eigenvalues();
    const double tmax = th.cwiseAbs().maxCoeff();
    const double cutoff = cfg.pseudo_inverse_cutoff * tmax;
    const Vector qg = es.eigenvectors().transpose() * ev.gradient;
    bool ok = false;
    for (int trial = 0; trial < 16; ++trial) {
      const double nu = nu_rel * tmax * tmax;
      Vector z = Vector::Zero(qg.size());
      for (Index i = 0; i < qg.size(); ++i)
        if (std::abs(th[i]) > cutoff) z[i] = -th[i] * qg[i] / (th[i] * th[i] + nu);
      ReducedEvaluation next = J.evaluate(ev.coords + es.eigenvectors() * z);
      if (next.gradient.norm() < gn) {
        ev = std::move(next);
        nu_rel = nu_rel > 1e-12 ? nu_rel / 10.0 : 0.0;
        ok = true;
        break;
      }
      nu_rel = nu_rel == 0.0 ? 1e-8 : nu_rel * 10.0;
    }
    ++diag.newton_steps;
    if (!ok) {
      if (gn <= 1e3 * tolerance(ev)) return ev;  // round-off plateau just above the target
      throw SolverError("Newton stage stagnated at gradient norm " + std::to_string(gn));
    }
  }
  diag.gradient_norms.push_back(ev.gradient.norm());
  if (ev.gradient.norm() > 1e3 * tolerance(ev))
    throw SolverError("Newton stage did not converge (gradient " + std::to_string(ev.gradient.norm()) + ")");
  return ev;
}

/// Local min-max descent from a unit direction in H+, then Newton.
inline ReducedEvaluation minmax_descent(const ReducedFunctional& J, const LinkingFrame& fr, Vector v,
                                        const SaddleConfig& cfg, SearchDiagnostics& diag) {
  const auto& hs = J.spaces();
  const Index w = hs.w_dimension();
  Vector weights = Vector::Zero(w);
  for (Index i : fr.plus_indices) weights[i] = detail::h1_weight(hs, i);
  auto normalize = [&](Vector x) { return Vector(x / std::sqrt(detail::weighted_dot(x, x, weights))); };
  v = normalize(v);
  detail::FiberState st = detail::fiber_max(J, fr, v, nullptr, cfg, diag.fiber_evaluations);
  double step = 1.0;
  for (int it = 0; it < cfg.max_descent_steps; ++it) {
    // H1-Riesz representative of the gradient restricted to H+, minus its v component.
    Vector d = Vector::Zero(w);
    for (Index i : fr.plus_indices) d[i] = st.ev.gradient[i] / weights[i];
    d -= detail::weighted_dot(d, st.v, weights) * st.v;
    const double dn = std::sqrt(detail::weighted_dot(d, d, weights));
    const double t = st.y[0];
    double lsize = 0.0;
    for (Index i = 0; i < w; ++i) lsize += st.ev.l_part[i] * st.ev.l_part[i] / detail::h1_weight(hs, i);
    const double rel = t * dn / std::max(1.0, std::sqrt(lsize));
    diag.values.push_back(st.value);
    diag.gradient_norms.push_back(t * dn);
    if (rel <= cfg.descent_tolerance) break;
    bool accepted = false;
    step = std::min(2.0 * step, 1.0);
    for (int bt = 0; bt < 30; ++bt, step *= 0.5) {
      const Vector vn = normalize(st.v - step * d);
      detail::FiberState trial;
      try {
        trial = detail::fiber_max(J, fr, vn, &st.y, cfg, diag.fiber_evaluations);
      } catch (const SolverError&) {
        continue;
      }
      if (trial.value <= st.value - 0.25 * t * step * dn * dn) {
        st = std::move(trial);
        accepted = true;
        break;
      }
    }
    ++diag.descent_steps;
    if (!accepted) break;  // hand over to Newton
    const std::size_t nv = diag.values.size();
    if (nv > cfg.stall_window &&
        diag.values[nv - 1 - cfg.stall_window] - st.value <= cfg.stall_decrease * std::abs(st.value))
      break;
  }
  return newton_polish(J, st.ev, cfg, diag);
}

/// Run the min-max search from the seeds of one frame (eigenvectors of the
/// first eigenspace above mu, by index, then with negative sign) and return
/// the first critical point that is nontrivial, inside the band and distinct
/// from `known`.
inline std::optional<CriticalPointRecord> find_critical_point(const ReducedFunctional& J, const LinkingFrame& fr,
                                                              const SaddleConfig& cfg,
                                                              const std::vector<CriticalPointRecord>& known = {},
                                                              std::vector<std::string>* log = nullptr,
                                                              int band_index = 0) {
  if (!fr.bands_computed) throw ValidationError("find_critical_point: frame bands not computed");
  const auto& hs = J.spaces();
  const auto& sp = hs.spaces();
  const int k = hs.degree();
  std::vector<std::pair<Index, int>> seeds;
  for (int sign : {1, -1})
    for (Index i : fr.cluster_indices) seeds.emplace_back(i, sign);
  int tried = 0;
  for (const auto& [idx, sign] : seeds) {
    if (tried++ >= cfg.max_seeds) break;
    Vector v = Vector::Zero(hs.w_dimension());
    v[idx] = sign;
    // Deflation: remove the H+ components of points already found.
    for (const auto& rec : known) {
      Vector u = Vector::Zero(v.size());
      for (Index i : fr.plus_indices) u[i] = rec.coords[i];
      const double uu = u.squaredNorm();
      if (uu > 0.0) v -= (u.dot(v) / uu) * u;
    }
    if (v.norm() < 1e-8) continue;
    SearchDiagnostics diag;
    ReducedEvaluation ev;
    try {
      ev = minmax_descent(J, fr, v, cfg, diag);
    } catch (const SolverError& e) {
      if (log) log->push_back("seed " + std::to_string(idx) + ": " + e.what());
      continue;
    }
    CriticalPointRecord rec;
    rec.coords = ev.coords;
    rec.beta = Cochain(hs.mesh(), k, ev.beta);
    rec.xi = ev.xi;
    rec.value = ev.value;
    rec.gradient_norm = ev.gradient.norm();
    rec.weak_residual = weak_residual(sp, J.model(), k, ev.xi);
    rec.band = band_index;
    rec.band_low = fr.band_low;
    rec.band_high = fr.band_high;
    rec.in_band = fr.in_band(ev.value);
    rec.seed = static_cast<int>(idx);
    rec.seed_sign = sign;
    rec.iterations = diag.descent_steps + diag.newton_steps;
    rec.diagnostics = std::move(diag);
    if (rec.weak_residual > cfg.residual_accept) {
      if (log) log->push_back("seed " + std::to_string(idx) + ": residual " + std::to_string(rec.weak_residual));
      continue;
    }
    if (!rec.in_band) {
      if (log) log->push_back("seed " + std::to_string(idx) + ": value " + std::to_string(rec.value) + " outside band");
      continue;
    }
    const double scale = sp.norm2(k, rec.beta.values);
    bool duplicate = false;
    for (const auto& other : known) {
      const double thr = cfg.distinct_threshold * std::max(scale, sp.norm2(k, other.beta.values));
      if (sp.norm2(k, rec.beta.values - other.beta.values) <= thr ||
          sp.norm2(k, rec.beta.values + other.beta.values) <= thr)
        duplicate = true;
    }
    if (duplicate) {
      if (log) log->push_back("seed " + std::to_string(idx) + ": duplicate of a known point");
      continue;
    }
    const ReducedEvaluation neg = J.evaluate(-ev.coords);
    rec.negative_value = neg.value;
    rec.negative_residual = weak_residual(sp, J.model(), k, neg.xi);
    rec.paired = std::abs(neg.value - ev.value) <= 1e-10 * std::max(1.0, std::abs(ev.value)) &&
                 rec.negative_residual <= cfg.residual_accept;
    return rec;
  }
  return std::nullopt;
}

struct CollectionResult {
  std::vector<CriticalPointRecord> records;
  std::vector<std::string> log;
  Index requested = 0;
  [[nodiscard]] bool under_delivered() const { return static_cast<Index>(records.size()) < requested; }
};

/// find_critical_point over ascending frames, with deflated restarts for
/// extra points inside one frame.
inline CollectionResult collect_multiple(const ReducedFunctional& J, std::vector<LinkingFrame>& frames,
                                         const GrowthConstants& gc, const SaddleConfig& cfg) {
  if (frames.empty()) throw ValidationError("collect_multiple: need at least one frame");
  CollectionResult out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (!frames[f].bands_computed) compute_bands(J, frames[f], gc, cfg);
    for (int j = 0; j < cfg.points_per_frame; ++j) {
      ++out.requested;
      auto rec = find_critical_point(J, frames[f], cfg, out.records, &out.log, static_cast<int>(f));
      if (!rec) {
        out.log.push_back("frame " + std::to_string(f) + ": no further critical point found");
        break;
      }
      out.records.push_back(std::move(*rec));
    }
  }
  return out;
}

/// Geometric bound of the frame whose mu equals `mu` exactly.
inline double geometric_level_at(const HodgeSpaces& hs, const EmbeddingEstimate& emb, const GrowthConstants& gc,
                                 double mu) {
  const double rho = std::pow(mu, (1.0 - emb.s) / 2.0);
  double lk = 0.0;
  const double K = detail::frame_K(hs.w_spectrum().eigenvalues, mu, emb.s, lk);
  if (!(K > 0.0)) throw ValidationError("geometric_level_at: no eigenvalue above mu");
  const double q = emb.constant / K;
  const double bprime = gc.b * std::pow(hs.mesh()->total_volume(), 1.0 - 2.0 / gc.p);
  return rho * rho - gc.a * std::pow(q, gc.p / 2.0) - bprime * q;
}

/// Frames for ascending levels. The first frame is built for `first_level`;
/// each further frame moves mu past the previous eigenvalue cluster, repeatedly
/// if needed, until its band starts at least `gap` (relative) above the
/// previous band.
inline std::vector<LinkingFrame> plan_frames(const ReducedFunctional& J, const EmbeddingEstimate& emb,
                                             const GrowthConstants& gc, double first_level, int count,
                                             double gap = 0.05, const SaddleConfig& cfg = {}) {
  if (count < 1) throw ValidationError("plan_frames: need at least one frame");
  if (!(first_level > 0.0)) throw ValidationError("plan_frames: levels must be positive");
  std::vector<LinkingFrame> frames;
  LinkingFrame fr = build_linking_frame(J.spaces(), emb, gc, first_level);
  compute_bands(J, fr, gc, cfg);
  frames.push_back(fr);
  while (static_cast<int>(frames.size()) < count) {
    const double level = geometric_level_at(J.spaces(), emb, gc, fr.lambda_k);
    fr = build_linking_frame(J.spaces(), emb, gc, std::max(level, fr.target_level) * (1.0 + 1e-12) + 1e-12);
    compute_bands(J, fr, gc, cfg);
    if (fr.band_low >= frames.back().band_high * (1.0 + gap)) frames.push_back(fr);
  }
  return frames;
}

}  // namespace hodgemax
