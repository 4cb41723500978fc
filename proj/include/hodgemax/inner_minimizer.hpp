#pragma once

// Phi(beta): the unique minimizer over V of alpha -> F(d alpha + beta).
// Works in the coordinates of the V eigenbasis, where d alpha = D a with
// D the exact basis of HodgeSpaces.

#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "hodgemax/nonlinearity.hpp"
#include "hodgemax/spectral.hpp"

namespace hodgemax {

struct InnerSolveConfig {
  double gradient_tolerance = 1e-14;  // absolute, dual norm on V
  double relative_tolerance = 1e-11;  // times the dual size of F'(beta)
  int max_newton_steps = 60;
  double backtrack_factor = 0.5;
  int max_backtracks = 40;
  double armijo = 1e-4;

  void validate() const {
    if (!(gradient_tolerance > 0.0) || !(relative_tolerance >= 0.0))
      throw ValidationError("inner solver tolerances must be positive");
    if (max_newton_steps < 1 || max_backtracks < 1) throw ValidationError("inner solver step limits must be >= 1");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
      throw ValidationError("backtracking factor must lie in (0, 1)");
  }
};

struct InnerIterate {
  int iteration = 0;
  double value = 0.0;
  double gradient_norm = 0.0;
};

struct InnerResult {
  Cochain alpha;            // Phi(beta) in V
  Vector coords;            // V-eigenbasis coordinates of alpha
  Vector exact;             // d alpha
  int iterations = 0;
  double gradient_norm = 0.0;
  double tolerance = 0.0;   // the stopping threshold actually used
  double value = 0.0;       // F(beta + d alpha)
  std::vector<InnerIterate> trace;
};

inline void write_inner_trace_csv(std::ostream& out, const InnerResult& r) {
  out << "iteration,value,gradient_norm\n";
  out.precision(17);
  for (const auto& it : r.trace) out << it.iteration << ',' << it.value << ',' << it.gradient_norm << "\n";
}

namespace detail {

inline void require_coclosed(const HodgeSpaces& hs, const Vector& beta) {
  const double nb = hs.spaces().norm2(hs.degree(), beta);
  if (nb == 0.0) return;
  const Vector proj = hs.exact_basis().transpose() * (hs.spaces().mass(hs.degree()).matrix * beta);
  const double off = proj.cwiseQuotient(hs.v_spectrum().eigenvalues.cwiseSqrt()).norm();
  if (off > 1e-10 * nb) throw ValidationError("beta is not coclosed (relative exact content " + std::to_string(off / nb) + ")");
}

inline double dual_norm_V(const HodgeSpaces& hs, const Vector& g) {
  return std::sqrt(g.cwiseAbs2().cwiseQuotient(hs.v_spectrum().eigenvalues).sum());
}

}  // namespace detail

/// Gradient of a -> F(beta + D a) in V coordinates: 2 D^T r(beta + D a).
inline Vector inner_gradient_coords(const HodgeSpaces& hs, const NonlinearityModel& model, const Vector& a,
                                    const Vector& beta) {
  const Vector xi = beta + hs.exact_basis() * a;
  return 2.0 * hs.exact_basis().transpose() * weak_rhs_vector(hs.spaces(), model, hs.degree(), xi);
}

/// Gradient as a (k-1)-cochain in V: the mass-Riesz representative of
/// abar -> 2 weak_rhs(d alpha + beta, d abar).
inline Cochain inner_gradient(const HodgeSpaces& hs, const NonlinearityModel& model, const Cochain& alpha,
                              const Cochain& beta) {
  const Vector a = hs.v_coordinates(alpha.values);
  return {hs.mesh(), hs.degree() - 1, hs.from_v_coordinates(inner_gradient_coords(hs, model, a, beta.values))};
}

/// Second derivative 2 D^T B D in V coordinates.
inline Matrix inner_hessian_coords(const HodgeSpaces& hs, const NonlinearityModel& model, const Vector& a,
                                   const Vector& beta) {
  const Vector xi = beta + hs.exact_basis() * a;
  const SparseMatrix b = weak_rhs_jacobian(hs.spaces(), model, hs.degree(), xi);
  const Matrix bd = b * hs.exact_basis();
  Matrix h = 2.0 * hs.exact_basis().transpose() * bd;
  return 0.5 * (h + h.transpose());
}

/// Action of the second derivative on the direction abar, returned as a
/// V cochain (mass-Riesz representative).
inline Cochain inner_hessian_apply(const HodgeSpaces& hs, const NonlinearityModel& model, const Cochain& alpha,
                                   const Cochain& beta, const Cochain& direction) {
  const Vector a = hs.v_coordinates(alpha.values);
  const Vector u = hs.v_coordinates(direction.values);
  const Matrix h = inner_hessian_coords(hs, model, a, beta.values);
  return {hs.mesh(), hs.degree() - 1, hs.from_v_coordinates(h * u)};
}

/// Quadratic form of the second derivative on direction abar:
/// 4 sum f''(dens) <xi, d abar>^2 + 2 sum f'(dens) <d abar, d abar>, cellwise.
inline double inner_hessian_form(const HodgeSpaces& hs, const NonlinearityModel& model, const Cochain& alpha,
                                 const Cochain& beta, const Cochain& direction) {
  const Vector xi = beta.values + hs.spaces().derivative(hs.degree() - 1) * alpha.values;
  const Vector dir = hs.spaces().derivative(hs.degree() - 1) * direction.values;
  const SparseMatrix b = weak_rhs_jacobian(hs.spaces(), model, hs.degree(), xi);
  return 2.0 * dir.dot(b * dir);
}

/// Newton iteration with Armijo backtracking from alpha = 0.
inline InnerResult phi(const HodgeSpaces& hs, const NonlinearityModel& model, const Vector& beta,
                       const InnerSolveConfig& config = {}) {
  config.validate();
  if (!model.positive_mass())
    throw ValidationError("phi: the inner problem needs a positive-mass model; perturb zero-mass models first");
  detail::require_coclosed(hs, beta);
  const FormSpaces& sp = hs.spaces();
  const int k = hs.degree();
  const Matrix& dmat = hs.exact_basis();

  InnerResult res;
  res.coords = Vector::Zero(hs.v_dimension());
  auto value_at = [&](const Vector& a) { return F_eval(sp, model, k, beta + dmat * a); };

  const Vector r0 = weak_rhs_vector(sp, model, k, beta);
  const double scale = 2.0 * std::sqrt(std::max(r0.dot(sp.mass(k).solve(r0)), 0.0));
  res.tolerance = config.gradient_tolerance + config.relative_tolerance * scale;

  double value = value_at(res.coords);
  Vector g = 2.0 * dmat.transpose() * r0;
  double gnorm = detail::dual_norm_V(hs, g);
  res.trace.push_back({0, value, gnorm});
  int it = 0;
  while (gnorm > res.tolerance) {
    if (it >= config.max_newton_steps)
      throw SolverError("phi: Newton did not converge in " + std::to_string(config.max_newton_steps) +
                        " steps (gradient " + std::to_string(gnorm) + ")");
    ++it;
    const Matrix h = inner_hessian_coords(hs, model, res.coords, beta);
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) throw SolverError("phi: inner Hessian is not positive definite");
    const Vector step = -llt.solve(g);
    const double slope = g.dot(step);
    double t = 1.0;
    Vector trial = res.coords + step;
    double trial_value = value_at(trial);
    // In the quadratic regime the decrease is below round-off; take the full step.
    if (-slope > 1e-13 * (std::abs(value) + 1.0)) {
      int bt = 0;
      while (!(trial_value <= value + config.armijo * t * slope)) {
        if (++bt > config.max_backtracks) throw SolverError("phi: line search failed (non-convex model?)");
        t *= config.backtrack_factor;
        trial = res.coords + t * step;
        trial_value = value_at(trial);
      }
    }
    res.coords = trial;
    value = trial_value;
    g = inner_gradient_coords(hs, model, res.coords, beta);
    gnorm = detail::dual_norm_V(hs, g);
    res.trace.push_back({it, value, gnorm});
  }
  res.iterations = it;
  res.gradient_norm = gnorm;
  res.value = value;
  res.exact = dmat * res.coords;
  res.alpha = Cochain(hs.mesh(), k - 1, hs.from_v_coordinates(res.coords));
  return res;
}

inline InnerResult phi(const HodgeSpaces& hs, const NonlinearityModel& model, const Cochain& beta,
                       const InnerSolveConfig& config = {}) {
  if (beta.degree != hs.degree()) throw ValidationError("phi: beta has the wrong degree");
  return phi(hs, model, beta.values, config);
}

}  // namespace hodgemax
