#pragma once

// The reduced functional J^(beta) = |d beta|^2 - F(beta + d Phi(beta)) on W,
// its gradient via the envelope identity and its second derivative.
// Coordinates b refer to the mass-orthonormal W basis of HodgeSpaces, so
// coordinate gradients are already mass-Riesz representatives.

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hodgemax/inner_minimizer.hpp"

namespace hodgemax {

struct ReducedEvaluation {
  Vector coords;            // b
  Vector beta;              // Z b
  InnerResult inner;        // Phi(beta)
  Vector xi;                // beta + d Phi(beta)
  double value = 0.0;       // J^(beta)
  double stiffness = 0.0;   // |d beta|^2
  double nonlinear = 0.0;   // F(xi)
  bool has_gradient = false;
  Vector gradient;          // coordinates; equals l_part + mass_part + k_part
  Vector l_part;            // 2 lambda b
  Vector mass_part;         // -2 eps b
  Vector k_part;            // -2 Z^T (f' - eps) xi pairing

  [[nodiscard]] double gradient_norm() const { return gradient.norm(); }
};

class ReducedFunctional {
 public:
  ReducedFunctional(std::shared_ptr<const HodgeSpaces> hs, NonlinearityModel model, InnerSolveConfig inner = {})
      : hs_(std::move(hs)), model_(std::move(model)), inner_(inner) {
    if (!model_.positive_mass())
      throw ValidationError("reduced functional needs a positive-mass model; perturb zero-mass models first");
  }

  [[nodiscard]] const HodgeSpaces& spaces() const { return *hs_; }
  [[nodiscard]] const std::shared_ptr<const HodgeSpaces>& spaces_ptr() const { return hs_; }
  [[nodiscard]] const NonlinearityModel& model() const { return model_; }
  [[nodiscard]] const InnerSolveConfig& inner_config() const { return inner_; }
  [[nodiscard]] Index dimension() const { return hs_->w_dimension(); }

  [[nodiscard]] ReducedEvaluation evaluate(const Vector& coords, bool with_gradient = true) const {
    if (coords.size() != dimension()) throw ValidationError("W coordinate vector has the wrong length");
    const int k = hs_->degree();
    ReducedEvaluation ev;
    ev.coords = coords;
    ev.beta = hs_->from_w_coordinates(coords);
    ev.inner = phi(*hs_, model_, ev.beta, inner_);
    ev.xi = ev.beta + ev.inner.exact;
    const Vector& lam = hs_->w_eigenvalues();
    ev.stiffness = coords.dot(lam.cwiseProduct(coords));
    ev.nonlinear = ev.inner.value;
    ev.value = ev.stiffness - ev.nonlinear;
    if (with_gradient) {
      const Vector r = weak_rhs_vector(hs_->spaces(), model_, k, ev.xi, model_.mass);
      ev.l_part = 2.0 * lam.cwiseProduct(coords);
      ev.mass_part = -2.0 * model_.mass * coords;
      ev.k_part = -2.0 * hs_->w_basis().transpose() * r;
      ev.gradient = ev.l_part + ev.mass_part + ev.k_part;
      ev.has_gradient = true;
    }
    return ev;
  }

  [[nodiscard]] double value(const Vector& coords) const { return evaluate(coords, false).value; }

  /// Second derivative in coordinates, restricted to the W basis columns
  /// `cols` (all columns when empty) or to the span of the columns of the
  /// coordinate matrix `basis`. Eliminating Phi' gives the Schur form
  /// 2 Lambda - 2 Z^T B Z + 2 X Y^{-1} X^T with X = Z^T B D, Y = D^T B D.
  [[nodiscard]] Matrix hessian(const ReducedEvaluation& ev, const std::vector<Index>& cols = {},
                               const Matrix* basis = nullptr) const {
    const Matrix& zfull = hs_->w_basis();
    const Vector& lam_all = hs_->w_eigenvalues();
    Matrix z, quad;
    if (basis) {
      z = zfull * (*basis);
      quad = basis->transpose() * lam_all.asDiagonal() * (*basis);
    } else if (cols.empty()) {
      z = zfull;
      quad = lam_all.asDiagonal();
    } else {
      const auto m = static_cast<Index>(cols.size());
      z.resize(zfull.rows(), m);
      quad = Matrix::Zero(m, m);
      for (Index j = 0; j < m; ++j) {
        z.col(j) = zfull.col(cols[static_cast<std::size_t>(j)]);
        quad(j, j) = lam_all[cols[static_cast<std::size_t>(j)]];
      }
    }
    const SparseMatrix b = weak_rhs_jacobian(hs_->spaces(), model_, hs_->degree(), ev.xi);
    const Matrix& d = hs_->exact_basis();
    const Matrix bz = b * z;
    const Matrix bd = b * d;
    const Matrix x = z.transpose() * bd;
    Matrix y = d.transpose() * bd;
    y = 0.5 * (y + y.transpose());
    Eigen::LLT<Matrix> llt(y);
    if (llt.info() != Eigen::Success) throw SolverError("reduced Hessian: inner Hessian is not positive definite");
    Matrix h = 2.0 * quad - 2.0 * z.transpose() * bz + 2.0 * x * llt.solve(x.transpose());
    return 0.5 * (h + h.transpose());
  }

  // Cochain-facing forms.
  [[nodiscard]] ReducedEvaluation j_hat(const Cochain& beta) const {
    check(beta);
    detail::require_coclosed(*hs_, beta.values);
    return evaluate(hs_->w_coordinates(beta.values), true);
  }
  /// Mass-Riesz representative of J^'(beta) in W.
  [[nodiscard]] Cochain j_hat_gradient(const Cochain& beta) const {
    const auto ev = j_hat(beta);
    return {hs_->mesh(), hs_->degree(), hs_->from_w_coordinates(ev.gradient)};
  }

 private:
  void check(const Cochain& beta) const {
    if (beta.degree != hs_->degree()) throw ValidationError("beta has the wrong degree");
    if (!beta.mesh || beta.mesh->hash() != hs_->mesh()->hash()) throw ValidationError("beta belongs to another mesh");
  }

  std::shared_ptr<const HodgeSpaces> hs_;
  NonlinearityModel model_;
  InnerSolveConfig inner_;
};

/// Weak-form residual of delta d xi = f'(<xi,xi>) xi probed on unit basis
/// cochains: max_j |(d xi, d e_j) - weak_rhs(xi, e_j)| divided by
/// max_j (|(d xi, d e_j)| + |weak_rhs(xi, e_j)|). With probe_count > 0 only a
/// seeded random subset of that many basis cochains is probed.
inline double weak_residual(const FormSpaces& spaces, const NonlinearityModel& model, int k, const Vector& xi,
                            Index probe_count = 0, unsigned seed = 1) {
  if (k < 0 || k >= spaces.dimension()) throw ValidationError("weak_residual: degree out of range");
  if (xi.size() != spaces.mesh()->count(k)) throw ValidationError("weak_residual: cochain length mismatch");
  const SparseMatrix& d = spaces.derivative(k);
  const Vector lhs = d.transpose() * (spaces.mass(k + 1).matrix * (d * xi));
  const Vector rhs = weak_rhs_vector(spaces, model, k, xi);
  std::vector<Index> probes;
  if (probe_count <= 0 || probe_count >= xi.size()) {
    probes.resize(static_cast<std::size_t>(xi.size()));
    for (Index j = 0; j < xi.size(); ++j) probes[static_cast<std::size_t>(j)] = j;
  } else {
    std::mt19937_64 rng(seed);
    std::vector<Index> all(static_cast<std::size_t>(xi.size()));
    for (Index j = 0; j < xi.size(); ++j) all[static_cast<std::size_t>(j)] = j;
    std::shuffle(all.begin(), all.end(), rng);
    probes.assign(all.begin(), all.begin() + probe_count);
  }
  double num = 0.0, den = 0.0;
  for (Index j : probes) {
    num = std::max(num, std::abs(lhs[j] - rhs[j]));
    den = std::max(den, std::abs(lhs[j]) + std::abs(rhs[j]));
  }
  return den > 0.0 ? num / den : 0.0;
}

inline double weak_residual(const FormSpaces& spaces, const NonlinearityModel& model, const Cochain& xi,
                            Index probe_count = 0, unsigned seed = 1) {
  return weak_residual(spaces, model, xi.degree, xi.values, probe_count, seed);
}

}  // namespace hodgemax
