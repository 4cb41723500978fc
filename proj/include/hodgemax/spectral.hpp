#pragma once

// Spectrum of the k-form Laplacian on the coclosed space W, Hodge
// decomposition, the projector onto V (complement of closed (k-1)-forms),
// spectral Sobolev norms and the empirical embedding constant.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hodgemax/dec.hpp"
#include "hodgemax/error.hpp"

namespace hodgemax {

/// Eigenpairs of delta d restricted to coclosed k-forms, plus the harmonic
/// kernel. All vectors are orthonormal in the Whitney mass inner product.
struct SpectralBasis {
  int degree = 0;
  Vector eigenvalues;       // ascending, strictly positive
  Matrix eigenvectors;      // columns: coexact eigencochains
  Vector residuals;         // mass-dual norm of K eta - lambda M eta
  Matrix harmonic;          // columns: harmonic cochains
  Index coexact_dimension = 0;  // dimension of the full coexact space

  [[nodiscard]] Index count() const { return eigenvalues.size(); }
  [[nodiscard]] bool complete() const { return count() == coexact_dimension; }

  /// Eigenvalue clusters under relative tolerance `rel_tol`: (first index, size).
  [[nodiscard]] std::vector<std::pair<Index, Index>> clusters(double rel_tol = 1e-6) const {
    std::vector<std::pair<Index, Index>> out;
    for (Index i = 0; i < count(); ++i) {
      if (!out.empty()) {
        const double ref = eigenvalues[out.back().first];
        if (std::abs(eigenvalues[i] - ref) <= rel_tol * std::abs(ref)) {
          ++out.back().second;
          continue;
        }
      }
      out.emplace_back(i, 1);
    }
    return out;
  }
};

/// Lowest `count` eigenpairs of delta d on W (count <= 0 requests all of them).
///
/// Solved densely as the generalized problem (d^T M_{k+1} d, M_k). Nonzero
/// eigenvectors of that pencil are automatically mass-orthogonal to closed
/// forms, hence coclosed; the kernel is split into exact and harmonic parts
/// by removing the image of d_{k-1}. k = 0 is accepted as a diagnostic mode.
inline SpectralBasis eigensolve_W(const FormSpaces& spaces, int k, Index count = 0) {
  const int n = spaces.dimension();
  if (k < 0 || k > n - 1) throw ValidationError("eigensolve_W: degree must satisfy 0 <= k <= n-1");
  const SparseMatrix& d = spaces.derivative(k);
  const Matrix stiffness = Matrix(d.transpose() * spaces.mass(k + 1).matrix * d);
  const Matrix mass = Matrix(spaces.mass(k).matrix);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(stiffness, mass);
  if (es.info() != Eigen::Success) throw SolverError("eigensolve_W: eigensolver did not converge");
  const Vector& ev = es.eigenvalues();
  const Matrix& vecs = es.eigenvectors();
  const double top = std::max(ev.maxCoeff(), 1.0);
  Index zero = 0;
  while (zero < ev.size() && ev[zero] < 1e-9 * top) ++zero;

  SpectralBasis out;
  out.degree = k;
  out.coexact_dimension = ev.size() - zero;
  const Index want = count <= 0 ? out.coexact_dimension : count;
  if (want > out.coexact_dimension)
    throw ValidationError("eigensolve_W: requested " + std::to_string(want) + " eigenpairs but W has only " +
                          std::to_string(out.coexact_dimension) + " nonzero modes");
  out.eigenvalues = ev.segment(zero, want);
  out.eigenvectors = vecs.middleCols(zero, want);

  const Matrix kernel = vecs.leftCols(zero);
  if (k == 0) {
    out.harmonic = kernel;
  } else {
    // Harmonic = kernel vectors annihilated by d_{k-1}^T M_k (i.e. coclosed).
    const Matrix a = Matrix(spaces.derivative(k - 1).transpose() * (spaces.mass(k).matrix * kernel));
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv.maxCoeff() : 0.0;
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
      if (sv[i] > 1e-8 * std::max(smax, 1e-300)) ++rank;
    out.harmonic = kernel * svd.matrixV().rightCols(zero - rank);
  }

  out.residuals.resize(want);
  for (Index i = 0; i < want; ++i) {
    const Vector r = stiffness * out.eigenvectors.col(i) - out.eigenvalues[i] * (mass * out.eigenvectors.col(i));
    out.residuals[i] = std::sqrt(std::max(r.dot(spaces.mass(k).solve(r)), 0.0));
  }
  return out;
}

/// Write the spectrum as CSV rows: index, eigenvalue, residual.
inline void write_spectrum_csv(std::ostream& out, const SpectralBasis& basis) {
  out << "index,lambda,residual\n";
  out.precision(17);
  for (Index i = 0; i < basis.count(); ++i)
    out << i << ',' << basis.eigenvalues[i] << ',' << basis.residuals[i] << "\n";
}

/// Orthogonal splitting xi = d alpha + (coexact) + (harmonic).
struct HodgeParts {
  Cochain potential;  // alpha, a (k-1)-cochain in V (empty for k = 0)
  Cochain exact;
  Cochain coexact;
  Cochain harmonic;
};

/// The spaces W (degree k) and V (degree k-1) of one problem, both with
/// complete bases, plus the operations defined through them.
class HodgeSpaces {
 public:
  HodgeSpaces(std::shared_ptr<const FormSpaces> spaces, int k) : spaces_(std::move(spaces)), k_(k) {
    const int n = spaces_->dimension();
    if (k < 1 || k > n - 1) throw ValidationError("HodgeSpaces: need 1 <= k <= n-1");
    w_ = eigensolve_W(*spaces_, k, 0);
    v_ = eigensolve_W(*spaces_, k - 1, 0);
    const Index nb = static_cast<Index>(spaces_->mesh()->betti_numbers()[k]);
    if (w_.harmonic.cols() != nb)
      throw SolverError("harmonic dimension " + std::to_string(w_.harmonic.cols()) + " differs from Betti number " +
                        std::to_string(nb));
    exact_basis_ = Matrix(spaces_->derivative(k - 1) * v_.eigenvectors);
    w_basis_.resize(w_.eigenvectors.rows(), w_.count() + w_.harmonic.cols());
    w_basis_ << w_.eigenvectors, w_.harmonic;
    w_weights_ = Vector::Zero(w_basis_.cols());
    w_weights_.head(w_.count()) = w_.eigenvalues;
  }

  [[nodiscard]] const FormSpaces& spaces() const { return *spaces_; }
  [[nodiscard]] const std::shared_ptr<const FormSpaces>& spaces_ptr() const { return spaces_; }
  [[nodiscard]] const std::shared_ptr<const SimplicialComplex>& mesh() const { return spaces_->mesh(); }
  [[nodiscard]] int degree() const { return k_; }
  [[nodiscard]] const SpectralBasis& w_spectrum() const { return w_; }
  [[nodiscard]] const SpectralBasis& v_spectrum() const { return v_; }

  /// Columns: coexact eigencochains followed by harmonic cochains.
  [[nodiscard]] const Matrix& w_basis() const { return w_basis_; }
  /// Eigenvalue attached to each W basis column (0 for harmonics).
  [[nodiscard]] const Vector& w_eigenvalues() const { return w_weights_; }
  [[nodiscard]] Index w_dimension() const { return w_basis_.cols(); }
  [[nodiscard]] Index harmonic_dimension() const { return w_.harmonic.cols(); }
  /// d applied to the V basis; column j has squared norm equal to the j-th V eigenvalue.
  [[nodiscard]] const Matrix& exact_basis() const { return exact_basis_; }
  [[nodiscard]] Index v_dimension() const { return v_.count(); }

  [[nodiscard]] Vector w_coordinates(const Vector& beta) const {
    return w_basis_.transpose() * (spaces_->mass(k_).matrix * beta);
  }
  [[nodiscard]] Vector from_w_coordinates(const Vector& coeffs) const { return w_basis_ * coeffs; }
  [[nodiscard]] Vector v_coordinates(const Vector& alpha) const {
    return v_.eigenvectors.transpose() * (spaces_->mass(k_ - 1).matrix * alpha);
  }
  [[nodiscard]] Vector from_v_coordinates(const Vector& coeffs) const { return v_.eigenvectors * coeffs; }

  [[nodiscard]] HodgeParts decompose(const Cochain& xi) const {
    check(xi, k_);
    const auto& m = spaces_->mass(k_).matrix;
    const Vector mxi = m * xi.values;
    const Vector harm = w_.harmonic * (w_.harmonic.transpose() * mxi);
    const Vector coex = w_.eigenvectors * (w_.eigenvectors.transpose() * mxi);
    // alpha = sum u_i (d u_i, xi) / lambda_i, computed independently of W.
    const Vector a = (exact_basis_.transpose() * mxi).cwiseQuotient(v_.eigenvalues);
    const Vector alpha = v_.eigenvectors * a;
    const Vector exact = spaces_->derivative(k_ - 1) * alpha;
    const auto& mesh = spaces_->mesh();
    return {Cochain(mesh, k_ - 1, alpha), Cochain(mesh, k_, exact), Cochain(mesh, k_, coex),
            Cochain(mesh, k_, harm)};
  }

  /// W-component (coexact + harmonic) of xi.
  [[nodiscard]] Cochain project_W(const Cochain& xi) const {
    check(xi, k_);
    return {mesh(), k_, w_basis_ * w_coordinates(xi.values)};
  }

  /// Mass-orthogonal projection of a (k-1)-cochain onto V.
  [[nodiscard]] Cochain project_V(const Cochain& alpha) const {
    check(alpha, k_ - 1);
    return {mesh(), k_ - 1, v_.eigenvectors * v_coordinates(alpha.values)};
  }

  /// Constant in |alpha|_2 <= c |d alpha|_2 on V.
  [[nodiscard]] double poincare_constant_V() const { return 1.0 / std::sqrt(v_.eigenvalues[0]); }

  /// Spectral Sobolev norm sum (lambda_i^s + 1) beta_i^2 + |beta^0|^2, square-rooted.
  [[nodiscard]] double sobolev_norm(const Cochain& beta, double s) const {
    check(beta, k_);
    const Vector c = w_coordinates(beta.values);
    const double total = spaces_->norm2(k_, beta.values);
    const double residual = spaces_->norm2(k_, beta.values - w_basis_ * c);
    if (residual > 1e-8 * std::max(total, 1e-300) && total > 0.0)
      throw ValidationError("sobolev_norm: cochain not represented by the spectral basis (relative error " +
                            std::to_string(residual / total) + ")");
    return sobolev_norm_coords(c, s);
  }
  [[nodiscard]] double sobolev_norm_coords(const Vector& c, double s) const {
    double sum = 0.0;
    for (Index i = 0; i < c.size(); ++i) {
      const double lam = w_weights_[i];
      sum += (lam > 0.0 ? std::pow(lam, s) + 1.0 : 1.0) * c[i] * c[i];
    }
    return std::sqrt(sum);
  }

 private:
  void check(const Cochain& c, int k) const {
    if (c.degree != k) throw ValidationError("cochain has degree " + std::to_string(c.degree) + ", expected " +
                                             std::to_string(k));
    if (!c.mesh || c.mesh->hash() != mesh()->hash()) throw ValidationError("cochain belongs to a different mesh");
  }

  std::shared_ptr<const FormSpaces> spaces_;
  int k_;
  SpectralBasis w_, v_;
  Matrix w_basis_;
  Vector w_weights_;
  Matrix exact_basis_;
};

/// Fractional order used for the embedding |beta|_p^2 <= c ||beta||_{s,2}^2.
inline double default_sobolev_order(int n, double p) {
  return std::clamp(n * (0.5 - 1.0 / p) + 0.1, 0.05, 0.95);
}

/// Whether p lies in the subcritical window ]2, 2n/(n-2)[ (only p > 2 for n <= 2).
inline bool in_exponent_window(int n, double p) {
  if (p <= 2.0) return false;
  if (n <= 2) return true;
  return p < 2.0 * n / (n - 2.0);
}

struct EmbeddingEstimate {
  double s = 0.0;
  double constant = 0.0;  // c~, including the safety factor
  double p = 0.0;
  double max_ratio = 0.0;
  Index probes = 0;
};

/// Ratio |beta|_p^2 / ||beta||_{s,2}^2 for one W-cochain given in coordinates.
inline double embedding_ratio(const HodgeSpaces& hs, const Vector& coords, double p, double s) {
  const Vector beta = hs.from_w_coordinates(coords);
  const double lp = hs.spaces().lp_norm(Cochain(hs.mesh(), hs.degree(), beta), p);
  const double sob = hs.sobolev_norm_coords(coords, s);
  return lp * lp / (sob * sob);
}

/// c~ = safety * max ratio over eigencochains, harmonics and random coclosed
/// combinations.
inline EmbeddingEstimate estimate_embedding(const HodgeSpaces& hs, double p, double s, Index random_probes = 64,
                                            unsigned seed = 1, double safety = 1.5) {
  const int n = hs.spaces().dimension();
  if (n >= 3 && !in_exponent_window(n, p))
    throw ValidationError("estimate_embedding: p = " + std::to_string(p) + " outside ]2, 2n/(n-2)[");
  if (p <= 2.0) throw ValidationError("estimate_embedding: p must exceed 2");
  if (s <= 0.0 || s >= 1.0) throw ValidationError("estimate_embedding: s must lie in (0, 1)");
  EmbeddingEstimate est;
  est.s = s;
  est.p = p;
  const Index dim = hs.w_dimension();
  for (Index i = 0; i < dim; ++i) {
    Vector e = Vector::Zero(dim);
    e[i] = 1.0;
    est.max_ratio = std::max(est.max_ratio, embedding_ratio(hs, e, p, s));
    ++est.probes;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (Index j = 0; j < random_probes; ++j) {
    Vector c(dim);
    for (Index i = 0; i < dim; ++i) {
      const double lam = hs.w_eigenvalues()[i];
      c[i] = normal(rng) / std::sqrt(1.0 + lam);
    }
    est.max_ratio = std::max(est.max_ratio, embedding_ratio(hs, c, p, s));
    ++est.probes;
  }
  est.constant = safety * est.max_ratio;
  return est;
}

}  // namespace hodgemax
