#pragma once

// Discrete k-forms on a simplicial complex: lowest-order Whitney mass
// matrices, exterior derivative, codifferential, per-cell densities and the
// associated L^p and H^1 norms.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "hodgemax/error.hpp"
#include "hodgemax/simplicial_complex.hpp"

namespace hodgemax {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Local Gram matrix of the Whitney k-forms of one simplex.
///
/// `positions` holds the n+1 vertices as columns. Rows/columns follow the
/// lexicographic enumeration of local k-faces.
inline Matrix whitney_gram(const Matrix& positions, int k) {
  const int n = static_cast<int>(positions.cols()) - 1;
  Matrix e(positions.rows(), n);
  for (int j = 0; j < n; ++j) e.col(j) = positions.col(j + 1) - positions.col(0);
  const Matrix metric = e.transpose() * e;
  const Matrix inv = metric.inverse();
  double n_fact = 1.0;
  for (int j = 2; j <= n; ++j) n_fact *= j;
  const double vol = std::sqrt(metric.determinant()) / n_fact;

  // Inner products of barycentric-coordinate gradients.
  Matrix grad(n + 1, n + 1);
  grad.bottomRightCorner(n, n) = inv;
  for (int j = 0; j < n; ++j) {
    grad(0, j + 1) = -inv.col(j).sum();
    grad(j + 1, 0) = grad(0, j + 1);
  }
  grad(0, 0) = inv.sum();

  const auto faces = detail::combinations(n, k);
  const auto nf = static_cast<Eigen::Index>(faces.size());
  double k_fact = 1.0;
  for (int j = 2; j <= k; ++j) k_fact *= j;
  const double bary = vol / ((n + 1.0) * (n + 2.0));  // integral of lambda_i lambda_j for i != j

  Matrix gram = Matrix::Zero(nf, nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    for (Eigen::Index b = a; b < nf; ++b) {
      const auto& s = faces[a];
      const auto& t = faces[b];
      double sum = 0.0;
      for (int j = 0; j <= k; ++j) {
        for (int l = 0; l <= k; ++l) {
          Matrix minor(k, k);
          for (int r = 0, rr = 0; r <= k; ++r) {
            if (r == j) continue;
            for (int c = 0, cc = 0; c <= k; ++c) {
              if (c == l) continue;
              minor(rr, cc++) = grad(s[r], t[c]);
            }
            ++rr;
          }
          const double det = k == 0 ? 1.0 : minor.determinant();
          const double lam = (s[j] == t[l] ? 2.0 : 1.0) * bary;
          sum += (((j + l) % 2 == 0) ? 1.0 : -1.0) * lam * det;
        }
      }
      gram(a, b) = gram(b, a) = k_fact * k_fact * sum;
    }
  }
  return gram;
}

/// A discrete k-form: one coefficient per oriented k-simplex.
struct Cochain {
  int degree = 0;
  Vector values;
  std::shared_ptr<const SimplicialComplex> mesh;

  Cochain() = default;
  Cochain(std::shared_ptr<const SimplicialComplex> m, int k, Vector v)
      : degree(k), values(std::move(v)), mesh(std::move(m)) {
    if (!mesh) throw ValidationError("cochain without mesh");
    if (k < 0 || k > mesh->dimension()) throw ValidationError("cochain degree out of range");
    if (values.size() != mesh->count(k)) throw ValidationError("cochain length does not match simplex count");
  }
  static Cochain zero(std::shared_ptr<const SimplicialComplex> m, int k) {
    const Index n = m->count(k);
    return {std::move(m), k, Vector::Zero(n)};
  }

  Cochain operator-() const { return {mesh, degree, -values}; }
  Cochain operator+(const Cochain& o) const {
    check_compatible(o);
    return {mesh, degree, values + o.values};
  }
  Cochain operator-(const Cochain& o) const {
    check_compatible(o);
    return {mesh, degree, values - o.values};
  }
  friend Cochain operator*(double s, const Cochain& c) { return {c.mesh, c.degree, s * c.values}; }

  void check_compatible(const Cochain& o) const {
    if (degree != o.degree) throw ValidationError("cochain degree mismatch");
    if (mesh != o.mesh && (!mesh || !o.mesh || mesh->hash() != o.mesh->hash()))
      throw ValidationError("cochains live on different meshes");
  }
};

/// Symmetric positive-definite mass matrix of one degree, with its factorization.
struct MassOperator {
  int degree = 0;
  SparseMatrix matrix;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> factorization;

  [[nodiscard]] Vector solve(const Vector& rhs) const {
    Vector x = factorization->solve(rhs);
    if (factorization->info() != Eigen::Success) throw SolverError("mass solve failed (degenerate mesh?)");
    return x;
  }
};

/// Per-top-cell densities <xi, xi> (constant on each cell).
struct PointwiseDensity {
  std::vector<double> values;
};

/// The de Rham complex of Whitney forms over a mesh: d, mass operators and
/// the local Gram blocks that define densities.
class FormSpaces {
 public:
  explicit FormSpaces(std::shared_ptr<const SimplicialComplex> mesh) : mesh_(std::move(mesh)) {
    const int n = mesh_->dimension();
    const auto& cells = mesh_->cells();
    gram_.resize(n + 1);
    mass_.resize(n + 1);
    deriv_.resize(n);
    for (int k = 0; k <= n; ++k) {
      std::vector<Eigen::Triplet<double>> trips;
      gram_[k].reserve(cells.size());
      for (const auto& cell : cells) {
        Matrix g = whitney_gram(cell.positions, k);
        const auto& f = cell.faces[k];
        for (std::size_t a = 0; a < f.size(); ++a)
          for (std::size_t b = 0; b < f.size(); ++b)
            trips.emplace_back(static_cast<int>(f[a]), static_cast<int>(f[b]),
                               g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        gram_[k].push_back(std::move(g));
      }
      MassOperator m;
      m.degree = k;
      m.matrix.resize(mesh_->count(k), mesh_->count(k));
      m.matrix.setFromTriplets(trips.begin(), trips.end());
      m.factorization = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(m.matrix);
      if (m.factorization->info() != Eigen::Success || (m.factorization->vectorD().array() <= 0.0).any())
        throw SolverError("mass matrix of degree " + std::to_string(k) + " is not positive definite");
      mass_[k] = std::move(m);
    }
    for (int k = 0; k < n; ++k) deriv_[k] = mesh_->boundary(k + 1).cast<double>().transpose();
  }

  [[nodiscard]] const std::shared_ptr<const SimplicialComplex>& mesh() const { return mesh_; }
  [[nodiscard]] int dimension() const { return mesh_->dimension(); }
  [[nodiscard]] const MassOperator& mass(int k) const { return mass_.at(k); }
  /// Exterior derivative from degree k to k+1 as a sparse matrix.
  [[nodiscard]] const SparseMatrix& derivative(int k) const {
    if (k < 0 || k >= dimension()) throw ValidationError("exterior derivative of top-degree (or negative) form");
    return deriv_[k];
  }
  [[nodiscard]] const Matrix& cell_gram(int k, std::size_t cell) const { return gram_.at(k)[cell]; }

  [[nodiscard]] Cochain exterior_derivative(const Cochain& xi) const {
    check(xi);
    return {mesh_, xi.degree + 1, derivative(xi.degree) * xi.values};
  }

  /// Adjoint of d in the Whitney L^2 products: M_{k-1}^{-1} d^T M_k xi.
  [[nodiscard]] Cochain codifferential(const Cochain& xi) const {
    check(xi);
    if (xi.degree < 1) throw ValidationError("codifferential of a 0-form");
    const Vector rhs = derivative(xi.degree - 1).transpose() * (mass_[xi.degree].matrix * xi.values);
    return {mesh_, xi.degree - 1, mass_[xi.degree - 1].solve(rhs)};
  }

  [[nodiscard]] double l2_inner(const Cochain& xi, const Cochain& eta) const {
    check(xi);
    xi.check_compatible(eta);
    return inner(xi.degree, xi.values, eta.values);
  }
  [[nodiscard]] double inner(int k, const Vector& a, const Vector& b) const {
    return a.dot(mass_[k].matrix * b);
  }
  [[nodiscard]] double norm2(int k, const Vector& a) const { return std::sqrt(std::max(inner(k, a, a), 0.0)); }

  [[nodiscard]] PointwiseDensity density(const Cochain& xi) const {
    check(xi);
    return {density_values(xi.degree, xi.values)};
  }
  [[nodiscard]] std::vector<double> density_values(int k, const Vector& xi) const {
    const auto& cells = mesh_->cells();
    const auto& vol = mesh_->volumes(dimension());
    std::vector<double> out(cells.size());
    Vector local;
    for (std::size_t t = 0; t < cells.size(); ++t) {
      gather(k, t, xi, local);
      out[t] = std::max(local.dot(gram_[k][t] * local), 0.0) / vol[t];
    }
    return out;
  }

  [[nodiscard]] double lp_norm(const Cochain& xi, double q) const {
    if (q < 1.0) throw ValidationError("lp_norm requires q >= 1");
    check(xi);
    const auto dens = density_values(xi.degree, xi.values);
    const auto& vol = mesh_->volumes(dimension());
    double sum = 0.0;
    for (std::size_t t = 0; t < dens.size(); ++t) sum += std::pow(dens[t], q / 2.0) * vol[t];
    return std::pow(sum, 1.0 / q);
  }

  [[nodiscard]] double h1_norm(const Cochain& xi) const {
    check(xi);
    if (xi.degree < 1 || xi.degree > dimension() - 1) throw ValidationError("h1_norm needs 1 <= k <= n-1");
    const Cochain dx = exterior_derivative(xi);
    const Cochain cx = codifferential(xi);
    return std::sqrt(l2_inner(dx, dx) + l2_inner(cx, cx) + l2_inner(xi, xi));
  }

  /// Coefficients of `xi` on the local k-faces of top cell `t`.
  void gather(int k, std::size_t t, const Vector& xi, Vector& local) const {
    const auto& f = mesh_->cells()[t].faces[k];
    local.resize(static_cast<Eigen::Index>(f.size()));
    for (std::size_t j = 0; j < f.size(); ++j) local[static_cast<Eigen::Index>(j)] = xi[f[j]];
  }

 private:
  void check(const Cochain& xi) const {
    if (!xi.mesh || (xi.mesh != mesh_ && xi.mesh->hash() != mesh_->hash()))
      throw ValidationError("cochain belongs to a different mesh");
  }

  std::shared_ptr<const SimplicialComplex> mesh_;
  std::vector<std::vector<Matrix>> gram_;
  std::vector<MassOperator> mass_;
  std::vector<SparseMatrix> deriv_;
};

// Cochain files: a small text format keyed by simplex index and tied to a
// mesh by its hash.
//
//     # hodgemax cochain
//     mesh <hash>
//     degree <k>
//     count <N>
//     <index> <value>
inline void write_cochain(std::ostream& out, const Cochain& c) {
  out << "# hodgemax cochain\n";
  out << "mesh " << c.mesh->hash() << "\n";
  out << "degree " << c.degree << "\n";
  out << "count " << c.values.size() << "\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < c.values.size(); ++i) out << i << ' ' << c.values[i] << "\n";
}

inline void save_cochain(const std::string& path, const Cochain& c) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ValidationError("cannot write cochain file '" + path + "'");
    write_cochain(out, c);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw ValidationError("cannot move cochain file into place");
}

inline Cochain read_cochain(std::istream& in, std::shared_ptr<const SimplicialComplex> mesh) {
  std::string line, hash;
  int degree = -1;
  Index count = -1;
  Vector values;
  std::vector<bool> seen;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "mesh") {
      ss >> hash;
    } else if (key == "degree") {
      ss >> degree;
    } else if (key == "count") {
      ss >> count;
      if (count < 0) throw ValidationError("cochain file: bad count");
      values = Vector::Zero(count);
      seen.assign(static_cast<std::size_t>(count), false);
    } else {
      if (count < 0) throw ValidationError("cochain file: values before count");
      Index idx = std::stoll(key);
      double v;
      if (!(ss >> v) || idx < 0 || idx >= count) throw ValidationError("cochain file: bad value line");
      values[idx] = v;
      seen[idx] = true;
    }
  }
  if (hash != mesh->hash()) throw ValidationError("cochain file mesh hash " + hash + " does not match mesh " + mesh->hash());
  for (bool s : seen)
    if (!s) throw ValidationError("cochain file: missing coefficients");
  return {std::move(mesh), degree, std::move(values)};
}

inline Cochain load_cochain(const std::string& path, std::shared_ptr<const SimplicialComplex> mesh) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open cochain file '" + path + "'");
  return read_cochain(in, std::move(mesh));
}

}  // namespace hodgemax
