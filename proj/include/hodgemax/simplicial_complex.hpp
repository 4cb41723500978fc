#pragma once

// Oriented simplicial complexes of closed manifolds: builders, a text mesh
// format, signed boundary matrices and per-simplex metric volumes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hodgemax/error.hpp"

namespace hodgemax {

using Index = std::int64_t;
using IntSparse = Eigen::SparseMatrix<int>;

namespace detail {

/// All (k+1)-subsets of {0..n} in lexicographic order.
inline std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k + 1);
  for (int i = 0; i <= k; ++i) cur[i] = i;
  if (k > n) return out;
  while (true) {
    out.push_back(cur);
    int i = k;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j <= k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = digits[h & 0xf];
  return s;
}

/// Rank over GF(2^31-1). Matches the rational rank for torsion-free complexes.
inline Index rank_mod_p(const IntSparse& m) {
  constexpr std::int64_t p = 2147483647;
  const Index rows = m.rows(), cols = m.cols();
  if (rows == 0 || cols == 0) return 0;
  std::vector<std::vector<std::int64_t>> a(rows, std::vector<std::int64_t>(cols, 0));
  for (int c = 0; c < m.outerSize(); ++c)
    for (IntSparse::InnerIterator it(m, c); it; ++it) a[it.row()][it.col()] = (it.value() % p + p) % p;
  auto pow_mod = [](std::int64_t b, std::int64_t e) {
    std::int64_t r = 1;
    b %= p;
    while (e > 0) {
      if (e & 1) r = r * b % p;
      b = b * b % p;
      e >>= 1;
    }
    return r;
  };
  Index rank = 0;
  for (Index c = 0; c < cols && rank < rows; ++c) {
    Index piv = -1;
    for (Index r = rank; r < rows; ++r)
      if (a[r][c] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(a[piv], a[rank]);
    const std::int64_t inv = pow_mod(a[rank][c], p - 2);
    for (Index r = rank + 1; r < rows; ++r) {
      if (a[r][c] == 0) continue;
      const std::int64_t factor = a[r][c] * inv % p;
      for (Index j = c; j < cols; ++j) {
        if (a[rank][j] == 0) continue;
        a[r][j] = ((a[r][j] - factor * a[rank][j]) % p + p) % p;
      }
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// A triangulated closed n-manifold. Immutable once built.
///
/// Every k-simplex carries a global orientation given by the order of its
/// vertex list. Top cells store their vertices in the same increasing order
/// used for their faces, so every local face of a cell has the orientation of
/// the global simplex it maps to; the cell's orientation relative to the
/// manifold is kept separately in `Cell::orientation`.
class SimplicialComplex {
 public:
  struct Cell {
    Eigen::MatrixXd positions;              // ambient_dim x (n+1), unwrapped
    std::vector<std::vector<Index>> faces;  // faces[k][j]: global index of local k-face j
    int orientation = 1;
  };

  [[nodiscard]] int dimension() const { return dim_; }
  [[nodiscard]] int ambient_dimension() const { return ambient_; }
  [[nodiscard]] Index count(int k) const { return static_cast<Index>(simplices_.at(k).size()); }
  [[nodiscard]] const std::vector<Index>& simplex(int k, Index i) const { return simplices_.at(k).at(i); }
  [[nodiscard]] const std::vector<Cell>& cells() const { return cells_; }
  [[nodiscard]] const Eigen::MatrixXd& vertex_coordinates() const { return coords_; }
  [[nodiscard]] const std::optional<Eigen::VectorXd>& periodic_lengths() const { return periodic_; }
  [[nodiscard]] const std::vector<double>& volumes(int k) const { return volumes_.at(k); }
  [[nodiscard]] double total_volume() const {
    double v = 0.0;
    for (double x : volumes_.at(dim_)) v += x;
    return v;
  }
  [[nodiscard]] Index euler_characteristic() const {
    Index chi = 0;
    for (int k = 0; k <= dim_; ++k) chi += (k % 2 == 0 ? 1 : -1) * count(k);
    return chi;
  }

  /// Signed incidence matrix of shape (#(k-1)-simplices) x (#k-simplices).
  [[nodiscard]] const IntSparse& boundary(int k) const {
    if (k < 1 || k > dim_)
      throw ValidationError("boundary_matrix: degree " + std::to_string(k) + " outside [1, " +
                            std::to_string(dim_) + "]");
    return boundary_[k];
  }

  [[nodiscard]] std::vector<Index> betti_numbers() const {
    std::vector<Index> ranks(dim_ + 2, 0);
    for (int k = 1; k <= dim_; ++k) ranks[k] = detail::rank_mod_p(boundary_[k]);
    std::vector<Index> b(dim_ + 1);
    for (int k = 0; k <= dim_; ++k) b[k] = count(k) - ranks[k] - ranks[k + 1];
    return b;
  }

  /// Content hash over topology and geometry; used to tie cochains to meshes.
  [[nodiscard]] const std::string& hash() const { return hash_; }

  /// Table of local k-faces of a top cell (lexicographic subsets of 0..n).
  [[nodiscard]] const std::vector<std::vector<int>>& local_faces(int k) const { return local_faces_.at(k); }

 private:
  friend class ComplexAssembler;

  int dim_ = 0;
  int ambient_ = 0;
  std::vector<std::vector<std::vector<Index>>> simplices_;
  std::vector<IntSparse> boundary_;
  std::vector<Cell> cells_;
  std::vector<std::vector<double>> volumes_;
  std::vector<std::vector<std::vector<int>>> local_faces_;
  Eigen::MatrixXd coords_;
  std::optional<Eigen::VectorXd> periodic_;
  std::string hash_;
};

/// Volume of the simplex spanned by the columns of `pts`.
inline double simplex_volume(const Eigen::MatrixXd& pts) {
  const Eigen::Index k = pts.cols() - 1;
  if (k == 0) return 1.0;
  Eigen::MatrixXd e(pts.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) e.col(j) = pts.col(j + 1) - pts.col(0);
  const double g = (e.transpose() * e).determinant();
  double fact = 1.0;
  for (Eigen::Index j = 2; j <= k; ++j) fact *= static_cast<double>(j);
  return std::sqrt(std::max(g, 0.0)) / fact;
}

/// Incremental construction of a complex from its top cells.
///
/// Simplices are identified by keys made of integer points. For ordinary
/// meshes a point is {vertex id, 0, 0}. For periodic lattices a point is its
/// lattice coordinate and keys are reduced modulo the period, which lets the
/// resolution-2 torus (where distinct edges share both endpoints) be
/// represented faithfully.
class ComplexAssembler {
 public:
  using Point = std::array<int, 3>;
  using Key = std::vector<Point>;

  ComplexAssembler(int dim, int ambient, int lattice_period = 0)
      : dim_(dim), ambient_(ambient), period_(lattice_period), index_(dim + 1), keys_(dim + 1) {
    for (int k = 0; k <= dim; ++k) local_faces_.push_back(detail::combinations(dim, k));
  }

  /// `points` must be sorted increasingly; `positions` holds matching columns.
  void add_cell(const Key& points, const Eigen::MatrixXd& positions, int orientation) {
    SimplicialComplex::Cell cell;
    cell.positions = positions;
    cell.orientation = orientation;
    cell.faces.resize(dim_ + 1);
    for (int k = 0; k <= dim_; ++k) {
      for (const auto& combo : local_faces_[k]) {
        Key sub;
        Eigen::MatrixXd pos(positions.rows(), k + 1);
        for (int j = 0; j <= k; ++j) {
          sub.push_back(points[combo[j]]);
          pos.col(j) = positions.col(combo[j]);
        }
        const Key key = canonical(sub);
        auto [it, inserted] = index_[k].try_emplace(key, static_cast<Index>(keys_[k].size()));
        if (inserted) {
          keys_[k].push_back(key);
          face_volumes_[k].push_back(simplex_volume(pos));
        }
        cell.faces[k].push_back(it->second);
      }
    }
    cells_.push_back(std::move(cell));
  }

  SimplicialComplex finish(Eigen::MatrixXd vertex_coords, std::optional<Eigen::VectorXd> periodic) {
    SimplicialComplex c;
    c.dim_ = dim_;
    c.ambient_ = ambient_;
    c.local_faces_ = local_faces_;
    c.cells_ = std::move(cells_);
    c.coords_ = std::move(vertex_coords);
    c.periodic_ = std::move(periodic);
    c.simplices_.resize(dim_ + 1);
    c.volumes_.resize(dim_ + 1);
    for (int k = 0; k <= dim_; ++k) {
      c.volumes_[k] = face_volumes_[k];
      for (const Key& key : keys_[k]) {
        std::vector<Index> verts;
        for (const Point& pt : key) verts.push_back(vertex_id(pt));
        c.simplices_[k].push_back(std::move(verts));
      }
    }
    c.boundary_.resize(dim_ + 1);
    for (int k = 1; k <= dim_; ++k) {
      std::vector<Eigen::Triplet<int>> trips;
      for (Index s = 0; s < static_cast<Index>(keys_[k].size()); ++s) {
        const Key& key = keys_[k][s];
        for (int j = 0; j <= k; ++j) {
          Key face;
          for (int i = 0; i <= k; ++i)
            if (i != j) face.push_back(key[i]);
          const Index f = index_[k - 1].at(canonical(face));
          trips.emplace_back(static_cast<int>(f), static_cast<int>(s), (j % 2 == 0) ? 1 : -1);
        }
      }
      c.boundary_[k].resize(static_cast<Eigen::Index>(keys_[k - 1].size()),
                            static_cast<Eigen::Index>(keys_[k].size()));
      c.boundary_[k].setFromTriplets(trips.begin(), trips.end());
    }
    validate_closed(c);
    c.hash_ = compute_hash(c);
    return c;
  }

 private:
  Key canonical(Key key) const {
    std::sort(key.begin(), key.end());
    if (period_ > 0) {
      Point shift{};
      for (int a = 0; a < 3; ++a) {
        const int q = key.front()[a] >= 0 ? key.front()[a] / period_ : -((-key.front()[a] + period_ - 1) / period_);
        shift[a] = q * period_;
      }
      for (Point& pt : key)
        for (int a = 0; a < 3; ++a) pt[a] -= shift[a];
    }
    return key;
  }

  Index vertex_id(const Point& pt) const {
    if (period_ == 0) return pt[0];
    Index id = 0, stride = 1;
    for (int a = 0; a < dim_; ++a) {
      const int r = ((pt[a] % period_) + period_) % period_;
      id += r * stride;
      stride *= period_;
    }
    return id;
  }

  void validate_closed(const SimplicialComplex& c) const {
    const IntSparse& top = c.boundary_[dim_];
    std::vector<int> incidence(static_cast<std::size_t>(top.rows()), 0);
    for (int col = 0; col < top.outerSize(); ++col)
      for (IntSparse::InnerIterator it(top, col); it; ++it) ++incidence[it.row()];
    for (std::size_t f = 0; f < incidence.size(); ++f)
      if (incidence[f] != 2)
        throw ValidationError("non-manifold mesh: (n-1)-simplex " + std::to_string(f) + " is a face of " +
                              std::to_string(incidence[f]) + " top cells (expected 2)");
    // Orientability: the signed cell orientations must form a top cycle.
    Eigen::VectorXi o(static_cast<Eigen::Index>(c.cells_.size()));
    for (std::size_t t = 0; t < c.cells_.size(); ++t) o[static_cast<Eigen::Index>(t)] = c.cells_[t].orientation;
    const Eigen::VectorXi cycle = top * o;
    if (cycle.cwiseAbs().maxCoeff() != 0)
      throw ValidationError("cell orientations are inconsistent (not a fundamental cycle)");
  }

  static std::string compute_hash(const SimplicialComplex& c) {
    std::uint64_t h = 1469598103934665603ULL;
    const int dim = c.dimension();
    h = detail::fnv1a(&dim, sizeof dim, h);
    for (int k = 0; k <= dim; ++k) {
      const Index n = c.count(k);
      h = detail::fnv1a(&n, sizeof n, h);
    }
    for (const auto& cell : c.cells()) {
      for (Index f : cell.faces[0]) h = detail::fnv1a(&f, sizeof f, h);
      h = detail::fnv1a(cell.positions.data(), sizeof(double) * static_cast<std::size_t>(cell.positions.size()), h);
    }
    return detail::hex64(h);
  }

  int dim_;
  int ambient_;
  int period_;
  std::vector<std::map<Key, Index>> index_;
  std::vector<std::vector<Key>> keys_;
  std::map<int, std::vector<double>> face_volumes_;
  std::vector<std::vector<std::vector<int>>> local_faces_;
  std::vector<SimplicialComplex::Cell> cells_;
};

/// Unit flat n-torus, n in {2, 3}: a periodic grid of n-cubes, each cut
/// into n! simplices along the main diagonal.
inline SimplicialComplex build_flat_torus(int n, int resolution) {
  if (n != 2 && n != 3) throw ValidationError("build_flat_torus: unsupported dimension " + std::to_string(n));
  if (resolution < 2) throw ValidationError("build_flat_torus: resolution must be >= 2");
  const int r = resolution;
  const double h = 1.0 / r;
  ComplexAssembler assembler(n, n, r);

  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::vector<std::vector<int>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  const int cubes = n == 2 ? r * r : r * r * r;
  for (int c = 0; c < cubes; ++c) {
    std::array<int, 3> base{c % r, (c / r) % r, n == 3 ? c / (r * r) : 0};
    for (const auto& pm : perms) {
      ComplexAssembler::Key pts;
      Eigen::MatrixXd pos(n, n + 1);
      std::array<int, 3> cur = base;
      pts.push_back(cur);
      for (int j = 0; j < n; ++j) {
        ++cur[pm[j]];
        pts.push_back(cur);
      }
      for (int j = 0; j <= n; ++j)
        for (int a = 0; a < n; ++a) pos(a, j) = pts[j][a] * h;
      Eigen::MatrixXd e(n, n);
      for (int j = 0; j < n; ++j) e.col(j) = pos.col(j + 1) - pos.col(0);
      const int orient = e.determinant() > 0 ? 1 : -1;
      assembler.add_cell(pts, pos, orient);
    }
  }

  const Index nv = n == 2 ? Index{r} * r : Index{r} * r * r;
  Eigen::MatrixXd coords(n, nv);
  for (Index v = 0; v < nv; ++v) {
    Index rem = v;
    for (int a = 0; a < n; ++a) {
      coords(a, v) = static_cast<double>(rem % r) * h;
      rem /= r;
    }
  }
  return assembler.finish(std::move(coords), Eigen::VectorXd::Ones(n));
}

namespace detail {

/// Shared path for meshes given as vertex coordinates plus oriented cells.
inline SimplicialComplex assemble_from_cells(const Eigen::MatrixXd& coords,
                                             const std::vector<std::vector<Index>>& cells_in,
                                             const std::optional<Eigen::VectorXd>& periodic) {
  if (cells_in.empty()) throw ValidationError("mesh has no cells");
  const int n = static_cast<int>(cells_in.front().size()) - 1;
  const int ambient = static_cast<int>(coords.rows());
  if (n < 1 || n > ambient) throw ValidationError("cell arity inconsistent with vertex coordinates");
  const Index nv = coords.cols();

  // Sorted vertex order per cell, with the parity of the sort as the listed orientation.
  std::vector<std::vector<Index>> sorted(cells_in.size());
  std::vector<int> parity(cells_in.size(), 1);
  for (std::size_t t = 0; t < cells_in.size(); ++t) {
    std::vector<Index> c = cells_in[t];
    if (static_cast<int>(c.size()) != n + 1) throw ValidationError("cells have mixed arity");
    for (Index v : c)
      if (v < 0 || v >= nv) throw ValidationError("cell references unknown vertex " + std::to_string(v));
    int sign = 1;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j + 1 < c.size() - i; ++j)
        if (c[j] > c[j + 1]) {
          std::swap(c[j], c[j + 1]);
          sign = -sign;
        }
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
      if (c[i] == c[i + 1]) throw ValidationError("degenerate cell with repeated vertex");
    sorted[t] = std::move(c);
    parity[t] = sign;
  }

  // Infer a consistent orientation by propagating across shared facets,
  // starting from the listed orientation of each component's first cell.
  std::map<std::vector<Index>, std::vector<std::pair<std::size_t, int>>> facets;
  for (std::size_t t = 0; t < sorted.size(); ++t)
    for (int j = 0; j <= n; ++j) {
      std::vector<Index> f;
      for (int i = 0; i <= n; ++i)
        if (i != j) f.push_back(sorted[t][i]);
      facets[f].emplace_back(t, (j % 2 == 0) ? 1 : -1);
    }
  for (const auto& [f, inc] : facets)
    if (inc.size() != 2)
      throw ValidationError("non-manifold mesh: a facet is shared by " + std::to_string(inc.size()) +
                            " cells (expected 2)");
  std::vector<std::vector<std::pair<std::size_t, int>>> adj(sorted.size());
  for (const auto& [f, inc] : facets) {
    // o_a * s_a + o_b * s_b = 0  =>  o_b = -o_a * s_a * s_b
    const int rel = -inc[0].second * inc[1].second;
    adj[inc[0].first].emplace_back(inc[1].first, rel);
    adj[inc[1].first].emplace_back(inc[0].first, rel);
  }
  std::vector<int> orient(sorted.size(), 0);
  for (std::size_t seed = 0; seed < sorted.size(); ++seed) {
    if (orient[seed] != 0) continue;
    orient[seed] = parity[seed];
    std::vector<std::size_t> stack{seed};
    while (!stack.empty()) {
      const std::size_t t = stack.back();
      stack.pop_back();
      for (auto [u, rel] : adj[t]) {
        const int want = orient[t] * rel;
        if (orient[u] == 0) {
          orient[u] = want;
          stack.push_back(u);
        } else if (orient[u] != want) {
          throw ValidationError("non-orientable mesh: no consistent orientation exists");
        }
      }
    }
  }

  ComplexAssembler assembler(n, ambient, 0);
  for (std::size_t t = 0; t < sorted.size(); ++t) {
    ComplexAssembler::Key pts;
    Eigen::MatrixXd pos(ambient, n + 1);
    const Eigen::VectorXd p0 = coords.col(sorted[t][0]);
    for (int j = 0; j <= n; ++j) {
      const Index v = sorted[t][j];
      pts.push_back({static_cast<int>(v), 0, 0});
      Eigen::VectorXd delta = coords.col(v) - p0;
      if (periodic)
        for (int a = 0; a < ambient; ++a) {
          const double len = (*periodic)[a];
          if (len > 0) delta[a] -= len * std::round(delta[a] / len);
        }
      pos.col(j) = p0 + delta;
    }
    if (simplex_volume(pos) <= 0.0) throw ValidationError("degenerate cell with zero volume");
    assembler.add_cell(pts, pos, orient[t]);
  }
  return assembler.finish(coords, periodic);
}

}  // namespace detail

/// Icosahedral sphere, subdivided `subdivisions` times and projected onto the
/// unit sphere. Triangles are flat (induced metric of the embedded mesh).
inline SimplicialComplex build_sphere(int subdivisions) {
  if (subdivisions < 0) throw ValidationError("build_sphere: subdivisions must be >= 0");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
      {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<Index, 3>> faces = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<Index, Index>, Index> midpoint;
    auto mid = [&](Index a, Index b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const Index id = static_cast<Index>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<Index, 3>> next;
    for (const auto& f : faces) {
      const Index a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }
  Eigen::MatrixXd coords(3, static_cast<Eigen::Index>(verts.size()));
  for (std::size_t i = 0; i < verts.size(); ++i) coords.col(static_cast<Eigen::Index>(i)) = verts[i];
  std::vector<std::vector<Index>> cells;
  for (const auto& f : faces) {
    // Outward orientation: (b - a) x (c - a) points away from the origin.
    const Eigen::Vector3d a = verts[f[0]], b = verts[f[1]], c = verts[f[2]];
    if ((b - a).cross(c - a).dot(a) >= 0)
      cells.push_back({f[0], f[1], f[2]});
    else
      cells.push_back({f[0], f[2], f[1]});
  }
  return detail::assemble_from_cells(coords, cells, std::nullopt);
}

/// Parse the text mesh format:
///
///     # comment
///     periodic 1 1 1        (optional; fundamental-domain lengths per axis)
///     vertices <count> <coordinate dimension>
///     <index> <x> <y> ...
///     cells <count> <vertices per cell>
///     <v0> <v1> ...         (orientation given by listed order)
inline SimplicialComplex parse_mesh(std::istream& in) {
  std::string line;
  std::optional<Eigen::VectorXd> periodic;
  Eigen::MatrixXd coords;
  std::vector<std::vector<Index>> cells;
  int line_no = 0;
  auto next_data_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      if (auto hash = out.find('#'); hash != std::string::npos) out.erase(hash);
      if (out.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  auto fail = [&](const std::string& msg) {
    throw ValidationError("mesh parse error at line " + std::to_string(line_no) + ": " + msg);
  };
  bool have_vertices = false, have_cells = false;
  while (next_data_line(line)) {
    std::istringstream ss(line);
    std::string section;
    ss >> section;
    if (section == "periodic") {
      std::vector<double> lens;
      double x;
      while (ss >> x) lens.push_back(x);
      if (lens.empty()) fail("periodic needs at least one length");
      periodic = Eigen::Map<Eigen::VectorXd>(lens.data(), static_cast<Eigen::Index>(lens.size()));
    } else if (section == "vertices") {
      Index count = 0;
      int dim = 0;
      if (!(ss >> count >> dim) || count <= 0 || dim <= 0) fail("expected 'vertices <count> <dim>'");
      coords.resize(dim, count);
      std::vector<bool> seen(static_cast<std::size_t>(count), false);
      for (Index i = 0; i < count; ++i) {
        if (!next_data_line(line)) fail("unexpected end of vertex section");
        std::istringstream vs(line);
        Index idx;
        if (!(vs >> idx) || idx < 0 || idx >= count || seen[idx]) fail("bad vertex index");
        seen[idx] = true;
        for (int a = 0; a < dim; ++a)
          if (!(vs >> coords(a, idx))) fail("missing vertex coordinate");
      }
      have_vertices = true;
    } else if (section == "cells") {
      Index count = 0;
      int arity = 0;
      if (!(ss >> count >> arity) || count <= 0 || arity < 2) fail("expected 'cells <count> <arity>'");
      for (Index i = 0; i < count; ++i) {
        if (!next_data_line(line)) fail("unexpected end of cell section");
        std::istringstream cs(line);
        std::vector<Index> cell(arity);
        for (auto& v : cell)
          if (!(cs >> v)) fail("short cell line");
        cells.push_back(std::move(cell));
      }
      have_cells = true;
    } else {
      fail("unknown section '" + section + "'");
    }
  }
  if (!have_vertices || !have_cells) throw ValidationError("mesh parse error: missing vertices or cells section");
  if (periodic && periodic->size() != coords.rows())
    throw ValidationError("mesh parse error: periodic lengths do not match coordinate dimension");
  return detail::assemble_from_cells(coords, cells, periodic);
}

inline SimplicialComplex load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mesh file '" + path + "'");
  return parse_mesh(in);
}

/// Write a complex in the text mesh format. Cells are listed positively
/// oriented. Only complexes whose simplices are determined by their vertex
/// sets can be written (e.g. tori need resolution >= 3).
inline void write_mesh(std::ostream& out, const SimplicialComplex& c) {
  const int n = c.dimension();
  out << "# hodgemax mesh " << c.hash() << "\n";
  out.precision(17);
  if (const auto& per = c.periodic_lengths()) {
    out << "periodic";
    for (Eigen::Index a = 0; a < per->size(); ++a) out << ' ' << (*per)[a];
    out << "\n";
  }
  const auto& xyz = c.vertex_coordinates();
  out << "vertices " << xyz.cols() << ' ' << xyz.rows() << "\n";
  for (Eigen::Index v = 0; v < xyz.cols(); ++v) {
    out << v;
    for (Eigen::Index a = 0; a < xyz.rows(); ++a) out << ' ' << xyz(a, v);
    out << "\n";
  }
  out << "cells " << c.cells().size() << ' ' << n + 1 << "\n";
  for (const auto& cell : c.cells()) {
    std::vector<Index> verts;
    for (Index f : cell.faces[0]) verts.push_back(c.simplex(0, f).front());
    std::vector<Index> uniq = verts;
    std::sort(uniq.begin(), uniq.end());
    if (std::adjacent_find(uniq.begin(), uniq.end()) != uniq.end())
      throw ValidationError("write_mesh: a cell has repeated vertices; mesh needs a finer resolution");
    if (cell.orientation < 0) std::swap(verts[0], verts[1]);
    for (std::size_t j = 0; j < verts.size(); ++j) out << (j ? " " : "") << verts[j];
    out << "\n";
  }
}

inline IntSparse boundary_matrix(const SimplicialComplex& c, int k) { return c.boundary(k); }

}  // namespace hodgemax
