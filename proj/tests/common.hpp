#pragma once

#include <map>
#include <memory>
#include <random>
#include <string>

#include "hodgemax/hodgemax.hpp"

namespace testing_support {

using namespace hodgemax;

/// Meshes and Hodge spaces are costly; build each one once per process.
inline std::shared_ptr<const SimplicialComplex> torus(int n, int res) {
  static std::map<std::pair<int, int>, std::shared_ptr<const SimplicialComplex>> cache;
  auto& slot = cache[{n, res}];
  if (!slot) slot = std::make_shared<const SimplicialComplex>(build_flat_torus(n, res));
  return slot;
}

inline std::shared_ptr<const SimplicialComplex> sphere(int sub) {
  static std::map<int, std::shared_ptr<const SimplicialComplex>> cache;
  auto& slot = cache[sub];
  if (!slot) slot = std::make_shared<const SimplicialComplex>(build_sphere(sub));
  return slot;
}

inline std::shared_ptr<const FormSpaces> forms(const std::shared_ptr<const SimplicialComplex>& m) {
  static std::map<const SimplicialComplex*, std::shared_ptr<const FormSpaces>> cache;
  auto& slot = cache[m.get()];
  if (!slot) slot = std::make_shared<const FormSpaces>(m);
  return slot;
}

inline std::shared_ptr<const HodgeSpaces> hodge(const std::shared_ptr<const SimplicialComplex>& m, int k) {
  static std::map<std::pair<const SimplicialComplex*, int>, std::shared_ptr<const HodgeSpaces>> cache;
  auto& slot = cache[{m.get(), k}];
  if (!slot) slot = std::make_shared<const HodgeSpaces>(forms(m), k);
  return slot;
}

inline Vector gaussian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

/// Random coclosed cochain with H1-damped coefficients.
inline Vector random_coclosed(const HodgeSpaces& hs, std::mt19937_64& rng, double scale = 1.0) {
  Vector c = gaussian(hs.w_dimension(), rng);
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= scale / std::sqrt(1.0 + hs.w_eigenvalues()[i]);
  return hs.from_w_coordinates(c);
}

}  // namespace testing_support
