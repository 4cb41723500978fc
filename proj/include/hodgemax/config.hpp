#pragma once

// Run configuration: a flat key-value file with sections, read with
// Boost.PropertyTree's INI parser. Unknown keys are rejected so typos do not
// silently fall back to defaults.

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hodgemax/continuation.hpp"

namespace hodgemax {

struct MeshSource {
  std::string type = "torus";  // torus | sphere | file
  int dimension = 3;
  int resolution = 4;
  int subdivisions = 1;
  std::string path;

  [[nodiscard]] SimplicialComplex build() const {
    if (type == "torus") return build_flat_torus(dimension, resolution);
    if (type == "sphere") return build_sphere(subdivisions);
    if (type == "file") return load_mesh(path);
    throw ValidationError("mesh.type must be torus, sphere or file (got '" + type + "')");
  }
  [[nodiscard]] std::string describe() const {
    if (type == "torus") return "torus " + std::to_string(dimension) + " " + std::to_string(resolution);
    if (type == "sphere") return "sphere " + std::to_string(subdivisions);
    return "file " + path;
  }
};

struct ModelConfig {
  std::string family = "shifted_power";  // power_law | shifted_power | linear
  double p = 3.0;
  double epsilon = 1.0;
  double t_max_audit = 1e4;
  Index samples = 100000;

  [[nodiscard]] NonlinearityModel build() const {
    if (family == "power_law") return power_law(p);
    if (family == "shifted_power") return shifted_power(epsilon, p);
    if (family == "linear") return linear_model();
    throw ValidationError("model.family must be power_law, shifted_power or linear (got '" + family + "')");
  }
};

struct RunConfig {
  MeshSource mesh;
  int degree = 1;
  ModelConfig model;
  InnerSolveConfig inner;
  SaddleConfig saddle;
  double first_level = 0.01;
  int frame_count = 2;
  double frame_gap = 0.05;
  ContinuationSchedule schedule;
  std::string output_directory = "hodgemax-out";
  unsigned seed = 1;
  Index embedding_probes = 64;

  /// Checks that need no mesh.
  void validate() const {
    if (degree < 1) throw ValidationError("problem.degree must be >= 1");
    if (mesh.type == "torus" && degree > mesh.dimension - 1)
      throw ValidationError("problem.degree must satisfy 1 <= k <= n-1");
    if (mesh.type == "sphere" && degree > 1) throw ValidationError("problem.degree must satisfy 1 <= k <= n-1");
    if (frame_count < 1) throw ValidationError("frames.count must be >= 1");
    if (!(first_level > 0.0)) throw ValidationError("frames.first_level must be positive");
    if (!(frame_gap >= 0.0)) throw ValidationError("frames.gap must be nonnegative");
    if (model.samples < 16) throw ValidationError("model.samples must be >= 16");
    if (!(model.t_max_audit > 1.0)) throw ValidationError("model.t_max_audit must exceed 1");
    inner.validate();
    schedule.validate();
  }

  /// Checks against the mesh dimension n: 1 <= k <= n-1 and, for n >= 3,
  /// p in ]2, 2n/(n-2)[.
  void validate_for(int n) const {
    if (degree < 1 || degree > n - 1) throw ValidationError("problem.degree must satisfy 1 <= k <= n-1");
    if (model.family != "linear" && n >= 3 && !in_exponent_window(n, model.p))
      throw ValidationError("model.p = " + std::to_string(model.p) + " is outside ]2, 2n/(n-2)[ for n = " +
                            std::to_string(n));
  }

  [[nodiscard]] AuditOptions audit_options(int n) const {
    AuditOptions o;
    o.t_max = model.t_max_audit;
    o.samples = model.samples;
    o.mesh_dimension = n;
    o.seed = seed;
    return o;
  }

  /// Canonical "section.key=value" lines in a fixed order; hashed for
  /// provenance. The output directory is left out since it cannot change results.
  [[nodiscard]] std::string canonical() const {
    std::ostringstream s;
    s.precision(17);
    s << "mesh.type=" << mesh.type << "\nmesh.dimension=" << mesh.dimension << "\nmesh.resolution=" << mesh.resolution
      << "\nmesh.subdivisions=" << mesh.subdivisions << "\nmesh.path=" << mesh.path << "\nproblem.degree=" << degree
      << "\nmodel.family=" << model.family << "\nmodel.p=" << model.p << "\nmodel.epsilon=" << model.epsilon
      << "\nmodel.t_max_audit=" << model.t_max_audit << "\nmodel.samples=" << model.samples
      << "\ninner.gradient_tolerance=" << inner.gradient_tolerance
      << "\ninner.relative_tolerance=" << inner.relative_tolerance << "\ninner.max_newton_steps=" << inner.max_newton_steps
      << "\nsolver.max_descent_steps=" << saddle.max_descent_steps << "\nsolver.descent_tolerance=" << saddle.descent_tolerance
      << "\nsolver.max_newton_steps=" << saddle.max_newton_steps << "\nsolver.gradient_tolerance=" << saddle.gradient_tolerance
      << "\nsolver.residual_accept=" << saddle.residual_accept << "\nsolver.distinct_threshold=" << saddle.distinct_threshold
      << "\nsolver.max_seeds=" << saddle.max_seeds << "\nsolver.points_per_frame=" << saddle.points_per_frame
      << "\nframes.first_level=" << first_level << "\nframes.count=" << frame_count << "\nframes.gap=" << frame_gap
      << "\nschedule.epsilon0=" << schedule.epsilon0 << "\nschedule.ratio=" << schedule.ratio
      << "\nschedule.max_steps=" << schedule.max_steps << "\nschedule.limit_tolerance=" << schedule.limit_tolerance
      << "\nschedule.residual_target=" << schedule.residual_target << "\nschedule.proxy_factor=" << schedule.proxy_factor
      << "\noutput.seed=" << seed
      << "\noutput.embedding_probes=" << embedding_probes << "\n";
    return s.str();
  }

  [[nodiscard]] std::string hash() const {
    const std::string c = canonical();
    return detail::hex64(detail::fnv1a(c.data(), c.size(), 1469598103934665603ULL));
  }
};

namespace detail {

template <class T>
void read_key(const boost::property_tree::ptree& pt, const std::string& key, T& out) {
  if (auto v = pt.get_optional<std::string>(key)) {
    std::istringstream in(*v);
    T value{};
    in >> value;
    if (!in || !(in >> std::ws).eof()) throw ValidationError("config key '" + key + "': cannot parse '" + *v + "'");
    out = value;
  }
}

inline void read_key(const boost::property_tree::ptree& pt, const std::string& key, std::string& out) {
  if (auto v = pt.get_optional<std::string>(key)) out = *v;
}

}  // namespace detail

/// Parse a configuration from INI text. Missing keys keep their defaults.
inline RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }
  static const std::map<std::string, std::set<std::string>> known = {
      {"mesh", {"type", "dimension", "resolution", "subdivisions", "path"}},
      {"problem", {"degree"}},
      {"model", {"family", "p", "epsilon", "t_max_audit", "samples"}},
      {"inner", {"gradient_tolerance", "relative_tolerance", "max_newton_steps"}},
      {"solver", {"max_descent_steps", "descent_tolerance", "max_newton_steps", "gradient_tolerance",
                  "residual_accept", "distinct_threshold", "max_seeds", "points_per_frame"}},
      {"frames", {"first_level", "count", "gap"}},
      {"schedule", {"epsilon0", "ratio", "max_steps", "limit_tolerance", "residual_target", "proxy_factor"}},
      {"output", {"directory", "seed", "embedding_probes"}}};
  for (const auto& [section, body] : pt) {
    auto it = known.find(section);
    if (it == known.end()) throw ValidationError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ValidationError("config: unknown key " + section + "." + key);
  }
  RunConfig c;
  using detail::read_key;
  read_key(pt, "mesh.type", c.mesh.type);
  read_key(pt, "mesh.dimension", c.mesh.dimension);
  read_key(pt, "mesh.resolution", c.mesh.resolution);
  read_key(pt, "mesh.subdivisions", c.mesh.subdivisions);
  read_key(pt, "mesh.path", c.mesh.path);
  read_key(pt, "problem.degree", c.degree);
  read_key(pt, "model.family", c.model.family);
  read_key(pt, "model.p", c.model.p);
  read_key(pt, "model.epsilon", c.model.epsilon);
  read_key(pt, "model.t_max_audit", c.model.t_max_audit);
  read_key(pt, "model.samples", c.model.samples);
  read_key(pt, "inner.gradient_tolerance", c.inner.gradient_tolerance);
  read_key(pt, "inner.relative_tolerance", c.inner.relative_tolerance);
  read_key(pt, "inner.max_newton_steps", c.inner.max_newton_steps);
  read_key(pt, "solver.max_descent_steps", c.saddle.max_descent_steps);
  read_key(pt, "solver.descent_tolerance", c.saddle.descent_tolerance);
  read_key(pt, "solver.max_newton_steps", c.saddle.max_newton_steps);
  read_key(pt, "solver.gradient_tolerance", c.saddle.gradient_tolerance);
  read_key(pt, "solver.residual_accept", c.saddle.residual_accept);
  read_key(pt, "solver.distinct_threshold", c.saddle.distinct_threshold);
  read_key(pt, "solver.max_seeds", c.saddle.max_seeds);
  read_key(pt, "solver.points_per_frame", c.saddle.points_per_frame);
  read_key(pt, "frames.first_level", c.first_level);
  read_key(pt, "frames.count", c.frame_count);
  read_key(pt, "frames.gap", c.frame_gap);
  read_key(pt, "schedule.epsilon0", c.schedule.epsilon0);
  read_key(pt, "schedule.ratio", c.schedule.ratio);
  read_key(pt, "schedule.max_steps", c.schedule.max_steps);
  read_key(pt, "schedule.limit_tolerance", c.schedule.limit_tolerance);
  read_key(pt, "schedule.residual_target", c.schedule.residual_target);
  read_key(pt, "schedule.proxy_factor", c.schedule.proxy_factor);
  read_key(pt, "output.directory", c.output_directory);
  read_key(pt, "output.seed", c.seed);
  read_key(pt, "output.embedding_probes", c.embedding_probes);
  c.schedule.saddle = c.saddle;
  c.schedule.inner = c.inner;
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace hodgemax
