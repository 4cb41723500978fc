// hodgemax: command-line front end.
//
// Exit status: 0 success, 1 invalid input or configuration, 2 solver failure.

#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hodgemax/hodgemax.hpp"

namespace fs = std::filesystem;
using namespace hodgemax;

namespace {

struct MeshFlags {
  std::vector<int> torus;
  int sphere = -1;
  std::string file;

  void attach(CLI::App* app) {
    auto* t = app->add_option("--torus", torus, "flat torus: DIM RES")->expected(2);
    auto* s = app->add_option("--sphere", sphere, "octahedral sphere with SUB subdivisions");
    auto* m = app->add_option("--mesh", file, "mesh file");
    t->excludes(s)->excludes(m);
    s->excludes(m);
  }
  [[nodiscard]] bool given() const { return !torus.empty() || sphere >= 0 || !file.empty(); }
  [[nodiscard]] MeshSource source() const {
    MeshSource src;
    if (!torus.empty()) {
      src.type = "torus";
      src.dimension = torus[0];
      src.resolution = torus[1];
    } else if (sphere >= 0) {
      src.type = "sphere";
      src.subdivisions = sphere;
    } else if (!file.empty()) {
      src.type = "file";
      src.path = file;
    } else {
      throw ValidationError("one of --torus, --sphere or --mesh is required");
    }
    return src;
  }
};

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

int mesh_info(const MeshFlags& mf, bool as_json) {
  const SimplicialComplex c = mf.source().build();
  const int n = c.dimension();
  Json j;
  j["mesh_hash"] = c.hash();
  j["dimension"] = n;
  j["counts"] = Json::array();
  j["volumes"] = Json::array();
  for (int k = 0; k <= n; ++k) {
    j["counts"].push_back(c.count(k));
    double v = 0.0;
    for (double x : c.volumes(k)) v += x;
    j["volumes"].push_back(v);
  }
  j["betti"] = c.betti_numbers();
  j["euler_characteristic"] = c.euler_characteristic();
  if (as_json) {
    std::cout << dump_json(j);
    return 0;
  }
  std::cout.precision(17);
  std::cout << "dimension " << n << "\ncounts";
  for (int k = 0; k <= n; ++k) std::cout << ' ' << c.count(k);
  std::cout << "\nbetti";
  for (auto b : c.betti_numbers()) std::cout << ' ' << b;
  std::cout << "\nvolume";
  for (const auto& v : j["volumes"]) std::cout << ' ' << v.get<double>();
  std::cout << "\nchi " << c.euler_characteristic() << "\nhash " << c.hash() << "\n";
  return 0;
}

int spectrum(const RunConfig& cfg, const MeshFlags& mf, int degree, Index count, const fs::path& out) {
  const auto mesh = std::make_shared<const SimplicialComplex>(mf.given() ? mf.source().build() : cfg.mesh.build());
  const FormSpaces forms(mesh);
  const SpectralBasis sb = eigensolve_W(forms, degree, count);
  std::ostringstream csv;
  write_spectrum_csv(csv, sb);
  atomic_write(out / "spectrum.csv", csv.str());
  for (Index h = 0; h < sb.harmonic.cols(); ++h)
    save_cochain((out / ("harmonic_" + std::to_string(h) + ".cochain")).string(),
                 Cochain(mesh, degree, sb.harmonic.col(h)));
  std::cout << "eigenpairs " << sb.count() << " of " << sb.coexact_dimension << ", harmonic " << sb.harmonic.cols()
            << "\n";
  if (sb.count() > 0) std::cout << "lowest " << sb.eigenvalues[0] << "\n";
  return 0;
}

int audit(const RunConfig& cfg, bool convexity, Index pairs, const fs::path& out) {
  const NonlinearityModel model = cfg.model.build();
  const SimplicialComplex mesh = cfg.mesh.build();
  const auto rep = audit_hypotheses(model, cfg.audit_options(mesh.dimension()));
  Json j;
  j["config_hash"] = cfg.hash();
  j["mesh_hash"] = mesh.hash();
  j["model"] = model.name;
  j["audit"] = to_json(rep);
  if (convexity) {
    Json a = Json::array();
    for (int dim = 1; dim <= 4; ++dim) {
      auto r = to_json(audit_convexity_inequality(model.p, dim, pairs, cfg.seed));
      r["dimension"] = dim;
      a.push_back(r);
    }
    j["convexity"] = a;
  }
  atomic_write(out / "audit.json", dump_json(j));
  for (const auto& c : rep.checks) std::cout << c.name << ' ' << (c.pass ? "pass" : "FAIL") << "  " << c.detail << "\n";
  return 0;
}

int solve(const RunConfig& cfg, const fs::path& out) {
  const Problem pr = setup_problem(cfg);
  const SolveOutcome res = run_solve(cfg, pr);
  write_solve(out, res, pr, cfg.degree);
  for (const auto& r : res.records)
    std::cout << "band " << r.band << "  J " << r.value << "  residual " << r.weak_residual << "\n";
  std::cout << res.records.size() << " record(s) written to " << (out / "records.json").string() << "\n";
  if (res.records.empty()) {
    std::cerr << "solver failure: no critical point met the acceptance residual\n";
    return 2;
  }
  if (res.document["under_delivered"].get<bool>())
    std::cerr << "warning: fewer critical points than requested (" << res.records.size() << " of "
              << res.document["requested"].get<Index>() << ")\n";
  return 0;
}

int cont(const RunConfig& cfg, const fs::path& out) {
  const Problem pr = setup_problem(cfg);
  const ContinueOutcome res = run_continue(cfg, pr);
  write_continue(out, res, pr, cfg.degree);
  bool any = false;
  for (std::size_t i = 0; i < res.traces.size(); ++i) {
    const auto& lim = res.limits[i];
    std::cout << "trace " << i << ": " << res.traces[i].steps.size() << " steps";
    if (lim.refused) {
      std::cout << ", limit refused (" << lim.diagnostic << ")\n";
    } else {
      std::cout << ", limit J " << lim.record.value << ", residual " << lim.record.weak_residual
                << (lim.pass ? "" : " (above target)") << "\n";
      any = any || lim.pass;
    }
  }
  if (!any) {
    std::cerr << "solver failure: no trace produced an accepted limit\n";
    return 2;
  }
  return 0;
}

int verify(const RunConfig& cfg, const std::string& cochain, double tol, const fs::path& out, bool write) {
  const Problem pr = setup_problem(cfg);
  const Cochain xi = load_cochain(cochain, pr.mesh);
  const VerifyOutcome res = run_verify(cfg, pr, xi, tol);
  if (write) atomic_write(out / "verify.json", dump_json(res.document));
  std::cout << "residual " << res.residual << (res.trivial ? " (trivial)" : "") << (res.pass ? " pass" : " FAIL")
            << "\n";
  return res.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semilinear Hodge-Maxwell solver"};
  app.require_subcommand(1);

  MeshFlags info_mesh;
  bool info_json = false;
  auto* c_info = app.add_subcommand("mesh-info", "simplex counts, Betti numbers and volumes");
  info_mesh.attach(c_info);
  c_info->add_flag("--json", info_json, "print JSON");

  std::string config_path, out_dir, cochain_path;
  MeshFlags spec_mesh;
  int spec_degree = 1;
  Index spec_count = 0;
  auto* c_spec = app.add_subcommand("spectrum", "eigenpairs of delta d on coclosed forms");
  c_spec->add_option("--config", config_path, "run configuration");
  spec_mesh.attach(c_spec);
  c_spec->add_option("--degree", spec_degree, "form degree")->check(CLI::NonNegativeNumber);
  c_spec->add_option("--count", spec_count, "eigenpairs to keep (0 = all)")->check(CLI::NonNegativeNumber);
  c_spec->add_option("--out", out_dir, "output directory");

  bool convexity = false;
  Index pairs = 100000;
  auto* c_audit = app.add_subcommand("audit", "check the growth and convexity hypotheses of the model");
  c_audit->add_option("--config", config_path, "run configuration");
  c_audit->add_flag("--convexity", convexity, "also sample the two-point convexity inequality");
  c_audit->add_option("--pairs", pairs, "sample pairs per dimension")->check(CLI::PositiveNumber);
  c_audit->add_option("--out", out_dir, "output directory");

  auto* c_solve = app.add_subcommand("solve", "positive-mass min-max solve");
  c_solve->add_option("--config", config_path, "run configuration")->required();
  c_solve->add_option("--out", out_dir, "output directory (overrides the config)");

  auto* c_cont = app.add_subcommand("continue", "zero-mass continuation");
  c_cont->add_option("--config", config_path, "run configuration")->required();
  c_cont->add_option("--out", out_dir, "output directory (overrides the config)");

  double tol = 1e-7;
  auto* c_verify = app.add_subcommand("verify", "weak residual of a stored solution cochain");
  c_verify->add_option("--config", config_path, "run configuration")->required();
  c_verify->add_option("--cochain", cochain_path, "cochain file holding xi")->required();
  c_verify->add_option("--tolerance", tol, "acceptance threshold");
  c_verify->add_option("--out", out_dir, "write verify.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig cfg = config_or_default(config_path);
    const fs::path out = out_dir.empty() ? fs::path(cfg.output_directory) : fs::path(out_dir);
    if (c_info->parsed()) return mesh_info(info_mesh, info_json);
    if (c_spec->parsed()) return spectrum(cfg, spec_mesh, spec_degree, spec_count, out);
    if (c_audit->parsed()) return audit(cfg, convexity, pairs, out);
    if (c_solve->parsed()) return solve(cfg, out);
    if (c_cont->parsed()) return cont(cfg, out);
    if (c_verify->parsed()) return verify(cfg, cochain_path, tol, out, !out_dir.empty());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::validation ? 1 : 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
