// Acceptance run: one PASS/FAIL line per criterion with the measured values.
// Exit status is 0 only when every criterion passes.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "hodgemax/hodgemax.hpp"

using namespace hodgemax;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %2d %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Vector gaussian(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

using MeshPtr = std::shared_ptr<const SimplicialComplex>;
MeshPtr make(SimplicialComplex c) { return std::make_shared<const SimplicialComplex>(std::move(c)); }

std::vector<std::pair<std::string, MeshPtr>> criterion_meshes() {
  return {{"T2 res 4", make(build_flat_torus(2, 4))}, {"T2 res 8", make(build_flat_torus(2, 8))},
          {"T3 res 2", make(build_flat_torus(3, 2))}, {"T3 res 4", make(build_flat_torus(3, 4))},
          {"S2 sub 0", make(build_sphere(0))},        {"S2 sub 1", make(build_sphere(1))},
          {"S2 sub 2", make(build_sphere(2))}};
}

// Residual of the full equation recomputed on a freshly built mesh with raw
// local Gram blocks, probing every unit cochain.
double independent_residual(const MeshSource& src, const NonlinearityModel& model, int k, const Vector& xi) {
  const auto mesh = make(src.build());
  const FormSpaces sp(mesh);
  const int n = mesh->dimension();
  const Vector lhs = sp.derivative(k).transpose() * (sp.mass(k + 1).matrix * (sp.derivative(k) * xi));
  Vector rhs = Vector::Zero(xi.size());
  const auto& vol = mesh->volumes(n);
  for (std::size_t t = 0; t < mesh->cells().size(); ++t) {
    const auto& cell = mesh->cells()[t];
    const auto& f = cell.faces[k];
    Vector loc(static_cast<Index>(f.size()));
    for (std::size_t j = 0; j < f.size(); ++j) loc[static_cast<Index>(j)] = xi[f[j]];
    const Matrix g = whitney_gram(cell.positions, k);
    const Vector gx = g * loc;
    const double w = model.df(loc.dot(gx) / vol[t]);
    for (std::size_t j = 0; j < f.size(); ++j) rhs[f[j]] += w * gx[static_cast<Index>(j)];
  }
  return (lhs - rhs).cwiseAbs().maxCoeff() / (lhs.cwiseAbs() + rhs.cwiseAbs()).maxCoeff();
}

// ---------------------------------------------------------------------------

void chain_complex() {
  const auto t0 = Clock::now();
  bool exact = true;
  double worst = 0.0;
  std::mt19937_64 rng(1);
  for (const auto& [name, m] : criterion_meshes()) {
    for (int k = 2; k <= m->dimension(); ++k) {
      const IntSparse dd = m->boundary(k - 1) * m->boundary(k);
      for (int c = 0; c < dd.outerSize(); ++c)
        for (IntSparse::InnerIterator it(dd, c); it; ++it) exact = exact && it.value() == 0;
    }
    const FormSpaces sp(m);
    for (int k = 2; k <= m->dimension(); ++k) {
      const Vector x = gaussian(m->count(k), rng);
      const Cochain dd = sp.codifferential(sp.codifferential(Cochain(m, k, x)));
      worst = std::max(worst, dd.values.cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff());
    }
  }
  const double secs = seconds_since(t0);
  report(1, exact && worst <= 1e-10 && secs < 10.0,
         std::string("d d = 0 exactly: ") + (exact ? "yes" : "no") + ", max |delta delta| " + fmt("%.2e", worst) +
             ", " + fmt("%.1f s", secs));
}

void adjointness() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (const auto& [name, m] : criterion_meshes()) {
    const FormSpaces sp(m);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = trial % m->dimension();
      const Cochain a(m, k, gaussian(m->count(k), rng));
      const Cochain x(m, k + 1, gaussian(m->count(k + 1), rng));
      const Cochain da = sp.exterior_derivative(a);
      const double lhs = sp.l2_inner(da, x);
      const double rhs = sp.l2_inner(a, sp.codifferential(x));
      worst = std::max(worst, std::abs(lhs - rhs) / (sp.norm2(k + 1, da.values) * sp.norm2(k + 1, x.values)));
    }
  }
  report(2, worst <= 1e-10, "max relative |(d a, x) - (a, delta x)| over 100 pairs per mesh " + fmt("%.2e", worst));
}

// Kernel dimension of the full Hodge Laplacian by a dense generalized eigensolve.
Index laplacian_kernel(const FormSpaces& sp, int k) {
  const int n = sp.dimension();
  const Matrix mk = Matrix(sp.mass(k).matrix);
  Matrix s = Matrix::Zero(mk.rows(), mk.cols());
  if (k < n) {
    const Matrix d = Matrix(sp.derivative(k));
    s += d.transpose() * Matrix(sp.mass(k + 1).matrix) * d;
  }
  if (k > 0) {
    const Matrix d = Matrix(sp.derivative(k - 1));
    const Matrix md = mk * d;
    s += md * Matrix(sp.mass(k - 1).matrix).ldlt().solve(md.transpose());
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()), mk);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  Index zero = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i]) <= 1e-8 * top) ++zero;
  return zero;
}

void topology() {
  struct Case {
    std::string name;
    MeshPtr mesh;
    std::vector<Index> expected;
  };
  const std::vector<Case> cases = {{"T2", make(build_flat_torus(2, 4)), {1, 2, 1}},
                                   {"T3", make(build_flat_torus(3, 3)), {1, 3, 3, 1}},
                                   {"S2", make(build_sphere(1)), {1, 0, 1}}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const FormSpaces sp(c.mesh);
    std::vector<Index> ker;
    for (int k = 0; k <= c.mesh->dimension(); ++k) ker.push_back(laplacian_kernel(sp, k));
    ok = ok && ker == c.expected && c.mesh->betti_numbers() == c.expected;
    detail += c.name + " (";
    for (std::size_t i = 0; i < ker.size(); ++i) detail += (i ? "," : "") + std::to_string(ker[i]);
    detail += ") ";
  }
  report(3, ok, "dim ker Laplacian: " + detail);
}

void spectral_oracle() {
  const auto t0 = Clock::now();
  const double exact = 4.0 * M_PI * M_PI;
  std::vector<double> err;
  for (int res : {12, 24}) {
    const auto m = make(build_flat_torus(2, res));
    const FormSpaces sp(m);
    err.push_back(std::abs(eigensolve_W(sp, 0, 1).eigenvalues[0] - exact) / exact);
  }
  const double secs = seconds_since(t0);
  report(4, err[1] <= 0.03 && err[1] < err[0] && secs < 60.0,
         "relative error res 12 " + fmt("%.4f", err[0]) + ", res 24 " + fmt("%.4f", err[1]) + ", " +
             fmt("%.1f s", secs));
}

void convexity_inequality() {
  bool ok = true;
  std::string detail;
  for (double p : {2.5, 3.0, 4.0}) {
    double inf1 = 1e300, inf2 = 1e300;
    bool clean = true;
    for (int dim = 1; dim <= 4; ++dim) {
      const auto a = audit_convexity_inequality(p, dim, 100000, 1);
      const auto b = audit_convexity_inequality(p, dim, 100000, 2);
      inf1 = std::min(inf1, a.empirical_infimum);
      inf2 = std::min(inf2, b.empirical_infimum);
      clean = clean && a.violations.empty() && b.violations.empty() && a.grid_infimum > 0.0;
    }
    const bool agree = std::abs(inf1 - inf2) <= 0.1 * std::min(inf1, inf2);
    ok = ok && clean && inf1 > 0.0 && agree;
    detail += "p=" + fmt("%.1f", p) + " cbar " + fmt("%.4f", inf1) + "/" + fmt("%.4f", inf2) + " ";
  }
  report(5, ok, detail + "(seeds 1/2, 1e5 pairs per dimension 1-4, no violations)");
}

void inner_oracle() {
  std::mt19937_64 rng(6);
  double worst_linear = 0.0, worst_odd_ratio = 0.0;
  const std::vector<MeshPtr> meshes = {make(build_flat_torus(3, 3)), make(build_flat_torus(2, 4)), make(build_sphere(1))};
  for (const auto& m : meshes) {
    const auto hs = std::make_shared<const HodgeSpaces>(std::make_shared<const FormSpaces>(m), 1);
    for (int t = 0; t < 20; ++t) {
      Vector c = gaussian(hs->w_dimension(), rng);
      for (Index i = 0; i < c.size(); ++i) c[i] *= 4.0 / std::sqrt(1.0 + hs->w_eigenvalues()[i]);
      const Vector beta = hs->from_w_coordinates(c);
      worst_linear = std::max(worst_linear, phi(*hs, linear_model(), beta).alpha.values.norm());
      for (const auto& model : {shifted_power(1.0, 3.0), perturb(power_law(3.0), 0.125)}) {
        const auto a = phi(*hs, model, beta);
        const auto b = phi(*hs, model, Vector(-beta));
        const double tol = std::max(a.tolerance, b.tolerance);
        worst_odd_ratio = std::max(worst_odd_ratio, (a.alpha.values + b.alpha.values).norm() / (2.0 * tol));
      }
    }
  }
  report(6, worst_linear <= 1e-10 && worst_odd_ratio <= 1.0,
         "linear |Phi| max " + fmt("%.2e", worst_linear) + ", |Phi(-b)+Phi(b)| / (2 tol) max " +
             fmt("%.2e", worst_odd_ratio));
}

void envelope_gradient() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  double worst = 0.0;
  const std::vector<MeshPtr> meshes = {make(build_flat_torus(3, 2)), make(build_flat_torus(3, 3)),
                                       make(build_flat_torus(3, 4))};
  for (const auto& m : meshes) {
    const auto hs = std::make_shared<const HodgeSpaces>(std::make_shared<const FormSpaces>(m), 1);
    for (const auto& model : {shifted_power(1.0, 3.0), perturb(power_law(3.0), 0.125)}) {
      const ReducedFunctional J(hs, model);
      Vector b = gaussian(J.dimension(), rng);
      for (Index i = 0; i < b.size(); ++i) b[i] *= 4.0 / std::sqrt(1.0 + hs->w_eigenvalues()[i]);
      const auto ev = J.evaluate(b);
      for (int t = 0; t < 10; ++t) {
        const Vector u = gaussian(J.dimension(), rng).normalized();
        const double h = 1e-4 * std::max(1.0, b.norm());
        const double fd = (J.value(b + h * u) - J.value(b - h * u)) / (2 * h);
        const double an = ev.gradient.dot(u);
        worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-8 * ev.gradient.norm()));
      }
    }
  }
  const double secs = seconds_since(t0);
  report(7, worst <= 1e-5 && secs < 300.0,
         "max relative |J' u - central difference| " + fmt("%.2e", worst) + ", " + fmt("%.1f s", secs));
}

RunConfig solve_config() {
  RunConfig cfg;
  cfg.mesh.type = "torus";
  cfg.mesh.dimension = 3;
  cfg.mesh.resolution = 4;
  cfg.degree = 1;
  cfg.model.family = "shifted_power";
  cfg.model.p = 3.0;
  cfg.model.epsilon = 1.0;
  cfg.frame_count = 2;
  cfg.seed = 1;
  cfg.validate();
  return cfg;
}

void positive_mass_solve(const fs::path& work) {
  const auto t0 = Clock::now();
  const RunConfig cfg = solve_config();
  const Problem pr = setup_problem(cfg);
  const SolveOutcome out = run_solve(cfg, pr);
  write_solve(work / "solve_a", out, pr, cfg.degree);
  const auto model = cfg.model.build();
  bool ok = out.records.size() >= 2;
  double worst = 0.0;
  std::string values;
  for (const auto& r : out.records) {
    const double probe = weak_residual(*pr.forms, model, cfg.degree, r.xi, 60, 99);
    const double fresh = independent_residual(cfg.mesh, model, cfg.degree, r.xi);
    worst = std::max({worst, probe, fresh});
    ok = ok && r.paired && r.in_band;
    values += fmt("%.6g ", r.value);
  }
  double sep = 0.0;
  for (std::size_t i = 0; i < out.records.size(); ++i)
    for (std::size_t j = i + 1; j < out.records.size(); ++j) {
      const double a = out.records[i].value, b = out.records[j].value;
      sep = std::max(sep, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
  const double secs = seconds_since(t0);
  ok = ok && worst <= 1e-7 && sep >= 0.1 && secs < 600.0;
  report(8, ok,
         std::to_string(out.records.size()) + " records, J = " + values + "residual max " + fmt("%.2e", worst) +
             ", separation " + fmt("%.2f", sep) + ", all paired, " + fmt("%.1f s", secs));
}

void zero_mass_continuation() {
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.mesh.type = "torus";
  cfg.mesh.dimension = 3;
  cfg.mesh.resolution = 3;
  cfg.model.family = "power_law";
  cfg.model.p = 3.0;
  cfg.schedule.epsilon0 = 0.5;
  cfg.schedule.ratio = 0.5;
  cfg.validate();
  const Problem pr = setup_problem(cfg);
  const ContinueOutcome out = run_continue(cfg, pr);
  bool ok = out.traces.size() >= 2;
  std::string detail;
  double worst = 0.0;
  std::vector<double> limits;
  for (std::size_t i = 0; i < out.traces.size(); ++i) {
    const auto& tr = out.traces[i];
    const auto& lim = out.limits[i];
    ok = ok && tr.steps.size() >= 6 && tr.all_sandwiches_pass() && tr.band_contained() && !lim.refused && lim.pass;
    if (!lim.refused) {
      worst = std::max(worst, lim.record.weak_residual);
      limits.push_back(lim.record.value);
    }
    detail += "trace " + std::to_string(i) + ": " + std::to_string(tr.steps.size()) + " steps" +
              (tr.all_sandwiches_pass() ? "" : " sandwich FAIL") + (tr.band_contained() ? "" : " band FAIL") + "; ";
  }
  double gap = 0.0, frame_gap = 0.0;
  if (limits.size() >= 2 && out.frames.size() >= 2) {
    gap = limits[1] - limits[0];
    frame_gap = out.frames[1].band_low - out.frames[0].band_high;
    ok = ok && gap >= frame_gap;
  }
  const double secs = seconds_since(t0);
  ok = ok && worst <= 1e-6 && secs < 1200.0;
  report(9, ok,
         detail + "limit residual max " + fmt("%.2e", worst) + ", limit gap " + fmt("%.1f", gap) + " >= frame gap " +
             fmt("%.1f", frame_gap) + ", " + fmt("%.1f s", secs));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism(const fs::path& work) {
  const RunConfig cfg = solve_config();
  const Problem pr = setup_problem(cfg);
  const SolveOutcome out = run_solve(cfg, pr);
  write_solve(work / "solve_b", out, pr, cfg.degree);
  bool same = true;
  for (const auto& entry : fs::directory_iterator(work / "solve_a")) {
    const auto other = work / "solve_b" / entry.path().filename();
    same = same && fs::exists(other) && slurp(entry.path()) == slurp(other);
  }
  const std::string records = slurp(work / "solve_a" / "records.json");
  report(10, same && !records.empty(),
         std::string("two solves with seed 1: records.json and cochains ") + (same ? "byte-identical" : "differ") +
             " (" + std::to_string(records.size()) + " bytes)");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "hodgemax_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  try {
    chain_complex();
    adjointness();
    topology();
    spectral_oracle();
    convexity_inequality();
    inner_oracle();
    envelope_gradient();
    positive_mass_solve(work);
    zero_mass_continuation();
    determinism(work);
  } catch (const std::exception& e) {
    std::printf("aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
