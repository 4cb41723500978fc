#pragma once

// End-to-end runs behind the command-line tool: problem setup, the
// positive-mass solve, the zero-mass continuation, verification of stored
// cochains, and their JSON documents. Output files are written atomically.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hodgemax/config.hpp"

namespace hodgemax {

using Json = nlohmann::ordered_json;

/// Write `content` to `path` through a temporary file and a rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw ValidationError("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

struct Problem {
  std::shared_ptr<const SimplicialComplex> mesh;
  std::shared_ptr<const FormSpaces> forms;
  std::shared_ptr<const HodgeSpaces> hodge;
};

inline Problem setup_problem(const RunConfig& cfg) {
  Problem pr;
  pr.mesh = std::make_shared<const SimplicialComplex>(cfg.mesh.build());
  cfg.validate_for(pr.mesh->dimension());
  pr.forms = std::make_shared<const FormSpaces>(pr.mesh);
  pr.hodge = std::make_shared<const HodgeSpaces>(pr.forms, cfg.degree);
  return pr;
}

// ---------------------------------------------------------------------------
// JSON views

inline Json to_json(const HypothesisAuditReport& rep) {
  Json checks = Json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"witness_t", c.witness_t}, {"value", c.value},
                      {"detail", c.detail}});
  return {{"checks", checks},
          {"growth", {{"a", rep.growth_a}, {"b", rep.growth_b}}},
          {"integrated_growth", {{"a", rep.bound_a}, {"b", rep.bound_b}}},
          {"coercive", {{"c", rep.coercive_c}, {"d", rep.coercive_d}}},
          {"superlinear_R", rep.superlinear_R},
          {"convexity_cbar", rep.convexity_cbar},
          {"convexity_note", "per-cell density analogue of the pointwise convexity condition"},
          {"window_checked", rep.window_checked},
          {"warnings", rep.warnings}};
}

inline Json to_json(const InequalityAuditReport& rep) {
  return {{"sampled_pairs", rep.sampled_pairs}, {"skipped_pairs", rep.skipped_pairs},
          {"empirical_infimum", rep.empirical_infimum}, {"grid_infimum", rep.grid_infimum},
          {"violations", rep.violations}, {"pass", rep.pass()}};
}

inline Json to_json(const LinkingFrame& fr) {
  return {{"target_level", fr.target_level}, {"rho", fr.rho}, {"mu", fr.mu}, {"s", fr.s}, {"K", fr.K},
          {"geometric_level", fr.geometric_level}, {"lambda_k", fr.lambda_k},
          {"dim_H_minus", fr.dim_minus}, {"codim_H_plus", fr.codim_plus},
          {"dim_M_lambda_k", fr.cluster_indices.size()}, {"identity_holds", fr.identity_holds()},
          {"sup_L", fr.sup_L}, {"band", {fr.band_low, fr.band_high}}};
}

inline Json to_json(const CriticalPointRecord& r, const std::string& cochain_file, const std::string& xi_file) {
  Json diag = {{"descent_steps", r.diagnostics.descent_steps},
               {"newton_steps", r.diagnostics.newton_steps},
               {"fiber_evaluations", r.diagnostics.fiber_evaluations},
               {"values", r.diagnostics.values},
               {"gradient_norms", r.diagnostics.gradient_norms}};
  return {{"band", r.band}, {"j_value", r.value}, {"residual", r.weak_residual},
          {"gradient_norm", r.gradient_norm}, {"cochain_file", cochain_file}, {"xi_file", xi_file},
          {"seed", r.seed}, {"seed_sign", r.seed_sign}, {"iterations", r.iterations},
          {"band_interval", {r.band_low, r.band_high}}, {"in_band", r.in_band}, {"paired", r.paired},
          {"negative_j_value", r.negative_value}, {"negative_residual", r.negative_residual},
          {"provenance", r.provenance}, {"diagnostics", diag}};
}

inline Json provenance_json(const RunConfig& cfg, const Problem& pr, const NonlinearityModel& model) {
  return {{"config_hash", cfg.hash()}, {"mesh_hash", pr.mesh->hash()}, {"mesh", cfg.mesh.describe()},
          {"degree", cfg.degree}, {"model", {{"family", to_string(model.family)}, {"name", model.name},
                                             {"p", model.p}, {"mass", model.mass}}}};
}

// ---------------------------------------------------------------------------
// Positive-mass solve

struct SolveOutcome {
  Json document;
  std::vector<CriticalPointRecord> records;
  std::vector<LinkingFrame> frames;
  std::vector<std::string> log;
};

inline SolveOutcome run_solve(const RunConfig& cfg, const Problem& pr) {
  const NonlinearityModel model = cfg.model.build();
  const int n = pr.mesh->dimension();
  const auto audit = audit_hypotheses(model, cfg.audit_options(n));
  if (!audit.passed("f1"))
    throw ValidationError("solve needs a positive-mass model (f' >= eps > 0); use 'continue' for zero mass");
  SolveOutcome out;
  const ReducedFunctional J(pr.hodge, model, cfg.inner);
  const auto gc = GrowthConstants::from_audit(audit, model.p);
  const auto emb = estimate_embedding(*pr.hodge, model.p, default_sobolev_order(n, model.p), cfg.embedding_probes,
                                      cfg.seed);
  out.frames = plan_frames(J, emb, gc, cfg.first_level, cfg.frame_count, cfg.frame_gap, cfg.saddle);
  auto coll = collect_multiple(J, out.frames, gc, cfg.saddle);
  const bool under = coll.under_delivered();
  out.records = std::move(coll.records);
  out.log = std::move(coll.log);

  Json& doc = out.document;
  doc = provenance_json(cfg, pr, model);
  doc["audit"] = to_json(audit);
  doc["embedding"] = {{"s", emb.s}, {"c_tilde", emb.constant}, {"max_ratio", emb.max_ratio}, {"probes", emb.probes}};
  doc["frames"] = Json::array();
  for (const auto& f : out.frames) doc["frames"].push_back(to_json(f));
  doc["requested"] = coll.requested;
  doc["under_delivered"] = under;
  doc["records"] = Json::array();
  for (std::size_t i = 0; i < out.records.size(); ++i)
    doc["records"].push_back(to_json(out.records[i], "beta_" + std::to_string(i) + ".cochain",
                                     "xi_" + std::to_string(i) + ".cochain"));
  doc["log"] = out.log;
  return out;
}

inline void write_solve(const std::filesystem::path& dir, const SolveOutcome& out, const Problem& pr, int degree) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    save_cochain((dir / ("beta_" + std::to_string(i) + ".cochain")).string(), out.records[i].beta);
    save_cochain((dir / ("xi_" + std::to_string(i) + ".cochain")).string(), Cochain(pr.mesh, degree, out.records[i].xi));
  }
  atomic_write(dir / "records.json", dump_json(out.document));
}

// ---------------------------------------------------------------------------
// Zero-mass continuation

struct ContinueOutcome {
  Json document;
  std::vector<ContinuationTrace> traces;
  std::vector<LimitVerification> limits;
  std::vector<LinkingFrame> frames;
};

inline ContinueOutcome run_continue(const RunConfig& cfg, const Problem& pr) {
  const NonlinearityModel f = cfg.model.build();
  const int n = pr.mesh->dimension();
  const auto audit = audit_hypotheses(f, cfg.audit_options(n));
  if (!audit.passed("f1_zero_mass") || !audit.passed("f2_zero_mass"))
    throw ValidationError("continue needs a zero-mass model passing the f(0) = f'(0) = 0 and convexity audits");
  ContinueOutcome out;
  ContinuationSchedule sch = cfg.schedule;
  sch.saddle = cfg.saddle;
  sch.inner = cfg.inner;
  const auto gc = uniform_constants(f, sch.epsilon0, cfg.audit_options(n));
  const ReducedFunctional J0(pr.hodge, perturb(f, sch.epsilon0), cfg.inner);
  const auto emb = estimate_embedding(*pr.hodge, f.p, default_sobolev_order(n, f.p), cfg.embedding_probes, cfg.seed);
  out.frames = plan_frames(J0, emb, gc, cfg.first_level, cfg.frame_count, cfg.frame_gap, cfg.saddle);
  out.traces = run_schedule(pr.hodge, f, sch, out.frames);

  Json& doc = out.document;
  doc = provenance_json(cfg, pr, f);
  doc["audit"] = to_json(audit);
  doc["schedule"] = {{"epsilon0", sch.epsilon0}, {"ratio", sch.ratio}, {"max_steps", sch.max_steps},
                     {"limit_tolerance", sch.limit_tolerance}, {"residual_target", sch.residual_target},
                     {"proxy_factor", sch.proxy_factor}};
  doc["frames"] = Json::array();
  for (const auto& fr : out.frames) doc["frames"].push_back(to_json(fr));
  doc["traces"] = Json::array();
  for (std::size_t i = 0; i < out.traces.size(); ++i) {
    const auto& tr = out.traces[i];
    auto lim = verify_limit(*pr.hodge, f, tr, sch, sch.residual_target);
    Json t = {{"band", tr.band}, {"band_interval", {tr.band_low, tr.band_high}}, {"steps", tr.steps.size()},
              {"converged", tr.converged}, {"broken", tr.broken}, {"diagnostic", tr.diagnostic},
              {"sandwich_all_pass", tr.all_sandwiches_pass()}, {"band_contained", tr.band_contained()},
              {"trace_file", "trace_" + std::to_string(i) + ".csv"}};
    if (lim.refused) {
      t["limit"] = {{"refused", true}, {"diagnostic", lim.diagnostic}};
    } else {
      Json l = to_json(lim.record, "limit_beta_" + std::to_string(i) + ".cochain",
                       "limit_xi_" + std::to_string(i) + ".cochain");
      l["pass"] = lim.pass;
      l["trivial"] = lim.trivial;
      l["diagnostic"] = lim.diagnostic;
      l["epsilon_last"] = tr.steps.back().epsilon;
      t["limit"] = l;
    }
    doc["traces"].push_back(t);
    out.limits.push_back(std::move(lim));
  }
  return out;
}

inline void write_continue(const std::filesystem::path& dir, const ContinueOutcome& out, const Problem& pr,
                           int degree) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < out.traces.size(); ++i) {
    std::ostringstream csv;
    write_trace_csv(csv, out.traces[i]);
    atomic_write(dir / ("trace_" + std::to_string(i) + ".csv"), csv.str());
    if (!out.limits[i].refused) {
      save_cochain((dir / ("limit_beta_" + std::to_string(i) + ".cochain")).string(), out.limits[i].record.beta);
      save_cochain((dir / ("limit_xi_" + std::to_string(i) + ".cochain")).string(),
                   Cochain(pr.mesh, degree, out.limits[i].record.xi));
    }
  }
  atomic_write(dir / "continuation.json", dump_json(out.document));
}

// ---------------------------------------------------------------------------
// Verification of a stored solution xi of the full equation

struct VerifyOutcome {
  Json document;
  double residual = 0.0;
  bool trivial = false;
  bool pass = false;
};

inline VerifyOutcome run_verify(const RunConfig& cfg, const Problem& pr, const Cochain& xi, double tolerance) {
  const NonlinearityModel model = cfg.model.build();
  if (xi.degree != cfg.degree) throw ValidationError("cochain degree does not match problem.degree");
  VerifyOutcome out;
  out.residual = weak_residual(*pr.forms, model, xi);
  out.trivial = xi.values.cwiseAbs().maxCoeff() == 0.0;
  out.pass = out.residual <= tolerance;
  out.document = provenance_json(cfg, pr, model);
  out.document["residual"] = out.residual;
  out.document["tolerance"] = tolerance;
  out.document["trivial"] = out.trivial;
  out.document["pass"] = out.pass;
  out.document["l2_norm"] = pr.forms->norm2(xi.degree, xi.values);
  return out;
}

}  // namespace hodgemax
