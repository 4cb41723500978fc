#pragma once

// Zero-mass problems: solve the problems with f_eps(t) = f(t) + eps t for a
// geometric sequence eps_n -> 0 with warm starts, keep every step inside one
// eps-uniform band, check the two-sided perturbation inequality and verify
// the limit against the unperturbed weak equation.

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "hodgemax/saddle_search.hpp"

namespace hodgemax {

struct ContinuationSchedule {
  double epsilon0 = 0.5;
  double ratio = 0.5;
  int max_steps = 40;
  double limit_tolerance = 1e-4;   // H1 increment relative to |beta_n|_{H1}
  int stable_increments = 3;       // consecutive small increments required
  double residual_target = 1e-6;   // unperturbed weak residual of the limit
  double proxy_factor = 1e-3;      // Phi of the zero-mass model ~ Phi_{eps * proxy_factor}
  double step_residual = 1e-7;     // accepted weak residual of each perturbed solve
  SaddleConfig saddle;
  InnerSolveConfig inner;

  [[nodiscard]] double epsilon(int n) const { return epsilon0 * std::pow(ratio, n); }
  void validate() const {
    if (!(epsilon0 > 0.0)) throw ValidationError("schedule: epsilon0 must be positive");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("schedule: ratio must lie in (0, 1)");
    if (max_steps < 1) throw ValidationError("schedule: max_steps must be >= 1");
    if (!(proxy_factor > 0.0 && proxy_factor < 1.0)) throw ValidationError("schedule: proxy factor must lie in (0, 1)");
    if (stable_increments < 1) throw ValidationError("schedule: stable_increments must be >= 1");
  }
};

struct SandwichResult {
  double lower = 0.0;
  double middle = 0.0;  // F(beta + d Phi_eps) - F(beta + d Phi)
  double upper = 0.0;   // eps (|beta + d Phi|^2 - |beta + d Phi_eps|^2)
  double tolerance = 0.0;
  double proxy_epsilon = 0.0;
  bool pass = false;
};

/// Two-sided perturbation inequality at beta for the zero-mass model f, with
/// Phi of f replaced by Phi_{eps * proxy_factor}.
inline SandwichResult sandwich_check(const HodgeSpaces& hs, const NonlinearityModel& zero_mass, const Vector& beta,
                                     double eps, double proxy_factor = 1e-3, const InnerSolveConfig& inner = {}) {
  if (!(eps > 0.0)) throw ValidationError("sandwich_check: epsilon must be positive");
  const FormSpaces& sp = hs.spaces();
  const int k = hs.degree();
  SandwichResult out;
  out.proxy_epsilon = eps * proxy_factor;
  const auto fe = perturb(zero_mass, eps);
  const auto fp = perturb(zero_mass, out.proxy_epsilon);
  const Vector xe = beta + phi(hs, fe, beta, inner).exact;
  const Vector xp = beta + phi(hs, fp, beta, inner).exact;
  const double a = F_eval(sp, zero_mass, k, xe);
  const double b = F_eval(sp, zero_mass, k, xp);
  out.middle = a - b;
  out.upper = eps * (sp.inner(k, xp, xp) - sp.inner(k, xe, xe));
  out.tolerance = 1e-8 * (std::abs(a) + std::abs(b) + eps * sp.inner(k, xp, xp) + 1e-300);
  out.pass = out.middle >= out.lower - out.tolerance && out.middle <= out.upper + out.tolerance;
  return out;
}

inline SandwichResult sandwich_check(const HodgeSpaces& hs, const NonlinearityModel& zero_mass, const Cochain& beta,
                                     double eps, double proxy_factor = 1e-3, const InnerSolveConfig& inner = {}) {
  if (beta.degree != hs.degree()) throw ValidationError("sandwich_check: beta has the wrong degree");
  return sandwich_check(hs, zero_mass, beta.values, eps, proxy_factor, inner);
}

struct ContinuationStep {
  int step = 0;
  double epsilon = 0.0;
  Vector coords;
  double value = 0.0;              // J^_eps(beta_n)
  double residual = 0.0;           // weak residual of the perturbed equation
  double unperturbed_residual = 0.0;
  double h1_increment = 0.0;       // |beta_n - beta_{n-1}|_{H1}; 0 at the first step
  double h1_norm = 0.0;
  SandwichResult sandwich;
  bool in_band = false;
};

struct ContinuationTrace {
  int band = 0;
  double band_low = 0.0, band_high = 0.0;
  std::vector<ContinuationStep> steps;
  bool converged = false;
  bool broken = false;
  std::string diagnostic;

  [[nodiscard]] bool all_sandwiches_pass() const {
    for (const auto& s : steps)
      if (!s.sandwich.pass) return false;
    return !steps.empty();
  }
  [[nodiscard]] bool band_contained() const {
    for (const auto& s : steps)
      if (!s.in_band) return false;
    return !steps.empty();
  }
};

inline void write_trace_csv(std::ostream& out, const ContinuationTrace& tr) {
  out << "step,epsilon,j_value,residual,h1_increment,sandwich_lower,sandwich_mid,sandwich_upper\n";
  out.precision(17);
  for (const auto& s : tr.steps)
    out << s.step << ',' << s.epsilon << ',' << s.value << ',' << s.residual << ',' << s.h1_increment << ','
        << s.sandwich.lower << ',' << s.sandwich.middle << ',' << s.sandwich.upper << "\n";
}

namespace detail {

inline void require_zero_mass(const NonlinearityModel& f) {
  if (std::abs(f.f(0.0)) > 1e-14 || std::abs(f.df(0.0)) > 1e-14 || f.positive_mass())
    throw ValidationError("continuation needs a zero-mass model (f(0) = f'(0) = 0)");
}

/// xi = beta + d Phi_{eps'}(beta) as a stand-in for the unperturbed solution.
inline Vector proxy_solution(const HodgeSpaces& hs, const NonlinearityModel& f, const Vector& beta, double eps_proxy,
                             const InnerSolveConfig& inner) {
  return beta + phi(hs, perturb(f, eps_proxy), beta, inner).exact;
}

}  // namespace detail

/// Growth constants valid for every f_eps with eps <= eps0: the upper bounds
/// come from f_{eps0}, the coercive lower bound from f itself.
inline GrowthConstants uniform_constants(const NonlinearityModel& f, double eps0, const AuditOptions& opt = {}) {
  const auto up = audit_hypotheses(perturb(f, eps0), opt);
  const auto low = audit_hypotheses(f, opt);
  return {f.p, up.bound_a, up.bound_b, low.coercive_c, low.coercive_d};
}

/// One trace per frame. Bands must already be computed for f_{eps0} with
/// uniform_constants, which makes them valid for every smaller eps.
inline std::vector<ContinuationTrace> run_schedule(std::shared_ptr<const HodgeSpaces> hs,
                                                   const NonlinearityModel& zero_mass,
                                                   const ContinuationSchedule& schedule,
                                                   const std::vector<LinkingFrame>& frames) {
  detail::require_zero_mass(zero_mass);
  schedule.validate();
  if (frames.empty()) throw ValidationError("run_schedule: need at least one frame");
  const FormSpaces& sp = hs->spaces();
  const int k = hs->degree();
  std::vector<ContinuationTrace> traces;
  std::vector<CriticalPointRecord> known;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const LinkingFrame& fr = frames[f];
    if (!fr.bands_computed) throw ValidationError("run_schedule: frame bands not computed");
    ContinuationTrace tr;
    tr.band = static_cast<int>(f);
    tr.band_low = fr.band_low;
    tr.band_high = fr.band_high;
    Vector prev;
    int small = 0;
    for (int n = 0; n < schedule.max_steps; ++n) {
      const double eps = schedule.epsilon(n);
      const ReducedFunctional J(hs, perturb(zero_mass, eps), schedule.inner);
      ReducedEvaluation ev;
      try {
        if (n == 0) {
          auto rec = find_critical_point(J, fr, schedule.saddle, known, nullptr, static_cast<int>(f));
          if (!rec) {
            tr.broken = true;
            tr.diagnostic = "no critical point in the band at the first step";
            break;
          }
          known.push_back(*rec);
          ev = J.evaluate(rec->coords);
        } else {
          SearchDiagnostics diag;
          ev = newton_polish(J, J.evaluate(prev), schedule.saddle, diag);
        }
      } catch (const SolverError& e) {
        tr.broken = true;
        tr.diagnostic = "step " + std::to_string(n) + ": warm start diverged: " + e.what();
        break;
      }
      ContinuationStep st;
      st.step = n;
      st.epsilon = eps;
      st.coords = ev.coords;
      st.value = ev.value;
      st.residual = weak_residual(sp, J.model(), k, ev.xi);
      const Vector xi0 = detail::proxy_solution(*hs, zero_mass, ev.beta, eps * schedule.proxy_factor, schedule.inner);
      st.unperturbed_residual = weak_residual(sp, zero_mass, k, xi0);
      st.h1_norm = sp.h1_norm(Cochain(hs->mesh(), k, ev.beta));
      if (n > 0)
        st.h1_increment = sp.h1_norm(Cochain(hs->mesh(), k, ev.beta - hs->from_w_coordinates(prev)));
      st.sandwich = sandwich_check(*hs, zero_mass, ev.beta, eps, schedule.proxy_factor, schedule.inner);
      st.in_band = fr.in_band(ev.value);
      tr.steps.push_back(st);
      prev = ev.coords;
      if (!st.in_band) {
        tr.broken = true;
        tr.diagnostic = "step " + std::to_string(n) + ": value " + std::to_string(st.value) + " left the band";
        break;
      }
      if (st.residual > schedule.step_residual) {
        tr.broken = true;
        tr.diagnostic = "step " + std::to_string(n) + ": perturbed residual " + std::to_string(st.residual);
        break;
      }
      small = (n > 0 && st.h1_increment <= schedule.limit_tolerance * st.h1_norm) ? small + 1 : 0;
      if (small >= schedule.stable_increments && st.unperturbed_residual <= schedule.residual_target) {
        tr.converged = true;
        break;
      }
    }
    if (!tr.converged && !tr.broken) tr.diagnostic = "schedule exhausted before the limit rule was met";
    traces.push_back(std::move(tr));
  }
  return traces;
}

struct LimitVerification {
  bool refused = false;
  std::string diagnostic;
  CriticalPointRecord record;
  bool pass = false;       // residual within tolerance and value inside the band
  bool trivial = false;    // beta = 0
};

/// Check beta against the unperturbed weak equation, with Phi approximated
/// by Phi_{eps_proxy}, and its unperturbed value against a band.
inline LimitVerification verify_candidate(const HodgeSpaces& hs, const NonlinearityModel& zero_mass,
                                          const Vector& coords, double eps_proxy, double band_low, double band_high,
                                          int band, double tolerance = 1e-6, const InnerSolveConfig& inner = {}) {
  const FormSpaces& sp = hs.spaces();
  const int k = hs.degree();
  LimitVerification out;
  auto& rec = out.record;
  rec.coords = coords;
  const Vector beta = hs.from_w_coordinates(coords);
  rec.beta = Cochain(hs.mesh(), k, beta);
  rec.xi = detail::proxy_solution(hs, zero_mass, beta, eps_proxy, inner);
  const Vector db = sp.derivative(k) * beta;
  rec.value = sp.inner(k + 1, db, db) - F_eval(sp, zero_mass, k, rec.xi);
  rec.weak_residual = weak_residual(sp, zero_mass, k, rec.xi);
  rec.band = band;
  rec.band_low = band_low;
  rec.band_high = band_high;
  rec.in_band = rec.value >= band_low && rec.value <= band_high;
  rec.provenance = "continuation-limit";
  const Vector xin = detail::proxy_solution(hs, zero_mass, -beta, eps_proxy, inner);
  rec.negative_value = sp.inner(k + 1, db, db) - F_eval(sp, zero_mass, k, xin);
  rec.negative_residual = weak_residual(sp, zero_mass, k, xin);
  rec.paired = std::abs(rec.negative_value - rec.value) <= 1e-10 * std::max(1.0, std::abs(rec.value)) &&
               rec.negative_residual <= tolerance;
  out.trivial = coords.norm() == 0.0;
  out.pass = rec.weak_residual <= tolerance && rec.in_band && !out.trivial;
  if (out.trivial) out.diagnostic = "trivial solution beta = 0 excluded";
  else if (!rec.in_band) out.diagnostic = "value outside the band";
  else if (rec.weak_residual > tolerance) out.diagnostic = "residual above tolerance";
  return out;
}

inline LimitVerification verify_limit(const HodgeSpaces& hs, const NonlinearityModel& zero_mass,
                                      const ContinuationTrace& trace, const ContinuationSchedule& schedule,
                                      double tolerance = 1e-6) {
  detail::require_zero_mass(zero_mass);
  if (trace.broken || !trace.converged || trace.steps.empty()) {
    LimitVerification out;
    out.refused = true;
    out.diagnostic = trace.broken ? "trace is broken: " + trace.diagnostic
                                  : "trace has not converged: " + trace.diagnostic;
    return out;
  }
  const auto& last = trace.steps.back();
  return verify_candidate(hs, zero_mass, last.coords, last.epsilon * schedule.proxy_factor, trace.band_low,
                          trace.band_high, trace.band, tolerance, schedule.inner);
}

}  // namespace hodgemax
