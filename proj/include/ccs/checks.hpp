#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ccs/clairaut.hpp"
#include "ccs/report.hpp"
#include "ccs/ricci_decomp.hpp"
#include "ccs/scenario_io.hpp"
#include "ccs/soliton.hpp"

namespace ccs {

struct CheckOptions {
  bool strict_paper = false;
  std::optional<Vec> p0, v0;     // geodesic overrides
  double geodesic_length = 1.0;
  double geodesic_step = 1e-3;
  int geodesic_count = 5;
  std::optional<Vec> point;      // christoffel table point
};

namespace detail_checks {

inline nlohmann::json series(const std::vector<double>& v) {
  return nlohmann::json(v);
}

inline std::string paper_verdict(bool strict, double residual, double tol) {
  if (!strict) return "REPORT-ONLY";
  return verdict_of(residual, tol);
}

// mu fitted under the flipped curvature sign convention
inline double mu_fit_flipped(const MetricData& md, const Mat& lie) {
  Mat ric = ricci(md);
  double tr = 0.0;
  for (int i = 0; i < md.n; ++i)
    for (int j = 0; j < md.n; ++j) tr += md.ginv(i, j) * (0.5 * lie(i, j) - ric(i, j));
  return -tr / md.n;
}

}  // namespace detail_checks

// Samples plus a note describing rejections; shared by all sweeps.
struct SampledRun {
  std::vector<Vec> pts;
  std::string note;
};

inline SampledRun sampled_run(const Scenario& scn) {
  SampleSet ss = draw_samples(scn);
  SampledRun run;
  run.pts = ss.accepted;
  if (!ss.rejected.empty()) {
    run.note = std::to_string(ss.rejected.size()) + " of " +
               std::to_string(scn.sampling.count) + " samples rejected (";
    run.note += ss.rejected.front().second + ")";
  }
  if (run.pts.empty()) throw InputError("no sample point was accepted; check the box");
  return run;
}

// ---- conformality ------------------------------------------------------------------

inline std::vector<CheckRecord> conformal_checks(const Scenario& scn) {
  scn.require_submersion();
  SampledRun run = sampled_run(scn);
  std::vector<double> resid, sigma2;
  int critical = 0;
  for (const Vec& p : run.pts) {
    try {
      FramePoint fp = frame_point(scn, p);
      resid.push_back(fp.conformality_residual);
      sigma2.push_back(fp.sigma2);
    } catch (const CriticalPointError&) {
      ++critical;
    }
  }
  CheckRecord rec;
  rec.name = "conformal-submersion";
  rec.paper_anchor = "g_{M2}(theta_* X1, theta_* X2) = sigma^2 g_{M1}(X1, X2)";
  rec.tolerance = scn.tol.analytic;
  for (double r : resid) rec.max_residual = std::max(rec.max_residual, r);
  rec.verdict = verdict_of(rec.max_residual, rec.tolerance);
  rec.notes = run.note;
  if (critical > 0)
    rec.notes += (rec.notes.empty() ? "" : "; ") + std::to_string(critical) +
                 " critical points skipped";
  rec.detail["residuals"] = detail_checks::series(resid);
  rec.detail["sigma2"] = detail_checks::series(sigma2);
  return {rec};
}

// ---- Christoffel table ---------------------------------------------------------------

inline nlohmann::json christoffel_table(const Scenario& scn, const Vec& p) {
  MetricData md = metric_data(scn.total, p);
  nlohmann::json out = nlohmann::json::array();
  for (int k = 0; k < md.n; ++k)
    for (int i = 0; i < md.n; ++i)
      for (int j = i; j < md.n; ++j)
        out.push_back({{"k", k}, {"i", i}, {"j", j}, {"value", md.gamma(k, i, j)}});
  return out;
}

inline std::vector<CheckRecord> christoffel_checks(const Scenario& scn,
                                                   const CheckOptions& opts) {
  SampledRun run = sampled_run(scn);
  std::vector<CheckRecord> out;

  CheckRecord table;
  table.name = "christoffel-table";
  table.paper_anchor = "Levi-Civita connection coefficients";
  table.verdict = "REPORT-ONLY";
  Vec at = opts.point ? *opts.point : run.pts.front();
  table.detail["point"] = at;
  table.detail["gamma"] = christoffel_table(scn, at);
  table.notes = run.note;
  out.push_back(std::move(table));

  if (!scn.paper.christoffel.empty()) {
    CheckRecord rec;
    rec.name = "christoffel-vs-reference";
    rec.paper_anchor = "reference connection table";
    rec.tolerance = 1e-9;
    for (const Vec& p : run.pts) {
      MetricData md = metric_data(scn.total, p);
      std::vector<std::vector<bool>> seen(md.n,
                                          std::vector<bool>(md.n * md.n, false));
      for (const auto& [k, i, j, value] : scn.paper.christoffel) {
        rec.max_residual =
            std::max(rec.max_residual, std::abs(md.gamma(k, i, j) - value));
        seen[k][i * md.n + j] = true;
        seen[k][j * md.n + i] = true;
      }
      if (scn.paper.christoffel_others_zero)
        for (int k = 0; k < md.n; ++k)
          for (int i = 0; i < md.n; ++i)
            for (int j = 0; j < md.n; ++j)
              if (!seen[k][i * md.n + j])
                rec.max_residual =
                    std::max(rec.max_residual, std::abs(md.gamma(k, i, j)));
    }
    rec.verdict = verdict_of(rec.max_residual, rec.tolerance);
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- O'Neill tensor sweep --------------------------------------------------------------

inline std::vector<CheckRecord> oneill_checks(const Scenario& scn) {
  scn.require_submersion();
  SampledRun run = sampled_run(scn);
  Rng rng(scn.sampling.seed ^ 0xa5a5a5a5ull);
  int n = scn.d1();

  double skew = 0.0, fiber_sym = 0.0, decomp = 0.0, prp1 = 0.0;
  std::vector<double> umbilic, hprime_resid;
  for (const Vec& p : run.pts) {
    PointContext c = point_context(scn, p);
    Vec e = rng.vector(n), f = rng.vector(n), g = rng.vector(n);
    skew = std::max(skew, std::abs(g_inner(c.md.g, oneill_T(c, e, f), g) +
                                   g_inner(c.md.g, oneill_T(c, e, g), f)));
    skew = std::max(skew, std::abs(g_inner(c.md.g, oneill_S(c, e, f), g) +
                                   g_inner(c.md.g, oneill_S(c, e, g), f)));
    Vec u = c.proj.V * e, w = c.proj.V * f;
    Vec tuw = oneill_T(c, u, w), twu = oneill_T(c, w, u);
    for (int i = 0; i < n; ++i)
      fiber_sym = std::max(fiber_sym, std::abs(tuw[i] - twu[i]));

    {  // reassembly of the three splittings
      FieldJet wf = detail_sub::projected_constant(c.proj.V, c.proj.dV, f);
      Vec full = covariant_derivative(c.md, wf, u);
      Vec tpart = oneill_T(c, u, c.proj.V * f);
      Vec vfull = c.proj.V * full;
      for (int i = 0; i < n; ++i)
        decomp = std::max(decomp, std::abs(full[i] - tpart[i] - vfull[i]));
      Vec x = c.proj.H * e;
      Vec full2 = covariant_derivative(c.md, wf, x);
      Vec spart = oneill_S(c, x, c.proj.V * f);
      Vec vfull2 = c.proj.V * full2;
      for (int i = 0; i < n; ++i)
        decomp = std::max(decomp, std::abs(full2[i] - spart[i] - vfull2[i]));
      FieldJet yf = detail_sub::projected_constant(c.proj.H, c.proj.dH, f);
      Vec full3 = covariant_derivative(c.md, yf, x);
      Vec spart3 = oneill_S(c, x, c.proj.H * f);
      Vec hfull3 = c.proj.H * full3;
      for (int i = 0; i < n; ++i)
        decomp = std::max(decomp, std::abs(full3[i] - spart3[i] - hfull3[i]));
    }
    {  // horizontal-pair formula for S
      Vec x = c.proj.H * e, y = c.proj.H * f;
      Vec lhs = oneill_S(c, x, y);
      Vec br = nu_bracket(c, x, y);
      Vec dnu = c.proj.V * grad_inv_sigma2(c);
      double gxy = g_inner(c.md.g, x, y);
      for (int i = 0; i < n; ++i)
        prp1 = std::max(prp1,
                        std::abs(lhs[i] - 0.5 * (br[i] - c.sigma.s2 * gxy * dnu[i])));
    }
    Vec h = mean_curvature(c);
    umbilic.push_back(umbilic_residual(c, h));
    Vec hp = horizontal_mean_curvature(c);
    Vec pred = c.proj.V * grad_inv_sigma2(c);
    double hr = 0.0;
    for (int i = 0; i < n; ++i)
      hr = std::max(hr, std::abs(hp[i] + 0.5 * c.sigma.s2 * pred[i]));
    hprime_resid.push_back(hr);
  }

  std::vector<CheckRecord> out;
  auto push = [&](std::string name, std::string anchor, double resid, double tol,
                  nlohmann::json detail = {}) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.paper_anchor = std::move(anchor);
    rec.tolerance = tol;
    rec.max_residual = resid;
    rec.verdict = verdict_of(resid, tol);
    rec.detail = std::move(detail);
    rec.notes = run.note;
    out.push_back(std::move(rec));
  };
  push("oneill-skew-symmetry", "T_E and S_E are skew-symmetric operators", skew,
       scn.tol.analytic);
  push("oneill-fiber-symmetry", "T_{U1}U2 = T_{U2}U1", fiber_sym, scn.tol.analytic);
  push("oneill-decomposition", "nabla splits through T and S (Eqs. 2.4-2.6)", decomp,
       scn.tol.analytic);
  push("oneill-horizontal-pair-formula",
       "S_{X1}X2 = (1/2){nu[X1,X2] - sigma^2 g(X1,X2) nu grad(1/sigma^2)}", prp1,
       scn.tol.analytic);
  {
    double m = 0.0;
    for (double v : umbilic) m = std::max(m, v);
    push("fiber-umbilicity", "T_{U1}U2 = g(U1,U2) H", m, scn.tol.analytic,
         {{"residuals", umbilic}});
  }
  {
    double m = 0.0;
    for (double v : hprime_resid) m = std::max(m, v);
    push("horizontal-mean-curvature",
         "H' = -(sigma^2/2) nu grad(1/sigma^2)", m, scn.tol.analytic,
         {{"residuals", hprime_resid}});
  }
  if (scn.beta) {
    std::vector<double> tau_norm;
    for (const Vec& p : run.pts) {
      PointContext c = point_context(scn, p);
      Vec tau = tension_field(scn, c);
      tau_norm.push_back(g_norm(c.base_md.g, tau));
    }
    double m = 0.0;
    for (double v : tau_norm) m = std::max(m, v);
    CheckRecord rec;
    rec.name = "tension-field";
    rec.paper_anchor =
        "tau = (d1-d2) theta_*(grad beta) + (d2-2)(sigma^2/2) theta_*(grad_H 1/sigma^2)";
    rec.tolerance = scn.tol.analytic;
    rec.max_residual = m;
    rec.verdict = "REPORT-ONLY";
    rec.notes = m <= scn.tol.analytic ? "harmonic at all samples"
                                      : "not harmonic (nonzero tension)";
    rec.detail["norm_series"] = tau_norm;
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- Clairaut certificate ----------------------------------------------------------------

inline std::vector<CheckRecord> clairaut_checks(const Scenario& scn) {
  scn.require_beta();
  SampledRun run = sampled_run(scn);
  Certificate cert = clairaut_certificate(scn, run.pts, scn.tol.analytic);
  std::vector<double> horiz, umbil, fiber;
  for (const auto& cp : cert.points) {
    horiz.push_back(cp.horizontality);
    umbil.push_back(cp.umbilicity);
    fiber.push_back(cp.fiber_sigma);
  }
  std::vector<CheckRecord> out;
  auto push = [&](std::string name, std::string anchor, double resid,
                  std::vector<double> series) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.paper_anchor = std::move(anchor);
    rec.tolerance = scn.tol.analytic;
    rec.max_residual = resid;
    rec.verdict = verdict_of(resid, rec.tolerance);
    rec.detail["residuals"] = std::move(series);
    rec.notes = run.note;
    out.push_back(std::move(rec));
  };
  push("clairaut-horizontality", "grad beta is horizontal", cert.max_horizontality,
       horiz);
  push("clairaut-umbilicity", "T_{U1}U2 = -g_{M1}(U1,U2) grad beta",
       cert.max_umbilicity, umbil);
  push("clairaut-fiber-constancy", "sigma is constant along the fibers",
       cert.max_fiber_sigma, fiber);
  return out;
}

// ---- geodesics -----------------------------------------------------------------------------

inline std::vector<CheckRecord> geodesic_checks(const Scenario& scn,
                                                const CheckOptions& opts,
                                                std::vector<Trajectory>* out_trajs = nullptr) {
  std::vector<std::pair<Vec, Vec>> ics;
  if (opts.p0 && opts.v0) {
    ics.emplace_back(*opts.p0, *opts.v0);
  } else {
    ics = default_initial_conditions(scn, opts.geodesic_count);
  }
  std::vector<double> speed_drifts, clairaut_drifts;
  std::string notes;
  for (const auto& [p0, v0] : ics) {
    Trajectory tr =
        geodesic_integrate(scn.total, p0, v0, opts.geodesic_length, opts.geodesic_step);
    if (scn.has_submersion()) annotate_trajectory(scn, tr);
    speed_drifts.push_back(tr.speed_drift());
    if (tr.truncated) notes += (notes.empty() ? "" : "; ") + tr.diagnostic;
    if (scn.beta && scn.has_submersion()) {
      MonitorResult mr = clairaut_monitor(scn, tr, scn.tol.geodesic_drift);
      clairaut_drifts.push_back(mr.drift / (1.0 + std::abs(mr.mean)));
    }
    if (out_trajs) out_trajs->push_back(std::move(tr));
  }
  std::vector<CheckRecord> out;
  {
    CheckRecord rec;
    rec.name = "geodesic-speed-drift";
    rec.paper_anchor = "geodesics have constant speed";
    rec.tolerance = scn.tol.geodesic_drift;
    for (double v : speed_drifts) rec.max_residual = std::max(rec.max_residual, v);
    rec.verdict = verdict_of(rec.max_residual, rec.tolerance);
    rec.detail["drifts"] = speed_drifts;
    rec.notes = notes;
    out.push_back(std::move(rec));
  }
  if (!clairaut_drifts.empty()) {
    CheckRecord rec;
    rec.name = "clairaut-invariant-drift";
    rec.paper_anchor = "(r o zeta) sin(omega) is constant along geodesics";
    rec.tolerance = scn.tol.geodesic_drift;
    for (double v : clairaut_drifts) rec.max_residual = std::max(rec.max_residual, v);
    rec.verdict = verdict_of(rec.max_residual, rec.tolerance);
    rec.detail["relative_drifts"] = clairaut_drifts;
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- soliton suite ---------------------------------------------------------------------------

inline std::vector<CheckRecord> soliton_checks(const Scenario& scn) {
  SampledRun run = sampled_run(scn);
  std::vector<CheckRecord> out;
  const MetricField& m = scn.total;

  SmoothField xi_field =
      scn.xi ? as_field(*scn.xi)
             : SmoothField([n = scn.d1()](const Vec&) {
                 return FieldJet{Vec(n, 0.0), Mat(n, n)};
               });

  {  // soliton residual: PASS-able only when the scenario claims a mu
    SolitonVerdict v = soliton_residual(m, xi_field, scn.mu.value_or(0.0), run.pts,
                                        scn.has_submersion() ? &scn : nullptr);
    CheckRecord rec;
    rec.name = "soliton-residual";
    rec.paper_anchor = "(1/2) L_xi g + Ric + mu g = 0";
    rec.tolerance = scn.tol.analytic;
    rec.max_residual = v.residual_max;
    rec.verdict = scn.mu ? verdict_of(v.residual_max, rec.tolerance) : "REPORT-ONLY";
    if (!scn.mu) rec.notes = "no mu declared; residual evaluated at mu = 0";
    rec.detail["per_sample"] = v.per_sample;
    if (scn.has_submersion()) {
      rec.detail["block_vertical"] = v.block_vv;
      rec.detail["block_mixed"] = v.block_mixed;
      rec.detail["block_horizontal"] = v.block_hh;
    }
    out.push_back(std::move(rec));
  }
  {  // per-point least-squares mu
    MuFit fit = fit_mu(m, xi_field, run.pts);
    CheckRecord rec;
    rec.name = "mu-fit";
    rec.paper_anchor = "mu indicates a constant";
    rec.verdict = "REPORT-ONLY";
    rec.max_residual = 0.0;
    rec.detail["mu"] = fit.mu;
    rec.detail["mean"] = fit.mean;
    rec.detail["constant"] = fit.constant;
    rec.detail["classification"] = fit.classification;
    rec.notes = "classification: " + fit.classification;
    out.push_back(std::move(rec));
  }
  {  // Einstein
    EinsteinVerdict ev = einstein_residual(m, run.pts);
    CheckRecord rec;
    rec.name = "einstein";
    rec.paper_anchor = "Ric = lambda g";
    rec.tolerance = 1e-8;
    rec.max_residual = ev.residual_max;
    rec.verdict = "REPORT-ONLY";
    rec.notes = ev.einstein ? "Einstein" : "not Einstein";
    rec.detail["lambda"] = ev.lambda;
    out.push_back(std::move(rec));
  }
  if (scn.xi) {  // conformal / Killing classification of the declared field
    ConformalVerdict cv = conformal_field_check(m, xi_field, run.pts);
    CheckRecord rec;
    rec.name = "conformal-field";
    rec.paper_anchor = "L_xi g = 2 beta1 g";
    rec.tolerance = scn.tol.analytic;
    rec.max_residual = cv.residual_max;
    rec.verdict = "REPORT-ONLY";
    rec.detail["beta1"] = cv.beta1;
    rec.notes = cv.killing ? "Killing field"
                           : (cv.residual_max <= scn.tol.analytic ? "conformal field"
                                                                  : "not conformal");
    out.push_back(std::move(rec));

    if (scn.has_submersion()) {
      ConformalVerdict cvv =
          conformal_field_check(m, xi_field, run.pts, Restriction::kVertical, &scn);
      CheckRecord rv;
      rv.name = "conformal-field-vertical";
      rv.paper_anchor = "conformal vector field on Ker theta_*";
      rv.tolerance = scn.tol.analytic;
      rv.max_residual = cvv.residual_max;
      rv.verdict = "REPORT-ONLY";
      rv.detail["beta1"] = cvv.beta1;
      if (scn.beta) {
        std::vector<double> formula;
        double delta = 0.0;
        for (std::size_t i = 0; i < run.pts.size(); ++i) {
          formula.push_back(beta1_formula(scn, run.pts[i]));
          delta = std::max(delta, std::abs(formula.back() - cvv.beta1[i]));
        }
        rv.detail["beta1_formula"] = formula;
        rv.detail["beta1_formula_delta"] = delta;
      }
      out.push_back(std::move(rv));
    }

    KillingVerdict kv = killing_check(m, xi_field, run.pts);
    CheckRecord rk;
    rk.name = "killing-field";
    rk.paper_anchor = "L_xi g = 0";
    rk.tolerance = 1e-9;
    rk.max_residual = kv.residual_max;
    rk.verdict = "REPORT-ONLY";
    rk.notes = kv.pass ? "Killing" : "not Killing";
    out.push_back(std::move(rk));
  }
  if (scn.beta && scn.mu) {  // gradient soliton
    std::vector<double> resid = gradient_soliton_residual(m, *scn.beta, *scn.mu, run.pts);
    CheckRecord rec;
    rec.name = "gradient-soliton";
    rec.paper_anchor = "Hess beta + Ric + mu g = 0";
    rec.tolerance = scn.tol.analytic;
    for (double r : resid) rec.max_residual = std::max(rec.max_residual, r);
    rec.verdict = verdict_of(rec.max_residual, rec.tolerance);
    rec.detail["per_sample"] = resid;
    out.push_back(std::move(rec));
  }
  if (scn.has_submersion()) {  // scalar-curvature identities
    ScalarIdentityReport rep = scalar_identity_check(scn, run.pts);
    bool precond = rep.precond_T <= scn.tol.analytic &&
                   rep.precond_S <= scn.tol.analytic &&
                   rep.precond_dsigma <= scn.tol.analytic;
    CheckRecord rec;
    rec.name = "scalar-split";
    rec.paper_anchor = "s = s^v + s^{M2}/sigma^2";
    rec.tolerance = scn.tol.fd;
    rec.max_residual = rep.split_max;
    rec.verdict = precond ? verdict_of(rep.split_max, rec.tolerance) : "REPORT-ONLY";
    if (!precond) rec.notes = "totally geodesic preconditions not met";
    rec.detail["residuals"] = rep.split_residual;
    rec.detail["precondition_T"] = rep.precond_T;
    rec.detail["precondition_S"] = rep.precond_S;
    rec.detail["precondition_dsigma"] = rep.precond_dsigma;
    if (std::isfinite(rep.restricted_cross_check))
      rec.detail["fiber_curvature_cross_check"] = rep.restricted_cross_check;
    out.push_back(std::move(rec));

    if (!rep.constant_scalar_residual.empty()) {
      CheckRecord rc;
      rc.name = "constant-scalar-curvature";
      rc.paper_anchor = "s = -mu d1";
      rc.tolerance = scn.tol.analytic;
      rc.max_residual = rep.constant_scalar_max;
      rc.verdict = verdict_of(rc.max_residual, rc.tolerance);
      rc.detail["residuals"] = rep.constant_scalar_residual;
      out.push_back(std::move(rc));
    }
    if (!rep.poisson_residual.empty()) {
      CheckRecord rp;
      rp.name = "poisson-equation";
      rp.paper_anchor = "lap(beta) = -s - mu d1";
      rp.tolerance = scn.tol.analytic;
      rp.max_residual = rep.poisson_max;
      rp.verdict = verdict_of(rp.max_residual, rp.tolerance);
      rp.detail["residuals"] = rep.poisson_residual;
      out.push_back(std::move(rp));
    }
  } else if (scn.mu) {
    std::vector<double> resid_b, resid_c;
    for (const Vec& p : run.pts) {
      MetricData md = metric_data(m, p);
      double s = scalar_curvature(md);
      resid_b.push_back(s + *scn.mu * md.n);
      if (scn.beta) resid_c.push_back(laplacian(md, scn.beta->jet(p)) + s + *scn.mu * md.n);
    }
    CheckRecord rc;
    rc.name = "constant-scalar-curvature";
    rc.paper_anchor = "s = -mu d1";
    rc.tolerance = scn.tol.analytic;
    for (double r : resid_b) rc.max_residual = std::max(rc.max_residual, std::abs(r));
    rc.verdict = verdict_of(rc.max_residual, rc.tolerance);
    rc.detail["residuals"] = resid_b;
    out.push_back(std::move(rc));
  }
  return out;
}

// ---- Ricci decomposition suite ---------------------------------------------------------------

inline std::vector<CheckRecord> decomp_checks(const Scenario& scn, const CheckOptions& opts,
                                              nlohmann::json* csv_rows = nullptr) {
  scn.require_submersion();
  SampledRun run = sampled_run(scn);
  // The decomposition sweep is the most expensive path; a handful of points
  // exercises every term.
  std::vector<Vec> pts(run.pts.begin(),
                       run.pts.begin() + std::min<std::size_t>(run.pts.size(), 6));

  double hcs_delta_a = 0.0, hcs_delta_b = 0.0;
  double ccs_vs_hcs_mixed_hh = 0.0;
  double ccs_delta_a = 0.0;
  std::vector<TermValue> ids_max;
  Lemma23Report lemma_worst;
  bool first = true;
  nlohmann::json first_terms;

  for (std::size_t s = 0; s < pts.size(); ++s) {
    const Vec& p = pts[s];
    DecompData d = decomp_data(scn, p);
    int dv = d.c.dv(), d2 = d.c.d2();
    auto sweep_block = [&](Block b, int na, int nb) {
      for (int ia = 0; ia < na; ++ia)
        for (int ib = 0; ib < nb; ++ib) {
          Breakdown h = hcs_ricci(scn, d, b, ia, ib);
          hcs_delta_a = std::max(hcs_delta_a, std::abs(h.delta_plus));
          hcs_delta_b = std::max(hcs_delta_b, std::abs(h.delta_flip));
          if (csv_rows)
            for (const auto& t : h.terms)
              csv_rows->push_back({{"sample", s},
                                   {"equation", h.equation},
                                   {"block", h.block},
                                   {"ia", ia},
                                   {"ib", ib},
                                   {"term", t.label},
                                   {"value", t.value}});
          if (first && ia == 0 && ib == 0) {
            nlohmann::json terms = nlohmann::json::array();
            for (const auto& t : h.terms)
              terms.push_back({{"term", t.label}, {"value", t.value}});
            first_terms[h.block] = {{"terms", std::move(terms)},
                                    {"rhs_total", h.rhs_total},
                                    {"intrinsic", h.intrinsic},
                                    {"delta", h.delta_plus},
                                    {"delta_flipped_convention", h.delta_flip}};
          }
          if (scn.beta) {
            Breakdown c = ccs_ricci(scn, d, b, ia, ib);
            ccs_delta_a = std::max(ccs_delta_a, std::abs(c.delta_plus));
            if (b != Block::kVerticalVertical)
              ccs_vs_hcs_mixed_hh =
                  std::max(ccs_vs_hcs_mixed_hh, std::abs(c.rhs_total - h.rhs_total));
            if (csv_rows)
              for (const auto& t : c.terms)
                csv_rows->push_back({{"sample", s},
                                     {"equation", c.equation},
                                     {"block", c.block},
                                     {"ia", ia},
                                     {"ib", ib},
                                     {"term", t.label},
                                     {"value", t.value}});
          }
        }
    };
    sweep_block(Block::kVerticalVertical, dv, dv);
    sweep_block(Block::kMixed, dv, d2);
    sweep_block(Block::kHorizontalHorizontal, d2, d2);

    if (scn.beta) {
      auto ids = ccs_substitution_identities(scn, d);
      if (ids_max.empty()) ids_max = ids;
      for (std::size_t i = 0; i < ids.size(); ++i)
        ids_max[i].value = std::max(ids_max[i].value, ids[i].value);
    }
    Lemma23Report lr = lemma23_check(scn, d);
    if (first) {
      lemma_worst = lr;
    } else {
      lemma_worst.bracket_residual =
          std::max(lemma_worst.bracket_residual, lr.bracket_residual);
      for (std::size_t i = 0; i < lr.items.size(); ++i) {
        lemma_worst.items[i].residual =
            std::max(lemma_worst.items[i].residual, lr.items[i].residual);
        for (std::size_t a = 0; a < lr.items[i].alternates.size(); ++a)
          lemma_worst.items[i].alternates[a].value = std::max(
              lemma_worst.items[i].alternates[a].value, lr.items[i].alternates[a].value);
      }
    }
    first = false;
  }

  std::vector<CheckRecord> out;
  {
    CheckRecord rec;
    rec.name = "ricci-decomposition-hcs";
    rec.paper_anchor = "general conformal-submersion Ricci formulas vs intrinsic Ricci";
    rec.tolerance = scn.tol.fd;
    rec.max_residual = std::min(hcs_delta_a, hcs_delta_b);
    rec.verdict = detail_checks::paper_verdict(opts.strict_paper, rec.max_residual,
                                               rec.tolerance);
    rec.detail["max_delta"] = hcs_delta_a;
    rec.detail["max_delta_flipped_convention"] = hcs_delta_b;
    rec.detail["first_sample"] = first_terms;
    rec.notes = run.note;
    out.push_back(std::move(rec));
  }
  if (scn.beta) {
    CheckRecord rec;
    rec.name = "ricci-decomposition-ccs";
    rec.paper_anchor = "Clairaut specialization vs intrinsic Ricci";
    rec.tolerance = scn.tol.fd;
    rec.max_residual = ccs_delta_a;
    rec.verdict = detail_checks::paper_verdict(opts.strict_paper, ccs_delta_a,
                                               rec.tolerance);
    rec.detail["max_delta"] = ccs_delta_a;
    rec.detail["ccs_vs_hcs_mixed_and_horizontal"] = ccs_vs_hcs_mixed_hh;
    out.push_back(std::move(rec));

    CheckRecord ids;
    ids.name = "ccs-substitution-identities";
    ids.paper_anchor = "identities used to derive the specialization";
    ids.tolerance = scn.tol.fd;
    nlohmann::json list = nlohmann::json::array();
    double worst = 0.0;
    for (const auto& t : ids_max) {
      list.push_back({{"identity", t.label}, {"max_residual", t.value}});
      worst = std::max(worst, t.value);
    }
    ids.max_residual = worst;
    ids.verdict = detail_checks::paper_verdict(opts.strict_paper, worst, ids.tolerance);
    ids.detail["identities"] = std::move(list);
    out.push_back(std::move(ids));
  }
  {
    CheckRecord rec;
    rec.name = "integrable-horizontal-identities";
    rec.paper_anchor = "six identities for integrable horizontal distributions";
    rec.tolerance = scn.tol.fd;
    double worst = 0.0;
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : lemma_worst.items) {
      nlohmann::json ji = {{"identity", item.label}, {"max_residual", item.residual}};
      nlohmann::json alts = nlohmann::json::array();
      for (const auto& a : item.alternates)
        alts.push_back({{"reading", a.label}, {"max_residual", a.value}});
      if (!alts.empty()) ji["alternates"] = std::move(alts);
      items.push_back(std::move(ji));
      worst = std::max(worst, item.residual);
    }
    rec.max_residual = worst;
    rec.verdict = detail_checks::paper_verdict(opts.strict_paper, worst, rec.tolerance);
    rec.detail["integrability_bracket_residual"] = lemma_worst.bracket_residual;
    rec.detail["items"] = std::move(items);
    rec.notes = lemma_worst.bracket_residual <= scn.tol.analytic
                    ? "horizontal distribution integrable at samples"
                    : "horizontal distribution NOT integrable; identities not applicable";
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- reference-value comparisons (report mode) ------------------------------------------------

inline std::vector<CheckRecord> paper_value_checks(const Scenario& scn,
                                                   const CheckOptions& opts) {
  std::vector<CheckRecord> out;
  if (scn.paper.ricci_frame.empty() && !scn.paper.mu_formula &&
      scn.paper.sigma_candidates.empty())
    return out;
  SampledRun run = sampled_run(scn);

  if (!scn.paper.ricci_frame.empty()) {
    CheckRecord rec;
    rec.name = "ricci-frame-vs-reference";
    rec.paper_anchor = "quoted frame-pair Ricci values";
    rec.tolerance = scn.tol.fd;
    nlohmann::json rows = nlohmann::json::array();
    double best_overall = 0.0;
    for (const auto& [na, nb, expr] : scn.paper.ricci_frame) {
      double delta_a = 0.0, delta_b = 0.0;
      for (const Vec& p : run.pts) {
        MetricData md = metric_data(scn.total, p);
        Mat ric = ricci(md);
        Vec a = eval_components(scn.frames.at(na), p);
        Vec b = eval_components(scn.frames.at(nb), p);
        double intrinsic = 0.0;
        for (int i = 0; i < md.n; ++i)
          for (int j = 0; j < md.n; ++j) intrinsic += ric(i, j) * a[i] * b[j];
        double expect = expr.value(p);
        delta_a = std::max(delta_a, std::abs(expect - intrinsic));
        delta_b = std::max(delta_b, std::abs(expect + intrinsic));
      }
      rows.push_back({{"pair", {na, nb}},
                      {"delta", delta_a},
                      {"delta_flipped_convention", delta_b}});
      best_overall = std::max(best_overall, std::min(delta_a, delta_b));
    }
    rec.max_residual = best_overall;
    rec.verdict = detail_checks::paper_verdict(opts.strict_paper, best_overall,
                                               rec.tolerance);
    rec.detail["pairs"] = std::move(rows);
    rec.notes = "deltas under both curvature sign conventions";
    out.push_back(std::move(rec));
  }

  if (scn.paper.mu_formula && scn.xi) {
    CheckRecord rec;
    rec.name = "mu-vs-reference-formula";
    rec.paper_anchor = "closing soliton-constant formula";
    rec.tolerance = scn.tol.fd;
    double delta_a = 0.0, delta_b = 0.0;
    SmoothField xi = as_field(*scn.xi);
    for (const Vec& p : run.pts) {
      MetricData md = metric_data(scn.total, p);
      Mat lie = lie_derivative_metric(md, xi(p));
      Mat ric = ricci(md);
      double tr = 0.0;
      for (int i = 0; i < md.n; ++i)
        for (int j = 0; j < md.n; ++j) tr += md.ginv(i, j) * (0.5 * lie(i, j) + ric(i, j));
      double mu_a = -tr / md.n;
      double mu_b = detail_checks::mu_fit_flipped(md, lie);
      double expect = scn.paper.mu_formula->value(p);
      delta_a = std::max(delta_a, std::abs(expect - mu_a));
      delta_b = std::max(delta_b, std::abs(expect - mu_b));
    }
    rec.max_residual = std::min(delta_a, delta_b);
    rec.verdict = detail_checks::paper_verdict(opts.strict_paper, rec.max_residual,
                                               rec.tolerance);
    rec.detail["delta"] = delta_a;
    rec.detail["delta_flipped_convention"] = delta_b;
    out.push_back(std::move(rec));
  }

  if (!scn.paper.sigma_candidates.empty()) {
    CheckRecord rec;
    rec.name = "dilation-vs-candidates";
    rec.paper_anchor = "quoted dilation clauses";
    rec.tolerance = scn.tol.analytic;
    nlohmann::json rows = nlohmann::json::array();
    double best = std::numeric_limits<double>::infinity();
    for (const Expr& cand : scn.paper.sigma_candidates) {
      double delta = 0.0;
      for (const Vec& p : run.pts) {
        PointContext c = point_context(scn, p);
        double cv = cand.value(p);
        delta = std::max(delta,
                         std::abs(c.sigma.s2 - cv * cv) / (1.0 + std::abs(c.sigma.s2)));
      }
      rows.push_back({{"candidate", cand.str()}, {"relative_delta", delta}});
      best = std::min(best, delta);
    }
    rec.max_residual = best;
    rec.verdict =
        detail_checks::paper_verdict(opts.strict_paper, best, rec.tolerance);
    rec.detail["candidates"] = std::move(rows);
    rec.notes = "relative mismatch of sigma^2 against each candidate squared";
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- full report -------------------------------------------------------------------------------

inline Report full_report(const Scenario& scn, const CheckOptions& opts) {
  Report rep;
  rep.scenario = scn.name;
  char hex[32];
  std::snprintf(hex, sizeof(hex), "fnv1a:%016llx",
                static_cast<unsigned long long>(scn.content_hash));
  rep.scenario_hash = hex;
  rep.environment["seed"] = scn.sampling.seed;
  rep.environment["sample_count"] = scn.sampling.count;
  rep.environment["fd_step"] = 1e-5;
  rep.environment["geodesic_step"] = opts.geodesic_step;
  rep.environment["geodesic_length"] = opts.geodesic_length;
  rep.environment["tolerances"] = {{"analytic", scn.tol.analytic},
                                   {"finite_difference", scn.tol.fd},
                                   {"geodesic_drift", scn.tol.geodesic_drift}};

  auto append = [&rep](std::vector<CheckRecord> recs) {
    for (auto& r : recs) rep.checks.push_back(std::move(r));
  };
  append(christoffel_checks(scn, opts));
  if (scn.has_submersion()) {
    append(conformal_checks(scn));
    append(oneill_checks(scn));
    if (scn.beta) append(clairaut_checks(scn));
  }
  append(geodesic_checks(scn, opts));
  append(soliton_checks(scn));
  if (scn.has_submersion()) append(decomp_checks(scn, opts));
  append(paper_value_checks(scn, opts));
  return rep;
}

}  // namespace ccs
