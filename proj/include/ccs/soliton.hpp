#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ccs/submersion.hpp"

namespace ccs {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// mu < 0 shrinking, |mu| <= 1e-9 steady, mu > 0 expanding; "non-constant"
// when the per-point series spreads beyond 1e-6 relative.
inline std::string classify_mu(const std::vector<double>& mu) {
  if (mu.empty()) return "steady";
  double lo = mu[0], hi = mu[0], sum = 0.0;
  for (double v : mu) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  double mean = sum / mu.size();
  if (hi - lo > 1e-6 * (1.0 + std::abs(mean))) return "non-constant";
  if (std::abs(mean) <= 1e-9) return "steady";
  return mean < 0.0 ? "shrinking" : "expanding";
}

inline bool series_constant(const std::vector<double>& v, double rel = 1e-6) {
  if (v.empty()) return true;
  double lo = v[0], hi = v[0], sum = 0.0;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    sum += x;
  }
  return hi - lo <= rel * (1.0 + std::abs(sum / v.size()));
}

namespace detail_sol {

// Sup norm of a symmetric bilinear form over an orthonormal frame.
inline double frame_sup(const Mat& form, const std::vector<Vec>& frame) {
  double worst = 0.0;
  for (std::size_t a = 0; a < frame.size(); ++a)
    for (std::size_t b = a; b < frame.size(); ++b) {
      double s = 0.0;
      for (int i = 0; i < form.rows(); ++i)
        for (int j = 0; j < form.cols(); ++j)
          s += form(i, j) * frame[a][i] * frame[b][j];
      worst = std::max(worst, std::abs(s));
    }
  return worst;
}

inline double pair_value(const Mat& form, const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < form.rows(); ++i)
    for (int j = 0; j < form.cols(); ++j) s += form(i, j) * a[i] * b[j];
  return s;
}

inline double block_sup(const Mat& form, const std::vector<Vec>& left,
                        const std::vector<Vec>& right) {
  double worst = 0.0;
  for (const Vec& a : left)
    for (const Vec& b : right) worst = std::max(worst, std::abs(pair_value(form, a, b)));
  return worst;
}

}  // namespace detail_sol

struct SolitonVerdict {
  double residual_max = 0.0;
  double mu_used = 0.0;
  std::vector<double> mu_fit;
  std::string classification;
  // per-block residuals when a submersion context is available
  double block_vv = kNaN, block_mixed = kNaN, block_hh = kNaN;
  std::vector<double> per_sample;
};

// Residual of (1/2) L_xi g + Ric + mu g at each sample, measured in a
// g-orthonormal frame; when the scenario carries a submersion, the residual is
// also contracted against the vertical/horizontal bases.
inline SolitonVerdict soliton_residual(const MetricField& m, const SmoothField& xi,
                                       double mu, const std::vector<Vec>& pts,
                                       const Scenario* ctx = nullptr) {
  SolitonVerdict out;
  out.mu_used = mu;
  bool blocks = ctx && ctx->has_submersion();
  if (blocks) out.block_vv = out.block_mixed = out.block_hh = 0.0;
  for (const Vec& p : pts) {
    MetricData md = metric_data(m, p);
    Mat l = lie_derivative_metric(md, xi(p));
    Mat ric = ricci(md);
    int n = md.n;
    Mat resid(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        resid(i, j) = 0.5 * l(i, j) + ric(i, j) + mu * md.g(i, j);

    double tr = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) tr += md.ginv(i, j) * (0.5 * l(i, j) + ric(i, j));
    out.mu_fit.push_back(-tr / n);

    if (blocks) {
      FramePoint fp = frame_point(*ctx, p);
      out.block_vv = std::max(out.block_vv,
                              detail_sol::frame_sup(resid, fp.vertical));
      out.block_hh = std::max(out.block_hh,
                              detail_sol::frame_sup(resid, fp.horizontal));
      out.block_mixed = std::max(
          out.block_mixed, detail_sol::block_sup(resid, fp.vertical, fp.horizontal));
      double worst = std::max({detail_sol::frame_sup(resid, fp.vertical),
                               detail_sol::frame_sup(resid, fp.horizontal),
                               detail_sol::block_sup(resid, fp.vertical, fp.horizontal)});
      out.per_sample.push_back(worst);
      out.residual_max = std::max(out.residual_max, worst);
    } else {
      double worst = detail_sol::frame_sup(resid, orthonormal_frame(md.g));
      out.per_sample.push_back(worst);
      out.residual_max = std::max(out.residual_max, worst);
    }
  }
  out.classification = classify_mu(out.mu_fit);
  return out;
}

struct MuFit {
  std::vector<double> mu;
  double mean = 0.0;
  bool constant = false;
  std::string classification;
};

// Pointwise least-squares mu: the Frobenius projection of -(1/2 L_xi g + Ric)
// onto g, i.e. -trace/d in a g-orthonormal frame.
inline MuFit fit_mu(const MetricField& m, const SmoothField& xi,
                    const std::vector<Vec>& pts) {
  MuFit out;
  for (const Vec& p : pts) {
    MetricData md = metric_data(m, p);
    Mat l = lie_derivative_metric(md, xi(p));
    Mat ric = ricci(md);
    double tr = 0.0;
    for (int i = 0; i < md.n; ++i)
      for (int j = 0; j < md.n; ++j) tr += md.ginv(i, j) * (0.5 * l(i, j) + ric(i, j));
    out.mu.push_back(-tr / md.n);
  }
  double sum = 0.0;
  for (double v : out.mu) sum += v;
  out.mean = out.mu.empty() ? 0.0 : sum / out.mu.size();
  out.constant = series_constant(out.mu);
  out.classification = classify_mu(out.mu);
  return out;
}

struct EinsteinVerdict {
  std::vector<double> lambda;  // s/d per sample
  double residual_max = 0.0;   // sup |Ric - lambda g|
  bool einstein = false;
};

inline EinsteinVerdict einstein_residual(const MetricField& m, const std::vector<Vec>& pts) {
  EinsteinVerdict out;
  for (const Vec& p : pts) {
    MetricData md = metric_data(m, p);
    Mat ric = ricci(md);
    double lam = scalar_curvature(md, ric) / md.n;
    out.lambda.push_back(lam);
    Mat resid(md.n, md.n);
    for (int i = 0; i < md.n; ++i)
      for (int j = 0; j < md.n; ++j) resid(i, j) = ric(i, j) - lam * md.g(i, j);
    out.residual_max =
        std::max(out.residual_max, detail_sol::frame_sup(resid, orthonormal_frame(md.g)));
  }
  out.einstein = out.residual_max <= 1e-8 && series_constant(out.lambda);
  return out;
}

enum class Restriction { kFull, kVertical, kHorizontal };

struct ConformalVerdict {
  std::vector<double> beta1;   // fitted conformal factor per sample
  double residual_max = 0.0;   // sup |L_xi g - 2 beta1 g| on the restricted block
  bool killing = false;        // beta1 == 0 fit within tolerance
};

// L_xi g = 2 beta1 g, fitted pointwise on the chosen block. The restricted
// variants contract only against the vertical (or horizontal) basis.
inline ConformalVerdict conformal_field_check(const MetricField& m, const SmoothField& xi,
                                              const std::vector<Vec>& pts,
                                              Restriction restrict_to = Restriction::kFull,
                                              const Scenario* ctx = nullptr) {
  if (restrict_to != Restriction::kFull && (!ctx || !ctx->has_submersion()))
    throw InputError("restricted conformal check needs a submersion scenario");
  ConformalVerdict out;
  double max_beta1 = 0.0;
  for (const Vec& p : pts) {
    MetricData md = metric_data(m, p);
    Mat l = lie_derivative_metric(md, xi(p));
    std::vector<Vec> frame;
    if (restrict_to == Restriction::kFull) {
      frame = orthonormal_frame(md.g);
    } else {
      FramePoint fp = frame_point(*ctx, p);
      frame = restrict_to == Restriction::kVertical ? fp.vertical : fp.horizontal;
    }
    double tr = 0.0;
    for (const Vec& e : frame) tr += detail_sol::pair_value(l, e, e);
    double beta1 = tr / (2.0 * frame.size());
    out.beta1.push_back(beta1);
    max_beta1 = std::max(max_beta1, std::abs(beta1));
    double worst = 0.0;
    for (std::size_t a = 0; a < frame.size(); ++a)
      for (std::size_t b = a; b < frame.size(); ++b) {
        double lv = detail_sol::pair_value(l, frame[a], frame[b]);
        double gv = a == b ? 1.0 : 0.0;  // frame is g-orthonormal
        worst = std::max(worst, std::abs(lv - 2.0 * beta1 * gv));
      }
    out.residual_max = std::max(out.residual_max, worst);
  }
  out.killing = out.residual_max <= 1e-9 && max_beta1 <= 1e-9;
  return out;
}

struct KillingVerdict {
  double residual_max = 0.0;
  bool pass = false;
};

inline KillingVerdict killing_check(const MetricField& m, const SmoothField& xi,
                                    const std::vector<Vec>& pts, double tol = 1e-9) {
  KillingVerdict out;
  for (const Vec& p : pts) {
    MetricData md = metric_data(m, p);
    Mat l = lie_derivative_metric(md, xi(p));
    out.residual_max =
        std::max(out.residual_max, detail_sol::frame_sup(l, orthonormal_frame(md.g)));
  }
  out.pass = out.residual_max <= tol;
  return out;
}

// || Hess beta + Ric + mu g || at each sample.
inline std::vector<double> gradient_soliton_residual(const MetricField& m, const Expr& beta,
                                                     double mu, const std::vector<Vec>& pts) {
  std::vector<double> out;
  for (const Vec& p : pts) {
    MetricData md = metric_data(m, p);
    SymMat h = hessian_form(md, beta.jet(p));
    Mat ric = ricci(md);
    Mat resid(md.n, md.n);
    for (int i = 0; i < md.n; ++i)
      for (int j = 0; j < md.n; ++j)
        resid(i, j) = h(i, j) + ric(i, j) + mu * md.g(i, j);
    out.push_back(detail_sol::frame_sup(resid, orthonormal_frame(md.g)));
  }
  return out;
}

// ---- fiber curvature via the Gauss equation ---------------------------------------

// Ric^v(U_a, U_b) over the vertical orthonormal basis, from ambient curvature
// and the fiber second fundamental form T:
//   Ric^v(X,Y) = sum_k [ Rm(U_k,X,Y,U_k) + <T_{U_k}U_k, T_X Y> - <T_{U_k}Y, T_X U_k> ].
inline Mat fiber_ricci_gauss(const PointContext& c, const Tensor4& rm) {
  int dv = c.dv();
  Mat ric(dv, dv);
  for (int a = 0; a < dv; ++a)
    for (int b = a; b < dv; ++b) {
      const Vec& x = c.frame.vertical[a];
      const Vec& y = c.frame.vertical[b];
      Vec txy = oneill_T(c, x, y);
      double s = 0.0;
      for (int k = 0; k < dv; ++k) {
        const Vec& u = c.frame.vertical[k];
        s += rm_covariant(c.md, rm, u, x, y, u);
        Vec tkk = oneill_T(c, u, u);
        Vec tky = oneill_T(c, u, y);
        Vec txk = oneill_T(c, x, u);
        s += g_inner(c.md.g, tkk, txy) - g_inner(c.md.g, tky, txk);
      }
      ric(a, b) = ric(b, a) = s;
    }
  return ric;
}

inline double fiber_scalar_gauss(const PointContext& c) {
  Tensor4 rm = riemann(c.md);
  Mat ric = fiber_ricci_gauss(c, rm);
  double s = 0.0;
  for (int a = 0; a < c.dv(); ++a) s += ric(a, a);
  return s;
}

// When the map is a coordinate projection the fiber is a coordinate slice, so
// the intrinsic fiber curvature can be cross-checked against the restricted
// metric directly.
inline std::optional<double> fiber_scalar_restricted(const Scenario& scn, const Vec& p) {
  scn.require_submersion();
  int d1 = scn.d1();
  std::vector<bool> is_base(d1, false);
  for (const Expr& comp : scn.map) {
    auto idx = comp.as_coordinate();
    if (!idx) return std::nullopt;
    is_base[*idx] = true;
  }
  std::vector<int> fiber_coords;
  for (int i = 0; i < d1; ++i)
    if (!is_base[i]) fiber_coords.push_back(i);
  if (fiber_coords.empty()) return 0.0;
  std::vector<std::string> names;
  for (int i : fiber_coords) names.push_back(scn.total.chart().coords[i]);
  Chart fiber_chart{"fiber", names, {}};
  std::vector<Expr> upper;
  int k = static_cast<int>(fiber_coords.size());
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b)
      upper.push_back(
          scn.total.g(fiber_coords[a], fiber_coords[b]).restrict_coords(fiber_coords, p, names));
  MetricField fiber_metric(fiber_chart, upper);
  Vec q(k);
  for (int a = 0; a < k; ++a) q[a] = p[fiber_coords[a]];
  if (k == 1) return 0.0;  // one-dimensional fibers are flat
  return scalar_curvature(metric_data(fiber_metric, q));
}

// ---- scalar-curvature identities ----------------------------------------------------

struct ScalarIdentityReport {
  // (a) s - s^v - s^{M2}/sigma^2 with the totally-geodesic preconditions
  std::vector<double> split_residual;
  double split_max = kNaN;
  double precond_T = 0.0;       // max ||T||
  double precond_S = 0.0;       // max ||S|| on horizontal pairs
  double precond_dsigma = 0.0;  // max |d sigma^2|
  // (b) s + mu d1
  std::vector<double> constant_scalar_residual;
  double constant_scalar_max = kNaN;
  // (c) laplacian(beta) + s + mu d1
  std::vector<double> poisson_residual;
  double poisson_max = kNaN;
  // cross-check of the Gauss-equation fiber curvature where available
  double restricted_cross_check = kNaN;
};

inline ScalarIdentityReport scalar_identity_check(const Scenario& scn,
                                                  const std::vector<Vec>& pts) {
  scn.require_submersion();
  ScalarIdentityReport out;
  double cross = 0.0;
  bool have_cross = false;
  for (const Vec& p : pts) {
    PointContext c = point_context(scn, p);
    double s_total = scalar_curvature(c.md);
    double s_fiber = fiber_scalar_gauss(c);
    double s_base = scalar_curvature(c.base_md);
    out.split_residual.push_back(s_total - s_fiber - s_base / c.sigma.s2);

    // preconditions of the totally geodesic splitting
    Tensor3 tt = t_tensor(c);
    out.precond_T = std::max(out.precond_T, tt.max_abs());
    for (std::size_t a = 0; a < c.frame.horizontal.size(); ++a)
      for (std::size_t b = a; b < c.frame.horizontal.size(); ++b)
        out.precond_S = std::max(
            out.precond_S,
            max_abs(oneill_S(c, c.frame.horizontal[a], c.frame.horizontal[b])));
    out.precond_dsigma = std::max(out.precond_dsigma, max_abs(c.sigma.ds2));

    if (scn.mu)
      out.constant_scalar_residual.push_back(s_total + *scn.mu * scn.d1());
    if (scn.mu && scn.beta)
      out.poisson_residual.push_back(laplacian(c.md, scn.beta->jet(p)) + s_total +
                                     *scn.mu * scn.d1());

    if (auto restricted = fiber_scalar_restricted(scn, p)) {
      cross = std::max(cross, std::abs(*restricted - s_fiber));
      have_cross = true;
    }
  }
  auto maxof = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  out.split_max = maxof(out.split_residual);
  if (!out.constant_scalar_residual.empty())
    out.constant_scalar_max = maxof(out.constant_scalar_residual);
  if (!out.poisson_residual.empty()) out.poisson_max = maxof(out.poisson_residual);
  if (have_cross) out.restricted_cross_check = cross;
  return out;
}

// beta1 from the fiber-conformality statement:
// (d1-d2) ||grad beta||^2 + div(grad beta).
inline double beta1_formula(const Scenario& scn, const Vec& p) {
  const Expr& beta = scn.require_beta();
  MetricData md = metric_data(scn.total, p);
  Jet2 bj = beta.jet(p);
  Vec gb = gradient(md, bj);
  return scn.fiber_dim() * g_inner(md.g, gb, gb) + laplacian(md, bj);
}

}  // namespace ccs
