#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ccs/chart.hpp"
#include "ccs/random.hpp"

namespace ccs {

struct Sampling {
  std::vector<std::pair<double, double>> box;
  int count = 20;
  std::uint64_t seed = 1;
};

struct Tolerances {
  double analytic = 1e-8;  // purely jet-based paths
  double fd = 1e-5;        // paths that involve finite differences
  double geodesic_drift = 1e-6;
};

// Optional reference values quoted from the source the scenario was built
// from, compared in report mode.
struct PaperChecks {
  std::vector<std::tuple<int, int, int, double>> christoffel;  // (k,i,j,value)
  bool christoffel_others_zero = false;
  std::vector<std::tuple<std::string, std::string, Expr>> ricci_frame;
  std::optional<Expr> mu_formula;
  std::vector<Expr> sigma_candidates;  // candidate dilation expressions
};

struct Scenario {
  std::string name;
  MetricField total;
  std::optional<MetricField> base;
  std::vector<Expr> map;  // d2 components in total coordinates
  std::map<std::string, VectorField> frames;
  std::optional<Expr> beta;
  std::optional<Expr> clairaut_r;  // resolved to exp(beta) at load when absent
  std::optional<VectorField> xi;
  std::optional<double> mu;
  Sampling sampling;
  Tolerances tol;
  PaperChecks paper;
  std::uint64_t content_hash = 0;

  int d1() const { return total.dim(); }
  int d2() const { return base ? base->dim() : 0; }
  int fiber_dim() const { return d1() - d2(); }
  bool has_submersion() const { return base.has_value(); }

  void require_submersion() const {
    if (!base) throw InputError("scenario '" + name + "' declares no base/map");
  }
  const Expr& require_beta() const {
    if (!beta) throw InputError("scenario '" + name + "' declares no Clairaut beta");
    return *beta;
  }
};

// ---- pointwise map data ------------------------------------------------------

struct MapJet {
  Vec value;   // d2
  Mat J;       // J(a,i) = d_i map^a
  Tensor3 dJ;  // dJ(m,a,i) = d_m d_i map^a
};

inline MapJet map_jet(const Scenario& scn, const Vec& p) {
  int d1 = scn.d1(), d2 = scn.d2();
  MapJet mj;
  mj.value = Vec(d2);
  mj.J = Mat(d2, d1);
  mj.dJ = Tensor3(d1, d2, d1);
  for (int a = 0; a < d2; ++a) {
    Jet2 j = scn.map[a].jet(p);
    mj.value[a] = j.val;
    for (int i = 0; i < d1; ++i) {
      mj.J(a, i) = j.grad[i];
      for (int m = 0; m < d1; ++m) mj.dJ(m, a, i) = j.hess(m, i);
    }
  }
  return mj;
}

inline Vec pushforward(const MapJet& mj, const Vec& v) { return mj.J * v; }

// ---- projectors ----------------------------------------------------------------
//
// The horizontal projector has the closed form P = g^-1 J^T (J g^-1 J^T)^-1 J,
// which is smooth in the base point and needs no orthonormalization, so its
// first derivatives follow from the product rule on jet data.

struct ProjectorJet {
  Mat H, V;        // d1 x d1
  Tensor3 dH, dV;  // (m,i,j) = d_m P_ij
};

inline ProjectorJet projector_jet(const MetricData& md, const MapJet& mj) {
  int n = md.n, d2 = mj.J.rows();
  ProjectorJet pj;
  Mat Jt = transpose(mj.J);
  Mat A = md.ginv * Jt;  // n x d2
  Mat K = mj.J * A;      // d2 x d2
  Mat Ki = inverse(K);
  Mat KiJ = Ki * mj.J;
  pj.H = A * KiJ;
  pj.V = Mat::identity(n) - pj.H;
  pj.dH = Tensor3(n, n, n);
  pj.dV = Tensor3(n, n, n);
  for (int m = 0; m < n; ++m) {
    Mat dg_m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dg_m(i, j) = md.dg(m, i, j);
    Mat dJ_m(d2, n);
    for (int a = 0; a < d2; ++a)
      for (int i = 0; i < n; ++i) dJ_m(a, i) = mj.dJ(m, a, i);
    Mat dGi = -1.0 * (md.ginv * (dg_m * md.ginv));
    Mat dA = dGi * Jt + md.ginv * transpose(dJ_m);
    Mat dK = dJ_m * A + mj.J * dA;
    Mat dKi = -1.0 * (Ki * (dK * Ki));
    Mat dP = dA * KiJ + A * (dKi * mj.J) + A * (Ki * dJ_m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        pj.dH(m, i, j) = dP(i, j);
        pj.dV(m, i, j) = -dP(i, j);
      }
  }
  return pj;
}

// ---- frames and dilation -------------------------------------------------------

struct FramePoint {
  Vec p;
  std::vector<Vec> vertical;    // d1-d2 g-orthonormal spanning Ker J
  std::vector<Vec> horizontal;  // d2 g-orthonormal spanning the complement
  Mat proj_v, proj_h;
  double sigma2 = 0.0;
  double conformality_residual = 0.0;
  Vec base_point;
  Mat jac;
};

// sigma^2 and its coordinate gradient. With M = J G1^-1 J^T, a conformal
// submersion satisfies G2 M = sigma^2 I, so sigma^2 = (1/d2) tr(G2 M); that
// trace equals the Rayleigh-quotient average of g2(JX,JX) over any
// g1-orthonormal horizontal basis.
struct Sigma {
  double s2 = 0.0;
  Vec ds2;  // d_m sigma^2
};

inline Sigma sigma_jet(const MetricData& md, const MapJet& mj, const MetricData& base_md) {
  int n = md.n, d2 = mj.J.rows();
  Sigma s;
  s.ds2 = Vec(n, 0.0);
  Mat Jt = transpose(mj.J);
  Mat M = mj.J * (md.ginv * Jt);  // d2 x d2
  const Mat& G2 = base_md.g;
  double tr = 0.0;
  for (int a = 0; a < d2; ++a)
    for (int b = 0; b < d2; ++b) tr += G2(a, b) * M(b, a);
  s.s2 = tr / d2;
  for (int m = 0; m < n; ++m) {
    Mat dg_m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dg_m(i, j) = md.dg(m, i, j);
    Mat dJ_m(d2, n);
    for (int a = 0; a < d2; ++a)
      for (int i = 0; i < n; ++i) dJ_m(a, i) = mj.dJ(m, a, i);
    Mat dGi = -1.0 * (md.ginv * (dg_m * md.ginv));
    Mat dM = dJ_m * (md.ginv * Jt) + mj.J * (dGi * Jt) + mj.J * (md.ginv * transpose(dJ_m));
    // pullback of the base-metric derivative: d_m g2_ab = (d_c g2_ab) J(c,m)
    Mat dG2(d2, d2);
    for (int a = 0; a < d2; ++a)
      for (int b = 0; b < d2; ++b) {
        double v = 0.0;
        for (int cidx = 0; cidx < d2; ++cidx) v += base_md.dg(cidx, a, b) * mj.J(cidx, m);
        dG2(a, b) = v;
      }
    double dtr = 0.0;
    for (int a = 0; a < d2; ++a)
      for (int b = 0; b < d2; ++b) dtr += dG2(a, b) * M(b, a) + G2(a, b) * dM(b, a);
    s.ds2[m] = dtr / d2;
  }
  return s;
}

// Everything the submersion algebra needs at one regular point.
struct PointContext {
  Vec p;
  MetricData md;
  MapJet mj;
  ProjectorJet proj;
  FramePoint frame;
  Sigma sigma;
  MetricData base_md;

  int d1() const { return md.n; }
  int d2() const { return mj.J.rows(); }
  int dv() const { return d1() - d2(); }
};

inline FramePoint build_frame(const Scenario& scn, const Vec& p, const MetricData& md,
                              const MapJet& mj, const ProjectorJet& pj,
                              const MetricData& base_md, const Sigma& sig) {
  int d1 = scn.d1(), d2 = scn.d2();
  FramePoint fp;
  fp.p = p;
  fp.jac = mj.J;
  fp.base_point = mj.value;
  fp.proj_h = pj.H;
  fp.proj_v = pj.V;

  int rank = 0;
  std::vector<Vec> kernel = null_space(mj.J, &rank);
  if (rank < d2)
    throw CriticalPointError("map Jacobian has rank " + std::to_string(rank) + " < " +
                             std::to_string(d2) + " at " + point_str(p));
  fp.vertical = gram_schmidt(md.g, std::move(kernel));

  double accept = 1e-6 * std::sqrt(std::max(md.g.max_abs(), 1e-30));
  for (int i = 0; i < d1 && static_cast<int>(fp.horizontal.size()) < d2; ++i) {
    Vec v(d1, 0.0);
    v[i] = 1.0;
    for (const Vec& u : fp.vertical) {
      double c = g_inner(md.g, v, u);
      for (int k = 0; k < d1; ++k) v[k] -= c * u[k];
    }
    for (const Vec& x : fp.horizontal) {
      double c = g_inner(md.g, v, x);
      for (int k = 0; k < d1; ++k) v[k] -= c * x[k];
    }
    double norm = g_norm(md.g, v);
    if (norm > accept) {
      for (double& z : v) z /= norm;
      fp.horizontal.push_back(std::move(v));
    }
  }
  if (static_cast<int>(fp.horizontal.size()) != d2)
    throw NumericalError("could not complete a horizontal basis at " + point_str(p));

  fp.sigma2 = sig.s2;
  if (fp.sigma2 <= 0.0)
    throw NumericalError("nonpositive square dilation at " + point_str(p));

  double resid = 0.0;
  for (int i = 0; i < d2; ++i)
    for (int j = i; j < d2; ++j) {
      Vec pi = mj.J * fp.horizontal[i];
      Vec pjv = mj.J * fp.horizontal[j];
      double g2 = g_inner(base_md.g, pi, pjv);
      double g1 = g_inner(md.g, fp.horizontal[i], fp.horizontal[j]);
      resid = std::max(resid, std::abs(g2 - fp.sigma2 * g1));
    }
  fp.conformality_residual = resid / std::max(1.0, fp.sigma2);
  return fp;
}

inline PointContext point_context(const Scenario& scn, const Vec& p) {
  scn.require_submersion();
  PointContext c;
  c.p = p;
  c.md = metric_data(scn.total, p);
  c.mj = map_jet(scn, p);
  {
    int rank = 0;
    null_space(c.mj.J, &rank);
    if (rank < scn.d2())
      throw CriticalPointError("map Jacobian has rank " + std::to_string(rank) +
                               " < " + std::to_string(scn.d2()) + " at " + point_str(p));
  }
  c.base_md = metric_data(*scn.base, c.mj.value);
  c.proj = projector_jet(c.md, c.mj);
  c.sigma = sigma_jet(c.md, c.mj, c.base_md);
  c.frame = build_frame(scn, p, c.md, c.mj, c.proj, c.base_md, c.sigma);
  return c;
}

inline FramePoint frame_point(const Scenario& scn, const Vec& p) {
  return point_context(scn, p).frame;
}

// ---- O'Neill tensors -------------------------------------------------------------
//
// Pointwise arguments are extended by projecting their constant extension, so
// the Jacobian of the projected field is just the projector derivative
// contracted with the argument. Both tensors are pointwise in their arguments,
// which makes this extension choice immaterial.

namespace detail_sub {

inline FieldJet projected_constant(const Mat& P, const Tensor3& dP, const Vec& F) {
  int n = P.rows();
  FieldJet fj;
  fj.value = P * F;
  fj.jac = Mat(n, n);
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += dP(m, i, j) * F[j];
      fj.jac(i, m) = s;
    }
  return fj;
}

}  // namespace detail_sub

// T_E F = H nabla_{vE}(vF) + v nabla_{vE}(HF)
inline Vec oneill_T(const PointContext& c, const Vec& E, const Vec& F) {
  Vec vE = c.proj.V * E;
  FieldJet vF = detail_sub::projected_constant(c.proj.V, c.proj.dV, F);
  FieldJet hF = detail_sub::projected_constant(c.proj.H, c.proj.dH, F);
  Vec t1 = covariant_derivative(c.md, vF, vE);
  Vec t2 = covariant_derivative(c.md, hF, vE);
  Vec r = c.proj.H * t1;
  Vec r2 = c.proj.V * t2;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += r2[i];
  return r;
}

// S_E F = H nabla_{HE}(vF) + v nabla_{HE}(HF)
inline Vec oneill_S(const PointContext& c, const Vec& E, const Vec& F) {
  Vec hE = c.proj.H * E;
  FieldJet vF = detail_sub::projected_constant(c.proj.V, c.proj.dV, F);
  FieldJet hF = detail_sub::projected_constant(c.proj.H, c.proj.dH, F);
  Vec t1 = covariant_derivative(c.md, vF, hE);
  Vec t2 = covariant_derivative(c.md, hF, hE);
  Vec r = c.proj.H * t1;
  Vec r2 = c.proj.V * t2;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += r2[i];
  return r;
}

// H = (1/(d1-d2)) sum_k T_{U_k} U_k over the vertical orthonormal basis.
inline Vec mean_curvature(const PointContext& c) {
  int n = c.d1();
  Vec h(n, 0.0);
  if (c.dv() == 0) return h;
  for (const Vec& u : c.frame.vertical) {
    Vec t = oneill_T(c, u, u);
    for (int i = 0; i < n; ++i) h[i] += t[i];
  }
  for (double& x : h) x /= c.dv();
  return h;
}

// Umbilicity defect: max_ij || T_{U_i}U_j - g(U_i,U_j) H ||_g.
inline double umbilic_residual(const PointContext& c, const Vec& h) {
  double worst = 0.0;
  int n = c.d1();
  for (std::size_t i = 0; i < c.frame.vertical.size(); ++i)
    for (std::size_t j = i; j < c.frame.vertical.size(); ++j) {
      Vec t = oneill_T(c, c.frame.vertical[i], c.frame.vertical[j]);
      double gij = g_inner(c.md.g, c.frame.vertical[i], c.frame.vertical[j]);
      for (int k = 0; k < n; ++k) t[k] -= gij * h[k];
      worst = std::max(worst, g_norm(c.md.g, t));
    }
  return worst;
}

// H' = (1/d2) sum_l v nabla_{X_l} X_l over the horizontal orthonormal basis.
// The vertical part of this trace is frame independent.
inline Vec horizontal_mean_curvature(const PointContext& c) {
  int n = c.d1();
  Vec h(n, 0.0);
  for (const Vec& x : c.frame.horizontal) {
    FieldJet hx = detail_sub::projected_constant(c.proj.H, c.proj.dH, x);
    Vec t = covariant_derivative(c.md, hx, x);
    Vec vt = c.proj.V * t;
    for (int i = 0; i < n; ++i) h[i] += vt[i];
  }
  for (double& z : h) z /= c.d2();
  return h;
}

// Coordinate gradient of 1/sigma^2 and derived quantities.
inline Vec inv_sigma2_dcoord(const PointContext& c) {
  double s2 = c.sigma.s2;
  Vec d(c.d1());
  for (int m = 0; m < c.d1(); ++m) d[m] = -c.sigma.ds2[m] / (s2 * s2);
  return d;
}

inline Vec grad_inv_sigma2(const PointContext& c) {
  return c.md.ginv * inv_sigma2_dcoord(c);
}

// v[X,Y] for pointwise horizontal X, Y; the vertical part of the bracket of
// horizontal fields is tensorial.
inline Vec nu_bracket(const PointContext& c, const Vec& x, const Vec& y) {
  int n = c.d1();
  FieldJet hx = detail_sub::projected_constant(c.proj.H, c.proj.dH, x);
  FieldJet hy = detail_sub::projected_constant(c.proj.H, c.proj.dH, y);
  Vec br(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int m = 0; m < n; ++m)
      s += hx.value[m] * hy.jac(k, m) - hy.value[m] * hx.jac(k, m);
    br[k] = s;
  }
  return c.proj.V * br;
}

// ---- coordinate tensors of S and T, and their covariant derivatives -------------

// S(k,i,j) = (S_{e_i} e_j)^k
inline Tensor3 s_tensor(const PointContext& c) {
  int n = c.d1();
  Tensor3 s(n, n, n);
  for (int j = 0; j < n; ++j) {
    Vec ej(n, 0.0);
    ej[j] = 1.0;
    FieldJet vF = detail_sub::projected_constant(c.proj.V, c.proj.dV, ej);
    FieldJet hF = detail_sub::projected_constant(c.proj.H, c.proj.dH, ej);
    for (int i = 0; i < n; ++i) {
      Vec hE = c.proj.H.col(i);
      Vec t = c.proj.H * covariant_derivative(c.md, vF, hE);
      Vec t2 = c.proj.V * covariant_derivative(c.md, hF, hE);
      for (int k = 0; k < n; ++k) s(k, i, j) = t[k] + t2[k];
    }
  }
  return s;
}

inline Tensor3 t_tensor(const PointContext& c) {
  int n = c.d1();
  Tensor3 s(n, n, n);
  for (int j = 0; j < n; ++j) {
    Vec ej(n, 0.0);
    ej[j] = 1.0;
    FieldJet vF = detail_sub::projected_constant(c.proj.V, c.proj.dV, ej);
    FieldJet hF = detail_sub::projected_constant(c.proj.H, c.proj.dH, ej);
    for (int i = 0; i < n; ++i) {
      Vec vE = c.proj.V.col(i);
      Vec t = c.proj.H * covariant_derivative(c.md, vF, vE);
      Vec t2 = c.proj.V * covariant_derivative(c.md, hF, vE);
      for (int k = 0; k < n; ++k) s(k, i, j) = t[k] + t2[k];
    }
  }
  return s;
}

// (nabla_m W)^k_{ij} for a (1,2)-tensor field W given by `eval`, with the
// coordinate derivative taken by Richardson-extrapolated central differences
// (relative step `rel`) and Christoffel corrections from the analytic
// connection at the center point.
template <typename TensorAt>
inline Tensor4 nabla_tensor_fd(const PointContext& c, TensorAt&& eval, double rel = 1e-5) {
  int n = c.d1();
  Tensor3 w0 = eval(c.p);
  Tensor4 out(n, n, n, n);
  for (int m = 0; m < n; ++m) {
    double h = rel * (1.0 + std::abs(c.p[m]));
    auto diff = [&](double step) {
      Vec pp = c.p, pm = c.p;
      pp[m] += step;
      pm[m] -= step;
      Tensor3 wp = eval(pp), wm = eval(pm);
      Tensor3 d(n, n, n);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            d(k, i, j) = (wp(k, i, j) - wm(k, i, j)) / (2.0 * step);
      return d;
    };
    Tensor3 d1 = diff(h), d2 = diff(h / 2.0);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double dm = (4.0 * d2(k, i, j) - d1(k, i, j)) / 3.0;
          double corr = 0.0;
          for (int a = 0; a < n; ++a)
            corr += c.md.gamma(k, m, a) * w0(a, i, j) -
                    c.md.gamma(a, m, i) * w0(k, a, j) -
                    c.md.gamma(a, m, j) * w0(k, i, a);
          out(m, k, i, j) = dm + corr;
        }
  }
  return out;
}

// ((nabla_A W)_B C)^k = A^m B^i C^j (nabla W)(m,k,i,j)
inline Vec apply_nabla(const Tensor4& nw, const Vec& a, const Vec& b, const Vec& cc) {
  int n = static_cast<int>(a.size());
  Vec r(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int m = 0; m < n; ++m) {
      if (a[m] == 0.0) continue;
      for (int i = 0; i < n; ++i) {
        if (b[i] == 0.0) continue;
        for (int j = 0; j < n; ++j) s += a[m] * b[i] * cc[j] * nw(m, k, i, j);
      }
    }
    r[k] = s;
  }
  return r;
}

// Covariant derivative of a pointwise-defined vector field along direction u,
// with the coordinate Jacobian taken by Richardson central differences.
template <typename FieldAt>
inline Vec covariant_derivative_fd(const PointContext& c, FieldAt&& eval, const Vec& u,
                                   double rel = 1e-5) {
  int n = c.d1();
  Vec f0 = eval(c.p);
  Vec r(n, 0.0);
  for (int m = 0; m < n; ++m) {
    if (u[m] == 0.0) continue;
    double h = rel * (1.0 + std::abs(c.p[m]));
    auto diff = [&](double step) {
      Vec pp = c.p, pm = c.p;
      pp[m] += step;
      pm[m] -= step;
      Vec fp = eval(pp), fm = eval(pm);
      Vec d(n);
      for (int k = 0; k < n; ++k) d[k] = (fp[k] - fm[k]) / (2.0 * step);
      return d;
    };
    Vec d1 = diff(h), d2 = diff(h / 2.0);
    for (int k = 0; k < n; ++k) r[k] += u[m] * (4.0 * d2[k] - d1[k]) / 3.0;
  }
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m)
      for (int j = 0; j < n; ++j) r[k] += c.md.gamma(k, m, j) * u[m] * f0[j];
  return r;
}

// ---- projectability and the second fundamental form ------------------------------

// Residual of the pushforward's constancy along the fiber: central differences
// of q -> J(q) Y(q) along vertical directions at 10 fiber-shifted points.
inline double basic_residual(const Scenario& scn, const PointContext& c,
                             const VectorField& y) {
  Vec z0 = c.mj.J * eval_components(y, c.p);
  double scale = 1.0 + max_abs(z0);
  Rng rng(scn.sampling.seed ^ 0x9e3779b97f4a7c15ull);
  double worst = 0.0;
  int dv = c.dv();
  for (int t = 0; t < 5; ++t) {
    Vec dir(c.d1(), 0.0);
    if (t < dv) {
      dir = c.frame.vertical[t];
    } else {
      for (int k = 0; k < dv; ++k) {
        double w = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < c.d1(); ++i) dir[i] += w * c.frame.vertical[k][i];
      }
    }
    double norm = g_norm(c.md.g, dir);
    if (norm == 0.0) continue;
    for (double& x : dir) x /= norm;
    double h = 1e-5 * (1.0 + max_abs(c.p));
    Vec qp = c.p, qm = c.p;
    for (int i = 0; i < c.d1(); ++i) {
      qp[i] += h * dir[i];
      qm[i] -= h * dir[i];
    }
    Vec zp = map_jet(scn, qp).J * eval_components(y, qp);
    Vec zm = map_jet(scn, qm).J * eval_components(y, qm);
    for (std::size_t i = 0; i < zp.size(); ++i)
      worst = std::max(worst, std::abs(zp[i] - zm[i]) / (2.0 * h) / scale);
  }
  return worst;
}

// (nabla theta_*)(X,Y) = nabla^{M2}_{theta_* X} theta_* Y - theta_*(nabla^{M1}_X Y)
// for projectable X, Y. The base-side derivative of the pushed field comes from
// differentiating q -> J(q) Y(q) on the total side.
inline Vec second_fundamental_form(const Scenario& scn, const PointContext& c,
                                   const VectorField& x, const VectorField& y,
                                   double* lemma21_residual = nullptr,
                                   double basic_tol = 1e-8) {
  double rx = basic_residual(scn, c, x), ry = basic_residual(scn, c, y);
  if (rx > basic_tol || ry > basic_tol)
    throw InputError("second_fundamental_form: frame is not projectable (residuals " +
                     std::to_string(rx) + ", " + std::to_string(ry) + ")");
  int d1 = c.d1(), d2 = c.d2();
  Vec xv = eval_components(x, c.p), yv = eval_components(y, c.p);
  FieldJet yj = field_jet(y, c.p);
  Vec jx = c.mj.J * xv, jy = c.mj.J * yv;
  // dZ(a,m) = d_m (J Y)^a
  Mat dz(d2, d1);
  for (int a = 0; a < d2; ++a)
    for (int m = 0; m < d1; ++m) {
      double s = 0.0;
      for (int i = 0; i < d1; ++i)
        s += c.mj.dJ(m, a, i) * yv[i] + c.mj.J(a, i) * yj.jac(i, m);
      dz(a, m) = s;
    }
  Vec base_cov(d2, 0.0);
  for (int a = 0; a < d2; ++a) {
    double s = 0.0;
    for (int m = 0; m < d1; ++m) s += dz(a, m) * xv[m];
    for (int b = 0; b < d2; ++b)
      for (int e = 0; e < d2; ++e) s += c.base_md.gamma(a, b, e) * jx[b] * jy[e];
    base_cov[a] = s;
  }
  Vec total_cov = covariant_derivative(c.md, yj, xv);
  Vec sff = base_cov - c.mj.J * total_cov;

  if (lemma21_residual) {
    // theta_*(H nabla_X Y) vs the dilation-term expansion plus the base
    // connection term; both sides are computed independently.
    Vec lhs = c.mj.J * (c.proj.H * total_cov);
    Vec df = inv_sigma2_dcoord(c);
    Vec grad_h = c.proj.H * (c.md.ginv * df);
    double xf = dot(df, xv), yf = dot(df, yv);
    double gxy = g_inner(c.md.g, xv, yv);
    Vec rhs = base_cov;
    Vec jgrad = c.mj.J * grad_h;
    double s2 = c.sigma.s2;
    for (int a = 0; a < d2; ++a)
      rhs[a] += 0.5 * s2 * (-gxy * jgrad[a] + xf * jy[a] + yf * jx[a]);
    *lemma21_residual = max_abs(lhs - rhs);
  }
  return sff;
}

// tau = (d1-d2) theta_*(grad beta) + (d2-2) (sigma^2/2) theta_*(H grad(1/sigma^2))
inline Vec tension_field(const Scenario& scn, const PointContext& c) {
  const Expr& beta = scn.require_beta();
  Vec gb = gradient(c.md, beta.jet(c.p));
  Vec term1 = static_cast<double>(c.dv()) * (c.mj.J * gb);
  Vec grad_h = c.proj.H * grad_inv_sigma2(c);
  Vec term2 = (c.d2() - 2) * (c.sigma.s2 / 2.0) * (c.mj.J * grad_h);
  return term1 + term2;
}

// ---- sampling --------------------------------------------------------------------

struct SampleSet {
  std::vector<Vec> accepted;
  std::vector<std::pair<Vec, std::string>> rejected;
};

inline SampleSet draw_samples(const Scenario& scn) {
  SampleSet out;
  Rng rng(scn.sampling.seed);
  for (int i = 0; i < scn.sampling.count; ++i) {
    Vec p = rng.point(scn.sampling.box);
    if (!in_domain(scn.total.chart(), p)) {
      out.rejected.emplace_back(p, "outside chart domain");
      continue;
    }
    try {
      MetricData md = metric_data(scn.total, p);
      if (scn.has_submersion()) {
        MapJet mj = map_jet(scn, p);
        int rank = 0;
        null_space(mj.J, &rank);
        if (rank < scn.d2()) {
          out.rejected.emplace_back(p, "critical point of the map");
          continue;
        }
        Vec q = mj.value;
        if (!in_domain(scn.base->chart(), q)) {
          out.rejected.emplace_back(p, "image outside base chart domain");
          continue;
        }
        metric_data(*scn.base, q);
      }
    } catch (const NumericalError& e) {
      out.rejected.emplace_back(p, e.what());
      continue;
    } catch (const DomainError& e) {
      out.rejected.emplace_back(p, e.what());
      continue;
    }
    out.accepted.push_back(std::move(p));
  }
  return out;
}

}  // namespace ccs
