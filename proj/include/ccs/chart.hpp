#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccs/expr.hpp"
#include "ccs/linalg.hpp"

namespace ccs {

// Open domain constraint on a chart: expr != 0 or expr > 0.
struct DomainConstraint {
  Expr expr;
  bool positive = false;  // false: nonzero
};

struct Chart {
  std::string name;
  std::vector<std::string> coords;
  std::vector<DomainConstraint> domain;

  int dim() const { return static_cast<int>(coords.size()); }
};

inline bool in_domain(const Chart& chart, const Vec& p) {
  for (const auto& c : chart.domain) {
    double v = c.expr.value(p);
    if (c.positive ? (v <= 0.0) : (v == 0.0)) return false;
  }
  return true;
}

inline bool same_chart(const Chart& a, const Chart& b) {
  return a.coords == b.coords;
}

// Riemannian metric on a chart: a symmetric matrix of expressions. Only the
// upper triangle is stored, so g_ij and g_ji share the same Expr.
class MetricField {
 public:
  MetricField() = default;
  MetricField(Chart chart, std::vector<Expr> upper)
      : chart_(std::move(chart)), upper_(std::move(upper)) {
    int n = chart_.dim();
    if (static_cast<int>(upper_.size()) != n * (n + 1) / 2)
      throw InputError("metric '" + chart_.name + "': expected " +
                       std::to_string(n * (n + 1) / 2) + " upper-triangle entries");
  }

  const Chart& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }

  const Expr& g(int i, int j) const {
    if (i > j) std::swap(i, j);
    int n = chart_.dim();
    return upper_[i * n - i * (i - 1) / 2 + (j - i)];
  }

 private:
  Chart chart_;
  std::vector<Expr> upper_;
};

struct VectorField {
  Chart chart;
  std::vector<Expr> components;
};

// Everything the pointwise geometry needs from the metric at one point:
// values, first and second derivatives, Christoffel symbols and their first
// derivatives. Second derivatives of the metric come straight from the
// expression jets; nothing here is finite-differenced.
struct MetricData {
  Vec p;
  int n = 0;
  Mat g, ginv;
  double det = 0.0, sqrt_det = 0.0;
  Tensor3 dg;      // dg(k,i,j)    = d_k g_ij
  Tensor4 d2g;     // d2g(k,l,i,j) = d_k d_l g_ij
  Tensor3 gamma;   // gamma(k,i,j) = Gamma^k_ij
  Tensor4 dgamma;  // dgamma(m,k,i,j) = d_m Gamma^k_ij
};

inline MetricData metric_data(const MetricField& m, const Vec& p) {
  int n = m.dim();
  MetricData md;
  md.p = p;
  md.n = n;
  md.g = Mat(n, n);
  md.dg = Tensor3(n, n, n);
  md.d2g = Tensor4(n, n, n, n);

  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet2 jij = m.g(i, j).jet(p);
      md.g(i, j) = md.g(j, i) = jij.val;
      for (int k = 0; k < n; ++k) {
        md.dg(k, i, j) = md.dg(k, j, i) = jij.grad[k];
        for (int l = 0; l < n; ++l)
          md.d2g(k, l, i, j) = md.d2g(k, l, j, i) = jij.hess(k, l);
      }
    }

  // Positive definiteness via leading principal minors.
  for (int k = 1; k <= n; ++k) {
    Mat lead(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) lead(i, j) = md.g(i, j);
    if (determinant(lead) <= 0.0)
      throw NumericalError("metric not positive definite at " + point_str(p));
  }
  md.det = determinant(md.g);
  md.sqrt_det = std::sqrt(md.det);
  md.ginv = inverse(md.g);

  // Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij), once per
  // unordered pair so the lower-index symmetry is exact.
  md.gamma = Tensor3(n, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += md.ginv(k, l) * (md.dg(i, j, l) + md.dg(j, i, l) - md.dg(l, i, j));
        md.gamma(k, i, j) = md.gamma(k, j, i) = 0.5 * s;
      }

  // d_m Gamma^k_ij, using d_m g^{kl} = -(g^-1 dg_m g^-1)^{kl}.
  md.dgamma = Tensor4(n, n, n, n);
  Tensor3 dginv(n, n, n);
  for (int mth = 0; mth < n; ++mth) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d)
            s += md.ginv(a, c) * md.dg(mth, c, d) * md.ginv(d, b);
        dginv(mth, a, b) = -s;
      }
  }
  for (int mth = 0; mth < n; ++mth)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) {
            s += dginv(mth, k, l) * (md.dg(i, j, l) + md.dg(j, i, l) - md.dg(l, i, j));
            s += md.ginv(k, l) * (md.d2g(mth, i, j, l) + md.d2g(mth, j, i, l) -
                                  md.d2g(mth, l, i, j));
          }
          md.dgamma(mth, k, i, j) = md.dgamma(mth, k, j, i) = 0.5 * s;
        }
  return md;
}

// R^l_{ijk} with the convention R(e_i,e_j)e_k = R^l_{ijk} e_l,
// fixed so that the unit 2-sphere has Ric = +g.
inline Tensor4 riemann(const MetricData& md) {
  int n = md.n;
  Tensor4 r(n, n, n, n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = md.dgamma(i, l, j, k) - md.dgamma(j, l, i, k);
          for (int a = 0; a < n; ++a)
            s += md.gamma(l, i, a) * md.gamma(a, j, k) -
                 md.gamma(l, j, a) * md.gamma(a, i, k);
          r(l, i, j, k) = s;
        }
  return r;
}

inline Mat ricci(const MetricData& md, const Tensor4& rm) {
  int n = md.n;
  Mat ric(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rm(i, i, j, k);
      ric(j, k) = s;
    }
  return ric;
}

inline Mat ricci(const MetricData& md) { return ricci(md, riemann(md)); }

inline double scalar_curvature(const MetricData& md, const Mat& ric) {
  double s = 0.0;
  for (int i = 0; i < md.n; ++i)
    for (int j = 0; j < md.n; ++j) s += md.ginv(i, j) * ric(i, j);
  return s;
}

inline double scalar_curvature(const MetricData& md) {
  return scalar_curvature(md, ricci(md));
}

// Rm(A,B,C,D) = g(R(A,B)C, D).
inline double rm_covariant(const MetricData& md, const Tensor4& rm, const Vec& a,
                           const Vec& b, const Vec& c, const Vec& d) {
  int n = md.n;
  double s = 0.0;
  for (int l = 0; l < n; ++l) {
    double gl = 0.0;
    for (int e = 0; e < n; ++e) gl += md.g(l, e) * d[e];
    if (gl == 0.0) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) s += rm(l, i, j, k) * a[i] * b[j] * c[k] * gl;
  }
  return s;
}

// ---- scalar calculus -------------------------------------------------------

// (grad f)^k = g^{kl} d_l f
inline Vec gradient(const MetricData& md, const Jet2& f) {
  return md.ginv * f.grad;
}

// Hess f(e_i, e_j) = d_i d_j f - Gamma^k_ij d_k f
inline SymMat hessian_form(const MetricData& md, const Jet2& f) {
  int n = md.n;
  SymMat h(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = f.hess(i, j);
      for (int k = 0; k < n; ++k) s -= md.gamma(k, i, j) * f.grad[k];
      h.at(i, j) = s;
    }
  return h;
}

inline double laplacian(const MetricData& md, const Jet2& f) {
  SymMat h = hessian_form(md, f);
  double s = 0.0;
  for (int i = 0; i < md.n; ++i)
    for (int j = 0; j < md.n; ++j) s += md.ginv(i, j) * h(i, j);
  return s;
}

// ---- vector fields ---------------------------------------------------------

// Pointwise data of a vector field: components and their first derivatives.
// jac(i, m) = d_m F^i.
struct FieldJet {
  Vec value;
  Mat jac;
};

// A differentiable vector field presented pointwise. Expression-backed fields
// and derived fields (gradients, projections, brackets) all fit this shape.
using SmoothField = std::function<FieldJet(const Vec&)>;

inline FieldJet field_jet(const VectorField& f, const Vec& p) {
  int n = static_cast<int>(p.size());
  FieldJet fj;
  fj.value = Vec(n, 0.0);
  fj.jac = Mat(n, n);
  for (int i = 0; i < n; ++i) {
    Jet2 j = f.components[i].jet(p);
    fj.value[i] = j.val;
    for (int m = 0; m < n; ++m) fj.jac(i, m) = j.grad[m];
  }
  return fj;
}

inline SmoothField as_field(const VectorField& f) {
  return [f](const Vec& p) { return field_jet(f, p); };
}

inline Vec eval_components(const VectorField& f, const Vec& p) {
  Vec v(f.components.size());
  for (std::size_t i = 0; i < f.components.size(); ++i) v[i] = f.components[i].value(p);
  return v;
}

// (nabla_X Y)^k = X^m d_m Y^k + Gamma^k_mj X^m Y^j for the pointwise vector X.
inline Vec covariant_derivative(const MetricData& md, const FieldJet& y, const Vec& x) {
  int n = md.n;
  Vec r(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int m = 0; m < n; ++m) s += y.jac(k, m) * x[m];
    for (int m = 0; m < n; ++m)
      for (int j = 0; j < n; ++j) s += md.gamma(k, m, j) * x[m] * y.value[j];
    r[k] = s;
  }
  return r;
}

inline Vec covariant_derivative(const MetricField& m, const VectorField& x,
                                const VectorField& y, const Vec& p) {
  if (!same_chart(x.chart, y.chart) || !same_chart(x.chart, m.chart()))
    throw InputError("covariant_derivative: fields live on different charts");
  MetricData md = metric_data(m, p);
  return covariant_derivative(md, field_jet(y, p), eval_components(x, p));
}

// div X = (1/sqrt(det g)) d_i (sqrt(det g) X^i) = tr(jac) + Gamma^i_ik X^k
inline double divergence(const MetricData& md, const FieldJet& x) {
  double s = 0.0;
  for (int i = 0; i < md.n; ++i) s += x.jac(i, i);
  for (int i = 0; i < md.n; ++i)
    for (int k = 0; k < md.n; ++k) s += md.gamma(i, i, k) * x.value[k];
  return s;
}

// (L_xi g)_ij = xi^k d_k g_ij + g_kj d_i xi^k + g_ik d_j xi^k
inline Mat lie_derivative_metric(const MetricData& md, const FieldJet& xi) {
  int n = md.n;
  Mat l(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += xi.value[k] * md.dg(k, i, j) + md.g(k, j) * xi.jac(k, i) +
             md.g(i, k) * xi.jac(k, j);
      l(i, j) = l(j, i) = s;
    }
  return l;
}

// [X,Y]^k = X^m d_m Y^k - Y^m d_m X^k, returned with an exact Jacobian so the
// result is itself a differentiable field.
inline SmoothField bracket_field(const VectorField& x, const VectorField& y) {
  return [x, y](const Vec& p) {
    int n = static_cast<int>(p.size());
    std::vector<Jet2> xj(n), yj(n);
    for (int i = 0; i < n; ++i) {
      xj[i] = x.components[i].jet(p);
      yj[i] = y.components[i].jet(p);
    }
    FieldJet fj;
    fj.value = Vec(n, 0.0);
    fj.jac = Mat(n, n);
    for (int k = 0; k < n; ++k) {
      for (int m = 0; m < n; ++m)
        fj.value[k] += xj[m].val * yj[k].grad[m] - yj[m].val * xj[k].grad[m];
      for (int q = 0; q < n; ++q) {
        double s = 0.0;
        for (int m = 0; m < n; ++m)
          s += xj[m].grad[q] * yj[k].grad[m] + xj[m].val * yj[k].hess(m, q) -
               yj[m].grad[q] * xj[k].grad[m] - yj[m].val * xj[k].hess(m, q);
        fj.jac(k, q) = s;
      }
    }
    return fj;
  };
}

inline Vec bracket(const VectorField& x, const VectorField& y, const Vec& p) {
  return bracket_field(x, y)(p).value;
}

// grad f as a differentiable field:
// d_m (grad f)^k = (d_m g^{kl}) d_l f + g^{kl} d_m d_l f.
inline SmoothField gradient_field(const MetricField& m, const Expr& f) {
  return [m, f](const Vec& p) {
    MetricData md = metric_data(m, p);
    Jet2 fj = f.jet(p);
    int n = md.n;
    FieldJet out;
    out.value = md.ginv * fj.grad;
    out.jac = Mat(n, n);
    for (int mm = 0; mm < n; ++mm) {
      // d_m g^{kl}
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          double dginv_kl = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              dginv_kl -= md.ginv(k, a) * md.dg(mm, a, b) * md.ginv(b, l);
          s += dginv_kl * fj.grad[l] + md.ginv(k, l) * fj.hess(mm, l);
        }
        out.jac(k, mm) = s;
      }
    }
    return out;
  };
}

// Convenience wrappers matching the per-operation contracts.

inline Vec gradient(const MetricField& m, const Expr& f, const Vec& p) {
  return gradient(metric_data(m, p), f.jet(p));
}

inline double divergence(const MetricField& m, const VectorField& x, const Vec& p) {
  return divergence(metric_data(m, p), field_jet(x, p));
}

inline double laplacian(const MetricField& m, const Expr& f, const Vec& p) {
  return laplacian(metric_data(m, p), f.jet(p));
}

inline Mat lie_derivative_metric(const MetricField& m, const VectorField& xi, const Vec& p) {
  return lie_derivative_metric(metric_data(m, p), field_jet(xi, p));
}

}  // namespace ccs
