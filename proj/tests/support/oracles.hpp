#pragma once

// Finite-difference oracles kept independent of the jet-based implementation
// paths they are used to check. Everything here sees the metric only through
// point evaluation of g_ij.

#include "ccs/chart.hpp"
#include "ccs/linalg.hpp"

namespace ccs::test {

inline Mat metric_values(const MetricField& m, const Vec& p) {
  int n = m.dim();
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = m.g(i, j).value(p);
  return g;
}

// dg(k,i,j) = d_k g_ij by central differences of metric values.
inline Tensor3 metric_d1_fd(const MetricField& m, const Vec& p, double h) {
  int n = m.dim();
  Tensor3 dg(n, n, n);
  for (int k = 0; k < n; ++k) {
    Vec pp = p, pm = p;
    double step = h * (1.0 + std::abs(p[k]));
    pp[k] += step;
    pm[k] -= step;
    Mat gp = metric_values(m, pp), gm = metric_values(m, pm);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dg(k, i, j) = (gp(i, j) - gm(i, j)) / (2.0 * step);
  }
  return dg;
}

// Koszul formula on finite-differenced metric derivatives.
inline Tensor3 christoffel_fd(const MetricField& m, const Vec& p, double h = 1e-5) {
  int n = m.dim();
  Mat ginv = inverse(metric_values(m, p));
  Tensor3 dg = metric_d1_fd(m, p, h);
  Tensor3 gamma(n, n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += ginv(k, l) * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
        gamma(k, i, j) = 0.5 * s;
      }
  return gamma;
}

// Ricci by contracting the curvature built from finite differences of the
// finite-difference Christoffel symbols.
inline Mat ricci_fd(const MetricField& m, const Vec& p, double h_outer = 1e-4,
                    double h_inner = 1e-5) {
  int n = m.dim();
  Tensor3 gamma = christoffel_fd(m, p, h_inner);
  // dgamma(m,k,i,j) = d_m Gamma^k_ij
  Tensor4 dgamma(n, n, n, n);
  for (int mm = 0; mm < n; ++mm) {
    Vec pp = p, pm = p;
    double step = h_outer * (1.0 + std::abs(p[mm]));
    pp[mm] += step;
    pm[mm] -= step;
    Tensor3 gp = christoffel_fd(m, pp, h_inner), gm = christoffel_fd(m, pm, h_inner);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          dgamma(mm, k, i, j) = (gp(k, i, j) - gm(k, i, j)) / (2.0 * step);
  }
  Mat ric(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        s += dgamma(i, i, j, k) - dgamma(j, i, i, k);
        for (int a = 0; a < n; ++a)
          s += gamma(i, i, a) * gamma(a, j, k) - gamma(i, j, a) * gamma(a, i, k);
      }
      ric(j, k) = s;
    }
  return ric;
}

}  // namespace ccs::test
