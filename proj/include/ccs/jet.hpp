#pragma once

#include <cmath>

#include "ccs/linalg.hpp"

namespace ccs {

// Second-order forward jet: value, gradient and Hessian with respect to the
// chart coordinates. The Hessian is kept as a packed upper triangle, so
// symmetry holds to exact arithmetic by construction.
struct Jet2 {
  double val = 0.0;
  Vec grad;
  SymMat hess;

  Jet2() = default;
  explicit Jet2(int n) : grad(n, 0.0), hess(n) {}

  int dim() const { return static_cast<int>(grad.size()); }

  static Jet2 constant(int n, double c) {
    Jet2 j(n);
    j.val = c;
    return j;
  }

  static Jet2 coordinate(int n, int index, double x) {
    Jet2 j(n);
    j.val = x;
    j.grad[index] = 1.0;
    return j;
  }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r(a.dim());
  r.val = a.val + b.val;
  for (int i = 0; i < r.dim(); ++i) r.grad[i] = a.grad[i] + b.grad[i];
  for (int i = 0; i < r.dim(); ++i)
    for (int j = i; j < r.dim(); ++j) r.hess.at(i, j) = a.hess(i, j) + b.hess(i, j);
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  Jet2 r(a.dim());
  r.val = a.val - b.val;
  for (int i = 0; i < r.dim(); ++i) r.grad[i] = a.grad[i] - b.grad[i];
  for (int i = 0; i < r.dim(); ++i)
    for (int j = i; j < r.dim(); ++j) r.hess.at(i, j) = a.hess(i, j) - b.hess(i, j);
  return r;
}

inline Jet2 operator-(const Jet2& a) {
  Jet2 r(a.dim());
  r.val = -a.val;
  for (int i = 0; i < r.dim(); ++i) r.grad[i] = -a.grad[i];
  for (int i = 0; i < r.dim(); ++i)
    for (int j = i; j < r.dim(); ++j) r.hess.at(i, j) = -a.hess(i, j);
  return r;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r(a.dim());
  r.val = a.val * b.val;
  for (int i = 0; i < r.dim(); ++i) r.grad[i] = a.grad[i] * b.val + a.val * b.grad[i];
  for (int i = 0; i < r.dim(); ++i)
    for (int j = i; j < r.dim(); ++j)
      r.hess.at(i, j) = a.hess(i, j) * b.val + a.val * b.hess(i, j) +
                        a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i];
  return r;
}

// Composition with a scalar function given f(u), f'(u), f''(u).
inline Jet2 compose(const Jet2& u, double f, double df, double ddf) {
  Jet2 r(u.dim());
  r.val = f;
  for (int i = 0; i < r.dim(); ++i) r.grad[i] = df * u.grad[i];
  for (int i = 0; i < r.dim(); ++i)
    for (int j = i; j < r.dim(); ++j)
      r.hess.at(i, j) = df * u.hess(i, j) + ddf * u.grad[i] * u.grad[j];
  return r;
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  // Caller is responsible for the b != 0 domain check.
  double inv = 1.0 / b.val;
  return a * compose(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2 jet_exp(const Jet2& u) {
  double e = std::exp(u.val);
  return compose(u, e, e, e);
}

inline Jet2 jet_log(const Jet2& u) {
  double inv = 1.0 / u.val;
  return compose(u, std::log(u.val), inv, -inv * inv);
}

inline Jet2 jet_sin(const Jet2& u) {
  double s = std::sin(u.val), c = std::cos(u.val);
  return compose(u, s, c, -s);
}

inline Jet2 jet_cos(const Jet2& u) {
  double s = std::sin(u.val), c = std::cos(u.val);
  return compose(u, c, -s, -c);
}

inline Jet2 jet_tan(const Jet2& u) {
  double t = std::tan(u.val);
  double d = 1.0 + t * t;
  return compose(u, t, d, 2.0 * t * d);
}

inline Jet2 jet_sqrt(const Jet2& u) {
  double s = std::sqrt(u.val);
  return compose(u, s, 0.5 / s, -0.25 / (s * u.val));
}

inline Jet2 jet_tanh(const Jet2& u) {
  double t = std::tanh(u.val);
  double d = 1.0 - t * t;
  return compose(u, t, d, -2.0 * t * d);
}

// u^e for a constant exponent. The e*(e-1) guards avoid evaluating pow with a
// negative exponent at u == 0 when the coefficient is zero anyway.
inline Jet2 jet_pow(const Jet2& u, double e) {
  double f = std::pow(u.val, e);
  double df = (e == 0.0) ? 0.0 : e * std::pow(u.val, e - 1.0);
  double ddf = (e == 0.0 || e == 1.0) ? 0.0 : e * (e - 1.0) * std::pow(u.val, e - 2.0);
  return compose(u, f, df, ddf);
}

}  // namespace ccs
