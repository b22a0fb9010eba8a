#pragma once

#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "ccs/errors.hpp"

namespace ccs {

using Vec = std::vector<double>;

inline std::string point_str(const Vec& p) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

// Dense row-major matrix. Dimensions here are chart dimensions (2..4), so no
// attempt is made at being clever about storage or blocking.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[i * cols_ + j]; }
  double operator()(int i, int j) const { return a_[i * cols_ + j]; }

  Vec col(int j) const {
    Vec c(rows_);
    for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  Vec row(int i) const {
    Vec r(cols_);
    for (int j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
    return r;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// Symmetric matrix stored as the packed upper triangle.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(int n) : n_(n), a_(n * (n + 1) / 2, 0.0) {}

  int dim() const { return n_; }
  double operator()(int i, int j) const { return a_[index(i, j)]; }
  double& at(int i, int j) { return a_[index(i, j)]; }

  Mat full() const {
    Mat m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  std::size_t index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(i) * n_ - i * (i - 1) / 2 + (j - i);
  }
  int n_ = 0;
  std::vector<double> a_;
};

class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int n0, int n1, int n2)
      : n0_(n0), n1_(n1), n2_(n2), a_(n0 * n1 * n2, 0.0) {}
  double& operator()(int i, int j, int k) { return a_[(i * n1_ + j) * n2_ + k]; }
  double operator()(int i, int j, int k) const {
    return a_[(i * n1_ + j) * n2_ + k];
  }
  int size0() const { return n0_; }
  int size1() const { return n1_; }
  int size2() const { return n2_; }
  double max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  int n0_ = 0, n1_ = 0, n2_ = 0;
  std::vector<double> a_;
};

class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int n0, int n1, int n2, int n3)
      : n0_(n0), n1_(n1), n2_(n2), n3_(n3), a_(n0 * n1 * n2 * n3, 0.0) {}
  double& operator()(int i, int j, int k, int l) {
    return a_[((i * n1_ + j) * n2_ + k) * n3_ + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return a_[((i * n1_ + j) * n2_ + k) * n3_ + l];
  }

 private:
  int n0_ = 0, n1_ = 0, n2_ = 0, n3_ = 0;
  std::vector<double> a_;
};

inline Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec operator*(double s, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline Mat operator*(const Mat& a, const Mat& b) {
  Mat r(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

inline Mat operator+(const Mat& a, const Mat& b) {
  Mat r(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + b(i, j);
  return r;
}

inline Mat operator-(const Mat& a, const Mat& b) {
  Mat r(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}

inline Mat operator*(double s, const Mat& a) {
  Mat r(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(i, j) = s * a(i, j);
  return r;
}

inline Vec operator*(const Mat& a, const Vec& x) {
  Vec r(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r[i] += a(i, j) * x[j];
  return r;
}

inline Mat transpose(const Mat& a) {
  Mat r(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

// LU determinant with partial pivoting.
inline double determinant(Mat a) {
  int n = a.rows();
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(c, j));
      det = -det;
    }
    det *= a(c, c);
    for (int r = c + 1; r < n; ++r) {
      double f = a(r, c) / a(c, c);
      for (int j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return det;
}

// Gauss-Jordan inverse with partial pivoting.
inline Mat inverse(Mat a) {
  int n = a.rows();
  Mat inv = Mat::identity(n);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0.0) throw NumericalError("singular matrix in inverse()");
    if (piv != c)
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(c, j));
        std::swap(inv(piv, j), inv(c, j));
      }
    double d = a(c, c);
    for (int j = 0; j < n; ++j) {
      a(c, j) /= d;
      inv(c, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      double f = a(r, c);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

// Basis of the null space of a (typically wide) matrix. Pivot columns are
// chosen left to right, so each kernel vector has a leading 1 in the earliest
// possible coordinate; the returned order is by that coordinate index.
inline std::vector<Vec> null_space(Mat a, int* rank_out = nullptr) {
  int rows = a.rows(), cols = a.cols();
  double tol = 1e-10 * std::max(1.0, a.max_abs());
  std::vector<int> pivot_col;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int piv = r;
    for (int rr = r + 1; rr < rows; ++rr)
      if (std::abs(a(rr, c)) > std::abs(a(piv, c))) piv = rr;
    if (std::abs(a(piv, c)) <= tol) continue;
    if (piv != r)
      for (int j = 0; j < cols; ++j) std::swap(a(piv, j), a(r, j));
    double d = a(r, c);
    for (int j = 0; j < cols; ++j) a(r, j) /= d;
    for (int rr = 0; rr < rows; ++rr) {
      if (rr == r) continue;
      double f = a(rr, c);
      if (f == 0.0) continue;
      for (int j = 0; j < cols; ++j) a(rr, j) -= f * a(r, j);
    }
    pivot_col.push_back(c);
    ++r;
  }
  if (rank_out) *rank_out = r;
  std::vector<bool> is_pivot(cols, false);
  for (int c : pivot_col) is_pivot[c] = true;
  std::vector<Vec> kernel;
  for (int f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    Vec v(cols, 0.0);
    v[f] = 1.0;
    for (std::size_t k = 0; k < pivot_col.size(); ++k) v[pivot_col[k]] = -a(k, f);
    kernel.push_back(std::move(v));
  }
  return kernel;
}

inline double g_inner(const Mat& g, const Vec& u, const Vec& v) {
  double s = 0.0;
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) s += g(i, j) * u[i] * v[j];
  return s;
}

inline double g_norm(const Mat& g, const Vec& u) {
  return std::sqrt(std::max(0.0, g_inner(g, u, u)));
}

// Gram-Schmidt with respect to the inner product g, in the given order.
inline std::vector<Vec> gram_schmidt(const Mat& g, std::vector<Vec> vs) {
  std::vector<Vec> out;
  for (Vec& v : vs) {
    for (const Vec& e : out) {
      double c = g_inner(g, v, e);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * e[i];
    }
    double norm = g_norm(g, v);
    if (norm <= 1e-12)
      throw NumericalError("Gram-Schmidt: vectors are g-degenerate");
    for (double& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

// Deterministic g-orthonormal frame built from the coordinate basis.
inline std::vector<Vec> orthonormal_frame(const Mat& g) {
  int n = g.rows();
  std::vector<Vec> basis;
  for (int i = 0; i < n; ++i) {
    Vec e(n, 0.0);
    e[i] = 1.0;
    basis.push_back(std::move(e));
  }
  return gram_schmidt(g, std::move(basis));
}

}  // namespace ccs
