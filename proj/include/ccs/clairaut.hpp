#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "ccs/submersion.hpp"

namespace ccs {

struct GeodesicState {
  double s = 0.0;
  Vec x, v;
  double speed = 0.0;
  double omega = std::numeric_limits<double>::quiet_NaN();
  double clairaut_value = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
  std::vector<GeodesicState> states;
  bool truncated = false;
  std::string diagnostic;

  double speed_drift() const {
    if (states.empty()) return 0.0;
    double s0 = states.front().speed, worst = 0.0;
    for (const auto& st : states) worst = std::max(worst, std::abs(st.speed - s0));
    return worst;
  }
};

namespace detail_geo {

// velocity and acceleration of the geodesic equation at (x, v)
inline void geodesic_rhs(const MetricField& m, const Vec& x, const Vec& v, Vec& acc) {
  MetricData md = metric_data(m, x);
  int n = md.n;
  acc.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += md.gamma(k, i, j) * v[i] * v[j];
    acc[k] = -s;
  }
}

}  // namespace detail_geo

// Classical fixed-step RK4 on x'' = -Gamma(x', x'). The trajectory is
// truncated with a diagnostic if it leaves the chart domain.
inline Trajectory geodesic_integrate(const MetricField& m, Vec x, Vec v, double length,
                                     double step) {
  if (max_abs(v) == 0.0) throw InputError("geodesic_integrate: zero initial velocity");
  if (step <= 0.0 || length <= 0.0)
    throw InputError("geodesic_integrate: length and step must be positive");
  Trajectory traj;
  int n = static_cast<int>(x.size());
  long nsteps = std::lround(length / step);
  if (nsteps < 1) nsteps = 1;

  auto record = [&](double s) {
    GeodesicState st;
    st.s = s;
    st.x = x;
    st.v = v;
    st.speed = g_norm(metric_data(m, x).g, v);
    traj.states.push_back(std::move(st));
  };

  auto ok = [&](const Vec& q) { return in_domain(m.chart(), q); };

  if (!ok(x)) throw InputError("geodesic_integrate: start outside chart domain");
  record(0.0);

  Vec k1x(n), k1v(n), k2x(n), k2v(n), k3x(n), k3v(n), k4x(n), k4v(n), xt(n), vt(n);
  for (long i = 0; i < nsteps; ++i) {
    double h = step;
    try {
      k1x = v;
      detail_geo::geodesic_rhs(m, x, v, k1v);
      for (int j = 0; j < n; ++j) {
        xt[j] = x[j] + 0.5 * h * k1x[j];
        vt[j] = v[j] + 0.5 * h * k1v[j];
      }
      if (!ok(xt)) throw DomainError("left chart domain", point_str(xt));
      k2x = vt;
      detail_geo::geodesic_rhs(m, xt, vt, k2v);
      for (int j = 0; j < n; ++j) {
        xt[j] = x[j] + 0.5 * h * k2x[j];
        vt[j] = v[j] + 0.5 * h * k2v[j];
      }
      if (!ok(xt)) throw DomainError("left chart domain", point_str(xt));
      k3x = vt;
      detail_geo::geodesic_rhs(m, xt, vt, k3v);
      for (int j = 0; j < n; ++j) {
        xt[j] = x[j] + h * k3x[j];
        vt[j] = v[j] + h * k3v[j];
      }
      if (!ok(xt)) throw DomainError("left chart domain", point_str(xt));
      k4x = vt;
      detail_geo::geodesic_rhs(m, xt, vt, k4v);
      for (int j = 0; j < n; ++j) {
        x[j] += h / 6.0 * (k1x[j] + 2.0 * k2x[j] + 2.0 * k3x[j] + k4x[j]);
        v[j] += h / 6.0 * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]);
      }
      if (!ok(x)) throw DomainError("left chart domain", point_str(x));
    } catch (const DomainError& e) {
      traj.truncated = true;
      traj.diagnostic = std::string("trajectory truncated at s=") +
                        std::to_string((i + 1) * step) + ": " + e.what() + " (" +
                        e.subexpression() + ")";
      return traj;
    } catch (const NumericalError& e) {
      traj.truncated = true;
      traj.diagnostic =
          std::string("trajectory truncated at s=") + std::to_string((i + 1) * step) +
          ": " + e.what();
      return traj;
    }
    record((i + 1) * step);
  }
  return traj;
}

inline Mat horizontal_projector_value(const MetricData& md, const MapJet& mj) {
  Mat Jt = transpose(mj.J);
  Mat A = md.ginv * Jt;
  Mat K = mj.J * A;
  return A * (inverse(K) * mj.J);
}

// Fills omega (angle to the horizontal space) and, when the scenario carries a
// Clairaut function, (r o zeta) sin(omega).
inline void annotate_trajectory(const Scenario& scn, Trajectory& traj) {
  if (!scn.has_submersion()) return;
  for (auto& st : traj.states) {
    MetricData md = metric_data(scn.total, st.x);
    MapJet mj = map_jet(scn, st.x);
    Mat h = horizontal_projector_value(md, mj);
    Vec vv = st.v;
    Vec hv = h * vv;
    Vec nv(vv.size());
    for (std::size_t i = 0; i < vv.size(); ++i) nv[i] = vv[i] - hv[i];
    double total = g_norm(md.g, vv);
    double vert = g_norm(md.g, nv);
    double sin_omega = total > 0.0 ? std::min(1.0, vert / total) : 0.0;
    st.omega = std::asin(sin_omega);
    if (scn.clairaut_r) st.clairaut_value = scn.clairaut_r->value(st.x) * sin_omega;
  }
}

struct MonitorResult {
  std::vector<double> series;
  double drift = 0.0;
  double mean = 0.0;
  bool pass = false;
};

// Drift of (r o zeta) sin(omega) along an annotated trajectory.
inline MonitorResult clairaut_monitor(const Scenario& scn, const Trajectory& traj,
                                      double tol) {
  scn.require_beta();
  MonitorResult r;
  for (const auto& st : traj.states) r.series.push_back(st.clairaut_value);
  if (r.series.empty()) return r;
  double lo = r.series[0], hi = r.series[0], sum = 0.0;
  for (double v : r.series) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  r.drift = hi - lo;
  r.mean = sum / r.series.size();
  r.pass = r.drift <= tol * (1.0 + std::abs(r.mean));
  return r;
}

struct CertificatePoint {
  Vec p;
  double horizontality = 0.0;  // ||nu grad beta||_g
  double umbilicity = 0.0;     // max_ij ||T_{U_i}U_j + g(U_i,U_j) grad beta||_g
  double fiber_sigma = 0.0;    // max_k |U_k(sigma^2)|
};

struct Certificate {
  std::vector<CertificatePoint> points;
  double max_horizontality = 0.0;
  double max_umbilicity = 0.0;
  double max_fiber_sigma = 0.0;
  int rejected = 0;
  bool pass = false;
};

inline CertificatePoint clairaut_point_residuals(const Scenario& scn,
                                                 const PointContext& c) {
  const Expr& beta = scn.require_beta();
  CertificatePoint out;
  out.p = c.p;
  Vec gb = gradient(c.md, beta.jet(c.p));
  out.horizontality = g_norm(c.md.g, c.proj.V * gb);
  int n = c.d1();
  for (std::size_t i = 0; i < c.frame.vertical.size(); ++i)
    for (std::size_t j = i; j < c.frame.vertical.size(); ++j) {
      Vec t = oneill_T(c, c.frame.vertical[i], c.frame.vertical[j]);
      double gij = g_inner(c.md.g, c.frame.vertical[i], c.frame.vertical[j]);
      for (int k = 0; k < n; ++k) t[k] += gij * gb[k];
      out.umbilicity = std::max(out.umbilicity, g_norm(c.md.g, t));
    }
  for (const Vec& u : c.frame.vertical)
    out.fiber_sigma = std::max(out.fiber_sigma, std::abs(dot(c.sigma.ds2, u)));
  return out;
}

// The three conditions of the Clairaut criterion, evaluated over samples:
// grad beta horizontal, fibers umbilical with H = -grad beta, sigma constant
// along the fibers.
inline Certificate clairaut_certificate(const Scenario& scn, const std::vector<Vec>& pts,
                                        double tol) {
  scn.require_beta();
  Certificate cert;
  for (const Vec& p : pts) {
    try {
      PointContext c = point_context(scn, p);
      CertificatePoint cp = clairaut_point_residuals(scn, c);
      cert.max_horizontality = std::max(cert.max_horizontality, cp.horizontality);
      cert.max_umbilicity = std::max(cert.max_umbilicity, cp.umbilicity);
      cert.max_fiber_sigma = std::max(cert.max_fiber_sigma, cp.fiber_sigma);
      cert.points.push_back(std::move(cp));
    } catch (const CriticalPointError&) {
      ++cert.rejected;
    } catch (const NumericalError&) {
      ++cert.rejected;
    }
  }
  cert.pass = !cert.points.empty() && cert.max_horizontality <= tol &&
              cert.max_umbilicity <= tol && cert.max_fiber_sigma <= tol;
  return cert;
}

// Deterministic initial conditions mixing vertical and horizontal velocity.
inline std::vector<std::pair<Vec, Vec>> default_initial_conditions(const Scenario& scn,
                                                                   int count) {
  Rng rng(scn.sampling.seed ^ 0x517cc1b727220a95ull);
  std::vector<std::pair<Vec, Vec>> out;
  int n = scn.d1();
  int guard = 0;
  while (static_cast<int>(out.size()) < count && guard < 100 * count) {
    ++guard;
    Vec p = rng.point(scn.sampling.box);
    Vec dir = rng.vector(n, -1.0, 1.0);
    if (!in_domain(scn.total.chart(), p)) continue;
    try {
      MetricData md = metric_data(scn.total, p);
      double norm = g_norm(md.g, dir);
      if (norm < 1e-8) continue;
      for (double& d : dir) d /= norm;
    } catch (const NumericalError&) {
      continue;
    }
    out.emplace_back(std::move(p), std::move(dir));
  }
  if (static_cast<int>(out.size()) < count)
    throw NumericalError("could not draw geodesic initial conditions inside the domain");
  return out;
}

inline void write_trajectory_csv(std::ostream& os, const Chart& chart,
                                 const Trajectory& traj) {
  os << "s";
  for (const auto& c : chart.coords) os << "," << c;
  os << ",speed,omega,clairaut_value\n";
  char buf[32];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& st : traj.states) {
    os << num(st.s);
    for (double xi : st.x) os << "," << num(xi);
    os << "," << num(st.speed) << "," << num(st.omega) << "," << num(st.clairaut_value)
       << "\n";
  }
}

}  // namespace ccs
