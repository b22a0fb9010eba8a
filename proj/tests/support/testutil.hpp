#pragma once

#include <random>
#include <string>
#include <vector>

#include "ccs/linalg.hpp"

namespace ccs::test {

// Deterministic uniform generator. mt19937_64 output is standardized, and the
// [0,1) mapping below avoids std::uniform_real_distribution, whose sequence is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  Vec point(const std::vector<std::pair<double, double>>& box) {
    Vec p(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) p[i] = uniform(box[i].first, box[i].second);
    return p;
  }

  Vec vector(int n, double lo = -1.0, double hi = 1.0) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 eng_;
};

inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace ccs::test
