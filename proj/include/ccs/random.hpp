#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "ccs/linalg.hpp"

namespace ccs {

// Deterministic uniform generator: mt19937_64 is standardized, and the [0,1)
// mapping avoids std::uniform_real_distribution, whose output sequence is
// implementation-defined. Reports must be reproducible byte for byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Vec point(const std::vector<std::pair<double, double>>& box) {
    Vec p(box.size());
    for (std::size_t i = 0; i < box.size(); ++i)
      p[i] = uniform(box[i].first, box[i].second);
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

}  // namespace ccs
