#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hopic/hopic.hpp"

namespace testing {

// Small hand-rolled generators for property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

  template <int D>
  hopic::Vec<D> point(const hopic::Vec<D>& length) {
    hopic::Vec<D> x;
    for (int d = 0; d < D; ++d) x[d] = uniform(0.0, length[d]);
    return x;
  }

  template <int D>
  hopic::ParticleSet<D> particles(std::size_t n, const hopic::Vec<D>& length, double vmax = 1.0) {
    hopic::ParticleSet<D> ps;
    ps.length = length;
    for (std::size_t i = 0; i < n; ++i) {
      hopic::Particle<D> p;
      p.q = uniform(0.1, 1.0);
      p.x = point<D>(length);
      for (int d = 0; d < D; ++d) p.v[d] = uniform(-vmax, vmax);
      ps.particles.push_back(p);
    }
    return ps;
  }
};

constexpr int kTrials = 100;

inline double two_pi() { return 2.0 * std::acos(-1.0); }

}  // namespace testing
