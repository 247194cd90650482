#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "chanstab/grid.hpp"

namespace testing_support {

inline constexpr double pi = std::numbers::pi;

inline chanstab::Field random_field(const chanstab::GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  chanstab::Field f(g);
  for (double& v : f.values()) v = n(rng);
  return f;
}

inline chanstab::Field random_smooth_field(const chanstab::GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  chanstab::Field f(g);
  for (int m = 0; m <= 3; ++m) {
    for (int k = 0; k <= 3; ++k) {
      const double a = n(rng);
      const double b = n(rng);
      for (int j = 0; j < g.n2; ++j) {
        const double y = std::cos(k * pi * g.x2(j) / g.H);
        for (int i = 0; i < g.n1; ++i) {
          const double x = 2.0 * pi * m * g.x1(i) / g.L;
          f(i, j) += (a * std::cos(x) + b * std::sin(x)) * y;
        }
      }
    }
  }
  return f;
}

inline chanstab::Field remove_mean(chanstab::Field f) {
  const double m = chanstab::integral_mean(f);
  for (double& v : f.values()) v -= m;
  return f;
}

inline double rel_l2(const chanstab::Field& a, const chanstab::Field& b) {
  return chanstab::l2_norm(a - b) / chanstab::l2_norm(b);
}

}  // namespace testing_support
