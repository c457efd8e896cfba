#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "bo/field.hpp"
#include "oracle/trig.hpp"

namespace test {

inline double max_diff(const bo::SpectralField& a, const bo::SpectralField& b) {
  double m = 0.0;
  for (int k = -a.cutoff(); k <= a.cutoff(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// Largest deviation from the oracle's exponential coefficients over the band.
template <class T>
double max_diff(const bo::SpectralField& a, const oracle::TrigPoly<T>& p) {
  double m = 0.0;
  for (int k = -a.cutoff(); k <= a.cutoff(); ++k) m = std::max(m, std::abs(a[k] - p.coefficient(k)));
  return m;
}

// Real mean-zero field with normal coefficients on modes 1..max_mode.
inline bo::SpectralField random_field(const bo::TorusGrid& grid, int max_mode, std::uint32_t seed,
                                      bool mean_zero = true) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  bo::SpectralField f(grid);
  if (!mean_zero) f[0] = n(rng);
  for (int k = 1; k <= std::min(max_mode, grid.mode_cutoff()); ++k) {
    const bo::Complex c(n(rng), n(rng));
    f[k] = c / static_cast<double>(k * k);
    f[-k] = std::conj(f[k]);
  }
  return f;
}

inline bool hermitian(const bo::SpectralField& f, double tol = 1e-14) {
  for (int k = 0; k <= f.cutoff(); ++k) {
    if (std::abs(f[-k] - std::conj(f[k])) > tol) return false;
  }
  return true;
}

}  // namespace test
