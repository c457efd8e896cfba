#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "bo/fourier.hpp"

namespace bo {

/// Discretization of the torus R/2piZ: Fourier modes |k| <= mode_cutoff and
/// n_points equispaced collocation nodes x_m = 2 pi m / n_points.
class TorusGrid {
 public:
  TorusGrid() = default;
  /// n_points = 0 picks the smallest even 2^a 3^b 5^c size >= 2(2K+1).
  explicit TorusGrid(int mode_cutoff, int n_points = 0);

  int mode_cutoff() const { return cutoff_; }
  int n_points() const { return n_points_; }
  int n_modes() const { return 2 * cutoff_ + 1; }
  double node(int m) const;

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

 private:
  int cutoff_ = 4;
  int n_points_ = 20;
};

/// Fourier coefficients c_k, k = -K..K, of a function on the torus. Real
/// fields are Hermitian (c_{-k} = conj c_k); the half-line projections and
/// the gauge transform produce complex-valued fields.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const TorusGrid& grid);

  static SpectralField zero(const TorusGrid& grid) { return SpectralField(grid); }
  static SpectralField constant(const TorusGrid& grid, double value);
  /// amplitude * sin(kx)
  static SpectralField sin_mode(const TorusGrid& grid, int k, double amplitude = 1.0);
  /// amplitude * cos(kx)
  static SpectralField cos_mode(const TorusGrid& grid, int k, double amplitude = 1.0);
  /// Samples on the collocation nodes, truncated to the retained band.
  static SpectralField from_values(const TorusGrid& grid, std::span<const double> values);
  static SpectralField from_complex_values(const TorusGrid& grid, std::span<const Complex> values);

  const TorusGrid& grid() const { return grid_; }
  int cutoff() const { return grid_.mode_cutoff(); }

  Complex operator[](int k) const { return coeffs_[index(k)]; }
  Complex& operator[](int k) { return coeffs_[index(k)]; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  std::span<Complex> coeffs() { return coeffs_; }

  /// Spatial mean [f] = c_0.
  Complex mean() const { return (*this)[0]; }
  bool is_real(double tol = 1e-12) const;
  bool all_finite() const;

  std::vector<double> values() const;
  std::vector<Complex> complex_values() const;
  double value_at(double x) const;

  /// Band-limited re-embedding onto another cutoff (zero padding or truncation).
  SpectralField resampled(const TorusGrid& grid) const;
  /// Highest |k| with a coefficient above tol; 0 for constants.
  int degree(double tol = 1e-13) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double scale);
  SpectralField& operator*=(Complex scale);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator-(SpectralField a) { return a *= -1.0; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(Complex s, SpectralField a) { return a *= s; }

  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  std::size_t index(int k) const { return static_cast<std::size_t>(k + grid_.mode_cutoff()); }

  TorusGrid grid_;
  std::vector<Complex> coeffs_;
};

}  // namespace bo
