#include "bo/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bo/error.hpp"

namespace bo {

namespace {

bool is_smooth_size(int n) {
  for (int p : {2, 3, 5}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

}  // namespace

TorusGrid::TorusGrid(int mode_cutoff, int n_points) : cutoff_(mode_cutoff) {
  if (mode_cutoff < 1) throw Error(ErrorKind::InvalidArgument, "mode cutoff must be >= 1");
  const int minimum = 2 * (2 * mode_cutoff + 1);
  if (n_points == 0) {
    n_points = minimum;
    while (n_points % 2 != 0 || !is_smooth_size(n_points)) ++n_points;
  }
  if (n_points % 2 != 0 || n_points < minimum) {
    throw Error(ErrorKind::InvalidArgument,
                "n_points must be even and >= 2(2K+1) = " + std::to_string(minimum));
  }
  n_points_ = n_points;
}

double TorusGrid::node(int m) const { return 2.0 * std::numbers::pi * m / n_points_; }

SpectralField::SpectralField(const TorusGrid& grid)
    : grid_(grid), coeffs_(static_cast<std::size_t>(grid.n_modes()), Complex{}) {}

SpectralField SpectralField::constant(const TorusGrid& grid, double value) {
  SpectralField f(grid);
  f[0] = value;
  return f;
}

SpectralField SpectralField::sin_mode(const TorusGrid& grid, int k, double amplitude) {
  if (k < 1 || k > grid.mode_cutoff()) throw Error(ErrorKind::InvalidArgument, "mode outside band");
  SpectralField f(grid);
  // sin kx = (e^{ikx} - e^{-ikx}) / 2i
  f[k] = Complex(0.0, -0.5 * amplitude);
  f[-k] = Complex(0.0, 0.5 * amplitude);
  return f;
}

SpectralField SpectralField::cos_mode(const TorusGrid& grid, int k, double amplitude) {
  if (k < 0 || k > grid.mode_cutoff()) throw Error(ErrorKind::InvalidArgument, "mode outside band");
  SpectralField f(grid);
  if (k == 0) {
    f[0] = amplitude;
  } else {
    f[k] = 0.5 * amplitude;
    f[-k] = 0.5 * amplitude;
  }
  return f;
}

SpectralField SpectralField::from_values(const TorusGrid& grid, std::span<const double> values) {
  std::vector<Complex> cv(values.begin(), values.end());
  return from_complex_values(grid, cv);
}

SpectralField SpectralField::from_complex_values(const TorusGrid& grid,
                                                 std::span<const Complex> values) {
  if (static_cast<int>(values.size()) != grid.n_points()) {
    throw Error(ErrorKind::InvalidArgument, "sample count does not match grid");
  }
  SpectralField f(grid);
  transform_for(grid.n_points()).from_nodes(values, grid.mode_cutoff(), f.coeffs_);
  return f;
}

bool SpectralField::is_real(double tol) const {
  for (int k = 0; k <= cutoff(); ++k) {
    if (std::abs((*this)[k] - std::conj((*this)[-k])) > tol) return false;
  }
  return true;
}

bool SpectralField::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

std::vector<Complex> SpectralField::complex_values() const {
  std::vector<Complex> out(static_cast<std::size_t>(grid_.n_points()));
  transform_for(grid_.n_points()).to_nodes(coeffs_, cutoff(), out);
  return out;
}

std::vector<double> SpectralField::values() const {
  const auto cv = complex_values();
  std::vector<double> out(cv.size());
  std::transform(cv.begin(), cv.end(), out.begin(), [](Complex c) { return c.real(); });
  return out;
}

double SpectralField::value_at(double x) const {
  Complex sum{};
  for (int k = -cutoff(); k <= cutoff(); ++k) sum += (*this)[k] * std::polar(1.0, k * x);
  return sum.real();
}

SpectralField SpectralField::resampled(const TorusGrid& grid) const {
  SpectralField out(grid);
  const int shared = std::min(cutoff(), grid.mode_cutoff());
  for (int k = -shared; k <= shared; ++k) out[k] = (*this)[k];
  return out;
}

int SpectralField::degree(double tol) const {
  for (int k = cutoff(); k > 0; --k) {
    if (std::abs((*this)[k]) > tol || std::abs((*this)[-k]) > tol) return k;
  }
  return 0;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (other.grid_ != grid_) throw Error(ErrorKind::InvalidArgument, "grid mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (other.grid_ != grid_) throw Error(ErrorKind::InvalidArgument, "grid mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double scale) {
  for (auto& c : coeffs_) c *= scale;
  return *this;
}

SpectralField& SpectralField::operator*=(Complex scale) {
  for (auto& c : coeffs_) c *= scale;
  return *this;
}

}  // namespace bo
