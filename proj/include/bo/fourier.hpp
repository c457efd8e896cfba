#pragma once

#include <complex>
#include <span>

#include <fftw3.h>

namespace bo {

using Complex = std::complex<double>;

/// FFTW plans and work buffers for one collocation size. Coefficients follow
/// f(x) = sum_k c_k e^{ikx}, c_k = (1/2pi) int f e^{-ikx} dx; transforms zero
/// pad or truncate to the retained band |k| <= cutoff.
class FourierTransform {
 public:
  explicit FourierTransform(int n_points);
  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  int size() const { return n_; }

  // Full band k = -cutoff..cutoff stored at index k + cutoff.
  void to_nodes(std::span<const Complex> coeffs, int cutoff, std::span<Complex> nodes);
  void from_nodes(std::span<const Complex> nodes, int cutoff, std::span<Complex> coeffs);

  // Real fields: half band k = 0..cutoff.
  void to_nodes_real(std::span<const Complex> half, int cutoff, std::span<double> nodes);
  void from_nodes_real(std::span<const double> nodes, int cutoff, std::span<Complex> half);

 private:
  int n_;
  fftw_complex* cbuf_in_;
  fftw_complex* cbuf_out_;
  double* rbuf_;
  fftw_complex* hbuf_;
  fftw_plan c2c_forward_;
  fftw_plan c2c_backward_;
  fftw_plan r2c_;
  fftw_plan c2r_;
};

/// Per-thread cache of transforms keyed by size. Planning is serialized
/// because the FFTW planner is not thread-safe; execution is not.
FourierTransform& transform_for(int n_points);

}  // namespace bo
