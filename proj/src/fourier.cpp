#include "bo/fourier.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "bo/error.hpp"

namespace bo {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FourierTransform::FourierTransform(int n_points) : n_(n_points) {
  if (n_points < 2) throw Error(ErrorKind::InvalidArgument, "transform size must be >= 2");
  std::lock_guard lock(planner_mutex());
  cbuf_in_ = fftw_alloc_complex(n_);
  cbuf_out_ = fftw_alloc_complex(n_);
  rbuf_ = fftw_alloc_real(n_);
  hbuf_ = fftw_alloc_complex(n_ / 2 + 1);
  c2c_forward_ = fftw_plan_dft_1d(n_, cbuf_in_, cbuf_out_, FFTW_FORWARD, FFTW_ESTIMATE);
  c2c_backward_ = fftw_plan_dft_1d(n_, cbuf_in_, cbuf_out_, FFTW_BACKWARD, FFTW_ESTIMATE);
  r2c_ = fftw_plan_dft_r2c_1d(n_, rbuf_, hbuf_, FFTW_ESTIMATE);
  c2r_ = fftw_plan_dft_c2r_1d(n_, hbuf_, rbuf_, FFTW_ESTIMATE);
}

FourierTransform::~FourierTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(c2r_);
  fftw_destroy_plan(r2c_);
  fftw_destroy_plan(c2c_backward_);
  fftw_destroy_plan(c2c_forward_);
  fftw_free(hbuf_);
  fftw_free(rbuf_);
  fftw_free(cbuf_out_);
  fftw_free(cbuf_in_);
}

void FourierTransform::to_nodes(std::span<const Complex> coeffs, int cutoff,
                                std::span<Complex> nodes) {
  for (int j = 0; j < n_; ++j) cbuf_in_[j][0] = cbuf_in_[j][1] = 0.0;
  for (int k = -cutoff; k <= cutoff; ++k) {
    const Complex c = coeffs[static_cast<std::size_t>(k + cutoff)];
    const int j = k >= 0 ? k : n_ + k;
    cbuf_in_[j][0] += c.real();
    cbuf_in_[j][1] += c.imag();
  }
  fftw_execute(c2c_backward_);
  for (int m = 0; m < n_; ++m) nodes[static_cast<std::size_t>(m)] = {cbuf_out_[m][0], cbuf_out_[m][1]};
}

void FourierTransform::from_nodes(std::span<const Complex> nodes, int cutoff,
                                  std::span<Complex> coeffs) {
  for (int m = 0; m < n_; ++m) {
    cbuf_in_[m][0] = nodes[static_cast<std::size_t>(m)].real();
    cbuf_in_[m][1] = nodes[static_cast<std::size_t>(m)].imag();
  }
  fftw_execute(c2c_forward_);
  const double scale = 1.0 / n_;
  for (int k = -cutoff; k <= cutoff; ++k) {
    const int j = k >= 0 ? k : n_ + k;
    coeffs[static_cast<std::size_t>(k + cutoff)] = Complex(cbuf_out_[j][0], cbuf_out_[j][1]) * scale;
  }
}

void FourierTransform::to_nodes_real(std::span<const Complex> half, int cutoff,
                                     std::span<double> nodes) {
  const int nh = n_ / 2 + 1;
  for (int j = 0; j < nh; ++j) hbuf_[j][0] = hbuf_[j][1] = 0.0;
  for (int k = 0; k <= cutoff; ++k) {
    hbuf_[k][0] = half[static_cast<std::size_t>(k)].real();
    hbuf_[k][1] = half[static_cast<std::size_t>(k)].imag();
  }
  hbuf_[0][1] = 0.0;
  fftw_execute(c2r_);
  std::copy(rbuf_, rbuf_ + n_, nodes.begin());
}

void FourierTransform::from_nodes_real(std::span<const double> nodes, int cutoff,
                                       std::span<Complex> half) {
  std::copy(nodes.begin(), nodes.begin() + n_, rbuf_);
  fftw_execute(r2c_);
  const double scale = 1.0 / n_;
  for (int k = 0; k <= cutoff; ++k) {
    half[static_cast<std::size_t>(k)] = Complex(hbuf_[k][0], hbuf_[k][1]) * scale;
  }
}

FourierTransform& transform_for(int n_points) {
  thread_local std::unordered_map<int, std::unique_ptr<FourierTransform>> cache;
  auto& slot = cache[n_points];
  if (!slot) slot = std::make_unique<FourierTransform>(n_points);
  return *slot;
}

}  // namespace bo
