#include "bo/spectral.hpp"

#include <cmath>
#include <numbers>

#include "bo/error.hpp"

namespace bo::spectral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_grid(const SpectralField& f, const SpectralField& g) {
  if (f.grid() != g.grid()) throw Error(ErrorKind::InvalidArgument, "fields live on different grids");
}

}  // namespace

SpectralField hilbert_transform(const SpectralField& f) {
  SpectralField out(f.grid());
  for (int k = 1; k <= f.cutoff(); ++k) {
    out[k] = Complex(0.0, -1.0) * f[k];
    out[-k] = Complex(0.0, 1.0) * f[-k];
  }
  return out;
}

SpectralField derivative(const SpectralField& f) {
  SpectralField out(f.grid());
  for (int k = -f.cutoff(); k <= f.cutoff(); ++k) out[k] = Complex(0.0, k) * f[k];
  return out;
}

SpectralField antiderivative(const SpectralField& f) {
  if (std::abs(f.mean()) > kMeanZeroTolerance) {
    throw Error(ErrorKind::NotMeanZero, "antiderivative requires a mean-zero field");
  }
  SpectralField out(f.grid());
  for (int k = -f.cutoff(); k <= f.cutoff(); ++k) {
    if (k != 0) out[k] = f[k] / Complex(0.0, k);
  }
  return out;
}

SpectralField project(const SpectralField& f, Projection selector) {
  using Kind = Projection::Kind;
  SpectralField out(f.grid());
  for (int k = -f.cutoff(); k <= f.cutoff(); ++k) {
    bool keep = false;
    switch (selector.kind) {
      case Kind::Positive: keep = k >= 1; break;
      case Kind::Negative: keep = k <= -1; break;
      case Kind::Mean: keep = k == 0; break;
      case Kind::Below: keep = std::abs(k) < selector.n; break;
      case Kind::AtOrAbove: keep = k >= selector.n; break;
    }
    if (keep) out[k] = f[k];
  }
  return out;
}

double sobolev_norm(const SpectralField& f, double s) {
  double sum = 0.0;
  for (int k = -f.cutoff(); k <= f.cutoff(); ++k) {
    const double weight = s == 0.0 ? 1.0 : std::pow(1.0 + static_cast<double>(k) * k, s);
    sum += weight * std::norm(f[k]);
  }
  return std::sqrt(kTwoPi * sum);
}

double inner_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g);
  Complex sum{};
  for (int k = -f.cutoff(); k <= f.cutoff(); ++k) sum += f[k] * std::conj(g[k]);
  return kTwoPi * sum.real();
}

SpectralField dealiased_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g);
  const auto& grid = f.grid();
  auto fv = f.complex_values();
  const auto gv = g.complex_values();
  for (std::size_t m = 0; m < fv.size(); ++m) fv[m] *= gv[m];
  return SpectralField::from_complex_values(grid, fv);
}

SpectralField product_by_convolution(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g);
  const int K = f.cutoff();
  SpectralField out(f.grid());
  for (int k = -K; k <= K; ++k) {
    Complex sum{};
    const int lo = std::max(-K, k - K);
    const int hi = std::min(K, k + K);
    for (int p = lo; p <= hi; ++p) sum += f[p] * g[k - p];
    out[k] = sum;
  }
  return out;
}

SpectralField galilean_shift(const SpectralField& f, double offset) {
  SpectralField out(f.grid());
  for (int k = -f.cutoff(); k <= f.cutoff(); ++k) out[k] = f[k] * std::polar(1.0, -k * offset);
  return out;
}

SpectralField gauge_transform(const SpectralField& u, const SpectralField& zeta) {
  require_same_grid(u, zeta);
  const SpectralField F = antiderivative(u + zeta);
  const auto phase = F.values();
  std::vector<Complex> expo(phase.size());
  for (std::size_t m = 0; m < phase.size(); ++m) expo[m] = std::polar(1.0, 0.5 * phase[m]);
  const SpectralField W = project(SpectralField::from_complex_values(u.grid(), expo), Projection::positive());
  return derivative(W);
}

}  // namespace bo::spectral
