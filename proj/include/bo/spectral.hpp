#pragma once

#include "bo/field.hpp"

namespace bo::spectral {

/// |c_0| above this is treated as a nonzero mean by mean-zero-only operators.
inline constexpr double kMeanZeroTolerance = 1e-10;

/// Multiplier -i sgn(k).
SpectralField hilbert_transform(const SpectralField& f);
/// Multiplier ik.
SpectralField derivative(const SpectralField& f);
/// Mean-zero antiderivative, multiplier 1/(ik); throws NotMeanZero when
/// |c_0| > kMeanZeroTolerance.
SpectralField antiderivative(const SpectralField& f);

struct Projection {
  enum class Kind { Positive, Negative, Mean, Below, AtOrAbove };
  Kind kind;
  int n = 0;

  static Projection positive() { return {Kind::Positive, 0}; }
  static Projection negative() { return {Kind::Negative, 0}; }
  static Projection mean() { return {Kind::Mean, 0}; }
  /// |k| < n
  static Projection below(int n) { return {Kind::Below, n}; }
  /// k >= n
  static Projection at_or_above(int n) { return {Kind::AtOrAbove, n}; }
};

SpectralField project(const SpectralField& f, Projection selector);

/// sqrt(2 pi sum_k (1+k^2)^s |c_k|^2), so that ||sin x||_0 = sqrt(pi).
double sobolev_norm(const SpectralField& f, double s);
inline double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0); }
/// Real L2 inner product int_0^{2pi} f g dx.
double inner_product(const SpectralField& f, const SpectralField& g);

/// Band-limited coefficients of f*g: transform to the collocation nodes,
/// multiply, transform back. Exact for deg f + deg g <= K.
SpectralField dealiased_product(const SpectralField& f, const SpectralField& g);
/// Direct O(K^2) convolution of the coefficient sequences truncated to |k| <= K.
/// Serial reference for dealiased_product.
SpectralField product_by_convolution(const SpectralField& f, const SpectralField& g);

/// x -> f(x - offset).
SpectralField galilean_shift(const SpectralField& f, double offset);

/// w = d/dx P_+ exp(iF/2) with F the mean-zero antiderivative of u + zeta.
/// The exponential is sampled on the collocation nodes and truncated to the
/// grid band. Diagnostic only.
SpectralField gauge_transform(const SpectralField& u, const SpectralField& zeta);

}  // namespace bo::spectral
