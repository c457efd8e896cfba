#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bo/error.hpp"
#include "bo/spectral.hpp"
#include "support.hpp"

using namespace bo;
using oracle::TrigPoly;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;

std::vector<TrigPoly<double>> modes_up_to(int n) {
  std::vector<TrigPoly<double>> out;
  for (int k = 1; k <= n; ++k) {
    out.push_back(TrigPoly<double>::cos(k));
    out.push_back(TrigPoly<double>::sin(k));
  }
  return out;
}

}  // namespace

TEST_CASE("grid picks a dealiasing collocation size", "[spectral]") {
  for (int K : {1, 4, 8, 32, 64}) {
    const TorusGrid g(K);
    CHECK(g.n_points() % 2 == 0);
    CHECK(g.n_points() >= 2 * (2 * K + 1));
  }
  CHECK(TorusGrid(8).node(3) == Approx(2 * pi * 3 / TorusGrid(8).n_points()));
  CHECK_THROWS_AS(TorusGrid(8, 20), Error);
}

TEST_CASE("hilbert transform examples", "[spectral]") {
  const TorusGrid g(8);
  CHECK(test::max_diff(spectral::hilbert_transform(SpectralField::cos_mode(g, 1)), SpectralField::sin_mode(g, 1)) <
        1e-15);
  CHECK(test::max_diff(spectral::hilbert_transform(SpectralField::sin_mode(g, 1)), SpectralField::cos_mode(g, 1, -1)) <
        1e-15);
  CHECK(test::max_diff(spectral::hilbert_transform(SpectralField::constant(g, 3.0)), SpectralField(g)) == 0.0);
}

TEST_CASE("antiderivative examples and mean rejection", "[spectral]") {
  const TorusGrid g(8);
  CHECK(test::max_diff(spectral::antiderivative(SpectralField::cos_mode(g, 1)), SpectralField::sin_mode(g, 1)) <
        1e-15);
  CHECK(test::max_diff(spectral::antiderivative(SpectralField::sin_mode(g, 2)), SpectralField::cos_mode(g, 2, -0.5)) <
        1e-15);
  CHECK(test::max_diff(spectral::antiderivative(SpectralField(g)), SpectralField(g)) == 0.0);
  try {
    spectral::antiderivative(SpectralField::constant(g, 1e-9));
    FAIL("nonzero mean accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotMeanZero);
  }
  CHECK_NOTHROW(spectral::antiderivative(SpectralField::constant(g, 1e-11)));
}

TEST_CASE("projection examples", "[spectral]") {
  const TorusGrid g(8);
  const auto p = spectral::project(SpectralField::sin_mode(g, 1), spectral::Projection::positive());
  // sin x = (e^{ix} - e^{-ix}) / 2i, so P+ sin x = e^{ix} / 2i.
  CHECK(std::abs(p[1] - Complex(1.0) / Complex(0.0, 2.0)) < 1e-16);
  CHECK(std::abs(p[-1]) == 0.0);

  const auto f = test::random_field(g, 8, 3, false);
  const auto sum = spectral::project(f, spectral::Projection::positive()) +
                   spectral::project(f, spectral::Projection::negative()) +
                   spectral::project(f, spectral::Projection::mean());
  CHECK(test::max_diff(sum, f) == 0.0);
  const auto below = spectral::project(f, spectral::Projection::below(3));
  CHECK(test::max_diff(spectral::project(below, spectral::Projection::at_or_above(3)), SpectralField(g)) == 0.0);
}

TEST_CASE("projections are idempotent", "[spectral][property]") {
  const TorusGrid g(12);
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    const auto f = test::random_field(g, 12, seed, false);
    for (auto sel : {spectral::Projection::positive(), spectral::Projection::negative(), spectral::Projection::mean(),
                     spectral::Projection::below(4), spectral::Projection::at_or_above(5)}) {
      const auto once = spectral::project(f, sel);
      CHECK(test::max_diff(spectral::project(once, sel), once) == 0.0);
    }
  }
}

TEST_CASE("sobolev norm examples", "[spectral]") {
  const TorusGrid g(8);
  CHECK(spectral::sobolev_norm(SpectralField::sin_mode(g, 1), 0.0) == Approx(std::sqrt(pi)).epsilon(1e-14));
  CHECK(spectral::sobolev_norm(SpectralField::sin_mode(g, 1), 1.0) == Approx(std::sqrt(2 * pi)).epsilon(1e-14));
  CHECK(spectral::sobolev_norm(SpectralField(g), 0.7) == 0.0);
  // Quadrature of (sin 3x)^2 over the nodes is exact for this band.
  const auto f = SpectralField::sin_mode(g, 3, 2.0);
  double q = 0.0;
  for (double v : f.values()) q += v * v;
  q *= 2 * pi / g.n_points();
  CHECK(spectral::l2_norm(f) == Approx(std::sqrt(q)).epsilon(1e-13));
}

TEST_CASE("dealiased product examples", "[spectral]") {
  const TorusGrid g(8);
  const auto s = SpectralField::sin_mode(g, 1);
  const auto c = SpectralField::cos_mode(g, 1);
  CHECK(test::max_diff(spectral::dealiased_product(s, c), TrigPoly<double>::sin(2, 0.5)) < 1e-15);
  CHECK(test::max_diff(spectral::dealiased_product(s, SpectralField(g)), SpectralField(g)) < 1e-15);
  CHECK(test::max_diff(spectral::dealiased_product(s, s),
                       TrigPoly<double>::constant(0.5) - TrigPoly<double>::cos(2, 0.5)) < 1e-15);
}

TEST_CASE("dealiased product matches the trig oracle for all modes up to 5", "[spectral][property]") {
  const TorusGrid g(10);
  for (const auto& p : modes_up_to(5)) {
    for (const auto& q : modes_up_to(5)) {
      const auto prod = spectral::dealiased_product(p.sampled(g), q.sampled(g));
      CHECK(test::max_diff(prod, p * q) < 1e-12);
      CHECK(test::hermitian(prod));
    }
  }
}

TEST_CASE("dealiased product agrees with direct convolution", "[spectral][property]") {
  const TorusGrid g(16);
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const auto f = test::random_field(g, 8, seed);
    const auto h = test::random_field(g, 8, seed + 100);
    CHECK(test::max_diff(spectral::dealiased_product(f, h), spectral::product_by_convolution(f, h)) < 1e-13);
  }
}

TEST_CASE("galilean shift examples", "[spectral]") {
  const TorusGrid g(8);
  const auto f = test::random_field(g, 8, 9);
  CHECK(test::max_diff(spectral::galilean_shift(SpectralField::sin_mode(g, 1), pi / 2), SpectralField::cos_mode(g, 1, -1)) <
        1e-15);
  CHECK(test::max_diff(spectral::galilean_shift(f, 0.0), f) == 0.0);
  CHECK(test::max_diff(spectral::galilean_shift(f, 2 * pi), f) < 1e-14);
  const auto shifted = spectral::galilean_shift(f, 0.37);
  for (double s : {0.0, 0.5, 1.0}) {
    CHECK(spectral::sobolev_norm(shifted, s) == Approx(spectral::sobolev_norm(f, s)).epsilon(1e-14));
  }
}

TEST_CASE("multipliers match the trig oracle on every mode up to 5", "[spectral][property]") {
  const TorusGrid g(5);
  for (const auto& p : modes_up_to(5)) {
    const auto f = p.sampled(g);
    CHECK(test::max_diff(spectral::hilbert_transform(f), p.hilbert()) < 1e-12);
    CHECK(test::max_diff(spectral::antiderivative(f), p.antiderivative()) < 1e-12);
    CHECK(test::max_diff(spectral::derivative(f), p.derivative()) < 1e-12);
    for (double a : {0.3, -1.7, 2.9}) CHECK(test::max_diff(spectral::galilean_shift(f, a), p.shifted(a)) < 1e-12);
  }
}

TEST_CASE("transform round trip and hermitian symmetry", "[spectral][property]") {
  for (int K : {4, 8, 31, 64}) {
    const TorusGrid g(K);
    const auto f = test::random_field(g, K, static_cast<std::uint32_t>(K), false);
    const auto back = SpectralField::from_values(g, f.values());
    double scale = 0.0;
    for (int k = -K; k <= K; ++k) scale = std::max(scale, std::abs(f[k]));
    CHECK(test::max_diff(back, f) <= 1e-12 * scale);
    CHECK(test::hermitian(spectral::hilbert_transform(f)));
    CHECK(test::hermitian(spectral::derivative(f)));
    CHECK(test::hermitian(spectral::galilean_shift(f, 1.1)));
    CHECK(test::hermitian(spectral::dealiased_product(f, f), 1e-13));
  }
}

TEST_CASE("hilbert transform is an isometry on mean-zero fields", "[spectral][property]") {
  const TorusGrid g(16);
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    const auto f = test::random_field(g, 16, seed);
    for (double s : {0.0, 0.25, 0.5, 1.0}) {
      CHECK(spectral::sobolev_norm(spectral::hilbert_transform(f), s) ==
            Approx(spectral::sobolev_norm(f, s)).epsilon(1e-14));
    }
  }
}

TEST_CASE("derivative inverts the antiderivative", "[spectral][property]") {
  const TorusGrid g(32);
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    const auto f = test::random_field(g, 32, seed);
    double scale = 0.0;
    for (int k = -32; k <= 32; ++k) scale = std::max(scale, std::abs(f[k]));
    CHECK(test::max_diff(spectral::derivative(spectral::antiderivative(f)), f) <= 1e-12 * scale);
  }
}

TEST_CASE("gauge transform", "[spectral]") {
  const TorusGrid g(16);
  CHECK(test::max_diff(spectral::gauge_transform(SpectralField(g), SpectralField(g)), SpectralField(g)) < 1e-15);

  const auto u = test::random_field(g, 4, 5);
  const auto z = test::random_field(g, 3, 6);
  CHECK(test::max_diff(spectral::gauge_transform(u, z), spectral::gauge_transform(u + z, SpectralField(g))) < 1e-14);

  // u = 0.1 sin x: F = -0.1 cos x. Series d/dx P+ (1 + iF/2 - F^2/8) gives
  // w_1 = 0.025 and w_2 = -0.000625 i; the next term is O(|F|^3).
  const auto w = spectral::gauge_transform(SpectralField::sin_mode(g, 1, 0.1), SpectralField(g));
  CHECK(std::abs(w[1] - Complex(0.025, 0.0)) < 1e-4);
  CHECK(std::abs(w[2] - Complex(0.0, -0.000625)) < 1e-5);
  CHECK(std::abs(w[2]) > 1e-4);
  for (int k = -16; k <= 0; ++k) CHECK(std::abs(w[k]) == 0.0);
}
