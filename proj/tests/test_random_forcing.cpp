#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "bo/error.hpp"
#include "bo/random_forcing.hpp"
#include "bo/spectral.hpp"
#include "support.hpp"

using namespace bo;
using namespace bo::random_forcing;
using Catch::Approx;

TEST_CASE("noise model construction", "[noise]") {
  const NoiseModel m(0.5, 1.0, 16);
  REQUIRE(m.amplitudes().size() == 16);
  for (int j = 1; j <= 16; ++j) CHECK(m.amplitudes()[static_cast<std::size_t>(j - 1)] == Approx(0.5 / j));
  double sum = 0.0;
  for (double b : m.amplitudes()) sum += b * b;
  CHECK(m.amplitude_sum_squares() == Approx(sum).epsilon(1e-15));
  CHECK(m.expected_energy() == Approx(2 * std::numbers::pi * sum).epsilon(1e-15));
  CHECK(m.gram_error() <= 1e-10);
  CHECK_THROWS_AS(NoiseModel(0.0), Error);
  CHECK_THROWS_AS(NoiseModel(0.5, 0.0), Error);
  CHECK_THROWS_AS(NoiseModel(0.5, 1.0, 0), Error);
}

TEST_CASE("keyed variates", "[noise]") {
  CHECK(normal_variate(3, 4, 0, 5) == normal_variate(3, 4, 0, 5));
  CHECK(normal_variate(3, 4, 0, 5) != normal_variate(3, 5, 0, 5));
  CHECK(normal_variate(3, 4, 0, 5) != normal_variate(3, 4, 1, 5));
  CHECK(normal_variate(3, 4, 0, 5) != normal_variate(4, 4, 0, 5));
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));

  const NoiseModel m(0.5);
  const auto a = sample_noise(m, 7, 11);
  const auto b = sample_noise(m, 7, 11);
  const auto c = sample_noise(m, 8, 11);
  CHECK(a.sin_channel() == b.sin_channel());
  CHECK(a.cos_channel() == b.cos_channel());
  CHECK(a.sin_channel() != c.sin_channel());
  CHECK(a.kind() == ForcingInput::Kind::BasisSeries);
  CHECK(a.duration() == 1.0);
}

TEST_CASE("variates have unit second moment", "[noise][property]") {
  const int n = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = normal_variate(0, static_cast<std::uint64_t>(i / 64), static_cast<std::uint32_t>(i % 2),
                                    static_cast<std::uint32_t>(i % 64 / 2));
    sum += x;
    sq += x * x;
  }
  CHECK(sq / n >= 0.99);
  CHECK(sq / n <= 1.01);
  CHECK(std::abs(sum / n) < 0.02);
}

TEST_CASE("noise energy matches its expectation", "[noise][property]") {
  const NoiseModel m(0.5, 1.0, 16);
  double total = 0.0;
  const int draws = 1000;
  for (int k = 0; k < draws; ++k) total += noise_energy(sample_noise(m, static_cast<std::uint64_t>(k), 0));
  CHECK(total / draws == Approx(m.expected_energy()).epsilon(0.05));
}

TEST_CASE("markov step", "[noise]") {
  const TorusGrid g(16);
  const IntegratorConfig cfg;
  const NoiseModel zero_law(0.5, 1.0, 16, VariateLaw::Zero);
  CHECK(test::max_diff(markov_step(SpectralField(g), zero_law, 0, 1, cfg), SpectralField(g)) == 0.0);

  const NoiseModel m(0.5);
  const auto u = SpectralField::sin_mode(g, 1, 0.1);
  CHECK(markov_step(u, m, 3, 5, cfg) == markov_step(u, m, 3, 5, cfg));

  // Linear response: ||u_1|| <= int_0^T ||eta(t)|| dt <= sqrt(T) ||eta||_{L2(0,T;L2)}.
  const NoiseModel tiny(1e-6);
  const auto noise = sample_noise(tiny, 0, 2);
  const double bound = std::sqrt(tiny.period() * noise_energy(noise));
  const auto u1 = markov_step(SpectralField(g), tiny, 0, 2, cfg);
  CHECK(spectral::l2_norm(u1) <= 1.0001 * bound);
  CHECK(spectral::l2_norm(u1) <= 1e-4);
}

TEST_CASE("chains", "[noise]") {
  const TorusGrid g(16);
  const IntegratorConfig cfg;
  const NoiseModel m(0.5);

  const auto hit_now = run_chain(SpectralField::sin_mode(g, 1, 0.1), m, 5, 1.0, 0.0, 1, cfg);
  REQUIRE(hit_now.tau.has_value());
  CHECK(*hit_now.tau == 0);
  CHECK(hit_now.norms.size() == 1);

  const NoiseModel zero_law(0.5, 1.0, 16, VariateLaw::Zero);
  const auto still = run_chain(SpectralField(g), zero_law, 6, 1.0, 0.1, 1, cfg);
  CHECK_FALSE(still.tau.has_value());
  CHECK(still.norms.size() == 7);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = run_chain(SpectralField::sin_mode(g, 1, 0.1), m, 8, 1.0, 0.6, seed, cfg);
    const int tau = c.tau.value_or(8);
    CHECK(c.norms.size() == static_cast<std::size_t>(std::min(tau, 8) + 1));
    for (std::size_t k = 0; k + 1 < c.norms.size(); ++k) CHECK(c.norms[k] <= 0.6);
    if (c.tau) CHECK(c.norms.back() > 0.6);
  }

  // A state that overflows at once is censored when its last norm does not exceed M.
  const double never = std::numeric_limits<double>::infinity();
  const auto blown = run_chain(SpectralField::sin_mode(g, 1, 1e200), m, 3, 1.0, never, 1, cfg);
  CHECK_FALSE(blown.tau.has_value());
  REQUIRE(blown.censored_at.has_value());
  CHECK(*blown.censored_at == 1);

  CHECK_THROWS_AS(run_chain(SpectralField(g), m, 0, 1.0, 1.0, 1, cfg), Error);
  CHECK_THROWS_AS(run_chain(SpectralField(g), m, 3, 1.5, 1.0, 1, cfg), Error);
}

TEST_CASE("mean stays zero over many periods", "[noise][property]") {
  const TorusGrid g(16);
  NoiseModel m(0.2);
  SpectralField u = SpectralField::sin_mode(g, 1, 0.1);
  for (std::uint64_t k = 0; k < 50; ++k) u = markov_step(u, m, k, 4, IntegratorConfig{});
  CHECK(std::abs(u.mean()) <= 1e-9);
}

TEST_CASE("wilson interval", "[noise]") {
  const auto i = wilson_interval(50, 100);
  CHECK(i.lower == Approx(0.4038).margin(1e-4));
  CHECK(i.upper == Approx(0.5962).margin(1e-4));
  const auto zero = wilson_interval(0, 40);
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper > 0.0);
  const auto all = wilson_interval(40, 40);
  CHECK(all.upper == Approx(1.0));
  // Doubling the trials narrows the interval by about 1/sqrt(2).
  const auto wide = wilson_interval(30, 100);
  const auto narrow = wilson_interval(60, 200);
  CHECK((narrow.upper - narrow.lower) / (wide.upper - wide.lower) == Approx(1 / std::sqrt(2.0)).margin(0.01));
}

TEST_CASE("ensemble statistics", "[noise]") {
  const TorusGrid g(16);
  const IntegratorConfig cfg;
  const NoiseModel m(0.5);

  EnsembleConfig ens;
  ens.n_periods = 1;
  ens.trials = 100;
  ens.M = 0.01;
  const auto small_ball = ensemble_hitting({SpectralField(g)}, m, ens, cfg);
  CHECK(small_ball.curves.front().probability.front() > 0.9);

  ens.n_periods = 6;
  ens.trials = 40;
  ens.base_seed = 3;
  ens.M = 0.4;
  const std::vector<SpectralField> starts{SpectralField::sin_mode(g, 1, 0.05), SpectralField::cos_mode(g, 2, 0.02)};
  const auto low = ensemble_hitting(starts, m, ens, cfg);
  ens.M = 0.8;
  const auto high = ensemble_hitting(starts, m, ens, cfg);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto& p = low.curves[i].probability;
    REQUIRE(p.size() == 6);
    for (std::size_t n = 1; n < p.size(); ++n) CHECK(p[n] >= p[n - 1]);
    for (std::size_t n = 0; n < p.size(); ++n) {
      CHECK(high.curves[i].probability[n] <= p[n]);
      CHECK(low.curves[i].interval[n].lower <= p[n]);
      CHECK(low.curves[i].interval[n].upper >= p[n]);
    }
  }
  CHECK(low.p1_min == std::min(low.curves[0].probability[0], low.curves[1].probability[0]));

  ens.trials = 10;
  CHECK_THROWS_AS(ensemble_hitting(starts, m, ens, cfg), Error);
}

TEST_CASE("parallel ensemble matches the serial reference", "[noise]") {
  const TorusGrid g(16);
  const IntegratorConfig cfg;
  const NoiseModel m(0.5);
  EnsembleConfig ens;
  ens.n_periods = 4;
  ens.trials = 12;
  ens.M = 0.5;
  ens.base_seed = 9;
  const std::vector<SpectralField> starts{SpectralField::sin_mode(g, 1, 0.1), SpectralField(g)};
  const auto serial = run_ensemble_serial(starts, m, ens, cfg);
  for (int workers : {1, 2, 4}) {
    ens.workers = workers;
    const auto parallel = run_ensemble(starts, m, ens, cfg);
    REQUIRE(parallel.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      REQUIRE(parallel[i].size() == serial[i].size());
      for (std::size_t t = 0; t < serial[i].size(); ++t) {
        CHECK(parallel[i][t].norms == serial[i][t].norms);
        CHECK(parallel[i][t].tau == serial[i][t].tau);
        CHECK(parallel[i][t].seed == serial[i][t].seed);
      }
    }
  }
}

TEST_CASE("ball sampling", "[noise]") {
  const TorusGrid g(16);
  const auto states = sample_ball(g, 1.0, 0.5, 20, 4, 11);
  REQUIRE(states.size() == 20);
  for (const auto& u : states) {
    CHECK(spectral::sobolev_norm(u, 1.0) <= 0.5 + 1e-12);
    CHECK(u.mean() == Complex(0.0));
    CHECK(u.degree() <= 4);
    CHECK(u.is_real());
  }
  CHECK(sample_ball(g, 1.0, 0.5, 20, 4, 11) == states);
}
