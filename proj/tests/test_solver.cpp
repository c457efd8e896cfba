#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bo/error.hpp"
#include "bo/solver.hpp"
#include "bo/spectral.hpp"
#include "support.hpp"

using namespace bo;
using oracle::TrigPoly;
using Catch::Approx;

namespace {

double momentum(const SpectralField& u) { return spectral::inner_product(u, u); }

IntegratorConfig fixed_step(double dt) {
  IntegratorConfig cfg;
  cfg.dt_max = dt;
  cfg.cfl_constant = 1.0;
  return cfg;
}

}  // namespace

TEST_CASE("cosine basis is orthonormal", "[solver]") {
  const CosineBasis b{2.0, 6};
  const int n = 20000;
  for (int i = 1; i <= 6; ++i) {
    for (int j = 1; j <= 6; ++j) {
      double s = 0.0;
      for (int m = 0; m < n; ++m) {
        const double t = (m + 0.5) * b.period / n;
        s += b.eval(i, t) * b.eval(j, t);
      }
      CHECK(s * b.period / n == Approx(i == j ? 1.0 : 0.0).margin(1e-8));
    }
  }
}

TEST_CASE("linear propagation", "[solver]") {
  const TorusGrid g(8);
  // u = sin(x - t) solves u_t + H u_xx = 0: H u_xx = -H sin(x - t) = cos(x - t) = -u_t.
  for (double t : {0.0, 0.3, 1.0, 7.5}) {
    const auto u = solver::linear_propagate(SpectralField::sin_mode(g, 1), t);
    CHECK(test::max_diff(u, TrigPoly<double>::sin(1).shifted(t)) < 1e-15);
  }
  const auto f = test::random_field(g, 8, 1);
  CHECK(test::max_diff(solver::linear_propagate(f, 0.0), f) == 0.0);
  for (double s : {0.0, 0.5, 1.0}) {
    CHECK(spectral::sobolev_norm(solver::linear_propagate(f, 2.3), s) ==
          Approx(spectral::sobolev_norm(f, s)).epsilon(1e-14));
  }
}

TEST_CASE("zero is an equilibrium", "[solver]") {
  const TorusGrid g(16);
  const auto traj = solver::solve(SpectralField(g), ForcingInput::none(1.0), 1.0, IntegratorConfig{});
  for (const auto& s : traj.states) CHECK(test::max_diff(s, SpectralField(g)) == 0.0);
}

TEST_CASE("unforced mass and momentum are conserved", "[solver]") {
  const TorusGrid g(32);
  const auto u0 = SpectralField::sin_mode(g, 1);
  const auto traj = solver::solve(u0, ForcingInput::none(1.0), 1.0, IntegratorConfig{});
  CHECK(std::abs(traj.final_state().mean()) <= 1e-10);
  CHECK(std::abs(momentum(traj.final_state()) - momentum(u0)) / momentum(u0) <= 1e-8);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 1; i < traj.times.size(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);
}

TEST_CASE("weak constant forcing follows the Duhamel integral", "[solver]") {
  const TorusGrid g(16);
  const double a = 1e-4;
  const double T = 1.0;
  const auto traj = solver::solve(SpectralField(g), ForcingInput::constant(SpectralField::sin_mode(g, 1, a), T), T,
                                  IntegratorConfig{});
  // int_0^t S(t - s) a sin x ds = a int_0^t sin(x - r) dr = a (cos(x - t) - cos x).
  const auto expected = a * (TrigPoly<double>::cos(1).shifted(T) - TrigPoly<double>::cos(1));
  CHECK(test::max_diff(traj.final_state(), expected) < 1e-8);
}

TEST_CASE("forced momentum balance", "[solver]") {
  const TorusGrid g(16);
  const auto u0 = SpectralField::sin_mode(g, 2, 0.3);
  const auto eta = SpectralField::cos_mode(g, 1, 0.5) + SpectralField::sin_mode(g, 1, -0.2);
  IntegratorConfig cfg;
  cfg.dt_max = 1e-3;
  cfg.record_stride = 1;
  const auto traj = solver::solve(u0, ForcingInput::constant(eta, 1.0), 1.0, cfg);
  // d/dt int u^2 = 2 int u eta, time integral by the trapezoid rule over the snapshots.
  double work = 0.0;
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    const double dt = traj.times[i] - traj.times[i - 1];
    work += 0.5 * dt * (spectral::inner_product(traj.states[i], eta) + spectral::inner_product(traj.states[i - 1], eta));
  }
  const double change = momentum(traj.final_state()) - momentum(u0);
  CHECK(std::abs(change - 2.0 * work) <= 1e-6 * momentum(u0));
}

TEST_CASE("fourth-order self-convergence", "[solver]") {
  const TorusGrid g(32);
  const auto u0 = SpectralField::sin_mode(g, 1, 0.5) + SpectralField::cos_mode(g, 2, 0.3);
  const auto at = [&](double dt) { return solver::advance(u0, ForcingInput::none(1.0), 1.0, fixed_step(dt)); };
  const auto a = at(0.02);
  const auto b = at(0.01);
  const auto c = at(0.005);
  const double ratio = spectral::l2_norm(a - b) / spectral::l2_norm(b - c);
  CHECK(ratio >= 14.0);
  CHECK(ratio <= 18.0);
}

TEST_CASE("linear harness agrees with linear propagation", "[solver]") {
  const TorusGrid g(16);
  const auto u0 = test::random_field(g, 16, 4);
  IntegratorConfig cfg;
  cfg.nonlinear = false;
  const auto u = solver::advance(u0, ForcingInput::none(1.3), 1.3, cfg);
  CHECK(test::max_diff(u, solver::linear_propagate(u0, 1.3)) < 1e-12);
}

TEST_CASE("shifted solve", "[solver]") {
  const TorusGrid g(16);
  const auto u0 = SpectralField::sin_mode(g, 1, 0.2);
  const auto zeta = SpectralField::cos_mode(g, 2, 0.4);
  const auto eta = ForcingInput::constant(SpectralField::cos_mode(g, 1, 0.3), 0.5);
  const IntegratorConfig cfg;

  const auto plain = solver::solve(u0, eta, 0.5, cfg);
  const auto zero_shift = solver::solve_shifted(u0, SpectralField(g), eta, 0.5, cfg);
  CHECK(test::max_diff(plain.final_state(), zero_shift.final_state()) == 0.0);

  const auto shifted = solver::solve_shifted(u0, zeta, ForcingInput::none(0.5), 0.5, cfg);
  const auto direct = solver::solve(u0 + zeta, ForcingInput::none(0.5), 0.5, cfg);
  REQUIRE(shifted.states.size() == direct.states.size());
  for (std::size_t i = 0; i < shifted.states.size(); ++i) {
    CHECK(test::max_diff(shifted.states[i] + zeta, direct.states[i]) < 1e-15);
    CHECK(std::abs(shifted.states[i].mean()) < 1e-15);
  }
}

TEST_CASE("limit flow", "[solver]") {
  const TorusGrid g(8);
  const auto u0 = test::random_field(g, 4, 2);
  const auto eta = SpectralField::sin_mode(g, 2, 0.7);
  CHECK(test::max_diff(solver::limit_flow(u0, eta, SpectralField(g), 1.0), u0 + eta) < 1e-15);
  const auto v = solver::limit_flow(SpectralField(g), SpectralField::sin_mode(g, 1), SpectralField::cos_mode(g, 1), 1.0);
  CHECK(test::max_diff(v, TrigPoly<double>::sin(1) + TrigPoly<double>::sin(2, 0.5)) < 1e-15);
  CHECK(test::max_diff(solver::limit_flow(u0, eta, SpectralField::cos_mode(g, 1), 0.0), u0) == 0.0);
}

TEST_CASE("asymptotic limit check", "[solver]") {
  const TorusGrid g(16);
  const std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  const IntegratorConfig cfg;
  const SpectralField zero(g);

  const auto pure = solver::asymptotic_limit_check(zero, SpectralField::sin_mode(g, 1), zero, deltas, cfg);
  for (std::size_t i = 1; i < pure.size(); ++i) CHECK(pure[i] < pure[i - 1]);

  for (double e : solver::asymptotic_limit_check(zero, zero, zero, deltas, cfg)) CHECK(e == 0.0);

  const auto mixed = solver::asymptotic_limit_check(zero, SpectralField::sin_mode(g, 1), SpectralField::cos_mode(g, 1),
                                                    deltas, cfg);
  for (std::size_t i = 1; i < mixed.size(); ++i) CHECK(mixed[i] < mixed[i - 1]);
  CHECK(mixed.back() <= 0.5 * mixed.front());
}

TEST_CASE("solver errors", "[solver]") {
  const TorusGrid g(8);
  try {
    solver::solve(SpectralField(g), ForcingInput::none(0.5), 1.0, IntegratorConfig{});
    FAIL("short forcing accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DurationMismatch);
  }
  try {
    solver::solve(SpectralField::constant(g, 1.0), ForcingInput::none(1.0), 1.0, IntegratorConfig{});
    FAIL("nonzero mean accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotMeanZero);
  }
  try {
    solver::solve(SpectralField::sin_mode(g, 1, 1e200), ForcingInput::none(1.0), 1.0, IntegratorConfig{});
    FAIL("overflow not detected");
  } catch (const NonFiniteError& e) {
    CHECK(e.kind() == ErrorKind::NonFinite);
    CHECK_FALSE(e.partial().states.empty());
    CHECK(e.partial().final_state().all_finite());
  }
  try {
    solver::advance(SpectralField::sin_mode(g, 1, 1e200), ForcingInput::none(1.0), 1.0, IntegratorConfig{});
    FAIL("overflow not detected");
  } catch (const NonFiniteError& e) {
    REQUIRE_FALSE(e.partial().states.empty());
    CHECK(e.partial().final_state().all_finite());
  }
  IntegratorConfig bad;
  bad.cfl_constant = 1.5;
  CHECK_THROWS_AS(solver::solve(SpectralField(g), ForcingInput::none(1.0), 1.0, bad), Error);
}
