#pragma once

#include <memory>
#include <vector>

#include "bo/error.hpp"
#include "bo/field.hpp"

namespace bo {

/// Orthonormal cosine basis of L2(0, T): e_1 = 1/sqrt(T),
/// e_j = sqrt(2/T) cos((j-1) pi t / T) for j >= 2.
struct CosineBasis {
  double period = 1.0;
  int size = 16;

  double eval(int j, double t) const;
  /// sup_t |e_j(t)|
  double sup(int j) const;
};

/// A constant-in-time spatial profile held for `duration`.
struct ForcingSegment {
  double duration = 0.0;
  SpectralField profile;
};

/// Time-dependent forcing eta(t, x): either piecewise constant in time, or a
/// basis series eta = (sum_j c_{1j} e_j(t)) sin x + (sum_j c_{2j} e_j(t)) cos x.
class ForcingInput {
 public:
  enum class Kind { PiecewiseConstant, BasisSeries };

  /// Unforced over [0, duration].
  static ForcingInput none(double duration);
  static ForcingInput piecewise_constant(std::vector<ForcingSegment> segments);
  static ForcingInput constant(const SpectralField& profile, double duration);
  static ForcingInput basis_series(CosineBasis basis, std::vector<double> sin_channel,
                                   std::vector<double> cos_channel);

  Kind kind() const { return kind_; }
  double duration() const { return duration_; }
  const std::vector<ForcingSegment>& segments() const { return segments_; }
  const CosineBasis& basis() const { return basis_; }
  const std::vector<double>& sin_channel() const { return sin_channel_; }
  const std::vector<double>& cos_channel() const { return cos_channel_; }

  /// Basis-series channel amplitudes (sin, cos) at time t.
  std::pair<double, double> channels_at(double t) const;

 private:
  Kind kind_ = Kind::PiecewiseConstant;
  double duration_ = 0.0;
  std::vector<ForcingSegment> segments_;
  CosineBasis basis_;
  std::vector<double> sin_channel_;
  std::vector<double> cos_channel_;
};

struct IntegratorConfig {
  double dt_max = 1e-2;
  double cfl_constant = 0.2;
  /// Acceptance threshold for the dt vs dt/2 self-check.
  double step_tolerance = 1e-6;
  /// Steps between stored snapshots; 0 stores only segment boundaries.
  int record_stride = 0;
  std::vector<double> diagnostic_s{0.5, 1.0};
  /// Test-harness switch; false integrates the linear forced problem.
  bool nonlinear = true;

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<double> mass;
  std::vector<double> momentum;
  std::vector<double> norm_s;
  /// sobolev_norms[i][j] = ||states[j]||_{norm_s[i]}
  std::vector<std::vector<double>> sobolev_norms;
  std::size_t steps = 0;

  const SpectralField& final_state() const { return states.back(); }
};

/// Raised when a NaN/Inf appears; carries the trajectory up to the last
/// finite state.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, std::shared_ptr<const Trajectory> partial)
      : Error(ErrorKind::NonFinite, what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return *partial_; }

 private:
  std::shared_ptr<const Trajectory> partial_;
};

namespace solver {

/// Exact solution operator of u_t + H u_xx = 0: c_k -> e^{-i k|k| t} c_k.
SpectralField linear_propagate(const SpectralField& f, double t);

/// Integrating-factor RK4 for u_t + H u_xx + u u_x = eta on [0, T].
Trajectory solve(const SpectralField& u0, const ForcingInput& forcing, double T,
                 const IntegratorConfig& cfg);
/// Same integration, returns only u(T).
SpectralField advance(const SpectralField& u0, const ForcingInput& forcing, double T,
                      const IntegratorConfig& cfg);

/// Solution of the zeta-shifted problem
///   u_t + H (u+zeta)_xx + (u+zeta)(u+zeta)_x = g,
/// computed as solve(u0 + zeta, g) - zeta snapshot-wise.
Trajectory solve_shifted(const SpectralField& u0, const SpectralField& zeta,
                         const ForcingInput& forcing, double T, const IntegratorConfig& cfg);

/// u0 + t (eta - zeta zeta_x).
SpectralField limit_flow(const SpectralField& u0, const SpectralField& eta,
                         const SpectralField& zeta, double t);

/// L2 distance between the shifted solve with zeta/sqrt(delta) and constant
/// forcing eta/delta over time delta, and limit_flow(u0, eta, zeta, 1).
/// Each run uses dt_max <= delta / 2000.
std::vector<double> asymptotic_limit_check(const SpectralField& u0, const SpectralField& eta,
                                           const SpectralField& zeta,
                                           const std::vector<double>& deltas,
                                           const IntegratorConfig& cfg);

/// ||u_dt(T) - u_{dt/2}(T)|| in L2, with both runs at fixed step caps.
double step_halving_error(const SpectralField& u0, const ForcingInput& forcing, double T,
                          const IntegratorConfig& cfg);

}  // namespace solver
}  // namespace bo
