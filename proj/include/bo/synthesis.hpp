#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bo/field.hpp"
#include "bo/saturation.hpp"
#include "bo/solver.hpp"

namespace bo::synthesis {

/// Profile held constant for `duration`. Admissible profiles are
/// a sin x + b cos x.
struct ControlSegment {
  double duration = 0.0;
  SpectralField profile;
};

class ControlSchedule {
 public:
  ControlSchedule() = default;
  explicit ControlSchedule(std::vector<ControlSegment> segments);

  static ControlSegment segment(const TorusGrid& grid, double duration, double a, double b);

  void append(ControlSegment segment);
  void append(const ControlSchedule& other);
  /// Drops segments past index `count`.
  void truncate(std::size_t count);

  const std::vector<ControlSegment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  std::size_t size() const { return segments_.size(); }
  double total_duration() const;
  /// Every profile lies in span{sin x, cos x}.
  bool admissible(double tol = 1e-12) const;
  /// Largest sup_x |profile| over segments.
  double max_amplitude() const;

  /// Forcing for the solver; an empty schedule becomes zero forcing over
  /// `min_duration`.
  ForcingInput to_forcing(double min_duration = 0.0) const;

 private:
  std::vector<ControlSegment> segments_;
};

/// f followed by g.
ControlSchedule concatenate(const ControlSchedule& f, const ControlSchedule& g);

struct PlannerConfig {
  IntegratorConfig integrator;
  double delta_start = 0.1;
  int max_halvings = 20;
  /// Halving limit for elementary segments nested inside extended moves,
  /// whose tolerances are a small share of the outer error.
  int nested_max_halvings = 40;
  /// Share of epsilon spent on projecting the displacement onto the ladder.
  double projection_share = 0.5;
  /// Feedback passes per closed-loop move, over all block times.
  int max_passes = 30;
  /// A pass must shrink the error by at least this factor.
  double contraction = 0.8;
  /// Block time one level down as a fraction of the block time above.
  double level_ratio = 0.1;
  /// Inner tolerance as a fraction of the current outer error.
  double inner_fraction = 0.3;
  /// Internal planning target as a fraction of the requested epsilon.
  double safety = 0.9;
  /// Initial radius for the fixed-time steering ball around 0, as a
  /// fraction of epsilon, and the number of times it may be halved.
  double radius_fraction = 0.5;
  int max_radius_halvings = 8;

  void validate() const;
};

struct PlanReport {
  double achieved_error = 0.0;
  double requested_epsilon = 0.0;
  double total_time = 0.0;
  std::size_t segment_count = 0;
  double max_amplitude = 0.0;
  int depth_used = 0;
};

struct Plan {
  ControlSchedule schedule;
  PlanReport report;
};

/// BudgetExhausted carrying the best schedule found before the budget ran
/// out, verified like a finished plan.
class PlanningError : public Error {
 public:
  PlanningError(const std::string& what, Plan partial)
      : Error(ErrorKind::BudgetExhausted, what), partial_(std::move(partial)) {}
  const Plan& partial() const { return partial_; }

 private:
  Plan partial_;
};

/// Refined replay: solve at half the configured dt_max and cfl constant
/// from u0 through the schedule, L2 distance of the end state to u1.
PlanReport verify(const ControlSchedule& schedule, const SpectralField& u0, const SpectralField& u1,
                  const IntegratorConfig& cfg);

/// End state of the schedule at the planner's resolution.
SpectralField replay(const ControlSchedule& schedule, const SpectralField& u0, const IntegratorConfig& cfg);

struct ElementaryResult {
  Plan plan;
  double delta = 0.0;
  /// Planner-resolution errors of every tried delta, in order.
  std::vector<double> candidate_errors;
};

/// One segment (delta, eta/delta) with delta halved from delta_start until
/// ||R_delta(u0, eta/delta) - (u0 + eta)|| < epsilon. eta must lie in H_0.
ElementaryResult elementary_move(const SpectralField& u0, const SpectralField& eta, double epsilon,
                                 const PlannerConfig& cfg);

/// Realizes u0 -> u0 + decomposition.target with H_0-valued controls. Each
/// term -zeta zeta_x comes from four blocks with signs +, -, -, +: kick by
/// sign * zeta / (2 sqrt(delta)) one level down, coast for delta, kick back.
/// The eta part is then applied one level down. Passes repeat on the
/// measured residual and delta is halved when a pass stops contracting.
Plan extended_move(const SpectralField& u0, const saturation::DirectionDecomposition& decomposition,
                   double epsilon, int depth, const std::vector<saturation::ModeSpan>& ladder,
                   const PlannerConfig& cfg);

/// Small-time steering u0 -> u1 within epsilon, K = grid cutoff.
Plan steer(const SpectralField& u0, const SpectralField& u1, double epsilon, const PlannerConfig& cfg);

/// Steering in exactly time T: steer(u0 -> B_r(0)), coast at the
/// equilibrium, then the precomputed steer(0 -> u1). r is halved until the
/// composite meets epsilon.
Plan steer_in_time(const SpectralField& u0, const SpectralField& u1, double T, double epsilon,
                   const PlannerConfig& cfg);

}  // namespace bo::synthesis
