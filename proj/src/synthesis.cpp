#include "bo/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bo/error.hpp"
#include "bo/spectral.hpp"

namespace bo::synthesis {

using saturation::DirectionDecomposition;
using saturation::ModeSpan;

ControlSchedule::ControlSchedule(std::vector<ControlSegment> segments) {
  for (auto& s : segments) append(std::move(s));
}

ControlSegment ControlSchedule::segment(const TorusGrid& grid, double duration, double a, double b) {
  return {duration, SpectralField::sin_mode(grid, 1, a) + SpectralField::cos_mode(grid, 1, b)};
}

void ControlSchedule::append(ControlSegment segment) {
  if (!(segment.duration > 0.0)) throw Error(ErrorKind::InvalidArgument, "segment duration must be positive");
  segments_.push_back(std::move(segment));
}

void ControlSchedule::append(const ControlSchedule& other) {
  segments_.insert(segments_.end(), other.segments_.begin(), other.segments_.end());
}

void ControlSchedule::truncate(std::size_t count) {
  if (count < segments_.size()) segments_.resize(count);
}

double ControlSchedule::total_duration() const {
  double total = 0.0;
  for (const auto& s : segments_) total += s.duration;
  return total;
}

bool ControlSchedule::admissible(double tol) const {
  return std::all_of(segments_.begin(), segments_.end(), [tol](const ControlSegment& s) {
    for (int k = -s.profile.cutoff(); k <= s.profile.cutoff(); ++k) {
      if (std::abs(k) != 1 && std::abs(s.profile[k]) > tol) return false;
    }
    return s.profile.is_real(tol);
  });
}

double ControlSchedule::max_amplitude() const {
  double m = 0.0;
  for (const auto& s : segments_) {
    // a sin x + b cos x has sup sqrt(a^2 + b^2) = 2|c_1|; general profiles use the nodes.
    const bool h0 = s.profile.degree() <= 1;
    double amp = 0.0;
    if (h0) {
      amp = 2.0 * std::abs(s.profile[1]);
    } else {
      for (double v : s.profile.values()) amp = std::max(amp, std::abs(v));
    }
    m = std::max(m, amp);
  }
  return m;
}

ForcingInput ControlSchedule::to_forcing(double min_duration) const {
  if (segments_.empty()) return ForcingInput::none(std::max(min_duration, 1e-300));
  std::vector<ForcingSegment> segs;
  segs.reserve(segments_.size());
  for (const auto& s : segments_) segs.push_back({s.duration, s.profile});
  return ForcingInput::piecewise_constant(std::move(segs));
}

ControlSchedule concatenate(const ControlSchedule& f, const ControlSchedule& g) {
  ControlSchedule out = f;
  out.append(g);
  return out;
}

void PlannerConfig::validate() const {
  integrator.validate();
  if (!(delta_start > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta_start must be positive");
  if (max_halvings < 0) throw Error(ErrorKind::InvalidArgument, "max_halvings must be >= 0");
  if (!(projection_share > 0.0 && projection_share < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "projection_share must lie in (0, 1)");
  }
  if (max_passes < 1) throw Error(ErrorKind::InvalidArgument, "max_passes must be >= 1");
  if (nested_max_halvings < 0) throw Error(ErrorKind::InvalidArgument, "nested_max_halvings must be >= 0");
  const auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!in_unit(contraction) || !in_unit(inner_fraction) || !in_unit(safety) || !in_unit(level_ratio) ||
      !in_unit(radius_fraction)) {
    throw Error(ErrorKind::InvalidArgument, "planner fractions must lie in (0, 1]");
  }
  if (max_radius_halvings < 0) throw Error(ErrorKind::InvalidArgument, "max_radius_halvings must be >= 0");
}

SpectralField replay(const ControlSchedule& schedule, const SpectralField& u0, const IntegratorConfig& cfg) {
  if (schedule.empty()) return u0;
  return solver::advance(u0, schedule.to_forcing(), schedule.total_duration(), cfg);
}

PlanReport verify(const ControlSchedule& schedule, const SpectralField& u0, const SpectralField& u1,
                  const IntegratorConfig& cfg) {
  IntegratorConfig refined = cfg;
  refined.dt_max = 0.5 * cfg.dt_max;
  refined.cfl_constant = 0.5 * cfg.cfl_constant;
  PlanReport report;
  report.achieved_error = spectral::l2_norm(replay(schedule, u0, refined) - u1);
  report.total_time = schedule.total_duration();
  report.segment_count = schedule.size();
  report.max_amplitude = schedule.max_amplitude();
  return report;
}

namespace {

constexpr double kNegligible = 1e-14;

// Error after the segment (delta, eta/delta) from u0, compared with goal.
double elementary_error(const SpectralField& u0, const SpectralField& eta, const SpectralField& goal,
                        double delta, const IntegratorConfig& cfg, SpectralField& reached) {
  reached = solver::advance(u0, ForcingInput::constant((1.0 / delta) * eta, delta), delta, cfg);
  return spectral::l2_norm(reached - goal);
}

class Planner {
 public:
  struct Run {
    SpectralField state;
    ControlSchedule schedule;
    int depth = 0;
  };

  Planner(const std::vector<ModeSpan>& ladder, const PlannerConfig& cfg) : ladder_(ladder), cfg_(cfg) {}

  // Closed loop at `level`: open-loop sweeps on the measured residual until
  // the error drops below tol. delta is halved when a sweep stops contracting.
  void reach(Run& run, const SpectralField& goal, int level, double tol,
             const DirectionDecomposition* first = nullptr) {
    check_level(level);
    run.depth = std::max(run.depth, level);
    double err = spectral::l2_norm(goal - run.state);
    if (err < tol) return;
    if (level == 0) {
      elementary(run, goal, tol, cfg_.max_halvings);
      return;
    }
    const ModeSpan& span = ladder_[static_cast<std::size_t>(level)];
    const std::size_t mark = run.schedule.size();
    const SpectralField start = run.state;
    const double initial_err = err;
    double delta = cfg_.delta_start;
    int halvings = 0;
    bool fresh = true;
    double previous = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < cfg_.max_passes; ++pass) {
      if (err > cfg_.contraction * previous) {
        if (++halvings > cfg_.max_halvings) break;
        delta *= 0.5;
        const SpectralField e = goal - run.state;
        if (spectral::l2_norm(e - span.project(e)) >= 0.5 * tol) {
          // Error outside the span is permanent at this level: start over.
          run.schedule.truncate(mark);
          run.state = start;
          err = initial_err;
          fresh = true;
        }
      }
      previous = err;
      const double budget = std::max(tol, cfg_.inner_fraction * err);
      try {
        if (fresh && first != nullptr) {
          sweep(run, *first, goal, level, delta, budget);
        } else {
          move(run, goal, level, delta, budget);
        }
      } catch (const Error& e) {
        // Inner moves only get harder as delta shrinks.
        if (e.kind() != ErrorKind::BudgetExhausted) throw;
        break;
      }
      fresh = false;
      err = spectral::l2_norm(goal - run.state);
      if (err < tol) return;
    }
    throw Error(ErrorKind::BudgetExhausted, "level " + std::to_string(level) + " move did not reach tolerance " +
                                                std::to_string(tol) + " in " + std::to_string(cfg_.max_passes) +
                                                " passes");
  }

 private:
  void check_level(int level) const {
    if (level < 0 || level >= static_cast<int>(ladder_.size())) {
      throw Error(ErrorKind::RecursionLimit, "level " + std::to_string(level) + " exceeds ladder height " +
                                                 std::to_string(ladder_.size() - 1));
    }
  }

  // One open-loop sweep towards the H_level part of goal - state.
  void move(Run& run, const SpectralField& goal, int level, double delta, double budget) {
    run.depth = std::max(run.depth, level);
    if (level == 0) {
      elementary(run, goal, budget, cfg_.nested_max_halvings);
      return;
    }
    const ModeSpan& span = ladder_[static_cast<std::size_t>(level)];
    const ModeSpan& lower = ladder_[static_cast<std::size_t>(level - 1)];
    const SpectralField wanted = span.project(goal - run.state);
    if (spectral::l2_norm(wanted) <= kNegligible) return;
    DirectionDecomposition dec = saturation::decompose_direction(wanted, lower);
    if (!dec.zetas.empty() && spectral::l2_norm(run.state) > kNegligible) {
      // Ask for the displacement net of the free drift over the coasts.
      const double coasting = 4.0 * delta * static_cast<double>(dec.zetas.size());
      const SpectralField drift =
          solver::advance(run.state, ForcingInput::none(coasting), coasting, cfg_.integrator) - run.state;
      dec = saturation::decompose_direction(span.project(goal - run.state - drift), lower);
    }
    sweep(run, dec, goal, level, delta, budget);
  }

  void sweep(Run& run, const DirectionDecomposition& dec, const SpectralField& goal, int level, double delta,
             double budget) {
    const ModeSpan& lower = ladder_[static_cast<std::size_t>(level - 1)];
    const double inner_delta = cfg_.level_ratio * delta;
    const double share = budget / (8.0 * static_cast<double>(dec.zetas.size()) + 1.0);
    for (const auto& zeta : dec.zetas) {
      // Palindromic signs cancel every delta^{1/2} term of the four blocks.
      for (double sign : {1.0, -1.0, -1.0, 1.0}) {
        const SpectralField kick = (sign * 0.5 / std::sqrt(delta)) * zeta;
        move(run, run.state + kick, level - 1, inner_delta, share);
        coast(run, delta);
        move(run, run.state - kick, level - 1, inner_delta, share);
      }
    }
    move(run, run.state + lower.project(goal - run.state), level - 1, inner_delta, share);
  }

  // Best elementary segment towards goal; returns its error.
  double elementary(Run& run, const SpectralField& goal, double tol, int max_halvings) {
    const SpectralField eta = ladder_.front().project(goal - run.state);
    if (spectral::l2_norm(eta) <= kNegligible) return spectral::l2_norm(goal - run.state);
    double delta = cfg_.delta_start;
    SpectralField reached;
    SpectralField best_state;
    double best_err = std::numeric_limits<double>::infinity();
    double best_delta = delta;
    for (int halving = 0; halving <= max_halvings;) {
      const double err = elementary_error(run.state, eta, goal, delta, cfg_.integrator, reached);
      if (err < best_err) {
        best_err = err;
        best_delta = delta;
        best_state = reached;
      }
      if (err < tol) break;
      // Error is first order in delta: skip candidates that cannot meet tol.
      halving += std::max(1, static_cast<int>(std::floor(std::log2(err / tol))));
      delta = cfg_.delta_start * std::ldexp(1.0, -halving);
    }
    if (!(best_err < tol)) {
      throw Error(ErrorKind::BudgetExhausted, "elementary move did not reach tolerance " + std::to_string(tol));
    }
    run.schedule.append(ControlSegment{best_delta, (1.0 / best_delta) * eta});
    run.state = best_state;
    return best_err;
  }

  void coast(Run& run, double duration) {
    const SpectralField zero(run.state.grid());
    run.state = solver::advance(run.state, ForcingInput::none(duration), duration, cfg_.integrator);
    run.schedule.append(ControlSegment{duration, zero});
  }

  const std::vector<ModeSpan>& ladder_;
  const PlannerConfig& cfg_;
};

void require_mean_zero(const SpectralField& f, const char* name) {
  if (std::abs(f.mean()) > spectral::kMeanZeroTolerance) {
    throw Error(ErrorKind::NotMeanZero, std::string(name) + " must be mean-zero");
  }
}

Plan finish(Planner::Run& run, const SpectralField& u0, const SpectralField& target, double epsilon,
            const PlannerConfig& cfg) {
  Plan plan;
  plan.schedule = std::move(run.schedule);
  plan.report = verify(plan.schedule, u0, target, cfg.integrator);
  plan.report.requested_epsilon = epsilon;
  plan.report.depth_used = run.depth;
  return plan;
}

}  // namespace

ElementaryResult elementary_move(const SpectralField& u0, const SpectralField& eta, double epsilon,
                                 const PlannerConfig& cfg) {
  cfg.validate();
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  require_mean_zero(u0, "initial state");
  const ModeSpan h0 = ModeSpan::level_zero(u0.grid());
  if (!h0.contains(eta)) throw Error(ErrorKind::InvalidArgument, "elementary moves need eta in span{sin x, cos x}");

  ElementaryResult result;
  result.plan.report.requested_epsilon = epsilon;
  if (spectral::l2_norm(eta) <= kNegligible) return result;

  const SpectralField goal = u0 + eta;
  SpectralField reached;
  double delta = cfg.delta_start;
  for (int halving = 0; halving <= cfg.max_halvings; ++halving, delta *= 0.5) {
    const double err = elementary_error(u0, eta, goal, delta, cfg.integrator, reached);
    result.candidate_errors.push_back(err);
    if (err < epsilon) {
      result.delta = delta;
      result.plan.schedule.append(ControlSegment{delta, (1.0 / delta) * eta});
      result.plan.report = verify(result.plan.schedule, u0, goal, cfg.integrator);
      result.plan.report.requested_epsilon = epsilon;
      return result;
    }
  }
  throw Error(ErrorKind::BudgetExhausted, "elementary move exhausted " + std::to_string(cfg.max_halvings) +
                                              " halvings");
}

Plan extended_move(const SpectralField& u0, const DirectionDecomposition& decomposition, double epsilon,
                   int depth, const std::vector<ModeSpan>& ladder, const PlannerConfig& cfg) {
  cfg.validate();
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  require_mean_zero(u0, "initial state");
  if (depth < 0 || depth >= static_cast<int>(ladder.size())) {
    throw Error(ErrorKind::RecursionLimit, "depth exceeds ladder height");
  }
  if (!decomposition.zetas.empty() && decomposition.level != depth) {
    throw Error(ErrorKind::InvalidArgument, "decomposition level does not match depth");
  }
  if (decomposition.zetas.empty() && ladder.front().contains(decomposition.target)) {
    return elementary_move(u0, decomposition.target, epsilon, cfg).plan;
  }
  const SpectralField goal = u0 + decomposition.target;
  Planner planner(ladder, cfg);
  Planner::Run run{u0, {}, 0};
  planner.reach(run, goal, depth, epsilon, decomposition.zetas.empty() ? nullptr : &decomposition);
  return finish(run, u0, goal, epsilon, cfg);
}

namespace {

// Steering on an existing ladder with an explicit dynamics tolerance.
Plan steer_with(const SpectralField& u0, const SpectralField& u1, double epsilon,
                const std::vector<ModeSpan>& ladder, const PlannerConfig& cfg) {
  const SpectralField d = u1 - u0;
  Planner::Run run{u0, {}, 0};
  if (spectral::l2_norm(d) > kNegligible) {
    const auto coords = saturation::to_trig(d);
    const double allowed = cfg.projection_share * epsilon;
    int first_level = static_cast<int>(ladder.size()) - 1;
    for (int j = 0; j < static_cast<int>(ladder.size()); ++j) {
      if (std::sqrt(std::numbers::pi) * ladder[static_cast<std::size_t>(j)].residual(coords) <=
          1e-8 * std::max(1.0, coords.norm())) {
        first_level = j;
        break;
      }
    }
    const ModeSpan& top = ladder.back();
    const double projection_error = std::sqrt(std::numbers::pi) * top.residual(coords);
    if (projection_error > allowed) {
      throw Error(ErrorKind::CutoffOverflow, "displacement not representable on the saturated ladder");
    }
    // Whatever the projection leaves unused goes to the dynamics.
    const double dynamics_tol = cfg.safety * epsilon - projection_error;
    const SpectralField goal = u0 + top.project(d);
    Planner planner(ladder, cfg);
    for (int level = first_level;; ++level) {
      Planner::Run attempt{u0, {}, 0};
      try {
        planner.reach(attempt, goal, level, dynamics_tol);
        run = std::move(attempt);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::BudgetExhausted) throw;
        if (level + 1 >= static_cast<int>(ladder.size())) {
          throw PlanningError(e.what(), finish(attempt, u0, u1, epsilon, cfg));
        }
      }
    }
  }
  return finish(run, u0, u1, epsilon, cfg);
}

}  // namespace

Plan steer(const SpectralField& u0, const SpectralField& u1, double epsilon, const PlannerConfig& cfg) {
  cfg.validate();
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  require_mean_zero(u0, "initial state");
  require_mean_zero(u1, "target state");
  const auto ladder = saturation::build_ladder(u0.grid());
  return steer_with(u0, u1, epsilon, ladder, cfg);
}

Plan steer_in_time(const SpectralField& u0, const SpectralField& u1, double T, double epsilon,
                   const PlannerConfig& cfg) {
  cfg.validate();
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  require_mean_zero(u0, "initial state");
  require_mean_zero(u1, "target state");
  const TorusGrid& grid = u0.grid();
  const SpectralField zero(grid);
  const auto ladder = saturation::build_ladder(grid);

  // Final leg from the equilibrium, planned once.
  const Plan to_target = steer_with(zero, u1, 0.5 * epsilon, ladder, cfg);
  const double final_leg = to_target.schedule.total_duration();

  Plan best;
  double radius = cfg.radius_fraction * epsilon;
  for (int attempt = 0; attempt <= cfg.max_radius_halvings; ++attempt, radius *= 0.5) {
    const Plan to_rest = steer_with(u0, zero, radius, ladder, cfg);
    const double first_leg = to_rest.schedule.total_duration();
    const double coast = T - first_leg - final_leg;
    if (!(coast >= 0.0)) {
      throw Error(ErrorKind::BudgetExhausted, "steering legs take " + std::to_string(first_leg + final_leg) +
                                                  " > T = " + std::to_string(T));
    }
    ControlSchedule schedule = to_rest.schedule;
    if (coast > 0.0) {
      // Nudge the coast so the summed durations equal T in floating point.
      double length = coast;
      for (int i = 0; i < 4; ++i) {
        ControlSchedule trial = schedule;
        trial.append(ControlSegment{length, zero});
        trial.append(to_target.schedule);
        const double total = trial.total_duration();
        if (total == T) break;
        length += T - total;
      }
      schedule.append(ControlSegment{length, zero});
    }
    schedule.append(to_target.schedule);
    const SpectralField reached = replay(schedule, u0, cfg.integrator);
    if (spectral::l2_norm(reached - u1) < cfg.safety * epsilon) {
      Plan plan;
      plan.schedule = std::move(schedule);
      plan.report = verify(plan.schedule, u0, u1, cfg.integrator);
      plan.report.requested_epsilon = epsilon;
      plan.report.depth_used = std::max(to_rest.report.depth_used, to_target.report.depth_used);
      return plan;
    }
    best.schedule = std::move(schedule);
  }
  best.report = verify(best.schedule, u0, u1, cfg.integrator);
  best.report.requested_epsilon = epsilon;
  throw PlanningError("fixed-time steering did not meet epsilon after shrinking the radius", std::move(best));
}

}  // namespace bo::synthesis
