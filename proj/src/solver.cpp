#include "bo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bo/spectral.hpp"

namespace bo {

double CosineBasis::eval(int j, double t) const {
  if (j == 1) return 1.0 / std::sqrt(period);
  return std::sqrt(2.0 / period) * std::cos((j - 1) * std::numbers::pi * t / period);
}

double CosineBasis::sup(int j) const {
  return j == 1 ? 1.0 / std::sqrt(period) : std::sqrt(2.0 / period);
}

ForcingInput ForcingInput::none(double duration) {
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidArgument, "forcing duration must be positive");
  ForcingInput f;
  f.duration_ = duration;
  return f;
}

ForcingInput ForcingInput::piecewise_constant(std::vector<ForcingSegment> segments) {
  ForcingInput f;
  for (const auto& seg : segments) {
    if (!(seg.duration > 0.0)) throw Error(ErrorKind::InvalidArgument, "segment durations must be positive");
    if (std::abs(seg.profile.mean()) > spectral::kMeanZeroTolerance) {
      throw Error(ErrorKind::NotMeanZero, "forcing profiles must be mean-zero");
    }
    f.duration_ += seg.duration;
  }
  if (segments.empty()) throw Error(ErrorKind::InvalidArgument, "piecewise forcing needs a segment");
  f.segments_ = std::move(segments);
  return f;
}

ForcingInput ForcingInput::constant(const SpectralField& profile, double duration) {
  return piecewise_constant({ForcingSegment{duration, profile}});
}

ForcingInput ForcingInput::basis_series(CosineBasis basis, std::vector<double> sin_channel,
                                        std::vector<double> cos_channel) {
  if (!(basis.period > 0.0)) throw Error(ErrorKind::InvalidArgument, "basis period must be positive");
  if (static_cast<int>(sin_channel.size()) != basis.size ||
      static_cast<int>(cos_channel.size()) != basis.size) {
    throw Error(ErrorKind::InvalidArgument, "channel length must match basis size");
  }
  ForcingInput f;
  f.kind_ = Kind::BasisSeries;
  f.duration_ = basis.period;
  f.basis_ = basis;
  f.sin_channel_ = std::move(sin_channel);
  f.cos_channel_ = std::move(cos_channel);
  return f;
}

std::pair<double, double> ForcingInput::channels_at(double t) const {
  double a = 0.0;
  double b = 0.0;
  for (int j = 1; j <= basis_.size; ++j) {
    const double e = basis_.eval(j, t);
    a += sin_channel_[static_cast<std::size_t>(j - 1)] * e;
    b += cos_channel_[static_cast<std::size_t>(j - 1)] * e;
  }
  return {a, b};
}

void IntegratorConfig::validate() const {
  if (!(dt_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt_max must be positive");
  if (!(cfl_constant > 0.0 && cfl_constant <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "cfl_constant must lie in (0, 1]");
  }
  if (record_stride < 0) throw Error(ErrorKind::InvalidArgument, "record_stride must be >= 0");
}

namespace solver {

namespace {

using Half = std::vector<Complex>;

Half to_half(const SpectralField& f) {
  Half h(static_cast<std::size_t>(f.cutoff() + 1));
  for (int k = 0; k <= f.cutoff(); ++k) h[static_cast<std::size_t>(k)] = f[k];
  h[0] = Complex(h[0].real(), 0.0);
  return h;
}

SpectralField from_half(const TorusGrid& grid, const Half& h) {
  SpectralField f(grid);
  f[0] = Complex(h[0].real(), 0.0);
  for (int k = 1; k <= grid.mode_cutoff(); ++k) {
    f[k] = h[static_cast<std::size_t>(k)];
    f[-k] = std::conj(h[static_cast<std::size_t>(k)]);
  }
  return f;
}

bool finite(const Half& h) {
  return std::all_of(h.begin(), h.end(), [](Complex c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

// Forcing active on one piece of the time axis, in half-spectrum form.
struct ActiveForcing {
  const ForcingInput* source = nullptr;
  Half profile;
  double amplitude = 0.0;
  bool series = false;

  void add(double t, Half& out) const {
    if (series) {
      const auto [a, b] = source->channels_at(t);
      out[1] += Complex(0.5 * b, -0.5 * a);
      return;
    }
    for (std::size_t k = 0; k < profile.size(); ++k) out[k] += profile[k];
  }
};

class Stepper {
 public:
  Stepper(const TorusGrid& grid, bool nonlinear)
      : K_(grid.mode_cutoff()),
        fft_(transform_for(grid.n_points())),
        nodes_(static_cast<std::size_t>(grid.n_points())),
        square_(static_cast<std::size_t>(K_ + 1)),
        nonlinear_(nonlinear) {
    for (auto* v : {&ka_, &kb_, &kc_, &kd_, &stage_}) v->resize(static_cast<std::size_t>(K_ + 1));
  }

  // out = -P_K(u u_x) + eta(t); returns max |u| on the nodes.
  double rhs(const Half& u, const ActiveForcing& forcing, double t, Half& out) {
    std::fill(out.begin(), out.end(), Complex{});
    double umax = 0.0;
    if (nonlinear_) {
      fft_.to_nodes_real(u, K_, nodes_);
      for (double& x : nodes_) {
        umax = std::max(umax, std::abs(x));
        x *= x;
      }
      fft_.from_nodes_real(nodes_, K_, square_);
      for (int k = 1; k <= K_; ++k) out[static_cast<std::size_t>(k)] = Complex(0.0, -0.5 * k) * square_[static_cast<std::size_t>(k)];
    }
    forcing.add(t, out);
    out[0] = 0.0;
    return umax;
  }

  double max_abs(const Half& u) {
    fft_.to_nodes_real(u, K_, nodes_);
    double umax = 0.0;
    for (double x : nodes_) umax = std::max(umax, std::abs(x));
    return umax;
  }

  // One IF-RK4 step of size h from time t, where ka_ already holds rhs(u, t).
  void step(Half& u, const ActiveForcing& forcing, double t, double h) {
    const std::size_t n = u.size();
    e_half_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double kk = static_cast<double>(k) * static_cast<double>(k);
      e_half_[k] = std::polar(1.0, -kk * h * 0.5);
    }
    for (std::size_t k = 0; k < n; ++k) stage_[k] = e_half_[k] * (u[k] + 0.5 * h * ka_[k]);
    rhs(stage_, forcing, t + 0.5 * h, kb_);
    for (std::size_t k = 0; k < n; ++k) stage_[k] = e_half_[k] * u[k] + 0.5 * h * kb_[k];
    rhs(stage_, forcing, t + 0.5 * h, kc_);
    for (std::size_t k = 0; k < n; ++k) stage_[k] = e_half_[k] * (e_half_[k] * u[k] + h * kc_[k]);
    rhs(stage_, forcing, t + h, kd_);
    for (std::size_t k = 0; k < n; ++k) {
      const Complex e2 = e_half_[k] * e_half_[k];
      u[k] = e2 * u[k] + (h / 6.0) * (e2 * ka_[k] + 2.0 * e_half_[k] * (kb_[k] + kc_[k]) + kd_[k]);
    }
  }

  Half& first_stage() { return ka_; }

 private:
  int K_;
  FourierTransform& fft_;
  std::vector<double> nodes_;
  Half square_;
  Half ka_, kb_, kc_, kd_, stage_, e_half_;
  bool nonlinear_;
};

double forcing_amplitude(const SpectralField& profile) {
  const auto v = profile.values();
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Recorder {
  Trajectory* traj = nullptr;
  const TorusGrid* grid = nullptr;

  void record(double t, const Half& u) const {
    if (traj == nullptr) return;
    if (!traj->times.empty() && t <= traj->times.back()) {
      traj->states.back() = from_half(*grid, u);
      return;
    }
    traj->times.push_back(t);
    traj->states.push_back(from_half(*grid, u));
  }
};

void fill_diagnostics(Trajectory& traj, const std::vector<double>& norm_s) {
  traj.norm_s = norm_s;
  traj.mass.clear();
  traj.momentum.clear();
  traj.sobolev_norms.assign(norm_s.size(), {});
  for (const auto& state : traj.states) {
    traj.mass.push_back(state.mean().real());
    const double l2 = spectral::l2_norm(state);
    traj.momentum.push_back(l2 * l2);
    for (std::size_t i = 0; i < norm_s.size(); ++i) {
      traj.sobolev_norms[i].push_back(spectral::sobolev_norm(state, norm_s[i]));
    }
  }
}

SpectralField integrate(const SpectralField& u0, const ForcingInput& forcing, double T,
                        const IntegratorConfig& cfg, Trajectory* traj) {
  cfg.validate();
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "final time must be positive");
  if (std::abs(u0.mean()) > spectral::kMeanZeroTolerance) {
    throw Error(ErrorKind::NotMeanZero, "initial state must be mean-zero");
  }
  if (forcing.duration() < T * (1.0 - 1e-12)) {
    throw Error(ErrorKind::DurationMismatch, "forcing duration " + std::to_string(forcing.duration()) +
                                                 " shorter than requested time " + std::to_string(T));
  }
  const TorusGrid& grid = u0.grid();
  const int K = grid.mode_cutoff();
  Stepper stepper(grid, cfg.nonlinear);
  Half u = to_half(u0);
  Recorder rec{traj, &grid};
  rec.record(0.0, u);

  // Piece list: (end time, active forcing).
  std::vector<std::pair<double, ActiveForcing>> pieces;
  if (forcing.kind() == ForcingInput::Kind::BasisSeries) {
    ActiveForcing af;
    af.source = &forcing;
    af.series = true;
    const auto& basis = forcing.basis();
    for (int j = 1; j <= basis.size; ++j) {
      af.amplitude += (std::abs(forcing.sin_channel()[static_cast<std::size_t>(j - 1)]) +
                       std::abs(forcing.cos_channel()[static_cast<std::size_t>(j - 1)])) *
                      basis.sup(j);
    }
    pieces.emplace_back(T, std::move(af));
  } else if (forcing.segments().empty()) {
    ActiveForcing af;
    af.profile.assign(static_cast<std::size_t>(K + 1), Complex{});
    pieces.emplace_back(T, std::move(af));
  } else {
    double end = 0.0;
    for (const auto& seg : forcing.segments()) {
      if (seg.profile.grid() != grid) throw Error(ErrorKind::InvalidArgument, "forcing grid mismatch");
      end += seg.duration;
      ActiveForcing af;
      af.profile = to_half(seg.profile);
      af.profile[0] = 0.0;
      af.amplitude = forcing_amplitude(seg.profile);
      const bool last = end >= T * (1.0 - 1e-12);
      pieces.emplace_back(last ? T : end, std::move(af));
      if (last) break;
    }
  }

  double t = 0.0;
  std::size_t steps = 0;
  for (const auto& [end, af] : pieces) {
    while (t < end) {
      const double remaining = end - t;
      const double umax = stepper.rhs(u, af, t, stepper.first_stage());
      const double speed = static_cast<double>(K) * (umax + af.amplitude);
      const double dt_allowed = speed > 0.0 ? std::min(cfg.dt_max, cfg.cfl_constant / speed) : cfg.dt_max;
      const double n_sub = std::ceil(remaining / dt_allowed * (1.0 - 1e-12));
      const double h = n_sub <= 1.0 ? remaining : remaining / n_sub;
      const Half previous = u;
      const double t_previous = t;
      stepper.step(u, af, t, h);
      t = n_sub <= 1.0 ? end : t + h;
      ++steps;
      if (!finite(u)) {
        // The partial trajectory always ends at the last finite state.
        Trajectory partial = traj != nullptr ? *traj : Trajectory{};
        if (partial.times.empty() || partial.times.back() < t_previous) {
          partial.times.push_back(t_previous);
          partial.states.push_back(from_half(grid, previous));
        }
        partial.steps = steps;
        fill_diagnostics(partial, cfg.diagnostic_s);
        throw NonFiniteError("non-finite state at t = " + std::to_string(t),
                             std::make_shared<const Trajectory>(std::move(partial)));
      }
      if (cfg.record_stride > 0 && steps % static_cast<std::size_t>(cfg.record_stride) == 0) {
        rec.record(t, u);
      }
    }
    rec.record(t, u);
  }
  u[0] = 0.0;
  if (traj != nullptr) {
    traj->states.back() = from_half(grid, u);
    traj->steps = steps;
    fill_diagnostics(*traj, cfg.diagnostic_s);
  }
  return from_half(grid, u);
}

}  // namespace

SpectralField linear_propagate(const SpectralField& f, double t) {
  SpectralField out(f.grid());
  for (int k = -f.cutoff(); k <= f.cutoff(); ++k) {
    out[k] = f[k] * std::polar(1.0, -static_cast<double>(k) * std::abs(k) * t);
  }
  return out;
}

Trajectory solve(const SpectralField& u0, const ForcingInput& forcing, double T,
                 const IntegratorConfig& cfg) {
  Trajectory traj;
  integrate(u0, forcing, T, cfg, &traj);
  return traj;
}

SpectralField advance(const SpectralField& u0, const ForcingInput& forcing, double T,
                      const IntegratorConfig& cfg) {
  return integrate(u0, forcing, T, cfg, nullptr);
}

Trajectory solve_shifted(const SpectralField& u0, const SpectralField& zeta,
                         const ForcingInput& forcing, double T, const IntegratorConfig& cfg) {
  if (std::abs(zeta.mean()) > spectral::kMeanZeroTolerance) {
    throw Error(ErrorKind::NotMeanZero, "shift profile must be mean-zero");
  }
  Trajectory traj;
  try {
    integrate(u0 + zeta, forcing, T, cfg, &traj);
  } catch (const NonFiniteError& e) {
    Trajectory partial = e.partial();
    for (auto& s : partial.states) s -= zeta;
    fill_diagnostics(partial, cfg.diagnostic_s);
    throw NonFiniteError(e.what(), std::make_shared<const Trajectory>(std::move(partial)));
  }
  for (auto& s : traj.states) s -= zeta;
  fill_diagnostics(traj, cfg.diagnostic_s);
  return traj;
}

SpectralField limit_flow(const SpectralField& u0, const SpectralField& eta,
                         const SpectralField& zeta, double t) {
  const SpectralField drift = spectral::dealiased_product(zeta, spectral::derivative(zeta));
  return u0 + t * (eta - drift);
}

std::vector<double> asymptotic_limit_check(const SpectralField& u0, const SpectralField& eta,
                                           const SpectralField& zeta,
                                           const std::vector<double>& deltas,
                                           const IntegratorConfig& cfg) {
  const SpectralField target = limit_flow(u0, eta, zeta, 1.0);
  std::vector<double> errors;
  double previous = 0.0;
  for (double delta : deltas) {
    if (!(delta > 0.0) || (!errors.empty() && delta >= previous)) {
      throw Error(ErrorKind::InvalidArgument, "delta sequence must be positive and decreasing");
    }
    previous = delta;
    IntegratorConfig run = cfg;
    run.dt_max = std::min(cfg.dt_max, delta / 2000.0);
    run.record_stride = 0;
    const SpectralField shifted = (1.0 / std::sqrt(delta)) * zeta;
    const auto forcing = ForcingInput::constant((1.0 / delta) * eta, delta);
    const SpectralField reached = advance(u0 + shifted, forcing, delta, run) - shifted;
    errors.push_back(spectral::l2_norm(reached - target));
  }
  return errors;
}

double step_halving_error(const SpectralField& u0, const ForcingInput& forcing, double T,
                          const IntegratorConfig& cfg) {
  IntegratorConfig fine = cfg;
  fine.dt_max = 0.5 * cfg.dt_max;
  fine.cfl_constant = 0.5 * cfg.cfl_constant;
  return spectral::l2_norm(advance(u0, forcing, T, cfg) - advance(u0, forcing, T, fine));
}

}  // namespace solver
}  // namespace bo
