// bo: command-line runner for the Benjamin-Ono simulation and control toolkit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bo/config.hpp"
#include "bo/error.hpp"
#include "bo/io.hpp"
#include "bo/random_forcing.hpp"
#include "bo/saturation.hpp"
#include "bo/solver.hpp"
#include "bo/spectral.hpp"
#include "bo/synthesis.hpp"

namespace fs = std::filesystem;
using bo::io::Json;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
};

int exit_code(bo::ErrorKind kind) {
  switch (kind) {
    case bo::ErrorKind::Parse:
    case bo::ErrorKind::InvalidArgument:
    case bo::ErrorKind::NotMeanZero:
    case bo::ErrorKind::DurationMismatch:
      return 2;
    case bo::ErrorKind::NonFinite:
      return 3;
    case bo::ErrorKind::BudgetExhausted:
    case bo::ErrorKind::RecursionLimit:
      return 4;
    case bo::ErrorKind::CutoffOverflow:
    case bo::ErrorKind::NotInSpan:
      return 5;
  }
  return 1;
}

// Resolved configuration plus the output directory of one run.
class Run {
 public:
  Run(std::string command, const Common& common, const std::vector<std::string>& extra)
      : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
    if (!common.config_path.empty()) cfg_ = bo::config::load(common.config_path);
    for (const auto& o : common.overrides) bo::config::apply_override(cfg_, o);
    for (const auto& o : extra) bo::config::apply_override(cfg_, o);
    if (!common.out.empty()) cfg_.output_dir = common.out;
    cfg_.validate();
    cfg_.planner.integrator = cfg_.integrator;
    dir_ = cfg_.output_dir;
    fs::create_directories(dir_);
    bo::io::write_text(dir_ / "config.toml", bo::config::to_toml(cfg_));
  }

  const bo::config::RunConfig& cfg() const { return cfg_; }
  const fs::path& dir() const { return dir_; }
  bo::TorusGrid grid() const { return bo::TorusGrid(cfg_.K, cfg_.n_points); }
  bo::SpectralField field(const std::string& expr) const { return bo::io::parse_field(grid(), expr); }

  void finish(const Json& extra = Json::object()) const {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    bo::io::write_json(dir_ / "manifest.json", bo::io::manifest(command_, bo::config::hash(cfg_), wall, extra));
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  bo::config::RunConfig cfg_;
  fs::path dir_;
};

std::vector<std::string> collect(const std::vector<std::pair<std::string, std::optional<std::string>>>& flags) {
  std::vector<std::string> out;
  for (const auto& [key, value] : flags) {
    if (value) out.push_back(key + "=" + *value);
  }
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::optional<std::string> u0;
  std::string forcing;
  std::optional<double> duration;
  std::optional<std::string> target;
};

int cmd_simulate(const Common& common, const SimulateArgs& args) {
  Run run("simulate", common, collect({{"states.u0", args.u0}}));
  const auto& cfg = run.cfg();
  const bo::SpectralField u0 = run.field(cfg.u0);

  bo::ForcingInput forcing = bo::ForcingInput::none(args.duration.value_or(1.0));
  Json source = nullptr;
  if (!args.forcing.empty()) {
    const Json doc = bo::io::read_json(args.forcing);
    source = args.forcing;
    if (bo::io::is_noise_document(doc)) {
      forcing = bo::io::noise_from_json(doc);
    } else {
      const auto schedule = bo::io::schedule_from_json(run.grid(), doc);
      forcing = schedule.to_forcing(args.duration.value_or(1.0));
    }
  }
  const double T = args.duration.value_or(forcing.duration());
  if (T > forcing.duration() + 1e-12 || T <= 0.0) {
    throw bo::Error(bo::ErrorKind::DurationMismatch, "duration must lie in (0, forcing duration]");
  }
  const bo::Trajectory traj = bo::solver::solve(u0, forcing, T, cfg.integrator);
  bo::io::write_text(run.dir() / "trajectory.csv", bo::io::trajectory_csv(traj));
  bo::io::write_json(run.dir() / "final_state.json", bo::io::field_to_json(traj.final_state()));

  Json summary{{"T", T}, {"steps", traj.steps}, {"final_l2", bo::spectral::l2_norm(traj.final_state())}};
  // dt against dt/2 on the same forcing.
  const double halving = bo::solver::step_halving_error(u0, forcing, T, cfg.integrator);
  summary["step_halving_error"] = halving;
  summary["step_check"] = halving <= cfg.integrator.step_tolerance;
  if (args.target) {
    const bo::SpectralField u1 = run.field(*args.target);
    summary["target"] = *args.target;
    summary["error"] = bo::spectral::l2_norm(traj.final_state() - u1);
  }
  bo::io::write_json(run.dir() / "summary.json", summary);
  run.finish({{"forcing", source}});
  return 0;
}

// ---------------------------------------------------------------- steer

struct SteerArgs {
  std::optional<std::string> u0;
  std::optional<std::string> u1;
  std::optional<std::string> epsilon;
  std::optional<std::string> T;
};

void write_plan(const Run& run, const bo::synthesis::Plan& plan, const bo::SpectralField& u0, std::string_view status) {
  const auto& cfg = run.cfg();
  Json schedule = bo::io::schedule_to_json(plan.schedule);
  schedule["epsilon"] = cfg.epsilon;
  schedule["K"] = cfg.K;
  schedule["T"] = plan.schedule.total_duration();
  schedule["config_hash"] = bo::config::hash(cfg);
  bo::io::write_json(run.dir() / "schedule.json", schedule);

  Json report = bo::io::report_to_json(plan.report);
  report["status"] = status;
  report["admissible"] = plan.schedule.admissible();
  bo::io::write_json(run.dir() / "report.json", report);

  // Verification trajectory at the refined resolution used by the report.
  bo::IntegratorConfig refined = cfg.integrator;
  refined.dt_max *= 0.5;
  refined.cfl_constant *= 0.5;
  const auto forcing = plan.schedule.to_forcing(0.0);
  if (!plan.schedule.empty()) {
    const auto traj = bo::solver::solve(u0, forcing, plan.schedule.total_duration(), refined);
    bo::io::write_text(run.dir() / "verification.csv", bo::io::trajectory_csv(traj));
  } else {
    bo::Trajectory traj;
    traj.times = {0.0};
    traj.states = {u0};
    traj.mass = {u0.mean().real()};
    traj.momentum = {std::pow(bo::spectral::l2_norm(u0), 2)};
    traj.norm_s = refined.diagnostic_s;
    for (double s : traj.norm_s) traj.sobolev_norms.push_back({bo::spectral::sobolev_norm(u0, s)});
    bo::io::write_text(run.dir() / "verification.csv", bo::io::trajectory_csv(traj));
  }
}

int cmd_steer(const Common& common, const SteerArgs& args) {
  Run run("steer", common,
          collect({{"states.u0", args.u0},
                   {"states.u1", args.u1},
                   {"planner.epsilon", args.epsilon},
                   {"planner.T", args.T}}));
  const auto& cfg = run.cfg();
  const bo::SpectralField u0 = run.field(cfg.u0);
  const bo::SpectralField u1 = run.field(cfg.u1);
  try {
    const auto plan = cfg.steer_time > 0.0 ? bo::synthesis::steer_in_time(u0, u1, cfg.steer_time, cfg.epsilon, cfg.planner)
                                           : bo::synthesis::steer(u0, u1, cfg.epsilon, cfg.planner);
    write_plan(run, plan, u0, "ok");
    std::printf("steer: error %s < epsilon %s, T = %s, %zu segments\n", bo::io::number(plan.report.achieved_error).c_str(),
                bo::io::number(cfg.epsilon).c_str(), bo::io::number(plan.report.total_time).c_str(),
                plan.report.segment_count);
  } catch (const bo::synthesis::PlanningError& e) {
    write_plan(run, e.partial(), u0, "budget_exhausted");
    run.finish();
    throw;
  }
  run.finish();
  return 0;
}

// ---------------------------------------------------------------- saturate

struct SaturateArgs {
  std::optional<std::string> K;
  std::optional<std::string> j_max;
};

int cmd_saturate(const Common& common, const SaturateArgs& args) {
  Run run("saturate", common, collect({{"grid.K", args.K}, {"saturate.j_max", args.j_max}}));
  const auto& cfg = run.cfg();
  if (cfg.K < 2) throw bo::Error(bo::ErrorKind::InvalidArgument, "saturate needs grid.K >= 2");
  const auto rows = bo::saturation::saturation_certificate(cfg.K, cfg.j_max);
  bo::io::write_text(run.dir() / "certificate.csv", bo::io::certificate_csv(rows));
  const bool pass = bo::saturation::fully_covered(rows, cfg.K);
  std::optional<int> level;
  for (const auto& r : rows) {
    if (r.modes_covered == cfg.K) {
      level = r.level;
      break;
    }
  }
  bo::io::write_json(run.dir() / "summary.json",
                     {{"K", cfg.K}, {"j_max", cfg.j_max}, {"pass", pass},
                      {"covered_at", level ? Json(*level) : Json(nullptr)}, {"levels", rows.size()}});
  if (pass) {
    std::printf("PASS saturate: modes 1..%d covered at j = %d\n", cfg.K, *level);
  } else {
    std::printf("FAIL saturate: %d of %d modes covered after %zu levels\n", rows.back().modes_covered, cfg.K,
                rows.size());
  }
  run.finish();
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------- ensemble

struct EnsembleArgs {
  std::optional<std::string> u0;
  std::optional<std::string> M;
  std::optional<std::string> n_periods;
  std::optional<std::string> trials;
};

Json curve_json(const bo::random_forcing::HittingCurve& c) {
  Json lower = Json::array();
  Json upper = Json::array();
  for (const auto& i : c.interval) {
    lower.push_back(i.lower);
    upper.push_back(i.upper);
  }
  return {{"probability", c.probability}, {"wilson_lower", lower}, {"wilson_upper", upper},
          {"trials", c.trials}, {"censored", c.censored}};
}

int cmd_ensemble(const Common& common, const EnsembleArgs& args) {
  namespace rf = bo::random_forcing;
  Run run("ensemble", common,
          collect({{"states.u0", args.u0},
                   {"ensemble.M", args.M},
                   {"ensemble.n_periods", args.n_periods},
                   {"ensemble.trials", args.trials}}));
  const auto& cfg = run.cfg();
  const bo::SpectralField u0 = run.field(cfg.u0);
  const double M = cfg.threshold > 0.0 ? cfg.threshold : 2.0 * bo::spectral::sobolev_norm(u0, cfg.sobolev_s);
  if (!(M > 0.0)) throw bo::Error(bo::ErrorKind::InvalidArgument, "threshold M is zero; set ensemble.M or a nonzero u0");
  const rf::NoiseModel model(cfg.noise_b0, cfg.noise_period, cfg.noise_truncation, cfg.noise_law);

  rf::EnsembleConfig ens;
  ens.n_periods = cfg.n_periods;
  ens.trials = cfg.trials;
  ens.s = cfg.sobolev_s;
  ens.M = M;
  ens.base_seed = cfg.seed;
  ens.workers = cfg.workers;
  auto chains = rf::run_ensemble({u0}, model, ens, cfg.integrator);
  bo::io::write_text(run.dir() / "chains.csv", bo::io::chains_csv(chains));
  bo::io::write_text(run.dir() / "fan.svg",
                     bo::io::fan_chart_svg(chains.front(), cfg.n_periods, M, "||u_k||_s across trials"));

  Json summary{{"M", M}, {"s", cfg.sobolev_s}, {"n_periods", cfg.n_periods}, {"trials", cfg.trials},
               {"seed", cfg.seed}};
  int hits = 0;
  int censored = 0;
  for (const auto& c : chains.front()) {
    hits += c.hit_by(cfg.n_periods) ? 1 : 0;
    censored += c.censored_at ? 1 : 0;
  }
  summary["hits"] = hits;
  summary["censored"] = censored;
  if (cfg.trials >= 30) {
    const auto result = rf::summarize(std::move(chains), cfg.n_periods);
    const auto& p = result.curves.front().probability;
    bool nondecreasing = true;
    for (std::size_t n = 1; n < p.size(); ++n) nondecreasing = nondecreasing && p[n] >= p[n - 1];
    summary["hitting"] = curve_json(result.curves.front());
    summary["nondecreasing"] = nondecreasing;

    if (cfg.ball_samples > 0) {
      // One-period hitting from states drawn in the ball of radius M.
      const auto ball = rf::sample_ball(run.grid(), cfg.sobolev_s, M, cfg.ball_samples, cfg.ball_max_mode,
                                        rf::derive_seed(cfg.seed, 1, 0));
      rf::EnsembleConfig one = ens;
      one.n_periods = 1;
      one.base_seed = rf::derive_seed(cfg.seed, 2, 0);
      const auto ball_result = rf::ensemble_hitting(ball, model, one, cfg.integrator);
      Json p1 = Json::array();
      for (const auto& c : ball_result.curves) p1.push_back(c.probability.front());
      summary["ball"] = {{"samples", cfg.ball_samples}, {"max_mode", cfg.ball_max_mode}, {"p1", p1},
                         {"p1_min", ball_result.p1_min}};
    }
    std::printf("ensemble: P{tau_M <= %d} = %s, M = %s\n", cfg.n_periods, bo::io::number(p.back()).c_str(),
                bo::io::number(M).c_str());
  } else {
    summary["hitting"] = nullptr;
    std::printf("ensemble: %d of %d chains exceeded M = %s (hitting curves need >= 30 trials)\n", hits, cfg.trials,
                bo::io::number(M).c_str());
  }
  bo::io::write_json(run.dir() / "summary.json", summary);
  run.finish({{"noise", {{"basis", "cosine"}, {"amplitudes", "b0 / j"}, {"b0", cfg.noise_b0}, {"period", cfg.noise_period},
                         {"truncation", cfg.noise_truncation}, {"sum_b_squared", model.amplitude_sum_squares()},
                         {"law", cfg.noise_law == rf::VariateLaw::Zero ? "zero" : "normal"}}}});
  return 0;
}

// ---------------------------------------------------------------- verify-limit

int cmd_verify_limit(const Common& common) {
  Run run("verify-limit", common, {});
  const auto& cfg = run.cfg();
  const bo::SpectralField u0 = run.field(cfg.u0);
  const bo::SpectralField eta = run.field(cfg.eta);
  const bo::SpectralField zeta = run.field(cfg.zeta);
  const auto errors = bo::solver::asymptotic_limit_check(u0, eta, zeta, cfg.deltas, cfg.integrator);
  std::string csv = "delta,error\n";
  for (std::size_t i = 0; i < errors.size(); ++i) {
    csv += bo::io::number(cfg.deltas[i]) + "," + bo::io::number(errors[i]) + "\n";
  }
  bo::io::write_text(run.dir() / "limit.csv", csv);
  bool decreasing = true;
  for (std::size_t i = 1; i < errors.size(); ++i) decreasing = decreasing && errors[i] < errors[i - 1];
  const bool halved = !errors.empty() && errors.back() <= 0.5 * errors.front();
  const bool pass = decreasing && halved;
  bo::io::write_json(run.dir() / "summary.json", {{"deltas", cfg.deltas}, {"errors", errors},
                                                  {"strictly_decreasing", decreasing},
                                                  {"final_at_most_half_first", halved}, {"pass", pass}});
  std::printf("%s verify-limit: errors %s -> %s\n", pass ? "PASS" : "FAIL",
              errors.empty() ? "-" : bo::io::number(errors.front()).c_str(),
              errors.empty() ? "-" : bo::io::number(errors.back()).c_str());
  run.finish();
  return pass ? 0 : 1;
}

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("-c,--config", common.config_path, "TOML config file")->check(CLI::ExistingFile);
  sub->add_option("-s,--set", common.overrides, "Override one key, section.key=value (repeatable)");
  sub->add_option("-o,--out", common.out, "Output directory (overrides output.dir)");
}

void report_error(const std::string& out_dir, std::string_view kind, const std::string& message) {
  const Json err{{"error", kind}, {"message", message}};
  std::cerr << err.dump() << "\n";
  if (out_dir.empty()) return;
  try {
    bo::io::write_json(fs::path(out_dir) / "error.json", err);
  } catch (...) {
    // The error on stderr is the primary report.
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benjamin-Ono simulation, control synthesis and noise ensembles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", BO_VERSION);

  Common common;
  SimulateArgs sim;
  SteerArgs steer;
  SaturateArgs sat;
  EnsembleArgs ens;

  auto* simulate = app.add_subcommand("simulate", "Solve from u0 under a schedule or noise forcing file");
  add_common(simulate, common);
  simulate->add_option("--u0", sim.u0, "Initial state, e.g. \"0.5 sin x + 0.3 cos 2x\"");
  simulate->add_option("-f,--forcing", sim.forcing, "Schedule JSON or noise JSON")->check(CLI::ExistingFile);
  simulate->add_option("-T,--duration", sim.duration, "Integration time (default: forcing duration)");
  simulate->add_option("--target", sim.target, "Report the L2 distance of u(T) to this state");

  auto* steer_cmd = app.add_subcommand("steer", "Plan an admissible schedule from u0 to u1");
  add_common(steer_cmd, common);
  steer_cmd->add_option("--u0", steer.u0, "Initial state");
  steer_cmd->add_option("--u1", steer.u1, "Target state");
  steer_cmd->add_option("-e,--epsilon", steer.epsilon, "L2 tolerance");
  steer_cmd->add_option("-T,--time", steer.T, "Exact steering time; 0 for small-time steering");

  auto* saturate = app.add_subcommand("saturate", "Saturating ladder certificate at cutoff K");
  add_common(saturate, common);
  saturate->add_option("-K,--cutoff", sat.K, "Mode cutoff");
  saturate->add_option("--j-max", sat.j_max, "Largest ladder level");

  auto* ensemble = app.add_subcommand("ensemble", "Stopping-time statistics under periodic noise");
  add_common(ensemble, common);
  ensemble->add_option("--u0", ens.u0, "Initial state");
  ensemble->add_option("-M,--threshold", ens.M, "Threshold M (0 selects 2 ||u0||_s)");
  ensemble->add_option("-n,--periods", ens.n_periods, "Number of periods");
  ensemble->add_option("-t,--trials", ens.trials, "Trials per initial state");

  auto* limit = app.add_subcommand("verify-limit", "Compare scaled solves against the limit flow");
  add_common(limit, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error("", "Parse", e.what());
    return 2;
  }

  // The output directory is known only once the config resolves; a failing
  // config still reports on stderr.
  std::string out_dir = common.out;
  try {
    if (out_dir.empty()) {
      bo::config::RunConfig probe;
      if (!common.config_path.empty()) probe = bo::config::load(common.config_path);
      for (const auto& o : common.overrides) bo::config::apply_override(probe, o);
      out_dir = probe.output_dir;
    }
  } catch (const bo::Error&) {
    out_dir.clear();
  }

  try {
    if (simulate->parsed()) return cmd_simulate(common, sim);
    if (steer_cmd->parsed()) return cmd_steer(common, steer);
    if (saturate->parsed()) return cmd_saturate(common, sat);
    if (ensemble->parsed()) return cmd_ensemble(common, ens);
    if (limit->parsed()) return cmd_verify_limit(common);
  } catch (const bo::Error& e) {
    report_error(out_dir, bo::to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report_error(out_dir, "Internal", e.what());
    return 1;
  }
  return 1;
}
