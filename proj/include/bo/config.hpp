#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bo/random_forcing.hpp"
#include "bo/solver.hpp"
#include "bo/synthesis.hpp"

namespace bo::config {

/// A value of the flat TOML subset: booleans, integers, floats, basic
/// strings and arrays of numbers.
using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

/// "section.key" -> value. Parse errors carry the line number.
std::map<std::string, Value> parse_toml(std::string_view text);

struct RunConfig {
  int K = 32;
  int n_points = 0;
  IntegratorConfig integrator;
  synthesis::PlannerConfig planner;
  double epsilon = 0.05;
  /// Steering horizon; 0 selects small-time steering.
  double steer_time = 0.0;

  std::string u0 = "0";
  std::string u1 = "0";

  std::string eta = "sin x";
  std::string zeta = "cos x";
  std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};

  double noise_b0 = 0.5;
  double noise_period = 1.0;
  int noise_truncation = 16;
  random_forcing::VariateLaw noise_law = random_forcing::VariateLaw::StandardNormal;

  int n_periods = 20;
  int trials = 100;
  double sobolev_s = 1.0;
  /// Threshold M; 0 selects 2 ||u0||_s.
  double threshold = 0.0;
  int workers = 0;
  std::uint64_t seed = 0;
  int ball_samples = 5;
  int ball_max_mode = 4;

  int j_max = 64;
  std::string output_dir = "out";

  void validate() const;
};

RunConfig from_toml(std::string_view text);
RunConfig load(const std::string& path);
/// Applies one "section.key=value" override.
void apply_override(RunConfig& cfg, std::string_view assignment);
/// Canonical document: every key in a fixed order, numbers at round-trip
/// precision. from_toml(to_toml(c)) == c.
std::string to_toml(const RunConfig& cfg);
/// Hex BLAKE2b-128 of the canonical document.
std::string hash(const RunConfig& cfg);

}  // namespace bo::config
