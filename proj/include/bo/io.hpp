#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bo/field.hpp"
#include "bo/random_forcing.hpp"
#include "bo/saturation.hpp"
#include "bo/solver.hpp"
#include "bo/synthesis.hpp"

namespace bo::io {

using Json = nlohmann::ordered_json;

/// Parses "0.5 sin 3x - 0.3cos(2x) + 0.1 sin x", "0", or "@file.json" (a
/// field document).
SpectralField parse_field(const TorusGrid& grid, std::string_view expr);

/// {"K", "n_points", "coefficients": [[k, re, im], ...]} for k = -K..K.
Json field_to_json(const SpectralField& f);
SpectralField field_from_json(const Json& j);

/// {"segments": [{"duration", "a", "b"}, ...]} with profile a sin x + b cos x.
Json schedule_to_json(const synthesis::ControlSchedule& schedule);
/// Parse errors name the offending segment.
synthesis::ControlSchedule schedule_from_json(const TorusGrid& grid, const Json& j);

Json report_to_json(const synthesis::PlanReport& report);

/// Noise forcing document: {"noise": {"b0", "period", "truncation", "seed",
/// "period_index", "law"}}.
bool is_noise_document(const Json& j);
ForcingInput noise_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
void write_json(const std::filesystem::path& path, const Json& j);

/// Round-trip decimal text for a double.
std::string number(double v);

/// time, mass, momentum, l2, then one H^s norm column per diagnostic s.
std::string trajectory_csv(const Trajectory& traj);
std::string certificate_csv(const std::vector<saturation::CertificateRow>& rows);
/// state, trial, period, norm_s, tau_M_flag
std::string chains_csv(const std::vector<std::vector<random_forcing::ChainStats>>& chains);
/// Per-period quantile bands of ||u_k||_s across trials with the
/// threshold drawn as a dashed line.
std::string fan_chart_svg(const std::vector<random_forcing::ChainStats>& chains, int n_periods, double M,
                          std::string_view title);

/// Command, config hash, code version, wall-clock seconds and start time.
Json manifest(std::string_view command, std::string_view config_hash, double wall_seconds, const Json& extra);

}  // namespace bo::io
