#include "bo/io.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>

#include "bo/error.hpp"
#include "bo/spectral.hpp"

#ifndef BO_VERSION
#define BO_VERSION "unknown"
#endif

namespace bo::io {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Parse, msg); }

double get_number(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) fail(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::string fixed(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.3f", v);
  return buf.data();
}

}  // namespace

std::string number(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

SpectralField parse_field(const TorusGrid& grid, std::string_view expr) {
  if (!expr.empty() && expr.front() == '@') return field_from_json(read_json(std::string(expr.substr(1))));
  std::string text;
  for (char c : expr) {
    if (!std::isspace(static_cast<unsigned char>(c))) text += c;
  }
  if (text.empty()) fail("empty field expression");
  static const std::regex trig(R"(([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\*?(sin|cos)\(?(\d*)x\)?)");
  static const std::regex constant(R"(([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?))");
  SpectralField f(grid);
  auto it = text.cbegin();
  bool first = true;
  while (it != text.cend()) {
    if (!first && *it != '+' && *it != '-') fail("expected + or - in field expression '" + std::string(expr) + "'");
    std::smatch m;
    if (std::regex_search(it, text.cend(), m, trig, std::regex_constants::match_continuous)) {
      const double sign = m[1] == "-" ? -1.0 : 1.0;
      const double coef = m[2].matched ? std::stod(m[2]) : 1.0;
      const int k = m[4].length() > 0 ? std::stoi(m[4]) : 1;
      if (k < 1 || k > grid.mode_cutoff()) {
        fail("mode " + std::to_string(k) + " outside 1.." + std::to_string(grid.mode_cutoff()));
      }
      f += m[3] == "sin" ? SpectralField::sin_mode(grid, k, sign * coef)
                         : SpectralField::cos_mode(grid, k, sign * coef);
    } else if (std::regex_search(it, text.cend(), m, constant, std::regex_constants::match_continuous)) {
      const double sign = m[1] == "-" ? -1.0 : 1.0;
      f += SpectralField::constant(grid, sign * std::stod(m[2]));
    } else {
      fail("cannot parse field expression '" + std::string(expr) + "'");
    }
    it += m.length(0);
    first = false;
  }
  return f;
}

Json field_to_json(const SpectralField& f) {
  Json coeffs = Json::array();
  for (int k = -f.cutoff(); k <= f.cutoff(); ++k) coeffs.push_back({k, f[k].real(), f[k].imag()});
  return Json{{"K", f.cutoff()}, {"n_points", f.grid().n_points()}, {"coefficients", coeffs}};
}

SpectralField field_from_json(const Json& j) {
  if (!j.is_object()) fail("field document must be an object");
  const int K = static_cast<int>(get_number(j, "K", "field"));
  const int n = j.contains("n_points") ? static_cast<int>(get_number(j, "n_points", "field")) : 0;
  SpectralField f{TorusGrid(K, n)};
  if (!j.contains("coefficients") || !j.at("coefficients").is_array()) fail("field: missing 'coefficients'");
  for (const auto& c : j.at("coefficients")) {
    if (!c.is_array() || c.size() != 3) fail("field: coefficients are [k, re, im] triples");
    const int k = c[0].get<int>();
    if (std::abs(k) > K) fail("field: mode " + std::to_string(k) + " exceeds K");
    f[k] = Complex(c[1].get<double>(), c[2].get<double>());
  }
  return f;
}

Json schedule_to_json(const synthesis::ControlSchedule& schedule) {
  Json segs = Json::array();
  for (const auto& s : schedule.segments()) {
    // a sin x + b cos x has c_1 = (b - i a) / 2.
    const Complex c1 = s.profile[1];
    segs.push_back({{"duration", s.duration}, {"a", -2.0 * c1.imag()}, {"b", 2.0 * c1.real()}});
  }
  return Json{{"segments", segs}};
}

synthesis::ControlSchedule schedule_from_json(const TorusGrid& grid, const Json& j) {
  if (!j.is_object() || !j.contains("segments") || !j.at("segments").is_array()) {
    fail("schedule document needs a 'segments' array");
  }
  synthesis::ControlSchedule schedule;
  std::size_t index = 0;
  for (const auto& s : j.at("segments")) {
    const std::string where = "segment " + std::to_string(index);
    if (!s.is_object()) fail(where + ": must be an object");
    const double duration = get_number(s, "duration", where);
    if (!(duration > 0.0)) fail(where + ": duration must be positive");
    schedule.append(synthesis::ControlSchedule::segment(grid, duration, get_number(s, "a", where),
                                                        get_number(s, "b", where)));
    ++index;
  }
  return schedule;
}

Json report_to_json(const synthesis::PlanReport& r) {
  return Json{{"achieved_error", r.achieved_error}, {"requested_epsilon", r.requested_epsilon},
              {"total_time", r.total_time},         {"segment_count", r.segment_count},
              {"max_amplitude", r.max_amplitude},   {"depth_used", r.depth_used}};
}

bool is_noise_document(const Json& j) { return j.is_object() && j.contains("noise"); }

ForcingInput noise_from_json(const Json& j) {
  const Json& n = j.at("noise");
  if (!n.is_object()) fail("noise: must be an object");
  const double b0 = get_number(n, "b0", "noise");
  const double period = n.contains("period") ? get_number(n, "period", "noise") : 1.0;
  const int truncation = n.contains("truncation") ? static_cast<int>(get_number(n, "truncation", "noise")) : 16;
  const auto seed = static_cast<std::uint64_t>(get_number(n, "seed", "noise"));
  const auto k = n.contains("period_index") ? static_cast<std::uint64_t>(get_number(n, "period_index", "noise")) : 0;
  auto law = random_forcing::VariateLaw::StandardNormal;
  if (n.contains("law")) {
    const auto name = n.at("law").get<std::string>();
    if (name == "zero") {
      law = random_forcing::VariateLaw::Zero;
    } else if (name != "normal") {
      fail("noise: law must be \"normal\" or \"zero\"");
    }
  }
  return random_forcing::sample_noise(random_forcing::NoiseModel(b0, period, truncation, law), k, seed);
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "time,mass,momentum,l2";
  for (double s : traj.norm_s) out += ",norm_h" + number(s);
  out += "\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out += number(traj.times[i]) + "," + number(traj.mass[i]) + "," + number(traj.momentum[i]) + "," +
           number(spectral::l2_norm(traj.states[i]));
    for (const auto& col : traj.sobolev_norms) out += "," + number(col[i]);
    out += "\n";
  }
  return out;
}

std::string certificate_csv(const std::vector<saturation::CertificateRow>& rows) {
  std::string out = "j,dim,modes_covered\n";
  for (const auto& r : rows) {
    out += std::to_string(r.level) + "," + std::to_string(r.dim) + "," + std::to_string(r.modes_covered) + "\n";
  }
  return out;
}

std::string chains_csv(const std::vector<std::vector<random_forcing::ChainStats>>& chains) {
  std::string out = "state,trial,period,norm_s,tau_M_flag\n";
  for (std::size_t i = 0; i < chains.size(); ++i) {
    for (std::size_t t = 0; t < chains[i].size(); ++t) {
      const auto& c = chains[i][t];
      for (std::size_t k = 0; k < c.norms.size(); ++k) {
        const bool hit = c.tau.has_value() && static_cast<std::size_t>(*c.tau) == k;
        out += std::to_string(i) + "," + std::to_string(t) + "," + std::to_string(k) + "," + number(c.norms[k]) +
               "," + (hit ? "1" : "0") + "\n";
      }
    }
  }
  return out;
}

std::string fan_chart_svg(const std::vector<random_forcing::ChainStats>& chains, int n_periods, double M,
                          std::string_view title) {
  constexpr double width = 640.0;
  constexpr double height = 400.0;
  constexpr double left = 60.0;
  constexpr double right = 20.0;
  constexpr double top = 40.0;
  constexpr double bottom = 40.0;
  // Stopped chains hold their exit norm.
  std::vector<std::vector<double>> column(static_cast<std::size_t>(n_periods) + 1);
  double ymax = M;
  for (const auto& c : chains) {
    for (int k = 0; k <= n_periods; ++k) {
      if (c.norms.empty()) break;
      const double v = c.norms[std::min<std::size_t>(static_cast<std::size_t>(k), c.norms.size() - 1)];
      column[static_cast<std::size_t>(k)].push_back(v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(ymax > 0.0)) ymax = 1.0;
  ymax *= 1.1;
  const auto x = [&](int k) { return left + (width - left - right) * k / std::max(1, n_periods); };
  const auto y = [&](double v) { return height - bottom - (height - top - bottom) * v / ymax; };
  const auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  const auto line = [&](double q) {
    std::string pts;
    for (int k = 0; k <= n_periods; ++k) {
      const auto& col = column[static_cast<std::size_t>(k)];
      if (col.empty()) continue;
      pts += (pts.empty() ? "" : " ") + fixed(x(k)) + "," + fixed(y(quantile(col, q)));
    }
    return pts;
  };
  std::string band;
  for (int k = 0; k <= n_periods; ++k) {
    const auto& col = column[static_cast<std::size_t>(k)];
    if (!col.empty()) band += fixed(x(k)) + "," + fixed(y(quantile(col, 0.9))) + " ";
  }
  for (int k = n_periods; k >= 0; --k) {
    const auto& col = column[static_cast<std::size_t>(k)];
    if (!col.empty()) band += fixed(x(k)) + "," + fixed(y(quantile(col, 0.1))) + " ";
  }
  if (!band.empty()) band.pop_back();

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << fixed(height - bottom) << "\" x2=\"" << fixed(width - right)
      << "\" y2=\"" << fixed(height - bottom) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << fixed(height - bottom)
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << fixed(width / 2) << "\" y=\"" << fixed(height - 8)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">period k</text>\n";
  svg << "<text x=\"4\" y=\"" << fixed(top - 8) << "\" font-family=\"sans-serif\" font-size=\"12\">max "
      << fixed(ymax) << "</text>\n";
  if (!band.empty()) svg << "<polygon points=\"" << band << "\" fill=\"#9ecae1\" fill-opacity=\"0.6\"/>\n";
  svg << "<polyline points=\"" << line(0.0) << "\" fill=\"none\" stroke=\"#6baed6\" stroke-width=\"1\"/>\n";
  svg << "<polyline points=\"" << line(1.0) << "\" fill=\"none\" stroke=\"#6baed6\" stroke-width=\"1\"/>\n";
  svg << "<polyline points=\"" << line(0.5) << "\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << fixed(y(M)) << "\" x2=\"" << fixed(width - right) << "\" y2=\""
      << fixed(y(M)) << "\" stroke=\"#de2d26\" stroke-dasharray=\"6,4\"/>\n";
  svg << "<text x=\"" << fixed(width - right - 4) << "\" y=\"" << fixed(y(M) - 4)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\" fill=\"#de2d26\">M = " << fixed(M)
      << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

Json manifest(std::string_view command, std::string_view config_hash, double wall_seconds, const Json& extra) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::array<char, 32> stamp{};
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::strftime(stamp.data(), stamp.size(), "%Y-%m-%dT%H:%M:%SZ", &utc);
  Json j{{"command", command},
         {"config_hash", config_hash},
         {"version", BO_VERSION},
         {"wall_clock_seconds", wall_seconds},
         {"started_at", stamp.data()}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

}  // namespace bo::io
