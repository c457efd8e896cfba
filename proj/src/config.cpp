#include "bo/config.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include <sodium.h>

#include "bo/error.hpp"

namespace bo::config {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Parse, msg); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && in_string) {
      ++i;
    } else if (line[i] == '"') {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

bool parse_number(std::string_view text, Value& out) {
  std::string s(text);
  std::erase(s, '_');
  if (s.empty()) return false;
  const bool integral = s.find_first_of(".eEin") == std::string::npos;
  char* end = nullptr;
  if (integral) {
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size()) return false;
    out = static_cast<std::int64_t>(v);
    return true;
  }
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

Value parse_value(std::string_view text, int line) {
  const auto where = " on line " + std::to_string(line);
  if (text.empty()) fail("missing value" + where);
  if (text.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < text.size() && text[i] != '"'; ++i) {
      if (text[i] == '\\' && i + 1 < text.size()) {
        const char c = text[++i];
        out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
      } else {
        out += text[i];
      }
    }
    if (i >= text.size()) fail("unterminated string" + where);
    if (!trim(text.substr(i + 1)).empty()) fail("trailing characters after string" + where);
    return out;
  }
  if (text.front() == '[') {
    if (text.back() != ']') fail("unterminated array" + where);
    std::vector<double> values;
    const auto body = trim(text.substr(1, text.size() - 2));
    std::size_t start = 0;
    while (start <= body.size() && !body.empty()) {
      const auto comma = body.find(',', start);
      const auto item = trim(body.substr(start, comma == std::string_view::npos ? body.npos : comma - start));
      if (item.empty()) {
        if (comma == std::string_view::npos) break;
        fail("empty array element" + where);
      }
      Value v;
      if (!parse_number(item, v)) fail("arrays hold numbers only" + where);
      values.push_back(std::holds_alternative<double>(v) ? std::get<double>(v)
                                                         : static_cast<double>(std::get<std::int64_t>(v)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return values;
  }
  if (text == "true") return true;
  if (text == "false") return false;
  Value v;
  if (!parse_number(text, v)) fail("cannot parse value '" + std::string(text) + "'" + where);
  return v;
}

double as_double(const Value& v, const std::string& key) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  fail(key + " expects a number");
}

std::int64_t as_int(const Value& v, const std::string& key) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  fail(key + " expects an integer");
}

bool as_bool(const Value& v, const std::string& key) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  fail(key + " expects true or false");
}

std::string as_string(const Value& v, const std::string& key) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  fail(key + " expects a string");
}

std::vector<double> as_array(const Value& v, const std::string& key) {
  if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
  fail(key + " expects an array of numbers");
}

std::string number(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  std::string s(buf.data());
  // Keep floats recognizable as floats.
  if (s.find_first_of(".eEin") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const Value&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define BO_DOUBLE(path, field)                                                                     \
  Key{path, [](RunConfig& c, const Value& v, const std::string& k) { c.field = as_double(v, k); }, \
      [](const RunConfig& c) { return number(c.field); }}
#define BO_INT(path, field)                                                                                 \
  Key{path,                                                                                                 \
      [](RunConfig& c, const Value& v, const std::string& k) { c.field = static_cast<int>(as_int(v, k)); }, \
      [](const RunConfig& c) { return std::to_string(c.field); }}
#define BO_STRING(path, field)                                                                     \
  Key{path, [](RunConfig& c, const Value& v, const std::string& k) { c.field = as_string(v, k); }, \
      [](const RunConfig& c) { return quoted(c.field); }}

std::string array_text(const std::vector<double>& a) {
  std::string out = "[";
  for (std::size_t i = 0; i < a.size(); ++i) out += (i ? ", " : "") + number(a[i]);
  return out + "]";
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      BO_INT("grid.K", K),
      BO_INT("grid.n_points", n_points),
      BO_DOUBLE("integrator.dt_max", integrator.dt_max),
      BO_DOUBLE("integrator.cfl_constant", integrator.cfl_constant),
      BO_DOUBLE("integrator.step_tolerance", integrator.step_tolerance),
      BO_INT("integrator.record_stride", integrator.record_stride),
      Key{"integrator.diagnostic_s",
          [](RunConfig& c, const Value& v, const std::string& k) { c.integrator.diagnostic_s = as_array(v, k); },
          [](const RunConfig& c) { return array_text(c.integrator.diagnostic_s); }},
      Key{"integrator.nonlinear",
          [](RunConfig& c, const Value& v, const std::string& k) { c.integrator.nonlinear = as_bool(v, k); },
          [](const RunConfig& c) { return std::string(c.integrator.nonlinear ? "true" : "false"); }},
      BO_DOUBLE("planner.epsilon", epsilon),
      BO_DOUBLE("planner.T", steer_time),
      BO_DOUBLE("planner.delta_start", planner.delta_start),
      BO_INT("planner.max_halvings", planner.max_halvings),
      BO_INT("planner.nested_max_halvings", planner.nested_max_halvings),
      BO_DOUBLE("planner.projection_share", planner.projection_share),
      BO_INT("planner.max_passes", planner.max_passes),
      BO_DOUBLE("planner.contraction", planner.contraction),
      BO_DOUBLE("planner.level_ratio", planner.level_ratio),
      BO_DOUBLE("planner.inner_fraction", planner.inner_fraction),
      BO_DOUBLE("planner.safety", planner.safety),
      BO_DOUBLE("planner.radius_fraction", planner.radius_fraction),
      BO_INT("planner.max_radius_halvings", planner.max_radius_halvings),
      BO_STRING("states.u0", u0),
      BO_STRING("states.u1", u1),
      BO_STRING("limit.eta", eta),
      BO_STRING("limit.zeta", zeta),
      Key{"limit.deltas", [](RunConfig& c, const Value& v, const std::string& k) { c.deltas = as_array(v, k); },
          [](const RunConfig& c) { return array_text(c.deltas); }},
      BO_DOUBLE("noise.b0", noise_b0),
      BO_DOUBLE("noise.period", noise_period),
      BO_INT("noise.truncation", noise_truncation),
      Key{"noise.law",
          [](RunConfig& c, const Value& v, const std::string& k) {
            const auto s = as_string(v, k);
            if (s == "normal") {
              c.noise_law = random_forcing::VariateLaw::StandardNormal;
            } else if (s == "zero") {
              c.noise_law = random_forcing::VariateLaw::Zero;
            } else {
              fail(k + " must be \"normal\" or \"zero\"");
            }
          },
          [](const RunConfig& c) {
            return quoted(c.noise_law == random_forcing::VariateLaw::Zero ? "zero" : "normal");
          }},
      BO_INT("ensemble.n_periods", n_periods),
      BO_INT("ensemble.trials", trials),
      BO_DOUBLE("ensemble.s", sobolev_s),
      BO_DOUBLE("ensemble.M", threshold),
      BO_INT("ensemble.workers", workers),
      Key{"ensemble.seed",
          [](RunConfig& c, const Value& v, const std::string& k) {
            const auto s = as_int(v, k);
            if (s < 0) fail(k + " must be >= 0");
            c.seed = static_cast<std::uint64_t>(s);
          },
          [](const RunConfig& c) { return std::to_string(c.seed); }},
      BO_INT("ensemble.ball_samples", ball_samples),
      BO_INT("ensemble.ball_max_mode", ball_max_mode),
      BO_INT("saturate.j_max", j_max),
      BO_STRING("output.dir", output_dir),
  };
  return table;
}

#undef BO_DOUBLE
#undef BO_INT
#undef BO_STRING

const Key& find_key(const std::string& name) {
  for (const auto& k : keys()) {
    if (name == k.name) return k;
  }
  fail("unknown configuration key '" + name + "'");
}

}  // namespace

std::map<std::string, Value> parse_toml(std::string_view text) {
  std::map<std::string, Value> out;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header on line " + std::to_string(line_no));
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) fail("empty section name on line " + std::to_string(line_no));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value on line " + std::to_string(line_no));
    const auto key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) fail("empty key on line " + std::to_string(line_no));
    const auto full = section.empty() ? key : section + "." + key;
    if (out.contains(full)) fail("duplicate key '" + full + "' on line " + std::to_string(line_no));
    out[full] = parse_value(trim(line.substr(eq + 1)), line_no);
  }
  return out;
}

void RunConfig::validate() const {
  if (K < 1) throw Error(ErrorKind::InvalidArgument, "grid.K must be >= 1");
  integrator.validate();
  planner.validate();
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "planner.epsilon must be positive");
  if (steer_time < 0.0) throw Error(ErrorKind::InvalidArgument, "planner.T must be >= 0");
  if (!(noise_b0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "noise.b0 must be positive");
  if (!(noise_period > 0.0)) throw Error(ErrorKind::InvalidArgument, "noise.period must be positive");
  if (noise_truncation < 1) throw Error(ErrorKind::InvalidArgument, "noise.truncation must be >= 1");
  if (n_periods < 1) throw Error(ErrorKind::InvalidArgument, "ensemble.n_periods must be >= 1");
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "ensemble.trials must be >= 1");
  if (!(sobolev_s > 0.0 && sobolev_s <= 1.0)) throw Error(ErrorKind::InvalidArgument, "ensemble.s must lie in (0, 1]");
  if (threshold < 0.0) throw Error(ErrorKind::InvalidArgument, "ensemble.M must be >= 0");
  if (workers < 0) throw Error(ErrorKind::InvalidArgument, "ensemble.workers must be >= 0");
  if (ball_samples < 0 || ball_max_mode < 1) throw Error(ErrorKind::InvalidArgument, "invalid ball sampling keys");
  if (j_max < 0) throw Error(ErrorKind::InvalidArgument, "saturate.j_max must be >= 0");
  for (double d : deltas) {
    if (!(d > 0.0)) throw Error(ErrorKind::InvalidArgument, "limit.deltas must be positive");
  }
}

RunConfig from_toml(std::string_view text) {
  RunConfig cfg;
  for (const auto& [name, value] : parse_toml(text)) find_key(name).set(cfg, value, name);
  cfg.validate();
  return cfg;
}

RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_toml(buf.str());
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) fail("override '" + std::string(assignment) + "' is not key=value");
  const auto name = std::string(trim(assignment.substr(0, eq)));
  const auto text = trim(assignment.substr(eq + 1));
  const auto& key = find_key(name);
  try {
    key.set(cfg, parse_value(text, 0), name);
  } catch (const Error&) {
    // Bare words on the command line are strings; typed keys still reject them.
    if (text.empty() || text.front() == '"' || text.front() == '[') throw;
    key.set(cfg, std::string(text), name);
  }
}

std::string to_toml(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& k : keys()) {
    const std::string name = k.name;
    const auto dot = name.find('.');
    const auto sec = name.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "[" : "\n[") + sec + "]\n";
      section = sec;
    }
    out += name.substr(dot + 1) + " = " + k.get(cfg) + "\n";
  }
  return out;
}

std::string hash(const RunConfig& cfg) {
  if (sodium_init() < 0) throw Error(ErrorKind::InvalidArgument, "libsodium failed to initialize");
  const auto text = to_toml(cfg);
  std::array<unsigned char, 16> digest{};
  crypto_generichash(digest.data(), digest.size(), reinterpret_cast<const unsigned char*>(text.data()),
                     text.size(), nullptr, 0);
  std::array<char, 33> hex{};
  sodium_bin2hex(hex.data(), hex.size(), digest.data(), digest.size());
  return std::string(hex.data());
}

}  // namespace bo::config
