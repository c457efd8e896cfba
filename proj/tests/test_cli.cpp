#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    const auto d = fs::path(BO_TEST_SCRATCH) / "cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI with stdin closed and returns its exit status.
int bo(const std::string& args) {
  const std::string cmd = std::string("\"") + BO_CLI + "\" " + args + " </dev/null >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json json_at(const fs::path& p) { return Json::parse(slurp(p)); }

std::string out(const std::string& name) { return "-o \"" + (scratch() / name).string() + "\""; }

}  // namespace

TEST_CASE("malformed forcing is rejected with the segment named", "[cli]") {
  const auto bad = scratch() / "bad_schedule.json";
  std::ofstream(bad) << R"({"segments": [{"duration": 0.1, "a": 1, "b": 0}, {"duration": 0, "a": 1, "b": 0}]})";
  CHECK(bo("simulate -s grid.K=8 --u0 \"0.1 sin x\" -f \"" + bad.string() + "\" " + out("bad")) == 2);
  const auto err = json_at(scratch() / "bad" / "error.json");
  CHECK(err.at("message").get<std::string>().find("segment 1") != std::string::npos);

  CHECK(bo("simulate -s grid.K=8 -s grid.nope=1 " + out("unknown")) == 2);
  CHECK(bo("simulate -s grid.K=8 --u0 \"1 + sin x\" " + out("mean")) == 2);
}

TEST_CASE("steered schedule replays to the reported error", "[cli]") {
  REQUIRE(bo("steer -s grid.K=8 --u0 \"0.3 sin x\" --u1 \"0.4 sin 2x\" -e 0.1 -T 1 " + out("steer")) == 0);
  const auto dir = scratch() / "steer";
  for (const char* f : {"schedule.json", "report.json", "verification.csv", "config.toml", "manifest.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto schedule = json_at(dir / "schedule.json");
  const auto report = json_at(dir / "report.json");
  CHECK(schedule.at("T").get<double>() == 1.0);
  CHECK(report.at("achieved_error").get<double>() < 0.1);
  CHECK(report.at("admissible").get<bool>());
  CHECK(json_at(dir / "manifest.json").at("config_hash") == schedule.at("config_hash"));

  // The report is measured at half the default step and CFL constant.
  REQUIRE(bo("simulate -s grid.K=8 -s integrator.dt_max=0.005 -s integrator.cfl_constant=0.1 --u0 \"0.3 sin x\" -f \"" +
             (dir / "schedule.json").string() + "\" --target \"0.4 sin 2x\" " + out("replay")) == 0);
  const auto summary = json_at(scratch() / "replay" / "summary.json");
  CHECK(std::abs(summary.at("error").get<double>() - report.at("achieved_error").get<double>()) <= 1e-10);
  CHECK(summary.at("T").get<double>() == 1.0);

  REQUIRE(bo("steer -s grid.K=8 --u0 \"0.3 sin x\" --u1 \"0.4 sin 2x\" -e 0.1 " + out("steer_free")) == 0);
  CHECK(json_at(scratch() / "steer_free" / "schedule.json").at("T").get<double>() != 1.0);
}

TEST_CASE("steering to the initial state is empty", "[cli]") {
  REQUIRE(bo("steer -s grid.K=8 --u0 \"0.2 cos x\" --u1 \"0.2 cos x\" " + out("same")) == 0);
  CHECK(json_at(scratch() / "same" / "schedule.json").at("segments").empty());
  CHECK(json_at(scratch() / "same" / "report.json").at("achieved_error").get<double>() == 0.0);
}

TEST_CASE("saturate", "[cli]") {
  REQUIRE(bo("saturate -K 2 " + out("sat2")) == 0);
  const auto csv = slurp(scratch() / "sat2" / "certificate.csv");
  CHECK(csv.rfind("j,dim,modes_covered\n0,2,1\n", 0) == 0);
  CHECK(json_at(scratch() / "sat2" / "summary.json").at("covered_at").get<int>() <= 2);

  CHECK(bo("saturate -K 4 --j-max 0 " + out("sat0")) == 1);
  CHECK(slurp(scratch() / "sat0" / "certificate.csv") == "j,dim,modes_covered\n0,2,1\n");
  CHECK(bo("saturate -K 1 " + out("sat1")) == 2);
}

TEST_CASE("ensemble output", "[cli]") {
  const std::string flat = "ensemble -s grid.K=8 -s noise.law=zero -t 1 -n 3 --u0 \"0.1 sin x\" ";
  REQUIRE(bo(flat + out("flat")) == 0);
  const auto summary = json_at(scratch() / "flat" / "summary.json");
  CHECK(summary.at("hitting").is_null());
  CHECK(summary.at("hits").get<int>() == 0);

  const std::string noisy = "ensemble -s grid.K=8 -t 4 -n 3 -s ensemble.seed=7 --u0 \"0.1 sin x\" ";
  REQUIRE(bo(noisy + out("a")) == 0);
  REQUIRE(bo(noisy + out("b")) == 0);
  CHECK(slurp(scratch() / "a" / "fan.svg") == slurp(scratch() / "b" / "fan.svg"));
  CHECK(slurp(scratch() / "a" / "chains.csv") == slurp(scratch() / "b" / "chains.csv"));
  REQUIRE(bo("ensemble -s grid.K=8 -t 4 -n 3 -s ensemble.seed=8 --u0 \"0.1 sin x\" " + out("c")) == 0);
  CHECK(slurp(scratch() / "a" / "chains.csv") != slurp(scratch() / "c" / "chains.csv"));
}

TEST_CASE("verify-limit", "[cli]") {
  REQUIRE(bo("verify-limit -s grid.K=16 " + out("limit")) == 0);
  const auto s = json_at(scratch() / "limit" / "summary.json");
  const auto errors = s.at("errors").get<std::vector<double>>();
  REQUIRE(errors.size() == 4);
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] < errors[i - 1]);
}
