#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "surgekit/cli.hpp"

using namespace surgekit;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "surgekit_cli_tests" / name;
  fs::remove_all(p);
  return p;
}

Result run(std::vector<std::string> args, const fs::path& out_dir) {
  args.push_back("--out-dir");
  args.push_back(out_dir.string());
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double grab(const std::string& text, const std::string& pattern) {
  std::smatch m;
  REQUIRE(std::regex_search(text, m, std::regex(pattern)));
  return std::stod(m[1]);
}

std::vector<std::string> last_row(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  std::vector<std::string> cells;
  std::stringstream ss(last);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  return cells;
}

}  // namespace

TEST_CASE("stability command reports the surge boundary") {
  const fs::path dir = scratch("stability");
  const Result r = run({"stability", "--lo", "0.1", "--hi", "0.79", "--n", "1000"}, dir);
  CHECK(r.code == kExitOk);
  const double phi = grab(r.out, R"(surge boundary: phi = ([0-9.]+))");
  CHECK(std::abs(phi - 0.43) <= 0.01);
  const std::string csv = slurp(dir / "default.csv");
  CHECK(csv.rfind("phi,delta,real_part,bendixson_r,class\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1001);
  CHECK(fs::exists(dir / "default_real_part.svg"));
}

TEST_CASE("tune command prints Ziegler-Nichols gains") {
  const Result r = run({"tune", "--L", "0.213", "--T", "1.79", "--kind", "PID"}, scratch("tune"));
  CHECK(r.code == kExitOk);
  CHECK(grab(r.out, R"(Kp = ([0-9.]+))") == doctest::Approx(10.08).epsilon(0.01));
  CHECK(grab(r.out, R"(Ki = ([0-9.]+))") == doctest::Approx(23.66).epsilon(0.01));
  CHECK(grab(r.out, R"(Kd = ([0-9.]+))") == doctest::Approx(1.07).epsilon(0.01));
}

TEST_CASE("fig14 leaves the parameters untouched") {
  const fs::path dir = scratch("fig14");
  const Result r = run({"closedloop", "--scenario", "fig14", "--no-svg"}, dir);
  CHECK(r.code == kExitOk);
  const auto row = last_row(dir / "fig14.csv");
  REQUIRE(row.size() == 13);  // t + 10 loop columns + phi, psi
  CHECK(row[8] == "10");
  CHECK(row[9] == "10");
  CHECK(row[10] == "0.7");
  CHECK(fs::is_empty(dir) == false);
  CHECK_FALSE(fs::exists(dir / "fig14_flow.svg"));
}

TEST_CASE("fig15 reports the comparison and the surge check") {
  const Result r = run({"run", "fig15", "--no-svg"}, scratch("fig15"));
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("comparison: terminal |e|") != std::string::npos);
  CHECK(r.out.find("below surge flow 0.43:") != std::string::npos);
}

TEST_CASE("every shipped scenario runs cleanly") {
  for (const char* name : {"fig1_2_5", "fig3_4", "fig6", "fig7", "fig10", "fig12", "fig14", "fig15", "zn", "avg"}) {
    CAPTURE(name);
    const Result r = run({"run", name}, scratch(std::string("catalog_") + name));
    CHECK(r.code == kExitOk);
    CHECK(r.err.empty());
  }
}

TEST_CASE("output files are byte-identical across invocations") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    REQUIRE(run({"closedloop", "--t-end", "5", "--observe"}, dir).code == 0);
    REQUIRE(run({"run", "fig6", "--name", "lc"}, dir).code == 0);
  }
  for (const char* f : {"default.csv", "default_flow.svg", "lc.csv", "lc_field.csv", "lc_phase.svg"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK_FALSE(slurp(a / f).empty());
  }
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  CHECK(run({"frobnicate"}, dir).code == kExitUsage);
  CHECK(run({"stability", "--bogus"}, dir).code == kExitUsage);
  const Result bad = run({"closedloop", "--gamma", "-1"}, dir);
  CHECK(bad.code == kExitConfig);
  CHECK(bad.err.find("controller.gamma") != std::string::npos);
  CHECK(run({"closedloop", "--set", "controller.gama=2"}, dir).code == kExitConfig);
  CHECK(run({"closedloop", "--set", "nonsense"}, dir).code == kExitConfig);
  CHECK(run({"closedloop", "--scenario", "fig6"}, dir).code == kExitConfig);
  CHECK(run({"run", "no_such_scenario"}, dir).code == kExitConfig);
  // A single lag has its steepest slope at t = 0, so L = 0 and tuning fails.
  const Result model = run({"tune", "--lags", "2"}, dir);
  CHECK(model.code == kExitModel);
  CHECK_FALSE(model.err.empty());

  const fs::path blocker = scratch("blocker");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker) << "x";
  CHECK(run({"map"}, blocker).code == kExitIo);

  std::ostringstream out, err;
  CHECK(run_command({"--help"}, out, err) == kExitOk);
  CHECK(out.str().find("closedloop") != std::string::npos);
}

TEST_CASE("output directory from the environment") {
  const fs::path dir = scratch("env");
  ::setenv("SURGEKIT_OUT_DIR", dir.c_str(), 1);
  std::ostringstream out, err;
  const int code = run_command({"map", "--n", "81", "--no-svg"}, out, err);
  ::unsetenv("SURGEKIT_OUT_DIR");
  CHECK(code == kExitOk);
  const std::string csv = slurp(dir / "default.csv");
  CHECK(csv.rfind("phi,psi_c,slope\n", 0) == 0);
  CHECK(csv.find("\n0.5,0.712,") != std::string::npos);
}

TEST_CASE("flags and overrides reach the run") {
  const fs::path dir = scratch("overrides");
  const Result r = run({"simulate", "--flow", "0.55", "--t-end", "10", "--set", "integration.decimate=10", "--no-svg"}, dir);
  CHECK(r.code == kExitOk);
  const std::string csv = slurp(dir / "default.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 101);
  CHECK(r.out.find("stable-focus") != std::string::npos);
}
