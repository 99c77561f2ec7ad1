#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + "\"" PHEVER_CLI_PATH "\" " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("phever_cli_" + std::to_string(getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("list-families prints the 13 catalog ids") {
  Run r = run("list-families");
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 13);
  for (const char* id : {"generic-W", "ed-generic", "typeII-pppp", "typeII-ppmm", "typeD-pppp", "typeD-ppmm",
                         "typeIII-pppp", "typeIII-pppp-sym", "typeIII-ppmm", "typeIII-ppmm-sym", "typeN-pppp",
                         "typeN-2d", "typeN-3d"})
    CHECK(r.out.find(id) != std::string::npos);
  CHECK(r.out.find("c0") != std::string::npos);
}

TEST_CASE("classify at one point") {
  Run r = run("classify --family type-n-pppp --set H=t^3 --set b0=1 --point 0.4,0.2,1.1,0.6");
  CHECK(r.code == 0);
  CHECK(r.out.find("SD: D, ASD: N") != std::string::npos);
  CHECK(r.out.find("E,D criteria: N") != std::string::npos);
}

TEST_CASE("verify writes a JSON report and exits 0 on PASS") {
  fs::path out = scratch() / "r.json";
  Run r = run("verify --family type-d-pppp --set c0=1 --set d0=2 --set lambda=3 --points 20 --seed 42 --out " +
              out.string());
  CHECK(r.code == 0);
  REQUIRE(fs::exists(out));
  auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["verdict"] == "PASS");
  CHECK(j["family"] == "typeD-pppp");
  CHECK(j["seed"] == 42);
  CHECK(j["invocation"]["--points"] == "20");
  CHECK(j["invocation"]["--seed"] == "42");
  CHECK(j["invocation"]["--set"] == "c0=1;d0=2;lambda=3");
  CHECK(j["invocation"]["--family"] == "type-d-pppp");
  CHECK(!j.contains("wall_clock_s"));
}

TEST_CASE("verify is reproducible and writes CSV on request") {
  fs::path a = scratch() / "a.json", c = scratch() / "c.csv";
  CHECK(run("verify --family typeN-2d --points 5 --seed 3 --out " + a.string()).code == 0);
  std::string first = slurp(a);
  CHECK(run("verify --family typeN-2d --points 5 --seed 3 --out " + a.string()).code == 0);
  CHECK(first == slurp(a));
  CHECK(run("verify --family typeN-2d --points 5 --seed 3 --format csv --out " + c.string()).code == 0);
  CHECK(count_lines(slurp(c)) == 6);
}

TEST_CASE("verify from a config file") {
  fs::path cfg = scratch() / "suite.json", out = scratch() / "cfg.json";
  std::ofstream(cfg) << R"({"family": "typeIII-ppmm", "set": {"F": "w"}, "points": 4, "seed": 11})";
  Run r = run("verify --config " + cfg.string() + " --out " + out.string());
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["points"] == 4);
  CHECK(j["seed"] == 11);

  fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << "{\"family\": \"typeIII-ppmm\",\n  \"pionts\": 4}";
  Run e = run("verify --config " + bad.string());
  CHECK(e.code == 2);
  CHECK(e.out.find("line 2, column 3") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("verify --family typeD-pppp --no-such-flag").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("verify --family typeX-pppp").code == 2);
  CHECK(run("verify --family typeD-pppp --set c0").code == 2);
  CHECK(run("verify --family typeD-pppp --format xml").code == 2);
  CHECK(run("classify --family typeD-pppp --point 1,2,3").code == 2);
  Run c = run("verify --family typeD-pppp", "PHEVER_CALIBRATION=" + (scratch() / "missing.txt").string());
  CHECK(c.code == 2);
  CHECK(c.out.find("calibrat") != std::string::npos);
}

TEST_CASE("family constraints are reported verbatim") {
  Run r = run("classify --family typeD-pppp --point 0.3,0.7,0,0.5");
  CHECK(r.code == 2);
  CHECK(r.out.find("'x'") != std::string::npos);
  Run s = run("verify --family typeII-pppp --set Q=2 --points 3");
  CHECK(s.code == 1);
  CHECK(s.out.find("sampling failure") != std::string::npos);
}

TEST_CASE("optics and symmetries") {
  Run o = run("optics --family typeD-ppmm --point 0.3,0.7,1.2,0.5");
  CHECK(o.code == 0);
  CHECK(o.out.find("[++,--,--,++]") != std::string::npos);
  Run s = run("symmetries --family typeD-ppmm --set b0=1");
  CHECK(s.code == 0);
  CHECK(s.out.find("algebra A3,8+A1") != std::string::npos);
}

TEST_CASE("verify-all is stable across runs") {
  Run a = run("verify-all --seed 5 --points 4");
  Run b = run("verify-all --seed 5 --points 4");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(count_lines(a.out) == 9);
  fs::remove_all(scratch());
}
