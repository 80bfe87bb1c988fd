#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "abohm/common.hpp"
#include "abohm/config.hpp"
#include "abohm/report.hpp"

using namespace abohm;
namespace fs = std::filesystem;

namespace {

std::string tool = ABOHM_TOOL_PATH;
std::string data = ABOHM_TEST_DATA;

int run_tool(const std::string& args) {
  std::string cmd = tool + " " + args + " >cli_stdout.txt 2>cli_stderr.txt";
  int rc = std::system(cmd.c_str());
  return rc < 0 ? rc : WEXITSTATUS(rc);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(name) {
    fs::remove_all(dir);
  }
  std::string str() const { return dir.string(); }
};

}  // namespace

TEST_CASE("config parser accepts the shipped examples") {
  for (const char* name :
       {"disk_small.json", "profile_empty.json", "sweep_tiny.json", "pigeon_small.json"}) {
    auto cfg = config::parse_file(data + std::string("/") + name);
    CHECK(cfg.seed_set);
    CHECK(!cfg.kind.empty());
  }
}

TEST_CASE("config parser rejects malformed input with the config tag") {
  auto expect_reject = [](const std::string& text) {
    try {
      config::parse(text);
      FAIL("expected a throw for: " << text);
    } catch (const Error& e) {
      CHECK(e.tag() == "config-invalid");
    }
  };
  expect_reject("{");
  expect_reject(R"({"schema":1,"kind":"disk-baseline","grid_sides":[33]})");  // no seed
  expect_reject(R"({"schema":1,"kind":"disk-baseline","seed":1.5,"grid_sides":[33]})");
  expect_reject(R"({"schema":1,"kind":"no-such-kind","seed":1})");
  expect_reject(R"({"schema":1,"kind":"disk-baseline","seed":1,"grid_sides":[33],"bogus":1})");
  expect_reject(R"({"schema":1,"kind":"disk-baseline","seed":1,"grid_sides":[5]})");
  expect_reject(R"({"schema":2,"kind":"disk-baseline","seed":1,"grid_sides":[33]})");
  expect_reject(
      R"({"schema":1,"kind":"counterexample-profile","seed":1,"B":4,"K":1,"n_max":8,"grid_sides":[33],"n_list":[4,2]})");
  expect_reject(R"({"schema":1,"kind":"pigeonhole-study","seed":1,"M":2,"N":4,"epsilon":0.9,"steps":[1],"trials":1})");
}

TEST_CASE("validate mode exits cleanly without writing anything") {
  Scratch out("cli_validate_out");
  int rc = run_tool("run " + data + "/disk_small.json --validate --out " + out.str());
  CHECK(rc == 0);
  CHECK_FALSE(fs::exists(out.dir));
}

TEST_CASE("bad configs map to exit code 2, missing files too") {
  CHECK(run_tool("run " + data + "/bad_key.json --out cli_bad_out") == 2);
  CHECK(run_tool("run " + data + "/missing_seed.json --out cli_bad_out") == 2);
  CHECK(run_tool("run " + data + "/no_such_file.json --out cli_bad_out") == 2);
}

TEST_CASE("disk baseline run produces the documented table and hits the reference") {
  Scratch out("cli_disk_out");
  int rc = run_tool("run " + data + "/disk_small.json --out " + out.str());
  CHECK(rc == 0);
  auto rows = read_csv((out.dir / "disk-baseline.csv").string());
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0][0] == "side");
  CHECK(rows[0][2] == "lambda");
  // one row per grid plus the extrapolated summary
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][0] == "65");
  CHECK(rows[2][0] == "129");
  CHECK(rows[3][0] == "extrapolated");
  double extrap = std::stod(rows[3][2]);
  double j01sq = 5.783185962946785;
  CHECK(std::abs(extrap - j01sq) / j01sq < 0.01);
  CHECK(rows[3][4] == "true");

  // manifest names the experiment and carries a config hash
  std::string man = report::read_file((out.dir / "manifest.json").string());
  CHECK(man.find("\"kind\": \"disk-baseline\"") != std::string::npos);
  CHECK(man.find("config_hash") != std::string::npos);
  CHECK(man.find("\"flagged\": false") != std::string::npos);
}

TEST_CASE("reruns are byte identical apart from the manifest timestamp") {
  Scratch a("cli_repro_a"), b("cli_repro_b");
  REQUIRE(run_tool("run " + data + "/pigeon_small.json --out " + a.str()) == 0);
  REQUIRE(run_tool("run " + data + "/pigeon_small.json --out " + b.str()) == 0);
  auto csv_a = report::read_file((a.dir / "pigeonhole-study.csv").string());
  auto csv_b = report::read_file((b.dir / "pigeonhole-study.csv").string());
  CHECK(csv_a == csv_b);
  CHECK(!csv_a.empty());
}

TEST_CASE("empty coupling list yields a header-only table and a clean exit") {
  Scratch out("cli_empty_out");
  int rc = run_tool("run " + data + "/profile_empty.json --out " + out.str());
  CHECK(rc == 0);
  auto rows = read_csv((out.dir / "counterexample-profile.csv").string());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0][0] == "n");
  CHECK(rows[0].size() == 9);
}

TEST_CASE("annulus sweep with svg output keeps the documented layout") {
  Scratch out("cli_sweep_out");
  int rc = run_tool("run " + data + "/sweep_tiny.json --threads 2 --format csv+svg --out " +
                    out.str());
  CHECK(rc == 0);
  auto rows = read_csv((out.dir / "ab-annulus-sweep.csv").string());
  REQUIRE(rows.size() == 3);  // header + two alphas
  CHECK(rows[0][0] == "alpha");
  CHECK(rows[1][6] == "true");  // bound holds at alpha = 0
  CHECK(rows[2][6] == "true");  // and at alpha = 1/2

  std::string svg = report::read_file((out.dir / "ab-annulus-sweep.svg").string());
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("width=\"860\"") != std::string::npos);
  CHECK(svg.find("height=\"480\"") != std::string::npos);
  CHECK(svg.find("<path") != std::string::npos);
  CHECK(svg.find("alpha") != std::string::npos);   // axis label
  CHECK(svg.find("lambda") != std::string::npos);  // axis label
}
