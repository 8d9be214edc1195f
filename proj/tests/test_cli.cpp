#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pdpset/instance.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(PDPSET_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct Workdir {
  fs::path dir;
  Workdir() {
    dir = fs::temp_directory_path() / ("pdpset_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Workdir() { fs::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("solve on the walkthrough instance") {
  Workdir w;
  pdpset::save_instance_file(pdpset::illustrative_instance(), w.file("ill.json"));
  const Run r = run("solve " + w.file("ill.json") + " --out " + w.file("plan.json"));
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["pdp_cost"] == 39.0);
  CHECK(j["pdpset_cost"] == 36.0);
  CHECK(j["transfers"] == 1);

  const Run e = run("eval " + w.file("ill.json") + " --plan " + w.file("plan.json"));
  CHECK(e.code == 0);
  CHECK(json::parse(e.out)["cost"]["total"] == 36.0);

  const Run c = run("check " + w.file("ill.json") + " --plan " + w.file("plan.json"));
  CHECK(c.code == 0);
  CHECK(json::parse(c.out)["feasible"] == true);

  const Run p1 = run("solve " + w.file("ill.json") + " --phase1-only");
  CHECK(json::parse(p1.out)["pdpset_cost"] == 39.0);
}

TEST_CASE("generated instance with an empty plan is unserved") {
  Workdir w;
  REQUIRE(run("gen --grid 5 5 --vehicles 2 --requests 3 --seed 4 --out " + w.file("g.json")).code ==
          0);
  write(w.file("empty.json"), R"({"routes": []})");
  const Run r = run("eval " + w.file("g.json") + " --plan " + w.file("empty.json"));
  CHECK(r.code == 1);
  CHECK(r.out.find("unserved") != std::string::npos);
}

TEST_CASE("gen is reproducible") {
  Workdir w;
  run("gen --seed 9 --requests 4 --out " + w.file("a.json"));
  run("gen --seed 9 --requests 4 --out " + w.file("b.json"));
  CHECK(slurp(w.file("a.json")) == slurp(w.file("b.json")));
}

TEST_CASE("exit codes for bad input and oracle limits") {
  Workdir w;
  write(w.file("bad.json"), R"({"grid": {"rows": 5}})");
  const Run bad = run("solve " + w.file("bad.json"));
  CHECK(bad.code == 2);
  CHECK(bad.out.find("/grid/cols") != std::string::npos);

  run("gen --requests 5 --out " + w.file("five.json"));
  const Run lim = run("oracle " + w.file("five.json"));
  CHECK(lim.code == 3);
  CHECK(lim.out.find("exceeds oracle limit") != std::string::npos);

  CHECK(run("solve " + w.file("missing.json")).code == 2);
}

TEST_CASE("oracle modes") {
  Workdir w;
  pdpset::save_instance_file(pdpset::illustrative_instance(), w.file("ill.json"));
  const Run pdp = run("oracle " + w.file("ill.json") + " --mode pdp --simple-paths");
  CHECK(pdp.code == 0);
  CHECK(json::parse(pdp.out)["cost"] == 39.0);
  const Run set = run("oracle " + w.file("ill.json") + " --mode pdpset --simple-paths");
  CHECK(json::parse(set.out)["cost"] == 36.0);
}

TEST_CASE("exported model is stable and checks a solution file") {
  Workdir w;
  pdpset::save_instance_file(pdpset::illustrative_instance(), w.file("ill.json"));
  const Run a = run("export-milp " + w.file("ill.json") + " --out " + w.file("a.lp"));
  run("export-milp " + w.file("ill.json") + " --out " + w.file("b.lp"));
  REQUIRE(a.code == 0);
  CHECK(json::parse(a.out)["big_m"] == 77.0);
  CHECK(slurp(w.file("a.lp")) == slurp(w.file("b.lp")));

  write(w.file("partial.sol"), "X_2_1_1 1\nBOGUS 1\n");
  const Run c = run("check " + w.file("ill.json") + " --solution " + w.file("partial.sol"));
  CHECK(c.code == 1);
  const json j = json::parse(c.out);
  CHECK(j["feasible"] == false);
  CHECK(j["warnings"].size() == 1);
}

TEST_CASE("bench writes the comparison CSV") {
  Workdir w;
  const Run r = run("bench --requests 3 --seeds 5 --out " + w.file("s1.csv"));
  REQUIRE(r.code == 0);
  const std::string csv = slurp(w.file("s1.csv"));
  CHECK(csv.rfind("instance,seed,method_a,method_b,a_total,b_total,ratio", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5 + 2);
  CHECK(csv.find("\navg,") != std::string::npos);

  const Run one = run("bench --requests 3 --seeds 2 --method-b none --format json");
  CHECK(one.code == 0);
}
