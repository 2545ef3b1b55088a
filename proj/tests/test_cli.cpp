#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "wardrop/io.hpp"

using namespace wardrop;

namespace {

std::string cli() { return WARDROP_CLI_PATH; }

int run_cli(const std::string& args) {
  std::string cmd = cli() + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string tmp_path(const std::string& name) {
  return std::string("/tmp/wardrop_cli_test_") + name;
}

}  // namespace

TEST_CASE("cli solves the generated example end to end") {
  std::string inst = tmp_path("ex.json");
  std::string curve = tmp_path("ex_curve.json");
  std::string samples = tmp_path("ex_samples.csv");
  REQUIRE(run_cli("generate --example ex_simple_undirected --out " + inst) == 0);
  REQUIRE(run_cli("solve " + inst + " --out " + curve) == 0);
  Json cj = load_json(curve);
  CHECK(cj.at("breakpoints") == Json::array({"0", "2", "11/3", "5"}));
  CHECK(cj.at("segments").size() == 4);
  REQUIRE(run_cli("sample " + curve + " --lambda 0,2,5 --out " + samples) == 0);
  std::ifstream in(samples);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(line.rfind("0,0,0,0,", 0) == 0);
  REQUIRE(run_cli("verify --instance " + inst + " --curve " + curve) == 0);
  REQUIRE(run_cli("plotdata " + curve + " --series flow:e3 --out " + tmp_path("plot.csv")) == 0);
}

TEST_CASE("cli exit codes") {
  std::string inst = tmp_path("amb.json");
  std::string curve = tmp_path("amb_curve.json");
  REQUIRE(run_cli("generate --example ex_ambiguous --out " + inst) == 0);
  REQUIRE(run_cli("solve " + inst + " --out " + curve) == 0);

  SECTION("parse errors exit 2") {
    std::string bad = tmp_path("bad.json");
    std::ofstream(bad) << "{ not json";
    CHECK(run_cli("solve " + bad) == 2);
    CHECK(run_cli("solve /nonexistent/file.json") == 2);
    std::string badinst = tmp_path("badinst.json");
    std::ofstream(badinst) << R"({"mode":"directed","vertices":["a"],"source":"a","sink":"a","edges":[]})";
    CHECK(run_cli("solve " + badinst) == 2);
  }

  SECTION("budget exceeded exits 4") {
    std::string cmd = "WARDROP_PIVOT_BUDGET=1 " + cli() + " solve " + inst + " >/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 4);
  }

  SECTION("a corrupted curve fails verification") {
    Json cj = load_json(curve);
    cj["segments"][1]["flow_offset"][0] = "17/3";
    std::string bad = tmp_path("amb_bad.json");
    save_json(bad, cj);
    int rc = run_cli("verify --instance " + inst + " --curve " + bad);
    CHECK(rc != 0);
  }

  SECTION("curve against the wrong instance is rejected") {
    std::string other = tmp_path("lex.json");
    REQUIRE(run_cli("generate --example ex_lexicographic --out " + other) == 0);
    CHECK(run_cli("verify --instance " + other + " --curve " + curve) == 2);
  }
}

TEST_CASE("cli braess generation") {
  std::string inst = tmp_path("braess.json");
  REQUIRE(run_cli("generate --family braess --j 4 --out " + inst) == 0);
  InstanceBundle b = instance_from_json(load_json(inst));
  CHECK(b.vertex_names.size() == 10);
  CHECK(b.edges.size() == 17);
  REQUIRE(run_cli("generate --family braess --j 1 --constant --out " + inst) == 0);
  InstanceBundle c = instance_from_json(load_json(inst));
  CHECK(c.constant_costs);
  CHECK(run_cli("generate --family braess --j 0 --out " + inst) == 2);
  CHECK(run_cli("generate --example nope --out " + inst) == 2);
}
