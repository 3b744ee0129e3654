#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "curemst/cli.hpp"

using namespace curemst::cli;
using nlohmann::json;

namespace {

const std::string kData = CUREMST_TEST_DATA "/two_group.csv";

CliConfig base(const std::string& cmd) {
  CliConfig c;
  c.subcommand = cmd;
  c.input = kData;
  c.group_col = "arm";
  c.seed = 1;
  return c;
}

struct Run {
  int code;
  std::string out, err;
};

Run run(const CliConfig& c) {
  std::ostringstream out, err;
  const int code = dispatch(c, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("compare-np emits one JSON document") {
  auto c = base("compare-np");
  c.permutations = 100;
  const auto r = run(c);
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["command"] == "compare-np");
  CHECK(j["asymptotic"]["method"] == "asymptotic");
  CHECK(j["permutation"]["B"] == 100);
  CHECK(j["permutation"]["seed"] == 1);
  CHECK(j["cure_fraction_test"]["method"] == "cure_fraction_wald");
  CHECK(j["diagnostics"]["sample1"]["n"] == 120);
  CHECK(j["asymptotic"]["ci"].size() == 2);
}

TEST_CASE("missing status column exits 2 naming it") {
  auto c = base("compare-np");
  c.status_col = "dead";
  const auto r = run(c);
  CHECK(r.code == 2);
  CHECK(r.err.find("dead") != std::string::npos);
}

TEST_CASE("output is independent of the worker count") {
  auto c = base("compare-np");
  c.permutations = 200;
  c.workers = 1;
  const auto a = run(c);
  c.workers = 4;
  CHECK(run(c).out == a.out);
  for (auto f : {Format::csv, Format::text}) {
    c.format = f;
    c.workers = 1;
    const auto x = run(c);
    c.workers = 3;
    CHECK(run(c).out == x.out);
  }
}

TEST_CASE("absent seed is drawn and printed") {
  auto c = base("compare-np");
  c.seed.reset();
  c.permutations = 20;
  const auto r = run(c);
  CHECK(r.code == 0);
  CHECK(r.err.find("seed: ") != std::string::npos);
}

TEST_CASE("fit-cure") {
  auto c = base("fit-cure");
  c.x_cols = {"x1"};
  c.z_cols = {"z1"};
  const auto r = run(c);
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  REQUIRE(j["fits"].size() == 2);
  CHECK(j["fits"][0]["fit"]["gamma"].size() == 2);
  CHECK(j["fits"][0]["fit"]["converged"] == true);
  CHECK(j["fits"][0]["fit"].contains("baseline"));
}

TEST_CASE("compare-sp") {
  auto c = base("compare-sp");
  c.x_cols = {"x1"};
  c.z_cols = {"z1"};
  c.z = {{0.0}, {1.0}};
  c.bootstrap = 15;
  c.permutations = 4;
  auto r = run(c);
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["conditional_mst"].size() == 2);
  CHECK(j["conditional_mst"][0]["asymptotic"]["B_boot"] == 15);
  CHECK(j["parameters"]["A"][0].contains("se"));

  c.z = {{0.0, 1.0}};
  CHECK(run(c).code == 2);

  c.z = {{0.0}};
  c.bootstrap = 0;
  r = run(c);
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  j = json::parse(r.out);
  CHECK_FALSE(j["conditional_mst"][0].contains("asymptotic"));
}

TEST_CASE("EM failure exits 4") {
  // The incidence covariate separates events from censorings perfectly.
  const std::string path = "cli_separated.csv";
  {
    std::ofstream f(path);
    f << "g,time,status,x,z\n";
    for (int i = 0; i < 20; ++i) {
      f << (i < 10 ? "a" : "b") << ',' << 1 + i % 10 << ',' << (i % 2) << ',' << (i % 2 ? 5 : -5) << ','
        << (i % 3) << '\n';
    }
  }
  CliConfig c = base("compare-sp");
  c.input = path;
  c.group_col = "g";
  c.x_cols = {"x"};
  c.z_cols = {"z"};
  c.z = {{0.0}};
  c.bootstrap = 5;
  CHECK(run(c).code == 4);
}

TEST_CASE("simulate") {
  CliConfig c;
  c.subcommand = "simulate";
  c.setting = "I.2";
  c.reps = 5;
  c.n1 = c.n2 = 50;
  c.seed = 7;
  c.permutations = 30;
  c.out = "cli_sim";
  auto r = run(c);
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["report"]["reps"] == 5);
  CHECK(std::ifstream("cli_sim.csv").good());
  CHECK(std::ifstream("cli_sim.txt").good());
  c.workers = 3;
  CHECK(run(c).out == r.out);
  c.setting = "nope";
  CHECK(run(c).code == 2);
}

TEST_CASE("curves") {
  auto c = base("curves");
  c.out = "cli_curves";
  REQUIRE(run(c).code == 0);
  std::ifstream csv("cli_curves.csv");
  std::string line;
  int headers = 0, rows = 0;
  while (std::getline(csv, line)) {
    headers += line.rfind("group,", 0) == 0;
    ++rows;
  }
  CHECK(headers == 1);
  CHECK(rows > 50);
  std::ifstream svg("cli_curves.svg");
  std::stringstream s;
  s << svg.rdbuf();
  CHECK(s.str().find("<svg") == 0);
  CHECK(s.str().find("<path") != std::string::npos);
}

TEST_CASE("alpha outside (0,1) is an input error") {
  auto c = base("compare-np");
  c.alpha = 1.5;
  CHECK(run(c).code == 2);
}
