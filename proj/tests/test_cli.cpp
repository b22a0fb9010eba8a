#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef CLI_PATH
#error "CLI_PATH must be defined by the build"
#endif

namespace {

std::string scenario(const std::string& name) {
  return std::string(SCENARIO_DIR) + "/" + name + ".json";
}

int run(const std::string& args, const std::string& out_file = "/dev/null") {
  std::string cmd = std::string(CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("generated_at") == std::string::npos) out << line << "\n";
  return out.str();
}

}  // namespace

TEST_CASE("report on the bundled example exits 0 and is well-formed") {
  std::string out = "cli_report.json";
  REQUIRE(run("report " + scenario("paper_example"), out) == 0);
  auto j = nlohmann::json::parse(slurp(out));
  REQUIRE(j["scenario"] == "paper_example");
  REQUIRE(j["summary"]["fail"] == 0);
  REQUIRE(j["summary"]["pass"].get<int>() >= 10);
  REQUIRE(j["summary"]["report_only"].get<int>() >= 5);
  bool found_christoffel = false;
  for (const auto& c : j["checks"]) {
    REQUIRE(c.contains("paper_anchor"));  // traceability
    if (c["name"] == "christoffel-vs-reference") {
      found_christoffel = true;
      REQUIRE(c["verdict"] == "PASS");
    }
  }
  REQUIRE(found_christoffel);
}

TEST_CASE("clairaut on the perturbed scenario exits 1 with a failing umbilicity record") {
  std::string out = "cli_perturbed.json";
  REQUIRE(run("clairaut " + scenario("paper_example_perturbed"), out) == 1);
  auto j = nlohmann::json::parse(slurp(out));
  bool found = false;
  for (const auto& c : j["checks"])
    if (c["name"] == "clairaut-umbilicity") {
      found = true;
      REQUIRE(c["verdict"] == "FAIL");
      REQUIRE(c["max_residual"].get<double>() > 1e-3);
    }
  REQUIRE(found);
}

TEST_CASE("geodesic on the flat scenario produces a straight-line CSV") {
  std::string out = "cli_geo.json";
  REQUIRE(run("geodesic " + scenario("flat") +
                  " --p0 0,0 --v0 1,0 --csv cli_traj.csv",
              out) == 0);
  std::string csv = slurp("cli_traj.csv");
  REQUIRE(csv.rfind("s,x,y,speed,omega,clairaut_value", 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  int rows = 0;
  while (std::getline(lines, line)) {
    double s, x, y, speed;
    char c;
    std::istringstream row(line);
    row >> s >> c >> x >> c >> y >> c >> speed;
    REQUIRE(std::abs(x - s) <= 1e-12);
    REQUIRE(std::abs(y) <= 1e-15);
    REQUIRE(std::abs(speed - 1.0) <= 1e-13);
    ++rows;
  }
  REQUIRE(rows == 1001);
}

TEST_CASE("input errors exit with code 2") {
  REQUIRE(run("report no_such_scenario.json") == 2);
  {
    std::ofstream bad("cli_bad.json");
    bad << "{\"total\": {\"coords\": [\"x\"], \"metric\": [[\"1\"]]}}";
  }
  REQUIRE(run("report cli_bad.json") == 2);
  {
    std::ofstream bad("cli_bad2.json");
    bad << "{this is not json";
  }
  REQUIRE(run("report cli_bad2.json") == 2);
}

TEST_CASE("reports are byte-identical across runs apart from the timestamp") {
  REQUIRE(run("report " + scenario("paper_example") + " --out cli_det1.json") == 0);
  REQUIRE(run("report " + scenario("paper_example") + " --out cli_det2.json") == 0);
  std::string a = slurp("cli_det1.json"), b = slurp("cli_det2.json");
  REQUIRE_FALSE(a.empty());
  REQUIRE(strip_timestamp(a) == strip_timestamp(b));
}

TEST_CASE("strict paper mode promotes reference comparisons to FAIL") {
  std::string out = "cli_strict.json";
  int rc = run("report " + scenario("paper_example") + " --strict-paper", out);
  REQUIRE(rc == 1);  // the quoted Ricci values do not match the intrinsic tensor
  auto j = nlohmann::json::parse(slurp(out));
  bool found = false;
  for (const auto& c : j["checks"])
    if (c["name"] == "ricci-frame-vs-reference") {
      found = true;
      REQUIRE(c["verdict"] == "FAIL");
    }
  REQUIRE(found);
}

TEST_CASE("ricci-decompose writes per-term CSV rows") {
  std::string out = "cli_decomp.json";
  REQUIRE(run("ricci-decompose " + scenario("euclid_product") + " --csv cli_terms.csv",
              out) == 0);
  std::string csv = slurp("cli_terms.csv");
  REQUIRE(csv.rfind("sample,equation,block,ia,ib,term,value", 0) == 0);
  REQUIRE(csv.find("vertical-vertical") != std::string::npos);
  REQUIRE(csv.find("Ric^v(U1,U2)") != std::string::npos);
}
