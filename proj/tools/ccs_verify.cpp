// ccs-verify: evaluates conformal-submersion geometry from a scenario file and
// emits a machine-readable verification report.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccs/checks.hpp"

namespace {

using namespace ccs;

Vec parse_point(const std::string& text, int expected_dim, const std::string& flag) {
  Vec out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InputError(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (expected_dim > 0 && static_cast<int>(out.size()) != expected_dim)
    throw InputError(flag + ": expected " + std::to_string(expected_dim) +
                     " comma-separated values");
  return out;
}

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

void emit(const Report& rep, const std::string& out_path) {
  nlohmann::json j = to_json(rep);
  std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw InputError("cannot open output file '" + out_path + "'");
    out << text;
  }
}

struct Cli {
  std::string scenario_path;
  std::string out_path;
  std::string csv_path;
  std::string p0_text, v0_text, point_text;
  double length = 1.0;
  double step = 1e-3;
  bool strict_paper = false;
};

int run_command(const std::string& command, const Cli& cli) {
  Scenario scn = load_scenario(cli.scenario_path);
  CheckOptions opts;
  opts.strict_paper = cli.strict_paper;
  opts.geodesic_length = cli.length;
  opts.geodesic_step = cli.step;
  if (!cli.p0_text.empty()) opts.p0 = parse_point(cli.p0_text, scn.d1(), "--p0");
  if (!cli.v0_text.empty()) opts.v0 = parse_point(cli.v0_text, scn.d1(), "--v0");
  if (!cli.point_text.empty())
    opts.point = parse_point(cli.point_text, scn.d1(), "--point");
  if (opts.p0.has_value() != opts.v0.has_value())
    throw InputError("--p0 and --v0 must be given together");

  Report rep;
  rep.scenario = scn.name;
  char hex[32];
  std::snprintf(hex, sizeof(hex), "fnv1a:%016llx",
                static_cast<unsigned long long>(scn.content_hash));
  rep.scenario_hash = hex;
  rep.environment["seed"] = scn.sampling.seed;
  rep.environment["command"] = command;

  if (command == "report") {
    rep = full_report(scn, opts);
  } else if (command == "check-conformal") {
    for (auto& r : conformal_checks(scn)) rep.checks.push_back(std::move(r));
  } else if (command == "christoffel") {
    for (auto& r : christoffel_checks(scn, opts)) rep.checks.push_back(std::move(r));
  } else if (command == "oneill") {
    for (auto& r : oneill_checks(scn)) rep.checks.push_back(std::move(r));
  } else if (command == "clairaut") {
    for (auto& r : clairaut_checks(scn)) rep.checks.push_back(std::move(r));
  } else if (command == "geodesic") {
    std::vector<Trajectory> trajs;
    for (auto& r : geodesic_checks(scn, opts, &trajs)) rep.checks.push_back(std::move(r));
    if (!cli.csv_path.empty() && !trajs.empty()) {
      std::ofstream csv(cli.csv_path, std::ios::binary);
      if (!csv) throw InputError("cannot open CSV file '" + cli.csv_path + "'");
      write_trajectory_csv(csv, scn.total.chart(), trajs.front());
    }
  } else if (command == "soliton") {
    for (auto& r : soliton_checks(scn)) rep.checks.push_back(std::move(r));
  } else if (command == "ricci-decompose") {
    nlohmann::json rows = nlohmann::json::array();
    for (auto& r : decomp_checks(scn, opts, cli.csv_path.empty() ? nullptr : &rows))
      rep.checks.push_back(std::move(r));
    if (!cli.csv_path.empty()) {
      std::ofstream csv(cli.csv_path, std::ios::binary);
      if (!csv) throw InputError("cannot open CSV file '" + cli.csv_path + "'");
      csv << "sample,equation,block,ia,ib,term,value\n";
      char buf[32];
      for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", row.at("value").get<double>());
        csv << row.at("sample").get<int>() << "," << row.at("equation").get<std::string>()
            << "," << row.at("block").get<std::string>() << "," << row.at("ia").get<int>()
            << "," << row.at("ib").get<int>() << ",\""
            << row.at("term").get<std::string>() << "\"," << buf << "\n";
      }
    }
  }

  rep.environment["seed"] = scn.sampling.seed;
  rep.environment["command"] = command;
  rep.environment["generated_at"] = timestamp_utc();
  emit(rep, cli.out_path);
  return exit_code(rep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical verification of Clairaut conformal submersion geometry"};
  app.require_subcommand(1);

  Cli cli;
  const std::vector<std::string> commands = {
      "check-conformal", "christoffel", "oneill",           "clairaut",
      "geodesic",        "soliton",     "ricci-decompose",  "report"};
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("scenario", cli.scenario_path, "scenario JSON file")->required();
    sub->add_option("--out", cli.out_path, "write the JSON report to a file");
    sub->add_flag("--strict-paper", cli.strict_paper,
                  "promote reference-value comparisons to FAIL-capable");
    if (name == "geodesic") {
      sub->add_option("--p0", cli.p0_text, "initial point, comma separated");
      sub->add_option("--v0", cli.v0_text, "initial velocity, comma separated");
      sub->add_option("--length", cli.length, "arc length to integrate");
      sub->add_option("--step", cli.step, "integrator step");
      sub->add_option("--csv", cli.csv_path, "write the trajectory as CSV");
    }
    if (name == "ricci-decompose")
      sub->add_option("--csv", cli.csv_path, "write per-term rows as CSV");
    if (name == "christoffel")
      sub->add_option("--point", cli.point_text, "evaluation point, comma separated");
  }

  CLI11_PARSE(app, argc, argv);

  std::string command = app.get_subcommands().front()->get_name();
  try {
    return run_command(command, cli);
  } catch (const ccs::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ccs::ParseError& e) {
    std::cerr << "input error: " << e.what() << " (offset " << e.offset() << ")\n";
    return 2;
  } catch (const ccs::DomainError& e) {
    std::cerr << "evaluation error: " << e.what() << " in " << e.subexpression() << "\n";
    return 2;
  } catch (const ccs::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
