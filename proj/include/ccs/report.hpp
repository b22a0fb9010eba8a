#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ccs/version.hpp"

namespace ccs {

// One verification record. REPORT-ONLY checks never affect the exit code.
struct CheckRecord {
  std::string name;
  std::string paper_anchor;
  double tolerance = 0.0;
  double max_residual = 0.0;
  std::string verdict;  // "PASS" | "FAIL" | "REPORT-ONLY"
  std::string notes;
  nlohmann::json detail;  // per-sample series, tables, term values
};

inline std::string verdict_of(double max_residual, double tol) {
  return max_residual <= tol ? "PASS" : "FAIL";
}

struct Report {
  std::string scenario;
  std::string scenario_hash;
  nlohmann::json environment;
  std::vector<CheckRecord> checks;
};

inline nlohmann::json to_json(const Report& rep) {
  nlohmann::json j;
  j["scenario"] = rep.scenario;
  j["scenario_hash"] = rep.scenario_hash;
  j["environment"] = rep.environment;
  j["environment"]["version"] = kVersion;
  nlohmann::json checks = nlohmann::json::array();
  int pass = 0, fail = 0, report_only = 0;
  for (const CheckRecord& c : rep.checks) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["paper_anchor"] = c.paper_anchor;
    jc["tolerance"] = c.tolerance;
    jc["max_residual"] = c.max_residual;
    jc["verdict"] = c.verdict;
    if (!c.notes.empty()) jc["notes"] = c.notes;
    if (!c.detail.is_null()) jc["detail"] = c.detail;
    checks.push_back(std::move(jc));
    if (c.verdict == "PASS")
      ++pass;
    else if (c.verdict == "FAIL")
      ++fail;
    else
      ++report_only;
  }
  j["checks"] = std::move(checks);
  j["summary"] = {{"pass", pass}, {"fail", fail}, {"report_only", report_only}};
  return j;
}

inline int exit_code(const Report& rep) {
  for (const CheckRecord& c : rep.checks)
    if (c.verdict == "FAIL") return 1;
  return 0;
}

}  // namespace ccs
