#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ccs/submersion.hpp"

namespace ccs {

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail_io {

using nlohmann::json;

inline const json& need(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError(where + ": missing field '" + key + "'");
  return *it;
}

inline Expr parse_checked(const std::string& text, const std::vector<std::string>& coords,
                          const std::map<std::string, double>& constants,
                          const std::string& where) {
  try {
    return parse(text, coords, constants);
  } catch (const ParseError& e) {
    throw InputError(where + ": " + e.what() + " (offset " +
                     std::to_string(e.offset()) + ") in \"" + text + "\"");
  }
}

inline Chart load_chart(const json& j, const std::map<std::string, double>& constants,
                        const std::string& where) {
  Chart c;
  c.name = j.value("name", where);
  for (const auto& s : need(j, "coords", where)) c.coords.push_back(s.get<std::string>());
  if (c.coords.empty()) throw InputError(where + ": empty coordinate list");
  for (std::size_t i = 0; i < c.coords.size(); ++i)
    for (std::size_t k = i + 1; k < c.coords.size(); ++k)
      if (c.coords[i] == c.coords[k])
        throw InputError(where + ": duplicate coordinate '" + c.coords[i] + "'");
  if (j.contains("domain")) {
    for (const auto& d : j.at("domain")) {
      DomainConstraint dc;
      std::string kind = need(d, "kind", where + ".domain").get<std::string>();
      if (kind == "positive")
        dc.positive = true;
      else if (kind == "nonzero")
        dc.positive = false;
      else
        throw InputError(where + ".domain: kind must be 'positive' or 'nonzero'");
      dc.expr = parse_checked(need(d, "expr", where + ".domain").get<std::string>(),
                              c.coords, constants, where + ".domain");
      c.domain.push_back(std::move(dc));
    }
  }
  return c;
}

inline MetricField load_metric(const json& j, Chart chart,
                               const std::map<std::string, double>& constants,
                               const std::string& where) {
  const json& rows = need(j, "metric", where);
  int n = chart.dim();
  if (static_cast<int>(rows.size()) != n)
    throw InputError(where + ".metric: expected " + std::to_string(n) +
                     " upper-triangle rows");
  std::vector<Expr> upper;
  for (int i = 0; i < n; ++i) {
    const json& row = rows.at(i);
    if (static_cast<int>(row.size()) != n - i)
      throw InputError(where + ".metric: row " + std::to_string(i) + " must have " +
                       std::to_string(n - i) + " entries (upper triangle)");
    for (int k = 0; k < n - i; ++k)
      upper.push_back(parse_checked(row.at(k).get<std::string>(), chart.coords, constants,
                                    where + ".metric[" + std::to_string(i) + "][" +
                                        std::to_string(k) + "]"));
  }
  return MetricField(std::move(chart), std::move(upper));
}

inline VectorField load_field(const json& comps, const Chart& chart,
                              const std::map<std::string, double>& constants,
                              const std::string& where) {
  if (static_cast<int>(comps.size()) != chart.dim())
    throw InputError(where + ": expected " + std::to_string(chart.dim()) + " components");
  VectorField f;
  f.chart = chart;
  for (std::size_t i = 0; i < comps.size(); ++i)
    f.components.push_back(parse_checked(comps.at(i).get<std::string>(), chart.coords,
                                         constants, where + "[" + std::to_string(i) + "]"));
  return f;
}

}  // namespace detail_io

inline Scenario parse_scenario(const nlohmann::json& j, const std::string& source_name) {
  using detail_io::need;
  Scenario scn;
  scn.name = j.value("name", source_name);

  std::map<std::string, double> constants;
  if (j.contains("constants"))
    for (const auto& [k, v] : j.at("constants").items()) constants[k] = v.get<double>();

  Chart total_chart = detail_io::load_chart(need(j, "total", "scenario"), constants, "total");
  scn.total = detail_io::load_metric(j.at("total"), total_chart, constants, "total");

  if (j.contains("base") || j.contains("map")) {
    if (!(j.contains("base") && j.contains("map")))
      throw InputError("scenario: 'base' and 'map' must be given together");
    Chart base_chart = detail_io::load_chart(j.at("base"), constants, "base");
    scn.base = detail_io::load_metric(j.at("base"), base_chart, constants, "base");
    if (scn.d2() >= scn.d1())
      throw InputError("scenario: base dimension must be smaller than total dimension");
    const auto& map = j.at("map");
    if (static_cast<int>(map.size()) != scn.d2())
      throw InputError("map: expected " + std::to_string(scn.d2()) + " components");
    for (std::size_t a = 0; a < map.size(); ++a)
      scn.map.push_back(detail_io::parse_checked(map.at(a).get<std::string>(),
                                                 total_chart.coords, constants,
                                                 "map[" + std::to_string(a) + "]"));
  }

  if (j.contains("frames"))
    for (const auto& [name, comps] : j.at("frames").items())
      scn.frames[name] =
          detail_io::load_field(comps, scn.total.chart(), constants, "frames." + name);

  if (j.contains("clairaut")) {
    const auto& cl = j.at("clairaut");
    scn.beta = detail_io::parse_checked(need(cl, "beta", "clairaut").get<std::string>(),
                                        total_chart.coords, constants, "clairaut.beta");
    if (cl.contains("r"))
      scn.clairaut_r = detail_io::parse_checked(cl.at("r").get<std::string>(),
                                                total_chart.coords, constants, "clairaut.r");
    else
      scn.clairaut_r = detail_io::parse_checked("exp(" + scn.beta->str() + ")",
                                                total_chart.coords, constants, "clairaut.r");
  }

  if (j.contains("soliton")) {
    const auto& so = j.at("soliton");
    if (so.contains("xi"))
      scn.xi = detail_io::load_field(so.at("xi"), scn.total.chart(), constants, "soliton.xi");
    if (so.contains("mu") && !so.at("mu").is_null()) scn.mu = so.at("mu").get<double>();
  }

  const auto& samp = need(j, "sampling", "scenario");
  const auto& box = need(samp, "box", "sampling");
  if (static_cast<int>(box.size()) != scn.d1())
    throw InputError("sampling.box: expected one [lo,hi] pair per total coordinate");
  for (const auto& b : box) {
    if (b.size() != 2 || b.at(0).get<double>() >= b.at(1).get<double>())
      throw InputError("sampling.box: entries must be [lo, hi] with lo < hi");
    scn.sampling.box.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
  }
  scn.sampling.count = need(samp, "count", "sampling").get<int>();
  if (scn.sampling.count < 1) throw InputError("sampling.count must be >= 1");
  scn.sampling.seed = need(samp, "seed", "sampling").get<std::uint64_t>();

  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    scn.tol.analytic = t.value("analytic", scn.tol.analytic);
    scn.tol.fd = t.value("finite_difference", scn.tol.fd);
    scn.tol.geodesic_drift = t.value("geodesic_drift", scn.tol.geodesic_drift);
  }

  if (j.contains("paper_checks")) {
    const auto& pc = j.at("paper_checks");
    if (pc.contains("christoffel"))
      for (const auto& e : pc.at("christoffel"))
        scn.paper.christoffel.emplace_back(e.at("k").get<int>(), e.at("i").get<int>(),
                                           e.at("j").get<int>(),
                                           e.at("value").get<double>());
    scn.paper.christoffel_others_zero = pc.value("christoffel_others_zero", false);
    if (pc.contains("ricci_frame"))
      for (const auto& e : pc.at("ricci_frame")) {
        std::string a = e.at("pair").at(0).get<std::string>();
        std::string b = e.at("pair").at(1).get<std::string>();
        if (!scn.frames.count(a) || !scn.frames.count(b))
          throw InputError("paper_checks.ricci_frame: unknown frame in pair [" + a + "," +
                           b + "]");
        scn.paper.ricci_frame.emplace_back(
            a, b,
            detail_io::parse_checked(e.at("value").get<std::string>(), total_chart.coords,
                                     constants, "paper_checks.ricci_frame"));
      }
    if (pc.contains("mu_formula"))
      scn.paper.mu_formula =
          detail_io::parse_checked(pc.at("mu_formula").get<std::string>(),
                                   total_chart.coords, constants, "paper_checks.mu_formula");
    if (pc.contains("sigma_candidates"))
      for (const auto& s : pc.at("sigma_candidates"))
        scn.paper.sigma_candidates.push_back(detail_io::parse_checked(
            s.get<std::string>(), total_chart.coords, constants,
            "paper_checks.sigma_candidates"));
  }
  return scn;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("scenario '" + path + "': " + e.what());
  }
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  try {
    Scenario scn = parse_scenario(j, stem);
    scn.content_hash = fnv1a(bytes);
    return scn;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("scenario '" + path + "': " + e.what());
  }
}

}  // namespace ccs
