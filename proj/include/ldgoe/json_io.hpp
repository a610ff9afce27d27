#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ldgoe/atomic_measure.hpp"
#include "ldgoe/errors.hpp"
#include "ldgoe/rmt_lab.hpp"

namespace ldgoe {

// Measure schema:
//   {"atoms": [[location, weight], ...]}
//   {"quantile": {"uniform": [a, b]}}
//   {"quantile": {"table": [[u, value], ...]}}
// plus optional {"eps": e, "side": "lower"|"upper"} to discretize on load
// (required for quantile inputs).
inline AtomicMeasure measure_from_json(const nlohmann::json& j) {
  bool has_eps = j.contains("eps");
  GridSide side = GridSide::lower;
  double eps = 0.0;
  if (has_eps) {
    eps = j.at("eps").get<double>();
    std::string s = j.value("side", "lower");
    if (s == "lower")
      side = GridSide::lower;
    else if (s == "upper")
      side = GridSide::upper;
    else
      throw Error("measure: side must be \"lower\" or \"upper\"");
  }
  if (j.contains("atoms")) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& row : j.at("atoms"))
      pairs.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    AtomicMeasure m = AtomicMeasure::from_pairs(pairs);
    if (!has_eps) return m;
    return discretize(QuantileSpec::of_measure(m), support_edge(m), eps, side);
  }
  if (j.contains("quantile")) {
    const auto& q = j.at("quantile");
    if (!has_eps)
      throw Error("measure: quantile input requires \"eps\" to discretize");
    if (q.contains("uniform")) {
      double a = q.at("uniform").at(0).get<double>();
      double b = q.at("uniform").at(1).get<double>();
      auto spec = QuantileSpec::uniform(a, b);
      return discretize(spec, a, eps, side);
    }
    if (q.contains("table")) {
      std::vector<std::pair<double, double>> knots;
      for (const auto& row : q.at("table"))
        knots.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
      auto spec = QuantileSpec::table(std::move(knots));
      return discretize(spec, spec.min_value(), eps, side);
    }
    throw Error("measure: quantile must hold \"uniform\" or \"table\"");
  }
  throw Error("measure: expected \"atoms\" or \"quantile\"");
}

inline AtomicMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open measure file: " + path);
  nlohmann::json j;
  in >> j;
  return measure_from_json(j);
}

inline nlohmann::json measure_to_json(const AtomicMeasure& m) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : m.atoms())
    atoms.push_back(nlohmann::json::array({a.location, a.weight}));
  return nlohmann::json{{"atoms", atoms}};
}

inline nlohmann::json report_to_json(const McReport& r) {
  nlohmann::json j{{"n_samples", r.n_samples},
                   {"n_hits", r.n_hits},
                   {"estimate", r.estimate},
                   {"std_error", r.std_error},
                   {"empirical_rate", r.empirical_rate},
                   {"zero_hits", r.zero_hits},
                   {"seed", r.seed},
                   {"N", r.N},
                   {"window", r.window}};
  if (!r.component_estimates.empty()) {
    j["component_estimates"] = r.component_estimates;
    j["component_targets"] = r.component_targets;
    j["component_std_errors"] = r.component_std_errors;
    j["diagnostic"] = r.diagnostic;
  }
  return j;
}

}  // namespace ldgoe
