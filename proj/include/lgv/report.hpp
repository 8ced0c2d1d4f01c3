#pragma once
// Serialization of convergence reports: a flat errors.csv for plotting and
// a structured report.json that embeds the resolved configuration, RNG
// provenance, per-cell statistics and the fitted slopes.

#include "lgv/harness.hpp"
#include "lgv/types.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace lgv {

namespace detail {

/// Shortest round-trippable decimal for a double.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// JSON value for a statistic that may be absent (NaN -> null).
inline nlohmann::ordered_json json_stat(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace detail

/// errors.csv: one row per (scheme, dt) cell.  std_error is left empty when
/// it is not defined (fewer than two usable paths).
inline void write_errors_csv(std::ostream& out, const ConvergenceReport& report) {
  out << "model,scheme,dt,mean_error,std_error,n_paths_used,n_excluded\n";
  for (const SchemeResult& result : report.results) {
    for (const CellStats& cell : result.cells) {
      out << report.model_name << ',' << scheme_name(result.scheme) << ','
          << detail::format_double(cell.dt) << ',' << detail::format_double(cell.mean_error)
          << ',';
      if (!std::isnan(cell.std_error)) out << detail::format_double(cell.std_error);
      out << ',' << cell.n_used << ',' << cell.n_excluded << '\n';
    }
  }
}

inline void write_errors_csv_file(const std::string& path, const ConvergenceReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  write_errors_csv(out, report);
  if (!out) throw ConfigError("write failed: " + path);
}

/// JSON body of a report.  `config` is embedded verbatim so every artifact
/// records exactly how it was produced; pass an empty object if the caller
/// has no richer configuration to echo.
inline nlohmann::ordered_json report_to_json(const ConvergenceReport& report,
                                             nlohmann::ordered_json config = {}) {
  nlohmann::ordered_json j;
  if (config.is_null() || config.empty()) {
    config = nlohmann::ordered_json{
        {"model", report.model_name}, {"T", report.T},         {"ref_dt", report.ref_dt},
        {"n_paths", report.n_paths},  {"seed", report.seed},   {"dts", report.dts},
    };
  }
  j["config"] = std::move(config);
  j["rng"] = {{"generator", "philox4x32-10"},
              {"seed", report.seed},
              {"paths", {{"first", 0}, {"count", report.n_paths}}}};
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  for (const SchemeResult& result : report.results) {
    nlohmann::ordered_json r;
    r["scheme"] = scheme_name(result.scheme);
    nlohmann::ordered_json dts = nlohmann::ordered_json::array();
    nlohmann::ordered_json errors = nlohmann::ordered_json::array();
    nlohmann::ordered_json stderrs = nlohmann::ordered_json::array();
    nlohmann::ordered_json errors_x = nlohmann::ordered_json::array();
    nlohmann::ordered_json errors_v = nlohmann::ordered_json::array();
    nlohmann::ordered_json n_used = nlohmann::ordered_json::array();
    nlohmann::ordered_json n_excluded = nlohmann::ordered_json::array();
    nlohmann::ordered_json unreliable = nlohmann::ordered_json::array();
    nlohmann::ordered_json exclusions = nlohmann::ordered_json::array();
    for (const CellStats& cell : result.cells) {
      dts.push_back(cell.dt);
      errors.push_back(cell.mean_error);
      stderrs.push_back(detail::json_stat(cell.std_error));
      errors_x.push_back(cell.mean_error_x);
      errors_v.push_back(cell.mean_error_v);
      n_used.push_back(cell.n_used);
      n_excluded.push_back(cell.n_excluded);
      unreliable.push_back(cell.unreliable);
      nlohmann::ordered_json ex = nlohmann::ordered_json::array();
      for (const auto& [path, reason] : cell.exclusions)
        ex.push_back({{"path", path}, {"reason", reason}});
      exclusions.push_back(std::move(ex));
    }
    r["dts"] = std::move(dts);
    r["errors"] = std::move(errors);
    r["stderrs"] = std::move(stderrs);
    r["errors_x"] = std::move(errors_x);
    r["errors_v"] = std::move(errors_v);
    r["n_used"] = std::move(n_used);
    r["n_excluded"] = std::move(n_excluded);
    r["unreliable"] = std::move(unreliable);
    r["excluded_paths"] = std::move(exclusions);
    r["slope"] = detail::json_stat(result.slope);
    r["slope_stderr"] = detail::json_stat(result.slope_stderr);
    r["claimed_order"] = claimed_order(result.scheme);
    results.push_back(std::move(r));
  }
  j["results"] = std::move(results);
  return j;
}

inline void write_report_json_file(const std::string& path, const ConvergenceReport& report,
                                   nlohmann::ordered_json config = {}) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << report_to_json(report, std::move(config)).dump(2) << '\n';
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace lgv
