#pragma once

#include <string>

#include <json.hpp>

#include "radauhp/driver.hpp"

namespace radauhp {

/// Self-contained record of one run: the problem, the configuration that
/// produced it and the full history.  Reproducible from the config echo.
struct RunRecord {
  std::string problem;
  RunConfig config;
  unsigned seed = 0;
  RunHistory history;
};

nlohmann::json record_to_json(const RunRecord& record);

/// Writes the record as a structured text document.  Numbers round-trip
/// bit-exactly through the shortest-representation encoding.
void write_record(const RunRecord& record, const std::string& path);

nlohmann::json read_json(const std::string& path);

/// One CSV row per interval per iteration:
/// iteration,interval_index,T_left,T_right,degree,segment_kind,e_max
void write_history_csv(const RunHistory& history, const std::string& path);

/// Plot-ready series: control_<i>.csv (tau,value over the final collocation
/// grid), states_<i>.csv, and mesh_history.csv (iteration,tau scatter of
/// mesh point locations).
void write_plot_data(const RunHistory& history, const std::string& dir);

}  // namespace radauhp
