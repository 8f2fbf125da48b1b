#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metrikos/error.hpp"
#include "metrikos/fields.hpp"

namespace metrikos {

enum class ExportFormat { csv, json };

struct ScenarioOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  std::optional<double> tol;          // default tolerance for checks without one
  std::string out_dir;                // no files are written when empty
  ExportFormat format = ExportFormat::csv;
  unsigned threads = 0;               // 0: METRIKOS_THREADS or hardware concurrency
};

struct RunOutcome {
  std::string name;
  std::string status;  // completed | stopped_infeasible | stopped_domain | error
  std::string error;
  Trajectory trajectory;
};

struct CheckOutcome {
  std::string name;
  std::string type;
  bool passed = false;
  std::string detail;
};

struct ScenarioResult {
  int exit_code = 0;  // 0 success, 1 check failure, 3 runtime error
  std::vector<RunOutcome> runs;
  std::vector<CheckOutcome> checks;
  std::vector<std::string> coordinates;  // names of the coordinatizing points
  std::vector<std::string> files;
  std::string report_json;
};

/// Executes a scenario given as JSON text. Schema and parameter errors throw
/// Error before any computation.
ScenarioResult run_scenario_text(const std::string& text, const ScenarioOptions& opts = {});
ScenarioResult run_scenario_file(const std::string& path, const ScenarioOptions& opts = {});

/// Coordinate system of a scenario (space, coordinatizing points, base point).
/// The whole config is validated.
CoordinateSystem load_system(const std::string& text);

/// Trajectory table: t, x_<name>..., p_<i>... when recovered, status.
std::string trajectory_csv(const std::vector<std::string>& names, const RunOutcome& run);

/// One line per run and check: "PASS|FAIL <kind> <name>  <detail>".
std::string summarize(const ScenarioResult& result);

/// 2 for input errors (schema, parse, parameter validation, I/O), 3 otherwise.
int exit_code_for(ErrorCode code) noexcept;

/// Shortest text of `v` with 17 significant digits, locale independent.
std::string format_number(double v);

/// Writes `contents` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& contents);

}  // namespace metrikos
