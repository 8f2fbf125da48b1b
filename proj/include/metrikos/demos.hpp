#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metrikos/scenario.hpp"

namespace metrikos {

struct DemoLine {
  std::string label;
  bool passed = false;
  std::string detail;
};

struct DemoReport {
  std::string name;
  std::vector<DemoLine> lines;
  int exit_code = 0;  // 0 all pass, 1 some line failed, 3 runtime error

  bool passed() const noexcept { return exit_code == 0; }
};

struct BundledScenario {
  std::string stem;
  std::string text;
};

const std::vector<std::string>& demo_names();
const std::vector<BundledScenario>& bundled_scenarios();
std::optional<std::string> bundled_scenario(std::string_view stem);

/// Throws Error(invalid_input) listing the available demos for unknown names.
/// With opts.out_dir set, scenario outputs go to <out_dir>/<scenario stem>/.
DemoReport run_demo(std::string_view name, const ScenarioOptions& opts = {});

/// "PASS <demo>/<label>  <detail>" per line plus a summary line.
std::string format_demo(const DemoReport& report);

}  // namespace metrikos
