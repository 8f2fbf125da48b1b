#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "metrikos/scenario.hpp"

using namespace metrikos;
namespace fs = std::filesystem;

namespace {

const char* kHeader = R"({
  "version": 1,
  "seed": 11,
  "space": {"kind": "euclidean", "dim": 3, "subset": "half_space"},
  "coordinatizing_points": [
    {"name": "a", "at": [1, 0, 0]},
    {"name": "b", "at": [0, 1, 0]},
    {"name": "c", "at": [0, 0, 0]}
  ],
  "base_point": [0, 0, 1])";

std::string config(const std::string& tail) { return std::string(kHeader) + tail + "\n}\n"; }

const std::string kFlow = config(R"(,
  "fields": {"v": {"components": ["1", "-1", "0"]}},
  "runs": [{"name": "flow", "field": "v", "start": [0.3, 0.2, 0.8], "t_end": 0.5, "step": 0.01, "recover": true}],
  "checks": [
    {"name": "closed", "type": "solution", "run": "flow", "coords": ["a + t", "b - t", "c"]},
    {"name": "ell", "type": "invariance", "run": "flow", "law": {"kind": "ellipsoid", "i": "a", "j": "b"}}
  ])");

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("metrikos_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ErrorCode code_of(const std::string& text) {
  try {
    run_scenario_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("empty scenario exits zero") {
    auto r = run_scenario_text(config(""));
    CHECK(r.exit_code == 0);
    CHECK(r.runs.empty());
    CHECK(r.checks.empty());
    CHECK(r.report_json.find("\"exit_code\": 0") != std::string::npos);
  }

  TEST_CASE("flow run passes its checks") {
    auto r = run_scenario_text(kFlow);
    REQUIRE(r.runs.size() == 1);
    CHECK(r.runs[0].status == "completed");
    REQUIRE(r.checks.size() == 2);
    CHECK(r.checks[0].passed);
    CHECK(r.checks[1].passed);
    CHECK(r.exit_code == 0);
  }

  TEST_CASE("failing check exits one") {
    auto text = config(R"(,
      "fields": {"v": {"components": ["1", "-1", "0"]}},
      "runs": [{"name": "flow", "field": "v", "start": [0.3, 0.2, 0.8], "t_end": 0.5, "step": 0.01}],
      "checks": [{"type": "invariance", "run": "flow", "law": {"kind": "hyperboloid", "i": "a", "j": "b"}}])");
    auto r = run_scenario_text(text);
    CHECK(r.exit_code == 1);
    CHECK_FALSE(r.checks[0].passed);
  }

  TEST_CASE("expect false inverts the verdict") {
    auto text = config(R"(,
      "fields": {"v": {"components": ["1", "-1", "0"]}},
      "runs": [{"name": "flow", "field": "v", "start": [0.3, 0.2, 0.8], "t_end": 0.5, "step": 0.01}],
      "checks": [{"type": "invariance", "run": "flow", "expect": false,
                  "law": {"kind": "hyperboloid", "i": "a", "j": "b"}}])");
    CHECK(run_scenario_text(text).exit_code == 0);
  }

  TEST_CASE("malformed json reports line and column") {
    std::string text = "{\n  \"version\": 1,\n  \"space\": ]\n}";
    try {
      run_scenario_text(text);
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse_error);
      const std::string msg = e.what();
      CHECK(msg.find("line 3") != std::string::npos);
      CHECK(msg.find("column") != std::string::npos);
    }
  }

  TEST_CASE("schema errors") {
    CHECK(code_of(R"({"version": 2})") == ErrorCode::invalid_input);
    CHECK(code_of(config(R"(, "runs": [{"field": "nope", "start": [0.3, 0.2, 0.8], "t_end": 1}])")) ==
          ErrorCode::invalid_input);
    CHECK(code_of(config(R"(, "checks": [{"type": "bogus"}])")) == ErrorCode::invalid_input);
    CHECK(code_of(config(R"(, "checks": [{"type": "feasibility", "run": "missing"}])")) ==
          ErrorCode::invalid_input);
    CHECK(code_of(config(R"(, "fields": {"v": {"components": ["1", "-1"]}})")) == ErrorCode::invalid_input);
    CHECK(code_of(config(R"(, "fields": {"v": {"components": ["1 +", "0", "0"]}})")) ==
          ErrorCode::parse_error);
    CHECK(code_of(config(R"(, "fields": {"v": {"components": ["q", "0", "0"]}})")) == ErrorCode::parse_error);
  }

  TEST_CASE("ellipsoid with parameter below focal distance is empty") {
    auto text = config(R"(, "loci": [{"name": "e", "kind": "ellipsoid", "i": "a", "j": "b", "param": 1.0}])");
    try {
      run_scenario_text(text);
      FAIL("expected empty locus");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::empty_locus);
      CHECK(exit_code_for(e.code()) == 2);
    }
  }

  TEST_CASE("runtime failure exits three and keeps the partial trajectory") {
    auto text = config(R"j(,
      "fields": {"v": {"components": ["1 / sqrt(1.3 - a)", "0", "0"]}},
      "runs": [{"name": "flow", "field": "v", "start": [0.3, 0.2, 0.8], "t_end": 1, "step": 0.01}])j");
    auto r = run_scenario_text(text);
    CHECK(r.exit_code == 3);
    CHECK(r.runs[0].status == "error");
    CHECK(r.runs[0].trajectory.size() > 1);
  }

  TEST_CASE("csv export is deterministic") {
    auto d1 = scratch("csv1");
    auto d2 = scratch("csv2");
    ScenarioOptions o1;
    o1.out_dir = d1.string();
    o1.threads = 1;
    ScenarioOptions o2;
    o2.out_dir = d2.string();
    o2.threads = 4;
    run_scenario_text(kFlow, o1);
    run_scenario_text(kFlow, o2);
    const auto csv = slurp(d1 / "flow.csv");
    CHECK(csv == slurp(d2 / "flow.csv"));
    CHECK(slurp(d1 / "report.json") == slurp(d2 / "report.json"));
    CHECK(csv.rfind("t,x_a,x_b,x_c,p_0,p_1,p_2,status\n", 0) == 0);
    CHECK(csv.find(",completed\n") != std::string::npos);
    std::istringstream lines(csv);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 52);
    fs::remove_all(d1);
    fs::remove_all(d2);
  }

  TEST_CASE("json export") {
    auto dir = scratch("json");
    ScenarioOptions o;
    o.out_dir = dir.string();
    o.format = ExportFormat::json;
    auto r = run_scenario_text(kFlow, o);
    CHECK(fs::exists(dir / "flow.json"));
    CHECK_FALSE(fs::exists(dir / "flow.csv"));
    CHECK(slurp(dir / "flow.json").find("\"rows\"") != std::string::npos);
    CHECK(r.files.size() == 2);
    fs::remove_all(dir);
  }

  TEST_CASE("seed override changes sampled checks only through the seed") {
    auto text = config(R"(, "checks": [{"type": "feasibility", "samples": 50}])");
    ScenarioOptions o;
    o.seed = 99;
    auto a = run_scenario_text(text, o);
    auto b = run_scenario_text(text, o);
    CHECK(a.report_json == b.report_json);
    CHECK(a.report_json.find("\"seed\": 99") != std::string::npos);
  }

  TEST_CASE("atomic write replaces contents and leaves no temporary") {
    auto dir = scratch("atomic");
    auto path = dir / "sub" / "f.txt";
    write_atomic(path.string(), "first");
    write_atomic(path.string(), "second");
    CHECK(slurp(path) == "second");
    std::size_t entries = 0;
    for ([[maybe_unused]] auto& e : fs::directory_iterator(dir / "sub")) ++entries;
    CHECK(entries == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("format_number round trips") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(2.0) == "2");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  }

  TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(ErrorCode::invalid_input) == 2);
    CHECK(exit_code_for(ErrorCode::io_error) == 2);
    CHECK(exit_code_for(ErrorCode::no_convergence) == 3);
    CHECK(exit_code_for(ErrorCode::evaluation_failure) == 3);
  }
}
