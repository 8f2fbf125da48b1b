#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "metrikos/metrikos.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRightCornerPlane = R"({
  "version": 1,
  "space": {"kind": "euclidean", "dim": 2},
  "coordinatizing_points": [
    {"name": "a", "at": [1, 0]},
    {"name": "b", "at": [0, 1]},
    {"name": "c", "at": [0, 0]}
  ],
  "base_point": [0, 0]
})";

struct Failure {
  int exit_code;
  std::string message;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  std::optional<double> tol;
};

[[noreturn]] void input_error(const std::string& msg) { throw Failure{2, msg}; }

void check(mk_status s) {
  if (s != MK_OK) throw Failure{mk_exit_code_for(s), mk_last_error()};
}

std::string num(double v) {
  char buf[64];
  mk_format_number(v, buf, sizeof buf);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) input_error("cannot read config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string config_text(const Globals& g) {
  if (g.config.empty()) input_error("--config is required");
  return read_file(g.config);
}

json config_json(const Globals& g) {
  const std::string text = config_text(g);
  // Let the library report schema and syntax problems with positions.
  mk_system* probe = nullptr;
  check(mk_system_from_config(text.c_str(), &probe));
  mk_system_free(probe);
  return json::parse(text);
}

mk_options options(const Globals& g) {
  mk_options o;
  mk_options_init(&o);
  if (g.seed) {
    o.has_seed = 1;
    o.seed = *g.seed;
  }
  if (g.tol) {
    o.has_tol = 1;
    o.tol = *g.tol;
  }
  o.out_dir = g.out.empty() ? nullptr : g.out.c_str();
  o.format = g.format == "json" ? MK_FORMAT_JSON : MK_FORMAT_CSV;
  return o;
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << contents;
    if (!f.flush()) throw Failure{2, "cannot write " + tmp.string()};
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Failure{2, "cannot rename into " + path.string()};
}

struct Report {
  mk_report* ptr = nullptr;
  ~Report() { mk_report_free(ptr); }
};

struct System {
  mk_system* ptr = nullptr;
  ~System() { mk_system_free(ptr); }
};

int run_document(const json& doc, const Globals& g, bool print_csv) {
  const std::string text = doc.dump();
  const mk_options o = options(g);
  Report rep;
  check(mk_scenario_run_text(text.c_str(), &o, &rep.ptr));
  if (print_csv) {
    for (std::size_t k = 0; k < mk_report_run_count(rep.ptr); ++k) std::cout << mk_report_run_csv(rep.ptr, k);
  } else {
    std::cout << mk_report_text(rep.ptr);
  }
  return mk_report_exit_code(rep.ptr);
}

// ------------------------------------------------------------------ commands

int cmd_run(const Globals& g) {
  const std::string text = config_text(g);
  const mk_options o = options(g);
  Report rep;
  check(mk_scenario_run_text(text.c_str(), &o, &rep.ptr));
  std::cout << mk_report_text(rep.ptr);
  return mk_report_exit_code(rep.ptr);
}

struct ConvertArgs {
  std::vector<double> point;
  std::vector<double> coords;
  std::vector<double> guess;
  bool hilbert = false;
};

void print_row(const std::vector<std::string>& header, const std::vector<double>& values) {
  for (std::size_t k = 0; k < header.size(); ++k) std::cout << (k ? "," : "") << header[k];
  std::cout << "\n";
  for (std::size_t k = 0; k < values.size(); ++k) std::cout << (k ? "," : "") << num(values[k]);
  std::cout << "\n";
}

int cmd_convert(const Globals& g, const ConvertArgs& a) {
  if (a.point.empty() == a.coords.empty()) input_error("give exactly one of --point or --coords");
  if (a.hilbert) {
    if (!a.point.empty()) {
      const std::size_t n = a.point.size();
      std::vector<double> c(n + 1);
      check(mk_hilbert_to_metric(a.point.data(), n, c.data()));
      std::vector<std::string> header;
      for (std::size_t k = 0; k < n; ++k) header.push_back("x_e" + std::to_string(k + 1));
      header.push_back("x_0");
      print_row(header, c);
    } else {
      if (a.coords.size() < 2) input_error("--coords needs at least 2 values");
      const std::size_t n = a.coords.size() - 1;
      std::vector<double> w(n);
      check(mk_metric_to_hilbert(a.coords.data(), n, w.data()));
      std::vector<std::string> header;
      for (std::size_t k = 0; k < n; ++k) header.push_back("w_" + std::to_string(k + 1));
      print_row(header, w);
    }
    return 0;
  }

  const std::string text = g.config.empty() ? std::string(kRightCornerPlane) : config_text(g);
  System sys;
  check(mk_system_from_config(text.c_str(), &sys.ptr));
  const std::size_t m = mk_system_size(sys.ptr), n = mk_system_point_size(sys.ptr);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < m; ++k) names.push_back(std::string("x_") + mk_system_name(sys.ptr, k));

  if (!a.point.empty()) {
    if (a.point.size() != n) input_error("--point needs " + std::to_string(n) + " values");
    std::vector<double> c(m);
    check(mk_coords_of(sys.ptr, a.point.data(), c.data()));
    print_row(names, c);
    return 0;
  }
  if (a.coords.size() != m) input_error("--coords needs " + std::to_string(m) + " values");
  int feasible = 0;
  check(mk_check_feasible(sys.ptr, a.coords.data(), g.tol.value_or(0.0), &feasible, nullptr));
  if (!feasible) input_error(std::string("infeasible coordinates: ") + mk_last_error());
  std::vector<double> guess = a.guess;
  if (guess.empty()) guess.assign(n, 0.5);
  if (guess.size() != n) input_error("--guess needs " + std::to_string(n) + " values");
  std::vector<double> p(n);
  double residual = 0.0;
  check(mk_multilaterate(sys.ptr, a.coords.data(), guess.data(), p.data(), &residual));
  std::vector<std::string> header;
  for (std::size_t k = 0; k < n; ++k) header.push_back("p_" + std::to_string(k));
  header.push_back("residual");
  p.push_back(residual);
  print_row(header, p);
  return 0;
}

struct IntegrateArgs {
  std::string run;
  std::string field;
  std::vector<double> start;
  std::optional<double> t_end;
  double step = 1e-3;
  std::string method = "rk4";
  bool recover = false;
};

int cmd_integrate(const Globals& g, const IntegrateArgs& a) {
  json doc = config_json(g);
  doc.erase("checks");
  doc.erase("loci");
  if (!a.field.empty()) {
    if (a.start.empty() || !a.t_end) input_error("--field needs --start and --t-end");
    doc["runs"] = json::array({{{"name", a.run.empty() ? "run" : a.run},
                                {"field", a.field},
                                {"start", a.start},
                                {"t_end", *a.t_end},
                                {"step", a.step},
                                {"method", a.method},
                                {"recover", a.recover}}});
  } else if (!a.run.empty()) {
    json kept = json::array();
    for (const auto& r : doc.value("runs", json::array()))
      if (r.value("name", "") == a.run) kept.push_back(r);
    if (kept.empty()) input_error("unknown run '" + a.run + "'");
    doc["runs"] = kept;
  }
  return run_document(doc, g, g.out.empty());
}

int cmd_check(const Globals& g, const std::string& name) {
  json doc = config_json(g);
  doc.erase("loci");
  if (!name.empty()) {
    json kept = json::array();
    for (const auto& c : doc.value("checks", json::array()))
      if (c.value("name", "") == name) kept.push_back(c);
    if (kept.empty()) input_error("unknown check '" + name + "'");
    doc["checks"] = kept;
  }
  // Only the runs the checks read are executed.
  std::vector<std::string> needed;
  for (const auto& c : doc.value("checks", json::array()))
    if (c.contains("run") && c["run"].is_string()) needed.push_back(c["run"]);
  json runs = json::array();
  for (const auto& r : doc.value("runs", json::array()))
    if (std::find(needed.begin(), needed.end(), r.value("name", "")) != needed.end()) runs.push_back(r);
  doc["runs"] = runs;
  return run_document(doc, g, false);
}

struct LocusArgs {
  std::string kind;
  std::string i;
  std::string j;
  double param = 0.0;
  std::size_t count = 100;
};

int cmd_locus(const Globals& g, const LocusArgs& a) {
  if (a.kind.empty()) {
    json doc = config_json(g);
    doc.erase("runs");
    doc.erase("checks");
    if (g.out.empty()) input_error("--out is required when sampling the config's loci");
    return run_document(doc, g, false);
  }
  const std::string text = config_text(g);
  System sys;
  check(mk_system_from_config(text.c_str(), &sys.ptr));
  if (a.i.empty()) input_error("--i is required");
  const std::size_t m = mk_system_size(sys.ptr), n = mk_system_point_size(sys.ptr);
  std::vector<double> pts(a.count * n);
  const std::uint64_t seed = g.seed.value_or(json::parse(text).value("seed", std::uint64_t{0}));
  check(mk_locus_sample(sys.ptr, a.kind.c_str(), a.i.c_str(), a.j.empty() ? nullptr : a.j.c_str(), a.param,
                        a.count, seed, pts.data()));
  std::string csv;
  for (std::size_t k = 0; k < n; ++k) csv += (k ? ",p_" : "p_") + std::to_string(k);
  for (std::size_t k = 0; k < m; ++k) csv += std::string(",x_") + mk_system_name(sys.ptr, k);
  csv += "\n";
  std::vector<double> c(m);
  for (std::size_t p = 0; p < a.count; ++p) {
    const double* x = pts.data() + p * n;
    check(mk_coords_of(sys.ptr, x, c.data()));
    for (std::size_t k = 0; k < n; ++k) csv += (k ? "," : "") + num(x[k]);
    for (double v : c) csv += "," + num(v);
    csv += "\n";
  }
  if (g.out.empty()) {
    std::cout << csv;
  } else {
    const fs::path path = fs::path(g.out) / ("locus_" + a.kind + ".csv");
    write_file(path, csv);
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

int cmd_demo(const Globals& g, const std::string& name, bool list) {
  if (list || name.empty()) {
    for (std::size_t k = 0; k < mk_demo_count(); ++k) std::cout << mk_demo_name(k) << "\n";
    return 0;
  }
  const mk_options o = options(g);
  Report rep;
  check(mk_demo_run(name.c_str(), &o, &rep.ptr));
  std::cout << mk_report_text(rep.ptr);
  return mk_report_exit_code(rep.ptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metrikos: distance coordinates on metric spaces"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "scenario config (JSON)");
  app.add_option("--seed", g.seed, "seed override");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--format", g.format, "trajectory export format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--tol", g.tol, "default check tolerance");

  auto* run = app.add_subcommand("run", "execute every run, check and locus of a scenario");

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert", "point to metric coordinates or back");
  convert->add_option("--point", conv.point, "ambient point")->delimiter(',');
  convert->add_option("--coords", conv.coords, "metric coordinates")->delimiter(',');
  convert->add_option("--guess", conv.guess, "initial guess for multilateration")->delimiter(',');
  convert->add_flag("--hilbert", conv.hilbert, "unit basis plus origin coordinates of R^n");

  IntegrateArgs integ;
  auto* integrate = app.add_subcommand("integrate", "one-off trajectory");
  integrate->add_option("--run", integ.run, "run to execute (default: all)");
  integrate->add_option("--field", integ.field, "field for an ad hoc run");
  integrate->add_option("--start", integ.start, "start point of the ad hoc run")->delimiter(',');
  integrate->add_option("--t-end", integ.t_end, "end time of the ad hoc run");
  integrate->add_option("--step", integ.step, "step of the ad hoc run");
  integrate->add_option("--method", integ.method, "rk4 or euler")->check(CLI::IsMember({"rk4", "euler"}));
  integrate->add_flag("--recover", integ.recover, "recover ambient points");

  std::string check_name;
  auto* checkcmd = app.add_subcommand("check", "evaluate checks");
  checkcmd->add_option("--name", check_name, "single check to evaluate");

  LocusArgs loc;
  auto* locus = app.add_subcommand("locus", "sample a locus cloud");
  locus->add_option("--kind", loc.kind, "sphere, ellipsoid, hyperboloid, cylinder, cone, plane, segment, ray, line");
  locus->add_option("--i", loc.i, "first coordinatizing point");
  locus->add_option("--j", loc.j, "second coordinatizing point");
  locus->add_option("--param", loc.param, "radius, area or angle");
  locus->add_option("--count", loc.count, "number of points");

  std::string demo_name;
  bool demo_list = false;
  auto* demo = app.add_subcommand("demo", "run a bundled example");
  demo->add_option("name", demo_name, "demo name");
  demo->add_flag("--list", demo_list, "list the demos");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return cmd_run(g);
    if (*convert) return cmd_convert(g, conv);
    if (*integrate) return cmd_integrate(g, integ);
    if (*checkcmd) return cmd_check(g, check_name);
    if (*locus) return cmd_locus(g, loc);
    if (*demo) return cmd_demo(g, demo_name, demo_list);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
