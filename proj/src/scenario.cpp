#include "metrikos/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "json.hpp"
#include "metrikos/calculus.hpp"
#include "metrikos/expr.hpp"
#include "metrikos/invariance.hpp"
#include "metrikos/loci.hpp"

namespace metrikos {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::invalid_input, "config " + where + ": " + what);
}

[[noreturn]] void rethrow_parse(const std::string& where, const std::string& text,
                               const ParseError& pe) {
  fail(ErrorCode::parse_error, "config " + where + ": '" + text + "': " + pe.what());
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, "missing '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) schema_error(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_vector(const json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k)
    out.push_back(as_number(v[k], where + "/" + std::to_string(k)));
  return out;
}

std::size_t as_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    schema_error(where, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& where) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, where + "/" + key);
}

bool bool_or(const json& obj, const std::string& key, bool fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) schema_error(where + "/" + key, "expected true or false");
  return it->get<bool>();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Space parse_space(const json& j) {
  const std::string where = "/space";
  const std::string kind_name = as_string(require(j, "kind", where), where + "/kind");
  auto kind = space_kind_from_string(kind_name);
  if (!kind) schema_error(where + "/kind", "unknown space '" + kind_name + "'");

  Subset subset;
  if (auto it = j.find("subset"); it != j.end()) {
    const json& s = *it;
    const std::string sw = where + "/subset";
    const std::string name = s.is_string() ? s.get<std::string>()
                                           : as_string(require(s, "kind", sw), sw + "/kind");
    auto sk = subset_kind_from_string(name);
    if (!sk) schema_error(sw, "unknown subset '" + name + "'");
    subset.kind = *sk;
    if (*sk == SubsetKind::custom_half_space) {
      subset.normal = as_vector(require(s, "normal", sw), sw + "/normal");
      subset.offset = number_or(s, "offset", 0.0, sw);
    }
  }

  switch (*kind) {
    case SpaceKind::euclidean:
      return Space::euclidean(as_count(require(j, "dim", where), where + "/dim"), subset);
    case SpaceKind::sup_plane: return Space::sup_plane(subset);
    case SpaceKind::discrete:
      return Space::discrete(as_count(require(j, "count", where), where + "/count"));
    case SpaceKind::sphere: return Space::sphere();
    case SpaceKind::grid_function:
      if (j.contains("grid")) return Space::grid_function(as_vector(j["grid"], where + "/grid"));
      return Space::grid_function(as_number(require(j, "lo", where), where + "/lo"),
                                  as_number(require(j, "hi", where), where + "/hi"),
                                  as_count(require(j, "cells", where), where + "/cells"));
  }
  schema_error(where, "unsupported space");
}

struct FieldSpec {
  CoordField field;
  bool sphere_realized = false;
};

struct RunSpec {
  std::string name;
  std::string field;
  std::optional<SpacePoint> start;
  std::optional<MetricCoords> start_coords;
  double t_end = 0.0;
  double step = 1e-3;
  Method method = Method::rk4;
  bool recover = false;
};

struct LocusSpec {
  std::string name;
  Locus locus;
  std::size_t count = 0;
  bool members_only = false;
};

struct Scenario {
  std::uint64_t seed = 0;
  double tol = 1e-6;
  std::optional<CoordinateSystem> system;
  std::map<std::string, FieldSpec> fields;
  std::vector<RunSpec> runs;
  json checks = json::array();
  std::vector<LocusSpec> loci;
};

std::size_t point_index(const CoordinateSystem& sys, const json& v, const std::string& where) {
  if (v.is_number_integer()) {
    const auto k = v.get<long long>();
    if (k < 0 || static_cast<std::size_t>(k) >= sys.size()) schema_error(where, "index out of range");
    return static_cast<std::size_t>(k);
  }
  const std::string name = as_string(v, where);
  auto idx = sys.index_of(name);
  if (!idx) schema_error(where, "unknown coordinatizing point '" + name + "'");
  return *idx;
}

std::vector<std::string> expression_variables(const CoordinateSystem& sys) { return sys.names(); }

CoordField::Component compile(const std::string& text, const std::vector<std::string>& vars,
                              const std::string& where) {
  try {
    auto e = Expression::parse(text, vars);
    return [e = std::move(e)](std::span<const double> x) { return e(x); };
  } catch (const ParseError& pe) {
    rethrow_parse(where, text, pe);
  }
}

FieldSpec parse_field(const json& j, const CoordinateSystem& sys, const std::string& name,
                      const std::string& where) {
  FieldSpec spec;
  spec.field.label = name;
  const auto vars = expression_variables(sys);
  if (auto it = j.find("sphere_realized"); it != j.end()) {
    if (sys.space().kind != SpaceKind::sphere)
      schema_error(where, "sphere_realized fields need the sphere_geodesic space");
    const std::string sw = where + "/sphere_realized";
    spec.sphere_realized = true;
    spec.field.components.push_back(compile(as_string(require(*it, "f", sw), sw + "/f"), vars, sw + "/f"));
    spec.field.components.push_back(compile(as_string(require(*it, "g", sw), sw + "/g"), vars, sw + "/g"));
    for (std::size_t k = 2; k < sys.size(); ++k)
      spec.field.components.push_back([](std::span<const double>) { return 0.0; });
    return spec;
  }
  const json& comps = require(j, "components", where);
  if (!comps.is_array() || comps.size() != sys.size())
    schema_error(where + "/components", "expected " + std::to_string(sys.size()) + " expressions");
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const std::string cw = where + "/components/" + std::to_string(k);
    if (comps[k].is_number()) {
      const double v = comps[k].get<double>();
      spec.field.components.push_back([v](std::span<const double>) { return v; });
    } else {
      spec.field.components.push_back(compile(as_string(comps[k], cw), vars, cw));
    }
  }
  return spec;
}

Method parse_method(const std::string& s, const std::string& where) {
  if (s == "rk4") return Method::rk4;
  if (s == "euler") return Method::euler;
  schema_error(where, "method must be rk4 or euler");
}

Scenario parse_scenario(const std::string& text, const ScenarioOptions& opts) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse_error, "config is not valid JSON (" + line_col(text, e.byte) + ")");
  }
  if (!root.is_object()) schema_error("/", "expected an object");
  const json& version = require(root, "version", "");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion)
    schema_error("/version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");

  Scenario sc;
  if (auto it = root.find("seed"); it != root.end()) sc.seed = as_count(*it, "/seed");
  if (opts.seed) sc.seed = *opts.seed;
  sc.tol = number_or(root, "tol", sc.tol, "");
  if (opts.tol) sc.tol = *opts.tol;

  Space space = parse_space(require(root, "space", ""));
  const json& cps = require(root, "coordinatizing_points", "");
  if (!cps.is_array()) schema_error("/coordinatizing_points", "expected an array");
  std::vector<SpacePoint> points;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < cps.size(); ++k) {
    const std::string where = "/coordinatizing_points/" + std::to_string(k);
    if (cps[k].is_object()) {
      names.push_back(as_string(require(cps[k], "name", where), where + "/name"));
      points.emplace_back(as_vector(require(cps[k], "at", where), where + "/at"));
    } else {
      points.emplace_back(as_vector(cps[k], where));
    }
  }
  if (!names.empty() && names.size() != points.size())
    schema_error("/coordinatizing_points", "name all points or none");
  SpacePoint base(as_vector(require(root, "base_point", ""), "/base_point"));
  try {
    sc.system.emplace(space, points, base, names);
  } catch (const Error& e) {
    schema_error("/coordinatizing_points", e.what());
  }
  const auto& sys = *sc.system;

  if (auto it = root.find("fields"); it != root.end()) {
    if (!it->is_object()) schema_error("/fields", "expected an object of named fields");
    for (const auto& [name, spec] : it->items())
      sc.fields.emplace(name, parse_field(spec, sys, name, "/fields/" + name));
  }

  if (auto it = root.find("runs"); it != root.end()) {
    if (!it->is_array()) schema_error("/runs", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const json& r = (*it)[k];
      const std::string where = "/runs/" + std::to_string(k);
      RunSpec run;
      run.name = r.contains("name") ? as_string(r["name"], where + "/name") : "run" + std::to_string(k);
      for (const auto& other : sc.runs)
        if (other.name == run.name) schema_error(where + "/name", "duplicate run name");
      run.field = as_string(require(r, "field", where), where + "/field");
      auto f = sc.fields.find(run.field);
      if (f == sc.fields.end()) schema_error(where + "/field", "unknown field '" + run.field + "'");
      if (r.contains("start")) {
        run.start = SpacePoint(as_vector(r["start"], where + "/start"));
        try {
          validate_point(space, *run.start);
        } catch (const Error& e) {
          schema_error(where + "/start", e.what());
        }
      } else if (r.contains("start_coords")) {
        run.start_coords = MetricCoords(as_vector(r["start_coords"], where + "/start_coords"));
        if (run.start_coords->size() != sys.size())
          schema_error(where + "/start_coords", "length does not match the coordinatizing points");
      } else {
        schema_error(where, "missing 'start' or 'start_coords'");
      }
      run.t_end = as_number(require(r, "t_end", where), where + "/t_end");
      run.step = number_or(r, "step", run.step, where);
      if (!(run.step > 0) || !(run.t_end >= 0)) schema_error(where, "need step > 0 and t_end >= 0");
      if (r.contains("method")) run.method = parse_method(as_string(r["method"], where), where + "/method");
      run.recover = bool_or(r, "recover", false, where);
      if (f->second.sphere_realized && !run.start)
        schema_error(where, "sphere_realized runs need an ambient 'start'");
      if (run.recover && !run.start) schema_error(where, "point recovery needs an ambient 'start'");
      sc.runs.push_back(std::move(run));
    }
  }

  if (auto it = root.find("checks"); it != root.end()) {
    if (!it->is_array()) schema_error("/checks", "expected an array");
    sc.checks = *it;
  }

  if (auto it = root.find("loci"); it != root.end()) {
    if (!it->is_array()) schema_error("/loci", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const json& l = (*it)[k];
      const std::string where = "/loci/" + std::to_string(k);
      LocusSpec spec;
      spec.name = l.contains("name") ? as_string(l["name"], where + "/name") : "locus" + std::to_string(k);
      const std::string kind = as_string(require(l, "kind", where), where + "/kind");
      auto lk = locus_kind_from_string(kind);
      if (!lk) schema_error(where + "/kind", "unknown locus '" + kind + "'");
      spec.locus.kind = *lk;
      spec.locus.i = point_index(sys, require(l, "i", where), where + "/i");
      spec.locus.j = l.contains("j") ? point_index(sys, l["j"], where + "/j") : spec.locus.i;
      spec.locus.param = number_or(l, "param", 0.0, where);
      spec.count = l.contains("count") ? as_count(l["count"], where + "/count") : 100;
      spec.members_only = bool_or(l, "members_only", false, where);
      try {
        validate_locus(spec.locus, sys);
      } catch (const Error& e) {
        throw Error(e.code(), "config " + where + ": " + e.what());
      }
      sc.loci.push_back(spec);
    }
  }
  return sc;
}

// ---------------------------------------------------------------- execution

RunOutcome execute_run(const Scenario& sc, const RunSpec& run) {
  const auto& sys = *sc.system;
  const FieldSpec& spec = sc.fields.at(run.field);
  RunOutcome out;
  out.name = run.name;
  try {
    if (spec.sphere_realized) {
      out.trajectory = integrate_sphere_flow(spec.field, sys, *run.start, run.t_end, run.step);
    } else if (run.recover) {
      out.trajectory = integrate_points(spec.field, sys, *run.start, run.t_end, run.step, {}, run.method);
    } else if (run.start) {
      out.trajectory = integrate_coords(spec.field, sys, *run.start, run.t_end, run.step, run.method);
    } else {
      out.trajectory = integrate_coords(spec.field, sys, *run.start_coords, run.t_end, run.step, run.method);
    }
    out.status = to_string(out.trajectory.status);
  } catch (const IntegrationError& e) {
    out.trajectory = e.partial();
    out.status = "error";
    out.error = e.what();
  } catch (const std::exception& e) {
    out.status = "error";
    out.error = e.what();
  }
  return out;
}

unsigned worker_count(const ScenarioOptions& opts) {
  if (opts.threads > 0) return opts.threads;
  if (const char* env = std::getenv("METRIKOS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RunOutcome> execute_runs(const Scenario& sc, unsigned workers) {
  std::vector<RunOutcome> results(sc.runs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < sc.runs.size(); k = next++) results[k] = execute_run(sc, sc.runs[k]);
  };
  const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(sc.runs.size()));
  if (n <= 1) {
    work();
    return results;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return results;
}

struct CheckContext {
  const Scenario& sc;
  const std::vector<RunOutcome>& runs;
};

const RunOutcome& find_run(const CheckContext& ctx, const json& c, const std::string& where) {
  const std::string name = as_string(require(c, "run", where), where + "/run");
  for (std::size_t k = 0; k < ctx.runs.size(); ++k)
    if (ctx.sc.runs[k].name == name) return ctx.runs[k];
  schema_error(where + "/run", "unknown run '" + name + "'");
}

const FieldSpec& find_field(const CheckContext& ctx, const json& c, const std::string& where) {
  const std::string name = as_string(require(c, "field", where), where + "/field");
  auto it = ctx.sc.fields.find(name);
  if (it == ctx.sc.fields.end()) schema_error(where + "/field", "unknown field '" + name + "'");
  return it->second;
}

ConservationLaw parse_law(const CoordinateSystem& sys, const json& j, const std::string& where) {
  const std::string kind = as_string(require(j, "kind", where), where + "/kind");
  ConservationLaw law;
  if (kind == "sphere") law.kind = LawKind::sphere;
  else if (kind == "ellipsoid") law.kind = LawKind::ellipsoid;
  else if (kind == "hyperboloid") law.kind = LawKind::hyperboloid;
  else schema_error(where + "/kind", "law must be sphere, ellipsoid or hyperboloid");
  law.i = point_index(sys, require(j, "i", where), where + "/i");
  law.j = law.kind == LawKind::sphere ? law.i : point_index(sys, require(j, "j", where), where + "/j");
  if (law.kind != LawKind::sphere && law.i == law.j) schema_error(where, "law needs two distinct points");
  return law;
}

std::vector<SpacePoint> parse_points(const json& arr, const std::string& where) {
  if (!arr.is_array()) schema_error(where, "expected an array of points");
  std::vector<SpacePoint> out;
  for (std::size_t k = 0; k < arr.size(); ++k)
    out.emplace_back(as_vector(arr[k], where + "/" + std::to_string(k)));
  return out;
}

// Points p(n) for n in [from, to], components given as expressions of n.
std::vector<SpacePoint> expand_sequence(const json& j, const std::string& where) {
  const auto from = as_count(require(j, "from", where), where + "/from");
  const auto to = as_count(require(j, "to", where), where + "/to");
  const json& comps = require(j, "point", where);
  if (!comps.is_array() || comps.empty()) schema_error(where + "/point", "expected expressions");
  std::vector<Expression> exprs;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const std::string cw = where + "/point/" + std::to_string(k);
    const std::string text = as_string(comps[k], cw);
    try {
      exprs.push_back(Expression::parse(text, {"n"}));
    } catch (const ParseError& pe) {
      rethrow_parse(cw, text, pe);
    }
  }
  std::vector<SpacePoint> out;
  for (std::size_t n = from; n <= to; ++n) {
    const double v[1] = {static_cast<double>(n)};
    std::vector<double> p;
    for (const auto& e : exprs) p.push_back(e(v));
    out.emplace_back(std::move(p));
  }
  return out;
}

double check_tol(const CheckContext& ctx, const json& c, const std::string& where) {
  return number_or(c, "tol", ctx.sc.tol, where);
}

// Each evaluator fills `holds` and metrics; the check passes when holds == expect.
using Metrics = json;

bool check_feasibility(const CheckContext& ctx, const json& c, const std::string& where, Metrics& m,
                       std::uint64_t seed) {
  const auto& sys = *ctx.sc.system;
  const double tol = number_or(c, "tol", 0.0, where);
  std::vector<MetricCoords> tuples;
  if (c.contains("run")) {
    tuples = find_run(ctx, c, where).trajectory.coords;
  } else if (c.contains("coords")) {
    for (const auto& p : parse_points(c["coords"], where + "/coords")) {
      if (p.size() != sys.size()) schema_error(where + "/coords", "tuple length does not match C");
      tuples.emplace_back(p.values);
    }
  } else {
    const std::size_t n = c.contains("samples") ? as_count(c["samples"], where + "/samples") : 1000;
    for (const auto& p : sample_points(sys, n, seed)) tuples.push_back(coords_of(sys, p));
  }
  std::size_t bad = 0;
  json violations = json::array();
  for (std::size_t k = 0; k < tuples.size(); ++k) {
    auto rep = check_feasible(sys, tuples[k], tol);
    if (rep.feasible()) continue;
    ++bad;
    if (violations.size() < 10) {
      for (const auto& v : rep.violations) {
        violations.push_back({{"tuple", k},
                              {"first", sys.names()[v.first]},
                              {"second", sys.names()[v.second]},
                              {"inequality", to_string(v.inequality)},
                              {"slack", v.slack}});
      }
    }
  }
  m["tuples"] = tuples.size();
  m["infeasible"] = bad;
  m["violations"] = violations;
  return bad == 0;
}

bool check_invariance(const CheckContext& ctx, const json& c, const std::string& where, Metrics& m) {
  const auto& sys = *ctx.sc.system;
  const RunOutcome& run = find_run(ctx, c, where);
  if (run.trajectory.size() == 0) schema_error(where, "run produced no states");
  const auto law = parse_law(sys, require(c, "law", where), where + "/law");
  const double value = c.contains("value") ? as_number(c["value"], where + "/value")
                                           : law.quantity(run.trajectory.coords.front().values);
  const double tol = check_tol(ctx, c, where);
  auto res = invariance_test(run.trajectory, CoordSet::level_set(law, value), tol);
  m["law"] = law.describe(sys.names());
  m["value"] = value;
  m["max_distance"] = res.max_distance;
  m["tol"] = tol;
  if (res.first_exit) m["first_exit"] = *res.first_exit;
  return res.invariant;
}

bool check_nagumo(const CheckContext& ctx, const json& c, const std::string& where, Metrics& m) {
  const auto& sys = *ctx.sc.system;
  const FieldSpec& spec = find_field(ctx, c, where);
  if (spec.sphere_realized) schema_error(where, "nagumo checks need a component field");
  const auto law = parse_law(sys, require(c, "law", where), where + "/law");
  std::vector<std::vector<double>> samples;
  if (c.contains("run")) {
    const auto& traj = find_run(ctx, c, where).trajectory;
    const std::size_t want = c.contains("samples") ? as_count(c["samples"], where + "/samples") : 20;
    const std::size_t stride = std::max<std::size_t>(1, traj.size() / std::max<std::size_t>(1, want));
    for (std::size_t k = 0; k < traj.size(); k += stride) samples.push_back(traj.coords[k].values);
  } else {
    for (const auto& p : parse_points(require(c, "points", where), where + "/points")) {
      if (p.size() != sys.size()) schema_error(where + "/points", "tuple length does not match C");
      samples.push_back(p.values);
    }
  }
  if (samples.empty()) schema_error(where, "no sample points");
  const double value = c.contains("value") ? as_number(c["value"], where + "/value")
                                           : law.quantity(samples.front());
  const double K = number_or(c, "K", 0.0, where);
  const double tol = number_or(c, "tol", 0.05, where);
  std::vector<double> h_seq;
  if (c.contains("h_seq")) h_seq = as_vector(c["h_seq"], where + "/h_seq");
  const CoordField& field = spec.field;
  VectorFunction vf = [&field](const EmbeddedPoint& w) { return eval_velocity(field, w.values); };
  auto rep = nagumo_check(vf, CoordSet::level_set(law, value), samples, h_seq, K, tol);
  m["law"] = law.describe(sys.names());
  m["samples"] = samples.size();
  m["max_limsup"] = rep.max_limsup;
  m["violations"] = rep.violations.size();
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& s : rep.samples) min_margin = std::min(min_margin, s.margin);
  m["min_margin"] = min_margin;
  return rep.passed();
}

bool check_lipschitz(const CheckContext& ctx, const json& c, const std::string& where, Metrics& m,
                     std::uint64_t seed) {
  const auto& sys = *ctx.sc.system;
  const FieldSpec& spec = find_field(ctx, c, where);
  const std::size_t n = c.contains("samples") ? as_count(c["samples"], where + "/samples") : 200;
  const double inflate = number_or(c, "inflate", 1.0, where);
  auto pts = sample_points(sys, n, seed, inflate, bool_or(c, "members_only", true, where));
  auto est = lipschitz_estimate(spec.field, sys, pts);
  m["estimate"] = est.value;
  m["samples"] = pts.size();
  bool ok = true;
  if (c.contains("max")) {
    const double bound = as_number(c["max"], where + "/max");
    m["max"] = bound;
    ok = ok && est.value <= bound;
  }
  if (c.contains("min")) {
    const double bound = as_number(c["min"], where + "/min");
    m["min"] = bound;
    ok = ok && est.value >= bound;
  }
  return ok;
}

bool check_convergence(const CheckContext& ctx, const json& c, const std::string& where, Metrics& m) {
  const auto& sys = *ctx.sc.system;
  std::vector<SpacePoint> seq = c.contains("sequence")
                                    ? (c["sequence"].is_object()
                                           ? expand_sequence(c["sequence"], where + "/sequence")
                                           : parse_points(c["sequence"], where + "/sequence"))
                                    : (schema_error(where, "missing 'sequence'"), std::vector<SpacePoint>{});
  if (seq.empty()) schema_error(where + "/sequence", "sequence is empty");
  SpacePoint limit(as_vector(require(c, "limit", where), where + "/limit"));
  const double tol = number_or(c, "tol", 1e-2, where);
  auto rep = compare_convergence(sys, seq, limit);
  const bool dc = rep.dC_gaps.back() <= tol, d = rep.d_gaps.back() <= tol;
  m["final_dC_gap"] = rep.dC_gaps.back();
  m["final_d_gap"] = rep.d_gaps.back();
  m["dC_converges"] = dc;
  m["d_converges"] = d;
  m["terms"] = seq.size();
  return dc == bool_or(c, "dC_converges", true, where) && d == bool_or(c, "d_converges", true, where);
}

bool check_coordinatizing(const CheckContext& ctx, const json& c, const std::string& where,
                          Metrics& m, std::uint64_t seed) {
  const auto& sys = *ctx.sc.system;
  std::vector<SpacePoint> samples;
  if (c.contains("points")) samples = parse_points(c["points"], where + "/points");
  if (c.contains("random")) {
    auto extra = sample_points(sys, as_count(c["random"], where + "/random"), seed);
    samples.insert(samples.end(), extra.begin(), extra.end());
  }
  if (samples.size() < 2) schema_error(where, "need at least two sample points");
  const double tol = number_or(c, "tol", 1e-9, where);
  auto w = verify_coordinatizing(sys, samples, tol);
  m["samples"] = samples.size();
  m["witnesses"] = w.size();
  if (!w.empty()) {
    m["first_witness"] = {{"x", samples[w[0].first].values},
                          {"y", samples[w[0].second].values},
                          {"d", w[0].d},
                          {"dC", w[0].dC}};
  }
  return w.empty();
}

bool check_solution(const CheckContext& ctx, const json& c, const std::string& where, Metrics& m) {
  const auto& sys = *ctx.sc.system;
  const RunOutcome& run = find_run(ctx, c, where);
  const json& exprs = require(c, "coords", where);
  if (!exprs.is_array() || exprs.size() != sys.size())
    schema_error(where + "/coords", "expected one expression per coordinatizing point");
  auto vars = sys.names();
  vars.push_back("t");
  std::vector<Expression> sol;
  for (std::size_t k = 0; k < exprs.size(); ++k) {
    const std::string cw = where + "/coords/" + std::to_string(k);
    const std::string text = as_string(exprs[k], cw);
    try {
      sol.push_back(Expression::parse(text, vars));
    } catch (const ParseError& pe) {
      rethrow_parse(cw, text, pe);
    }
  }
  const auto& traj = run.trajectory;
  if (traj.size() == 0) schema_error(where, "run produced no states");
  std::vector<double> env = traj.coords.front().values;
  env.push_back(0.0);
  double err = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    env.back() = traj.times[k];
    for (std::size_t i = 0; i < sol.size(); ++i)
      err = std::max(err, std::abs(traj.coords[k][i] - sol[i](env)));
  }
  const double tol = number_or(c, "tol", 1e-9, where);
  m["max_deviation"] = err;
  m["tol"] = tol;
  return err <= tol && run.status == "completed";
}

bool check_discontinuity(const CheckContext& ctx, const json& c, const std::string& where,
                         Metrics& m) {
  const auto& sys = *ctx.sc.system;
  const RunOutcome& run = find_run(ctx, c, where);
  const auto& traj = run.trajectory;
  if (!traj.has_points()) schema_error(where, "run has no recovered points");
  double jump = 0.0, coord_step = 0.0;
  std::size_t at = 0;
  for (std::size_t k = 1; k < traj.points.size(); ++k) {
    const double dj = distance(sys.space(), traj.points[k - 1], traj.points[k]);
    if (dj > jump) {
      jump = dj;
      at = k;
    }
    coord_step = std::max(coord_step, sup_distance(traj.coords[k - 1].values, traj.coords[k].values));
  }
  const double min_jump = number_or(c, "min_jump", 1.0, where);
  const double max_step = number_or(c, "max_coord_step", 2.0 * traj.step, where);
  m["max_jump"] = jump;
  m["jump_index"] = at;
  m["max_coord_step"] = coord_step;
  return jump > min_jump && coord_step <= max_step;
}

CheckOutcome evaluate_check(const CheckContext& ctx, const json& c, std::size_t index, json& out) {
  const std::string where = "/checks/" + std::to_string(index);
  const std::string type = as_string(require(c, "type", where), where + "/type");
  CheckOutcome res;
  res.type = type;
  res.name = c.contains("name") ? as_string(c["name"], where + "/name") : type + std::to_string(index);
  const bool expect = bool_or(c, "expect", true, where);
  const std::uint64_t seed = mix_seed(ctx.sc.seed, 1000 + index);

  // Checks that read a failed run are skipped rather than judged.
  if (c.contains("run")) {
    const RunOutcome& run = find_run(ctx, c, where);
    if (run.status == "error") {
      res.passed = false;
      res.detail = "skipped: run '" + run.name + "' failed";
      out = {{"name", res.name}, {"type", type}, {"passed", false}, {"skipped", true}};
      return res;
    }
  }

  Metrics m = json::object();
  bool holds = false;
  if (type == "feasibility") holds = check_feasibility(ctx, c, where, m, seed);
  else if (type == "invariance") holds = check_invariance(ctx, c, where, m);
  else if (type == "nagumo") holds = check_nagumo(ctx, c, where, m);
  else if (type == "lipschitz") holds = check_lipschitz(ctx, c, where, m, seed);
  else if (type == "convergence") holds = check_convergence(ctx, c, where, m);
  else if (type == "coordinatizing") holds = check_coordinatizing(ctx, c, where, m, seed);
  else if (type == "solution") holds = check_solution(ctx, c, where, m);
  else if (type == "discontinuity") holds = check_discontinuity(ctx, c, where, m);
  else schema_error(where + "/type", "unknown check type '" + type + "'");

  res.passed = holds == expect;
  out = {{"name", res.name}, {"type", type}, {"holds", holds}, {"expect", expect},
         {"passed", res.passed}, {"metrics", m}};
  res.detail = m.dump();
  return res;
}

// Validates check references without running anything.
void validate_checks(const Scenario& sc) {
  static const std::vector<std::string> known{"feasibility", "invariance", "nagumo", "lipschitz",
                                              "convergence", "coordinatizing", "solution",
                                              "discontinuity"};
  for (std::size_t k = 0; k < sc.checks.size(); ++k) {
    const std::string where = "/checks/" + std::to_string(k);
    const json& c = sc.checks[k];
    const std::string type = as_string(require(c, "type", where), where + "/type");
    if (std::find(known.begin(), known.end(), type) == known.end())
      schema_error(where + "/type", "unknown check type '" + type + "'");
    if (c.contains("run")) {
      const std::string name = as_string(c["run"], where + "/run");
      if (std::none_of(sc.runs.begin(), sc.runs.end(), [&](const RunSpec& r) { return r.name == name; }))
        schema_error(where + "/run", "unknown run '" + name + "'");
    }
    if (c.contains("field") && !sc.fields.count(as_string(c["field"], where + "/field")))
      schema_error(where + "/field", "unknown field");
    if (c.contains("law")) parse_law(*sc.system, c["law"], where + "/law");
  }
}

// ------------------------------------------------------------------ output

json trajectory_json(const CoordinateSystem& sys, const RunOutcome& run) {
  json rows = json::array();
  const auto& traj = run.trajectory;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    json row = {{"t", traj.times[k]}, {"coords", traj.coords[k].values}};
    if (k < traj.points.size()) row["point"] = traj.points[k].values;
    rows.push_back(std::move(row));
  }
  return {{"run", run.name}, {"coordinates", sys.names()}, {"status", run.status}, {"rows", rows}};
}

}  // namespace

std::string trajectory_csv(const std::vector<std::string>& names, const RunOutcome& run) {
  const auto& traj = run.trajectory;
  std::string out = "t";
  for (const auto& n : names) out += ",x_" + n;
  const std::size_t amb = traj.has_points() ? traj.points.front().size() : 0;
  for (std::size_t i = 0; i < amb; ++i) out += ",p_" + std::to_string(i);
  out += ",status\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += format_number(traj.times[k]);
    for (double v : traj.coords[k].values) out += "," + format_number(v);
    if (amb) {
      if (k < traj.points.size()) {
        for (double v : traj.points[k].values) out += "," + format_number(v);
      } else {
        for (std::size_t i = 0; i < amb; ++i) out += ",";
      }
    }
    out += "," + (k + 1 == traj.size() ? run.status : std::string("ok")) + "\n";
  }
  return out;
}

CoordinateSystem load_system(const std::string& text) {
  return *parse_scenario(text, {}).system;
}

std::string summarize(const ScenarioResult& result) {
  std::string out;
  for (const auto& r : result.runs) {
    const bool ok = r.status != "error";
    out += std::string(ok ? "PASS" : "FAIL") + " run " + r.name + "  " + r.status + ", " +
           std::to_string(r.trajectory.size()) + " rows";
    if (!r.error.empty()) out += ": " + r.error;
    out += "\n";
  }
  for (const auto& c : result.checks) {
    out += std::string(c.passed ? "PASS" : "FAIL") + " " + c.type + " " + c.name + "  " + c.detail + "\n";
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::io_error, "cannot write " + tmp.string());
    f << contents;
    if (!f.flush()) fail(ErrorCode::io_error, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorCode::io_error, "cannot rename into " + target.string() + ": " + ec.message());
  }
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input:
    case ErrorCode::parse_error:
    case ErrorCode::empty_locus:
    case ErrorCode::io_error:
      return 2;
    default:
      return 3;
  }
}

ScenarioResult run_scenario_text(const std::string& text, const ScenarioOptions& opts) {
  const Scenario sc = parse_scenario(text, opts);
  validate_checks(sc);
  const auto& sys = *sc.system;

  ScenarioResult result;
  result.runs = execute_runs(sc, worker_count(opts));
  result.coordinates = sys.names();

  json report = {{"version", kSchemaVersion}, {"seed", sc.seed}};
  report["coordinates"] = sys.names();
  json runs = json::array();
  bool runtime_failure = false;
  for (const auto& r : result.runs) {
    json entry = {{"name", r.name}, {"status", r.status}, {"rows", r.trajectory.size()}};
    const auto& spec = sc.runs[&r - result.runs.data()];
    entry["field"] = spec.field;
    entry["step"] = spec.step;
    entry["method"] = to_string(spec.method);
    if (r.trajectory.size() > 0) {
      entry["final_t"] = r.trajectory.times.back();
      entry["final_coords"] = r.trajectory.coords.back().values;
      if (r.trajectory.has_points()) {
        entry["final_point"] = r.trajectory.points.back().values;
        double worst = 0.0;
        for (double v : r.trajectory.residuals) worst = std::max(worst, v);
        entry["max_recovery_residual"] = worst;
      }
    }
    if (!r.error.empty()) {
      entry["error"] = r.error;
      entry["partial"] = true;
      runtime_failure = true;
    }
    if (!opts.out_dir.empty()) {
      const bool as_json = opts.format == ExportFormat::json;
      const std::string file = r.name + (as_json ? ".json" : ".csv");
      const std::string path = (std::filesystem::path(opts.out_dir) / file).string();
      write_atomic(path, as_json ? trajectory_json(sys, r).dump(2) + "\n" : trajectory_csv(sys.names(), r));
      result.files.push_back(path);
      entry["file"] = file;
    }
    runs.push_back(std::move(entry));
  }
  report["runs"] = runs;

  json checks = json::array();
  CheckContext ctx{sc, result.runs};
  for (std::size_t k = 0; k < sc.checks.size(); ++k) {
    json entry;
    try {
      result.checks.push_back(evaluate_check(ctx, sc.checks[k], k, entry));
    } catch (const Error& e) {
      if (exit_code_for(e.code()) == 2) throw;
      CheckOutcome failed{sc.checks[k].value("name", "check" + std::to_string(k)),
                          sc.checks[k].value("type", ""), false, e.what()};
      entry = {{"name", failed.name}, {"type", failed.type}, {"passed", false}, {"error", e.what()}};
      result.checks.push_back(failed);
      runtime_failure = true;
    }
    checks.push_back(std::move(entry));
  }
  report["checks"] = checks;

  json loci = json::array();
  for (std::size_t k = 0; k < sc.loci.size(); ++k) {
    const auto& spec = sc.loci[k];
    json entry = {{"name", spec.name}, {"kind", to_string(spec.locus.kind)}, {"requested", spec.count}};
    try {
      LocusSampling ls;
      ls.members_only = spec.members_only;
      auto pts = sample_locus(spec.locus, sys, spec.count, mix_seed(sc.seed, 2000 + k), ls);
      double worst = 0.0;
      std::string csv;
      for (std::size_t i = 0; i < pts.front().size(); ++i) csv += (i ? ",p_" : "p_") + std::to_string(i);
      for (const auto& n : sys.names()) csv += ",x_" + n;
      csv += ",residual\n";
      for (const auto& p : pts) {
        auto c = coords_of(sys, p);
        const double res = locus_residual(spec.locus, c, sys);
        worst = std::max(worst, std::abs(res));
        for (std::size_t i = 0; i < p.size(); ++i) csv += (i ? "," : "") + format_number(p[i]);
        for (double v : c.values) csv += "," + format_number(v);
        csv += "," + format_number(res) + "\n";
      }
      entry["count"] = pts.size();
      entry["max_residual"] = worst;
      if (!opts.out_dir.empty()) {
        const std::string file = spec.name + ".csv";
        const std::string path = (std::filesystem::path(opts.out_dir) / file).string();
        write_atomic(path, csv);
        result.files.push_back(path);
        entry["file"] = file;
      }
    } catch (const Error& e) {
      entry["error"] = e.what();
      runtime_failure = true;
    }
    loci.push_back(std::move(entry));
  }
  report["loci"] = loci;

  const auto failed = std::count_if(result.checks.begin(), result.checks.end(),
                                    [](const CheckOutcome& c) { return !c.passed; });
  result.exit_code = runtime_failure ? 3 : (failed > 0 ? 1 : 0);
  report["summary"] = {{"checks", result.checks.size()},
                       {"failed", failed},
                       {"exit_code", result.exit_code}};
  result.report_json = report.dump(2) + "\n";
  if (!opts.out_dir.empty()) {
    const std::string path = (std::filesystem::path(opts.out_dir) / "report.json").string();
    write_atomic(path, result.report_json);
    result.files.push_back(path);
  }
  return result;
}

ScenarioResult run_scenario_file(const std::string& path, const ScenarioOptions& opts) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io_error, "cannot read config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return run_scenario_text(ss.str(), opts);
}

}  // namespace metrikos
