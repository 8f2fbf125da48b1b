#include "metrikos/metrikos.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "metrikos/conversion.hpp"
#include "metrikos/demos.hpp"
#include "metrikos/loci.hpp"
#include "metrikos/metric_core.hpp"
#include "metrikos/scenario.hpp"

using namespace metrikos;

struct mk_system {
  CoordinateSystem sys;
};

struct mk_report {
  int exit_code = 0;
  std::string text;
  std::string json;
  std::vector<std::string> run_names;
  std::vector<std::string> run_csv;
  std::vector<std::string> check_names;
  std::vector<int> check_passed;
};

namespace {

thread_local std::string last_error;

mk_status record(mk_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
mk_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return MK_OK;
  } catch (const Error& e) {
    return record(static_cast<mk_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(MK_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(MK_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(MK_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::invalid_input, what);
}

ScenarioOptions to_options(const mk_options* o) {
  ScenarioOptions opts;
  if (!o) return opts;
  if (o->has_seed) opts.seed = o->seed;
  if (o->has_tol) opts.tol = o->tol;
  if (o->out_dir) opts.out_dir = o->out_dir;
  opts.format = o->format == MK_FORMAT_JSON ? ExportFormat::json : ExportFormat::csv;
  opts.threads = o->threads;
  return opts;
}

mk_report* from_scenario(const ScenarioResult& r) {
  auto* rep = new mk_report;
  rep->exit_code = r.exit_code;
  rep->text = summarize(r);
  rep->json = r.report_json;
  for (const auto& run : r.runs) {
    rep->run_names.push_back(run.name);
    rep->run_csv.push_back(trajectory_csv(r.coordinates, run));
  }
  for (const auto& c : r.checks) {
    rep->check_names.push_back(c.name);
    rep->check_passed.push_back(c.passed ? 1 : 0);
  }
  return rep;
}

std::vector<double> copy(const double* p, std::size_t n) { return std::vector<double>(p, p + n); }

std::size_t point_size(const mk_system* s) { return s->sys.space().point_size(); }

}  // namespace

extern "C" {

const char* mk_last_error(void) { return last_error.c_str(); }

const char* mk_status_name(mk_status status) {
  if (status == MK_OK) return "ok";
  return to_string(static_cast<ErrorCode>(status));
}

int mk_exit_code_for(mk_status status) {
  if (status == MK_OK) return 0;
  return exit_code_for(static_cast<ErrorCode>(status));
}

void mk_options_init(mk_options* opts) {
  if (!opts) return;
  *opts = mk_options{0, 0, 0, 0.0, nullptr, MK_FORMAT_CSV, 0};
}

mk_status mk_system_from_config(const char* config_text, mk_system** out) {
  return guarded([&] {
    require(config_text && out, "null argument");
    *out = new mk_system{load_system(config_text)};
  });
}

mk_status mk_system_hilbert(size_t n, mk_system** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new mk_system{hilbert_system(n)};
  });
}

void mk_system_free(mk_system* sys) { delete sys; }

size_t mk_system_size(const mk_system* sys) { return sys ? sys->sys.size() : 0; }

size_t mk_system_point_size(const mk_system* sys) { return sys ? point_size(sys) : 0; }

const char* mk_system_name(const mk_system* sys, size_t index) {
  if (!sys || index >= sys->sys.names().size()) return nullptr;
  return sys->sys.names()[index].c_str();
}

mk_status mk_coords_of(const mk_system* sys, const double* point, double* coords_out) {
  return guarded([&] {
    require(sys && point && coords_out, "null argument");
    auto c = coords_of(sys->sys, SpacePoint(copy(point, point_size(sys))));
    std::copy(c.values.begin(), c.values.end(), coords_out);
  });
}

mk_status mk_d_C(const mk_system* sys, const double* x, const double* y, double* out) {
  return guarded([&] {
    require(sys && x && y && out, "null argument");
    const auto n = point_size(sys);
    *out = d_C(sys->sys, SpacePoint(copy(x, n)), SpacePoint(copy(y, n)));
  });
}

mk_status mk_embed(const mk_system* sys, const double* point, double* out) {
  return guarded([&] {
    require(sys && point && out, "null argument");
    auto e = embed(sys->sys, SpacePoint(copy(point, point_size(sys))));
    std::copy(e.values.begin(), e.values.end(), out);
  });
}

mk_status mk_check_feasible(const mk_system* sys, const double* coords, double tol, int* feasible_out,
                            size_t* violations_out) {
  return guarded([&] {
    require(sys && coords && feasible_out, "null argument");
    auto rep = check_feasible(sys->sys, MetricCoords(copy(coords, sys->sys.size())), tol);
    *feasible_out = rep.feasible() ? 1 : 0;
    if (violations_out) *violations_out = rep.violations.size();
    if (!rep.feasible()) last_error = rep.describe();
  });
}

mk_status mk_multilaterate(const mk_system* sys, const double* coords, const double* guess,
                           double* point_out, double* residual_out) {
  return guarded([&] {
    require(sys && coords && guess && point_out, "null argument");
    auto r = multilaterate(sys->sys, MetricCoords(copy(coords, sys->sys.size())),
                           SpacePoint(copy(guess, point_size(sys))));
    std::copy(r.point.values.begin(), r.point.values.end(), point_out);
    if (residual_out) *residual_out = r.residual;
  });
}

mk_status mk_hilbert_to_metric(const double* w, size_t n, double* coords_out) {
  return guarded([&] {
    require(w && coords_out, "null argument");
    auto c = hilbert_to_metric(copy(w, n));
    std::copy(c.values.begin(), c.values.end(), coords_out);
  });
}

mk_status mk_metric_to_hilbert(const double* coords, size_t n, double* w_out) {
  return guarded([&] {
    require(coords && w_out, "null argument");
    auto w = metric_to_hilbert(MetricCoords(copy(coords, n + 1)));
    std::copy(w.begin(), w.end(), w_out);
  });
}

mk_status mk_locus_sample(const mk_system* sys, const char* kind, const char* i, const char* j,
                          double param, size_t count, uint64_t seed, double* points_out) {
  return guarded([&] {
    require(sys && kind && i && points_out, "null argument");
    auto k = locus_kind_from_string(kind);
    if (!k) fail(ErrorCode::invalid_input, std::string("unknown locus kind '") + kind + "'");
    auto index = [&](const char* name) {
      auto idx = sys->sys.index_of(name);
      if (!idx) fail(ErrorCode::invalid_input, std::string("unknown coordinatizing point '") + name + "'");
      return *idx;
    };
    Locus locus{*k, index(i), j ? index(j) : index(i), param};
    validate_locus(locus, sys->sys);
    auto pts = sample_locus(locus, sys->sys, count, seed);
    std::size_t at = 0;
    for (const auto& p : pts)
      for (double v : p.values) points_out[at++] = v;
  });
}

mk_status mk_scenario_run_file(const char* path, const mk_options* opts, mk_report** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = from_scenario(run_scenario_file(path, to_options(opts)));
  });
}

mk_status mk_scenario_run_text(const char* text, const mk_options* opts, mk_report** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = from_scenario(run_scenario_text(text, to_options(opts)));
  });
}

size_t mk_demo_count(void) { return demo_names().size(); }

const char* mk_demo_name(size_t index) {
  const auto& names = demo_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

mk_status mk_demo_run(const char* name, const mk_options* opts, mk_report** out) {
  return guarded([&] {
    require(name && out, "null argument");
    auto d = run_demo(name, to_options(opts));
    auto* rep = new mk_report;
    rep->exit_code = d.exit_code;
    rep->text = format_demo(d);
    for (const auto& l : d.lines) {
      rep->check_names.push_back(l.label);
      rep->check_passed.push_back(l.passed ? 1 : 0);
    }
    *out = rep;
  });
}

const char* mk_bundled_scenario(const char* stem) {
  if (!stem) return nullptr;
  for (const auto& s : bundled_scenarios()) {
    if (s.stem == stem) return s.text.c_str();
  }
  return nullptr;
}

void mk_report_free(mk_report* report) { delete report; }

int mk_report_exit_code(const mk_report* report) { return report ? report->exit_code : 3; }

const char* mk_report_text(const mk_report* report) { return report ? report->text.c_str() : ""; }

const char* mk_report_json(const mk_report* report) { return report ? report->json.c_str() : ""; }

size_t mk_report_run_count(const mk_report* report) { return report ? report->run_names.size() : 0; }

const char* mk_report_run_name(const mk_report* report, size_t index) {
  return report && index < report->run_names.size() ? report->run_names[index].c_str() : nullptr;
}

const char* mk_report_run_csv(const mk_report* report, size_t index) {
  return report && index < report->run_csv.size() ? report->run_csv[index].c_str() : nullptr;
}

size_t mk_report_check_count(const mk_report* report) { return report ? report->check_names.size() : 0; }

const char* mk_report_check_name(const mk_report* report, size_t index) {
  return report && index < report->check_names.size() ? report->check_names[index].c_str() : nullptr;
}

int mk_report_check_passed(const mk_report* report, size_t index) {
  return report && index < report->check_passed.size() ? report->check_passed[index] : 0;
}

size_t mk_format_number(double value, char* buf, size_t len) {
  const std::string s = format_number(value);
  if (buf && len > s.size()) {
    std::memcpy(buf, s.c_str(), s.size() + 1);
  }
  return s.size();
}

}  // extern "C"
