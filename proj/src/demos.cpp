#include "metrikos/demos.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>

#include "metrikos/calculus.hpp"
#include "metrikos/conversion.hpp"
#include "metrikos/error.hpp"
#include "metrikos/fields.hpp"
#include "metrikos/metric_core.hpp"

namespace metrikos {
namespace {

constexpr std::uint64_t kDefaultSeed = 20240611;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Demo name -> bundled scenario stems it runs.
const std::map<std::string, std::vector<std::string>, std::less<>>& scenario_demos() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> m{
      {"airtraffic_ellipsoid_sphere", {"airtraffic_ellipsoid_sphere"}},
      {"airtraffic_hyperboloid", {"airtraffic_hyperboloid"}},
      {"s2_hyperbolic", {"s2_hyperbolic"}},
      {"strips_discontinuous", {"strips_discontinuous"}},
      {"slit_plane_nonhomeo", {"slit_plane", "sup_plane_two_balls"}},
      {"dc_vs_d_divergence", {"sup_plane_coordinatization", "sup_plane_axes"}},
  };
  return m;
}

ScenarioResult run_bundled(const std::string& stem, const ScenarioOptions& opts, DemoReport& rep) {
  auto text = bundled_scenario(stem);
  if (!text) fail(ErrorCode::internal, "bundled scenario '" + stem + "' missing");
  ScenarioOptions o = opts;
  if (!o.out_dir.empty()) o.out_dir = (std::filesystem::path(opts.out_dir) / stem).string();
  ScenarioResult res = run_scenario_text(*text, o);
  const std::string prefix = stem == rep.name ? "" : stem + "/";
  for (const auto& r : res.runs) {
    if (r.status == "error") rep.lines.push_back({prefix + "run/" + r.name, false, r.error});
  }
  for (const auto& c : res.checks) rep.lines.push_back({prefix + c.name, c.passed, c.detail});
  if (res.exit_code == 3) rep.exit_code = 3;
  return res;
}

void sphere_norm_lines(const ScenarioResult& res, DemoReport& rep) {
  for (const auto& r : res.runs) {
    double drift = 0.0;
    for (const auto& p : r.trajectory.points) {
      drift = std::max(drift, std::abs(std::hypot(p[0], p[1], p[2]) - 1.0));
    }
    const bool ok = r.trajectory.has_points() && drift <= 1e-9;
    rep.lines.push_back({r.name + "_unit_norm", ok, "max |norm - 1| = " + num(drift)});
  }
}

void divergence_lines(DemoReport& rep) {
  CoordinateSystem sys(Space::euclidean(2), {{0, 0}, {1, 0}}, {0, 0});
  double prev_dc = INFINITY;
  bool shrinking = true;
  for (int n = 5; n <= 15; ++n) {
    const double h = std::ldexp(1.0, n);
    const SpacePoint x{double(n), h}, y{-double(n), h};
    const double dc = d_C(sys, x, y);
    shrinking = shrinking && dc < prev_dc;
    prev_dc = dc;
  }
  const double h = std::ldexp(1.0, 15);
  const SpacePoint x{15, h}, y{-15, h};
  const double dc = d_C(sys, x, y);
  const double d = distance(sys.space(), x, y);
  const double expected = 60.0 / (std::sqrt(14.0 * 14.0 + h * h) + std::sqrt(16.0 * 16.0 + h * h));
  rep.lines.push_back({"n15_fixture", std::abs(dc / expected - 1.0) <= 0.02 && std::abs(d - 30.0) <= 1e-12,
                       "d_C = " + num(dc) + ", d = " + num(d)});
  rep.lines.push_back({"dC_shrinks_while_d_grows", shrinking, "n = 5..15, d = 2n"});
}

void observer_lines(DemoReport& rep) {
  Curve psi{[](double t) { return SpacePoint{t, std::abs(t)}; }};
  CoordinateSystem left(Space::euclidean(2), {{-2, 0}}, {0, 0});
  auto dl = central_derivative(psi, left, 0.0);
  rep.lines.push_back({"differentiable_wrt_(-2,0)", dl.flags[0] == Differentiability::differentiable,
                       std::string(to_string(dl.flags[0])) + ", quotients " + num(dl.left[0]) + " / " +
                           num(dl.right[0])});
  CoordinateSystem corner(Space::euclidean(2), {{1, 1}}, {0, 0});
  auto dc = central_derivative(psi, corner, 0.0);
  rep.lines.push_back({"not_differentiable_wrt_(1,1)",
                       dc.flags[0] == Differentiability::non_differentiable,
                       std::string(to_string(dc.flags[0]))});
  const bool quotients = std::abs(dc.left[0]) <= 1e-3 && std::abs(dc.right[0] + std::numbers::sqrt2) <= 1e-3;
  rep.lines.push_back({"one_sided_quotients", quotients,
                       "left " + num(dc.left[0]) + ", right " + num(dc.right[0]) + " (expect 0, -sqrt 2)"});
}

void hilbert_lines(DemoReport& rep, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (std::size_t n : {2u, 3u, 10u}) {
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> w(n);
      for (auto& v : w) v = u(rng);
      const auto back = metric_to_hilbert(hilbert_to_metric(w));
      worst = std::max(worst, sup_distance(back, w));
    }
    rep.lines.push_back({"roundtrip_n" + std::to_string(n), worst < 1e-9, "max error " + num(worst)});
  }
  CoordinateSystem plane(Space::euclidean(2), {{1, 0}, {0, 1}, {0, 0}}, {0, 0}, {"a", "b", "c"});
  const auto c = coords_of(plane, SpacePoint{3, 4});
  const bool forward = std::abs(c[0] - std::sqrt(20.0)) < 1e-12 && std::abs(c[1] - std::sqrt(18.0)) < 1e-12 &&
                       std::abs(c[2] - 5.0) < 1e-12;
  rep.lines.push_back({"convert_(3,4)", forward, "(" + num(c[0]) + ", " + num(c[1]) + ", " + num(c[2]) + ")"});
  const auto back = multilaterate(plane, c, SpacePoint{1, 1});
  const double err = std::max(std::abs(back.point[0] - 3.0), std::abs(back.point[1] - 4.0));
  rep.lines.push_back({"multilaterate_back", err < 1e-9, "error " + num(err)});
}

void mcshane_lines(DemoReport& rep, std::uint64_t seed) {
  CoordinateSystem sys(Space::euclidean(3, Subset{SubsetKind::half_space, {}, 0.0}), {{1, 0, 0}, {0, 1, 0}, {0, 0, 0}},
                       {0, 0, 1}, {"a", "b", "c"});
  auto g = [](const EmbeddedPoint& e) {
    return std::vector<double>{0.5 * e[0] - 0.25 * std::abs(e[1]), 0.2 * std::sin(e[2]) + 0.3 * e[0]};
  };
  const double K = 0.75;
  std::vector<std::pair<EmbeddedPoint, std::vector<double>>> data;
  for (const auto& p : sample_points(sys, 40, seed, 1.0, true)) {
    auto e = embed(sys, p);
    data.emplace_back(e, g(e));
  }
  auto f = mcshane_extend_vector(data, K);
  double exact = 0.0;
  for (const auto& [e, v] : data) exact = std::max(exact, sup_distance(f(e), v));
  rep.lines.push_back({"extension_exact_on_data", exact == 0.0, "max deviation " + num(exact)});

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const EmbeddedPoint center = data.front().first;
  auto near = [&] {
    EmbeddedPoint p = center;
    for (auto& v : p.values) v += u(rng);
    return p;
  };
  double ratio = 0.0;
  for (int k = 0; k < 10000; ++k) {
    auto x = near(), y = near();
    ratio = std::max(ratio, sup_distance(f(x), f(y)) / sup_distance(x.values, y.values));
  }
  rep.lines.push_back({"extension_K_lipschitz", ratio <= K + 1e-9,
                       "sampled ratio " + num(ratio) + " vs K = " + num(K)});

  const double r = 1.0;
  auto h = cutoff(f, center, r);
  std::vector<EmbeddedPoint> pts;
  for (int k = 0; k < 20000; ++k) pts.push_back(near());
  double M = 0.0;
  for (const auto& p : pts) {
    if (sup_distance(p.values, center.values) <= r)
      for (double v : f(p)) M = std::max(M, std::abs(v));
  }
  double L = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); k += 2) {
    L = std::max(L, sup_distance(h(pts[k]), h(pts[k + 1])) / sup_distance(pts[k].values, pts[k + 1].values));
  }
  const double bound = 4 * K + (2 / r) * M;
  rep.lines.push_back({"cutoff_lipschitz_bound", L <= bound + 1e-6,
                       "sampled " + num(L) + " <= " + num(bound)});
  double outside = 0.0;
  for (const auto& p : pts) {
    if (sup_distance(p.values, center.values) >= r)
      for (double v : h(p)) outside = std::max(outside, std::abs(v));
  }
  rep.lines.push_back({"cutoff_vanishes_outside_ball", outside == 0.0, "max |h| = " + num(outside)});
}

}  // namespace

const std::vector<BundledScenario>& bundled_scenarios() {
  static const std::vector<BundledScenario> all{
#include "bundled_scenarios.inc"
  };
  return all;
}

std::optional<std::string> bundled_scenario(std::string_view stem) {
  for (const auto& s : bundled_scenarios()) {
    if (s.stem == stem) return s.text;
  }
  return std::nullopt;
}

const std::vector<std::string>& demo_names() {
  static const std::vector<std::string> names{
      "airtraffic_ellipsoid_sphere", "airtraffic_hyperboloid", "s2_hyperbolic",
      "strips_discontinuous",        "dc_vs_d_divergence",     "observer_dependence",
      "slit_plane_nonhomeo",         "hilbert_roundtrip",      "mcshane_cutoff"};
  return names;
}

DemoReport run_demo(std::string_view name, const ScenarioOptions& opts) {
  const auto& names = demo_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    fail(ErrorCode::invalid_input, "unknown demo '" + std::string(name) + "'; available: " + list);
  }
  DemoReport rep;
  rep.name = std::string(name);
  const std::uint64_t seed = opts.seed.value_or(kDefaultSeed);

  if (name == "dc_vs_d_divergence") divergence_lines(rep);
  if (name == "observer_dependence") observer_lines(rep);
  if (name == "hilbert_roundtrip") hilbert_lines(rep, seed);
  if (name == "mcshane_cutoff") mcshane_lines(rep, seed);
  if (auto it = scenario_demos().find(name); it != scenario_demos().end()) {
    for (const auto& stem : it->second) {
      auto res = run_bundled(stem, opts, rep);
      if (name == "s2_hyperbolic") sphere_norm_lines(res, rep);
    }
  }

  const bool all_pass = std::all_of(rep.lines.begin(), rep.lines.end(), [](const DemoLine& l) { return l.passed; });
  if (rep.exit_code == 0) rep.exit_code = all_pass ? 0 : 1;
  return rep;
}

std::string format_demo(const DemoReport& report) {
  std::string out;
  std::size_t passed = 0;
  for (const auto& l : report.lines) {
    passed += l.passed;
    out += (l.passed ? "PASS " : "FAIL ") + report.name + "/" + l.label;
    if (!l.detail.empty()) out += "  " + l.detail;
    out += "\n";
  }
  out += report.name + ": " + std::to_string(passed) + "/" + std::to_string(report.lines.size()) + " passed\n";
  return out;
}

}  // namespace metrikos
