#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <stdexcept>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "metrikos/calculus.hpp"
#include "metrikos/conversion.hpp"
#include "metrikos/demos.hpp"
#include "metrikos/expr.hpp"
#include "metrikos/fields.hpp"
#include "metrikos/invariance.hpp"
#include "metrikos/loci.hpp"
#include "metrikos/metric_core.hpp"
#include "metrikos/scenario.hpp"

using namespace metrikos;
using nlohmann::json;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Subset half_space() { return Subset{SubsetKind::half_space, {}, 0.0}; }

CoordinateSystem h3() {
  return CoordinateSystem(Space::euclidean(3, half_space()), {{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}, {0, 0, 1},
                          {"a", "b", "c"});
}

// z^2 of the point of the upper half-space with these coordinates; negative
// when no such point exists.
double height_squared(double xa, double xb, double xc) {
  const double x = (xc * xc - xa * xa + 1) / 2, y = (xc * xc - xb * xb + 1) / 2;
  return xc * xc - x * x - y * y;
}

std::vector<SpacePoint> flow_starts() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), uz(0.1, 3.0);
  std::vector<SpacePoint> starts;
  const auto sys = h3();
  while (starts.size() < 20) {
    const SpacePoint p{ux(rng), ux(rng), uz(rng)};
    const auto c = coords_of(sys, p);
    bool ok = true;
    for (int k = 0; k <= 100 && ok; ++k) {
      const double t = 0.5 * k / 100;
      ok = height_squared(c[0] + t, c[1] - t, c[2]) > 1e-2;
    }
    if (ok) starts.push_back(p);
  }
  return starts;
}

// Random step and hat functions with random amplitudes.
std::vector<SpacePoint> grid_samples(const Space& grid, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> at(-1.0, 1.0), width(0.05, 0.8), amp(-2.0, 2.0);
  std::vector<SpacePoint> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double a = at(rng), w = width(rng), s = amp(rng);
    SpacePoint p = k % 2 ? hat(grid, a, w) : indicator(grid, a, a + w);
    for (auto& v : p.values) v *= s;
    out.push_back(std::move(p));
  }
  return out;
}

ScenarioResult bundled(const std::string& stem) {
  return run_scenario_text(*bundled_scenario(stem));
}

// ------------------------------------------------------------------ criteria

Verdict conversion_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  double worst = 0.0;
  for (std::size_t n : {2u, 3u, 10u}) {
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> w(n);
      for (auto& v : w) v = u(rng);
      worst = std::max(worst, sup_distance(metric_to_hilbert(hilbert_to_metric(w)), w));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-9 && secs < 1.0, fmt("max error %.3g over 3000 points, %.3f s", worst, secs)};
}

Verdict closed_form_flow() {
  const auto sys = h3();
  const auto field = CoordField::constant({1, -1, 0});
  double dev = 0.0, drift = 0.0;
  bool complete = true;
  for (const auto& p : flow_starts()) {
    auto traj = integrate_coords(field, sys, p, 0.5, 1e-3, Method::rk4);
    complete = complete && traj.status == TrajectoryStatus::completed && std::abs(traj.times.back() - 0.5) < 1e-12;
    const auto& c0 = traj.coords.front();
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const double t = traj.times[k];
      const auto& c = traj.coords[k];
      dev = std::max({dev, std::abs(c[0] - (c0[0] + t)), std::abs(c[1] - (c0[1] - t)), std::abs(c[2] - c0[2])});
      drift = std::max({drift, std::abs((c[0] + c[1]) - (c0[0] + c0[1])), std::abs(c[2] - c0[2])});
    }
  }
  return {complete && dev < 1e-9 && drift < 1e-9,
          fmt("20 starts, max deviation %.3g, conserved drift %.3g", dev, drift)};
}

Verdict point_recovery() {
  const auto sys = h3();
  const auto field = CoordField::constant({1, -1, 0});
  double worst_res = 0.0, worst_locus = 0.0;
  bool complete = true;
  for (const auto& p : flow_starts()) {
    auto traj = integrate_points(field, sys, p, 0.5, 1e-3);
    complete = complete && traj.status == TrajectoryStatus::completed && traj.points.size() == traj.size();
    const auto c0 = coords_of(sys, p);
    const Locus ellipsoid{LocusKind::ellipsoid, 0, 1, c0[0] + c0[1]};
    const Locus sphere{LocusKind::sphere, 2, 2, c0[2]};
    for (double r : traj.residuals) worst_res = std::max(worst_res, r);
    for (const auto& q : traj.points) {
      const auto c = coords_of(sys, q);
      worst_locus = std::max({worst_locus, std::abs(locus_residual(ellipsoid, c, sys)),
                              std::abs(locus_residual(sphere, c, sys))});
    }
  }
  return {complete && worst_res < 1e-8 && worst_locus < 1e-6,
          fmt("max multilateration residual %.3g, max locus residual %.3g", worst_res, worst_locus)};
}

Verdict domination_and_divergence() {
  const auto grid = Space::grid_function(-1.0, 1.0, 200);
  std::vector<CoordinateSystem> systems{
      CoordinateSystem(Space::euclidean(2), {{1, 0}, {0, 1}, {0, 0}}, {0, 0}),
      h3(),
      CoordinateSystem(Space::sup_plane(), {{0, 0}, {1, 0}, {-1, 1}, {2, -1}}, {0, 0}),
      CoordinateSystem(Space::sphere(), {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {1, 0, 0}),
      CoordinateSystem(Space::discrete(6), {{0}, {1}, {2}}, {3}),
      CoordinateSystem(grid, {hat(grid, 0.0, 0.5), hat(grid, 0.4, 0.3), indicator(grid, -0.5, 0.0)},
                       hat(grid, 0.0, 0.5)),
  };
  std::size_t pairs = 0;
  double worst = -INFINITY;
  for (std::size_t s = 0; s < systems.size(); ++s) {
    const std::size_t want = s + 1 == systems.size() ? 10000 - pairs : 10000 / systems.size();
    auto pts = s + 1 == systems.size() ? grid_samples(grid, 2 * want, 40 + s) : sample_points(systems[s], 2 * want, 40 + s);
    for (std::size_t k = 0; k + 1 < pts.size(); k += 2, ++pairs) {
      const double gap = d_C(systems[s], pts[k], pts[k + 1]) - distance(systems[s].space(), pts[k], pts[k + 1]);
      worst = std::max(worst, gap);
    }
  }
  CoordinateSystem plane(Space::euclidean(2), {{0, 0}, {1, 0}}, {0, 0});
  const double h = std::ldexp(1.0, 15);
  const SpacePoint x{15, h}, y{-15, h};
  const double dc = d_C(plane, x, y), d = distance(plane.space(), x, y);
  const bool fixture = std::abs(dc / 9.155e-4 - 1.0) <= 0.02 && d == 30.0;
  return {pairs == 10000 && worst <= 1e-12 && fixture,
          std::to_string(pairs) + " pairs, max d_C - d " + fmt("%.3g; n=15: d_C %.6g, d %g", worst, dc, d)};
}

Verdict feasibility() {
  std::vector<CoordinateSystem> systems{
      CoordinateSystem(Space::euclidean(2), {{1, 0}, {0, 1}, {0, 0}}, {0, 0}),
      h3(),
      CoordinateSystem(Space::sup_plane(), {{0, 0}, {1, 0}, {-1, 1}, {2, -1}}, {0, 0}),
      CoordinateSystem(Space::sphere(), {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {1, 0, 0}),
      CoordinateSystem(Space::euclidean(10), [] {
        std::vector<SpacePoint> c;
        for (int i = 0; i <= 10; ++i) {
          std::vector<double> v(10, 0.0);
          if (i < 10) v[i] = 1.0;
          c.emplace_back(v);
        }
        return c;
      }(), SpacePoint(std::vector<double>(10, 0.0))),
  };
  std::size_t genuine = 0, rejected = 0;
  for (std::size_t s = 0; s < systems.size(); ++s) {
    for (const auto& p : sample_points(systems[s], 2000, 70 + s)) {
      genuine += check_feasible(systems[s], coords_of(systems[s], p)).feasible();
    }
  }
  CoordinateSystem pair(Space::euclidean(1), {{0}, {1}}, {0});
  const auto sum = check_feasible(pair, MetricCoords{0.2, 0.2});
  const auto diff = check_feasible(pair, MetricCoords{3.0, 1.5});
  const bool sum_ok = sum.violations.size() == 1 && sum.violations[0].inequality == Inequality::sum &&
                      std::abs(sum.violations[0].slack + 0.6) < 1e-12;
  const bool diff_ok = diff.violations.size() == 1 && diff.violations[0].inequality == Inequality::difference &&
                       std::abs(diff.violations[0].slack + 0.5) < 1e-12;
  rejected = sum_ok + diff_ok;
  return {genuine == 10000 && rejected == 2,
          std::to_string(genuine) + "/10000 genuine feasible; (0.2,0.2) -> " + sum.describe() + "; (3,1.5) -> " +
              diff.describe()};
}

Verdict observer_dependence() {
  Curve psi{[](double t) { return SpacePoint{t, std::abs(t)}; }};
  CoordinateSystem left(Space::euclidean(2), {{-2, 0}}, {0, 0});
  CoordinateSystem corner(Space::euclidean(2), {{1, 1}}, {0, 0});
  const auto dl = central_derivative(psi, left, 0.0);
  const auto dc = central_derivative(psi, corner, 0.0);
  const bool ok = dl.flags[0] == Differentiability::differentiable &&
                  dc.flags[0] == Differentiability::non_differentiable && std::abs(dc.left[0]) <= 1e-3 &&
                  std::abs(dc.right[0] + std::numbers::sqrt2) <= 1e-3;
  return {ok, std::string("{(-2,0)}: ") + to_string(dl.flags[0]) + "; {(1,1)}: " + to_string(dc.flags[0]) +
                  fmt(", quotients left %.6g right %.6g", dc.left[0], dc.right[0])};
}

Verdict l2_oracle() {
  const double lo = -3.0, hi = 5.0;
  const std::size_t cells = 32000;
  const double dx = (hi - lo) / cells;
  const auto space = Space::grid_function(lo, hi, cells);
  const auto coarse = Space::grid_function(lo, hi, cells / 2);
  auto bump = [](double t) { return std::abs(t) < 1.5 ? 1.5 - t * t / 1.5 : 0.0; };
  std::vector<SpacePoint> basis{hat(space, 0.0, 1.0), hat(space, 0.8, 0.5), sample_function(space, bump)};
  std::vector<SpacePoint> coarse_basis{hat(coarse, 0.0, 1.0), hat(coarse, 0.8, 0.5), sample_function(coarse, bump)};
  CoordinateSystem sys(space, basis, basis[0]);
  Curve shift{[&](double t) { return indicator(space, t, t + 1.0); }};
  DerivativeOptions opts;
  for (int k = 5; k >= 0; --k) opts.h_seq.push_back(dx * (1 << k));
  double worst_ratio = 0.0, worst_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double t = -1.7 + 0.125 * k;
    const auto d = forward_derivative(shift, sys, t, opts);
    for (std::size_t c = 0; c < basis.size(); ++c) {
      const double oracle = char_shift_derivative(space, basis[c], t);
      const double quad = std::abs(oracle - char_shift_derivative(coarse, coarse_basis[c], t));
      const double err = std::abs(d.tangent.velocity[c] - oracle);
      worst_err = std::max(worst_err, err);
      worst_ratio = std::max(worst_ratio, err / std::max(1e-3, 5 * quad));
    }
  }
  return {worst_ratio <= 1.0, fmt("20 t values x 3 coordinates, max error %.3g, worst error/tolerance %.3g",
                                  worst_err, worst_ratio)};
}

Verdict mcshane_and_cutoff() {
  auto rep = run_demo("mcshane_cutoff");
  std::string detail;
  for (const auto& l : rep.lines) detail += (detail.empty() ? "" : "; ") + l.label + " " + l.detail;
  return {rep.passed() && rep.lines.size() == 4, detail};
}

// Fields of the bundled scenarios as coordinate fields; sphere-realized
// fields contribute their two prescribed rates.
struct BundledField {
  std::string scenario;
  std::string name;
  CoordField field;
  bool sphere = false;
  std::vector<std::shared_ptr<Expression>> exprs;
};

std::vector<BundledField> bundled_fields() {
  std::vector<BundledField> out;
  for (const auto& s : bundled_scenarios()) {
    const json doc = json::parse(s.text);
    if (!doc.contains("fields")) continue;
    const auto sys = load_system(s.text);
    for (const auto& [name, spec] : doc["fields"].items()) {
      BundledField bf{s.stem, name, {}, spec.contains("sphere_realized"), {}};
      std::vector<std::string> exprs;
      if (bf.sphere) {
        exprs = {spec["sphere_realized"]["f"], spec["sphere_realized"]["g"]};
      } else {
        for (const auto& c : spec["components"]) exprs.push_back(c.is_string() ? c.get<std::string>() : c.dump());
      }
      for (const auto& e : exprs) {
        bf.exprs.push_back(std::make_shared<Expression>(Expression::parse(e, sys.names())));
        bf.field.components.push_back([ex = bf.exprs.back()](std::span<const double> w) { return (*ex)(w); });
      }
      out.push_back(std::move(bf));
    }
  }
  return out;
}

std::vector<ConservationLaw> detected_laws(const BundledField& bf, const CoordinateSystem& sys) {
  auto probes = random_probes(sys, 64, 9);
  if (!bf.sphere) return conserved_quantities(bf.field, probes);
  // Rates of a and b only: project the probes and restore c by lookup.
  auto full = std::make_shared<std::vector<MetricCoords>>(probes);
  auto lift = [full](std::span<const double> ab) {
    for (const auto& p : *full)
      if (p.values[0] == ab[0] && p.values[1] == ab[1]) return p.values;
    throw std::logic_error("probe not found");
  };
  CoordField projected;
  for (const auto& ex : bf.exprs)
    projected.components.push_back([ex, lift](std::span<const double> ab) { return (*ex)(lift(ab)); });
  for (auto& p : probes) p.values.resize(2);
  return conserved_quantities(projected, probes);
}

Verdict nagumo_residuals() {
  double worst_tangent = 0.0;
  std::size_t pairs = 0;
  for (const auto& bf : bundled_fields()) {
    if (bf.sphere) continue;
    const auto sys = load_system(*bundled_scenario(bf.scenario));
    VectorFunction vf = [f = bf.field](const EmbeddedPoint& w) { return eval_velocity(f, w.values); };
    auto probes = random_probes(sys, 8, 11);
    for (const auto& law : detected_laws(bf, sys)) {
      for (const auto& p : probes) {
        auto set = CoordSet::level_set(law, law.quantity(p.values));
        auto rep = nagumo_check(vf, set, {p.values}, {}, 0.0, 0.02);
        worst_tangent = std::max(worst_tangent, std::abs(rep.max_limsup));
        ++pairs;
      }
    }
  }
  std::vector<std::vector<double>> cloud;
  for (int k = 0; k <= 30000; ++k) cloud.push_back({2.0, k * 1e-4});
  auto slab = CoordSet::sampled(std::move(cloud), 1e-4);
  VectorFunction outward = [](const EmbeddedPoint&) { return std::vector<double>{1.0, 0.0}; };
  std::vector<std::vector<double>> on_slab{{2.0, 0.5}, {2.0, 1.0}, {2.0, 1.5}, {2.0, 2.5}};
  auto out = nagumo_check(outward, slab, on_slab, {}, 0.0, 0.02);
  double worst_out = 0.0;
  for (const auto& s : out.samples) worst_out = std::max(worst_out, std::abs(s.limsup - 1.0));
  return {pairs > 0 && worst_tangent <= 0.02 && worst_out <= 0.02 && out.violations.size() == on_slab.size(),
          std::to_string(pairs) + fmt(" tangent pairs, max |limsup| %.3g; outward fixture max |limsup - 1| %.3g",
                                      worst_tangent, worst_out)};
}

Verdict level_set_invariance() {
  std::size_t checked = 0, failed = 0;
  double worst = 0.0;
  std::string failures;
  const auto fields = bundled_fields();
  for (const auto& s : bundled_scenarios()) {
    const json doc = json::parse(s.text);
    if (!doc.contains("runs")) continue;
    const auto sys = load_system(s.text);
    const auto result = run_scenario_text(s.text);
    for (std::size_t r = 0; r < result.runs.size(); ++r) {
      const auto& run = result.runs[r];
      const std::string field = doc["runs"][r]["field"];
      const auto it = std::find_if(fields.begin(), fields.end(),
                                   [&](const BundledField& f) { return f.scenario == s.stem && f.name == field; });
      if (it == fields.end() || run.trajectory.method != Method::rk4) continue;
      for (const auto& law : detected_laws(*it, sys)) {
        const auto set = CoordSet::level_set(law, law.quantity(run.trajectory.coords.front().values));
        const auto inv = invariance_test(run.trajectory, set, 1e-6);
        worst = std::max(worst, inv.max_distance);
        ++checked;
        if (!inv.invariant) {
          ++failed;
          failures += " " + s.stem + "/" + run.name + ":" + law.describe(sys.names());
        }
      }
    }
  }
  return {checked > 0 && failed == 0,
          std::to_string(checked) + " level sets along rk4 runs" + fmt(", max distance %.3g", worst) + failures};
}

Verdict pathology_fixtures() {
  auto find = [](const ScenarioResult& r, const std::string& name) {
    for (const auto& c : r.checks)
      if (c.name == name) return c;
    return CheckOutcome{name, "", false, "missing"};
  };
  const auto slit = find(bundled("slit_plane"), "dC_converges_d_does_not");
  const auto strips = find(bundled("strips_discontinuous"), "jumps_between_strips");
  const auto sup = find(bundled("sup_plane_coordinatization"), "bounded_set_fails");
  const json ms = json::parse(slit.detail), mj = json::parse(strips.detail), mw = json::parse(sup.detail);
  const bool slit_ok = slit.passed && ms["final_dC_gap"].get<double>() < 1e-2 &&
                       std::abs(ms["final_d_gap"].get<double>() - 2.0) < 1e-2;
  const bool strips_ok = strips.passed && mj["max_jump"].get<double>() > 1.0;
  const bool sup_ok = sup.passed && mw["witnesses"].get<int>() > 0;
  return {slit_ok && strips_ok && sup_ok,
          fmt("slit: dC gap %.3g, d gap %.4g", ms["final_dC_gap"].get<double>(), ms["final_d_gap"].get<double>()) +
              fmt("; strips: jump %.4g, coordinate step %.3g", mj["max_jump"].get<double>(),
                  mj["max_coord_step"].get<double>()) +
              "; sup: " + std::to_string(mw["witnesses"].get<int>()) + " witness(es)"};
}

Verdict sphere_flow() {
  const auto result = bundled("s2_hyperbolic");
  double norm = 0.0, drift = 0.0;
  bool complete = true;
  for (const auto& run : result.runs) {
    const auto& tr = run.trajectory;
    complete = complete && run.status == "completed" && std::abs(tr.times.back() - 1.0) < 1e-12 && tr.has_points();
    const double q0 = tr.coords.front()[0] - tr.coords.front()[1];
    for (std::size_t k = 0; k < tr.size(); ++k) {
      drift = std::max(drift, std::abs(tr.coords[k][0] - tr.coords[k][1] - q0));
      if (k < tr.points.size()) {
        const auto& p = tr.points[k];
        norm = std::max(norm, std::abs(std::hypot(p[0], p[1], p[2]) - 1.0));
      }
    }
  }
  return {complete && norm <= 1e-9 && drift <= 1e-6,
          std::to_string(result.runs.size()) + fmt(" runs over [0, 1], max |norm - 1| %.3g, x_a - x_b drift %.3g",
                                                    norm, drift)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* title;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"conversion round trip", conversion_round_trip},
      {"closed-form flow", closed_form_flow},
      {"point recovery", point_recovery},
      {"d_C domination and divergence", domination_and_divergence},
      {"feasibility", feasibility},
      {"observer dependence", observer_dependence},
      {"L2 oracle", l2_oracle},
      {"McShane extension and cutoff", mcshane_and_cutoff},
      {"Nagumo residuals", nagumo_residuals},
      {"invariance of conserved level sets", level_set_invariance},
      {"pathology fixtures", pathology_fixtures},
      {"S2 flow", sphere_flow},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = criteria[k].run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !v.passed;
    std::printf("%s %2zu. %s: %s [%.2f s]\n", v.passed ? "PASS" : "FAIL", k + 1, criteria[k].title,
                v.detail.c_str(), secs);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures ? 1 : 0;
}
