#include "metrikos/fields.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "metrikos/error.hpp"

namespace metrikos {

namespace {

using Vec = std::vector<double>;

Vec axpy(const Vec& x, double a, const Vec& y) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * y[i];
  return out;
}

Vec rk4_combine(const Vec& x, double h, const Vec& k1, const Vec& k2, const Vec& k3,
                const Vec& k4) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

template <class F>
Vec advance(const F& rhs, const Vec& x, double h, Method method) {
  const Vec k1 = rhs(x);
  if (method == Method::euler) return axpy(x, h, k1);
  const Vec k2 = rhs(axpy(x, 0.5 * h, k1));
  const Vec k3 = rhs(axpy(x, 0.5 * h, k2));
  const Vec k4 = rhs(axpy(x, h, k3));
  return rk4_combine(x, h, k1, k2, k3, k4);
}

// Step schedule: full steps of size `step`, plus a final partial step.
std::vector<double> time_grid(double t_end, double step) {
  if (!(step > 0)) fail(ErrorCode::invalid_input, "step must be positive");
  if (!(t_end >= 0)) fail(ErrorCode::invalid_input, "t_end must be nonnegative");
  std::vector<double> times{0.0};
  const auto full = static_cast<std::size_t>(std::floor(t_end / step + 1e-9));
  for (std::size_t k = 1; k <= full; ++k) times.push_back(static_cast<double>(k) * step);
  if (t_end - times.back() > 1e-9 * step) {
    times.push_back(t_end);
  } else if (full > 0) {
    times.back() = t_end;
  }
  return times;
}

std::array<double, 3> as3(const SpacePoint& p) { return {p[0], p[1], p[2]}; }

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Gradient of x -> arccos(x . c) projected to the tangent plane at x.
std::array<double, 3> sphere_gradient(const std::array<double, 3>& x,
                                      const std::array<double, 3>& c) {
  const double d = std::clamp(dot3(x, c), -1.0, 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - d * d));
  if (s < 1e-12) fail(ErrorCode::degenerate, "distance gradient undefined at a coordinate point");
  return {-(c[0] - d * x[0]) / s, -(c[1] - d * x[1]) / s, -(c[2] - d * x[2]) / s};
}

}  // namespace

CoordField CoordField::constant(std::vector<double> values, std::string label) {
  CoordField f;
  f.label = std::move(label);
  for (double v : values) f.components.push_back([v](std::span<const double>) { return v; });
  return f;
}

std::vector<double> eval_velocity(const CoordField& field, std::span<const double> coords) {
  if (field.size() != coords.size())
    fail(ErrorCode::invalid_input, "field has " + std::to_string(field.size()) +
                                       " components for " + std::to_string(coords.size()) +
                                       " coordinates");
  Vec v(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) {
    try {
      v[k] = field.components[k](coords);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::evaluation_failure,
           "field component " + std::to_string(k) + " failed: " + e.what());
    }
    if (!std::isfinite(v[k]))
      fail(ErrorCode::evaluation_failure,
           "field component " + std::to_string(k) + " is not finite");
  }
  return v;
}

TangentRep eval_field(const CoordField& field, const MetricCoords& coords) {
  return make_tangent(coords, eval_velocity(field, coords.values));
}

const char* to_string(Method m) noexcept { return m == Method::euler ? "euler" : "rk4"; }

const char* to_string(TrajectoryStatus s) noexcept {
  switch (s) {
    case TrajectoryStatus::completed: return "completed";
    case TrajectoryStatus::stopped_infeasible: return "stopped_infeasible";
    case TrajectoryStatus::stopped_domain: return "stopped_domain";
  }
  return "?";
}

Trajectory integrate_coords(const CoordField& field, const CoordinateSystem& system,
                            const MetricCoords& start, double t_end, double step, Method method) {
  const auto report = check_feasible(system, start, kFeasibilityGuardTol);
  if (!report.feasible())
    fail(ErrorCode::infeasible, "initial coordinates are infeasible: " + report.describe());
  const auto times = time_grid(t_end, step);

  Trajectory traj;
  traj.step = step;
  traj.method = method;
  traj.times.push_back(0.0);
  traj.coords.push_back(start);

  auto rhs = [&](const Vec& u) { return eval_velocity(field, u); };
  Vec u = start.values;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double h = times[k] - times[k - 1];
    Vec next;
    try {
      next = advance(rhs, u, h, method);
    } catch (const Error& e) {
      throw IntegrationError(e.code(), e.what(), std::move(traj));
    }
    MetricCoords state(next);
    if (!check_feasible(system, state, kFeasibilityGuardTol).feasible()) {
      traj.status = TrajectoryStatus::stopped_infeasible;
      return traj;
    }
    traj.times.push_back(times[k]);
    traj.coords.push_back(std::move(state));
    u = std::move(next);
  }
  return traj;
}

Trajectory integrate_coords(const CoordField& field, const CoordinateSystem& system,
                            const SpacePoint& x0, double t_end, double step, Method method) {
  return integrate_coords(field, system, coords_of(system, x0), t_end, step, method);
}

Trajectory integrate_points(const CoordField& field, const CoordinateSystem& system,
                            const SpacePoint& x0, double t_end, double step,
                            const MultilaterationOptions& recover, Method method) {
  const Space& space = system.space();
  if (space.kind != SpaceKind::euclidean && space.kind != SpaceKind::sphere)
    fail(ErrorCode::invalid_input, "point recovery needs a euclidean or sphere space");
  Trajectory traj = integrate_coords(field, system, x0, t_end, step, method);

  SpacePoint guess = x0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    MultilaterationResult res;
    try {
      res = multilaterate(system, traj.coords[k], guess, recover);
    } catch (const Error& e) {
      Trajectory partial = traj;
      partial.times.resize(k);
      partial.coords.resize(k);
      throw IntegrationError(e.code(), std::string("point recovery failed at t = ") +
                                           std::to_string(traj.times[k]) + ": " + e.what(),
                             std::move(partial));
    }
    SpacePoint p = std::move(res.point);
    if (!member(space, p)) {
      auto alt = mirror_hint(space, p);
      if (alt && member(space, *alt)) {
        p = std::move(*alt);
      } else {
        traj.times.resize(k);
        traj.coords.resize(k);
        traj.status = TrajectoryStatus::stopped_domain;
        return traj;
      }
    }
    guess = p;
    traj.points.push_back(std::move(p));
    traj.residuals.push_back(res.residual);
  }
  return traj;
}

SphereVelocity realize_on_sphere(const CoordField& field, const CoordinateSystem& system,
                                 const SpacePoint& x) {
  if (system.space().kind != SpaceKind::sphere)
    fail(ErrorCode::invalid_input, "realize_on_sphere needs the sphere space");
  if (system.size() < 2) fail(ErrorCode::invalid_input, "need coordinatizing points a and b");
  const MetricCoords coords = coords_of(system, x);
  const Vec prescribed = eval_velocity(field, coords.values);

  const auto p = as3(x);
  const auto ga = sphere_gradient(p, as3(system.point(0)));
  const auto gb = sphere_gradient(p, as3(system.point(1)));

  // Orthonormal tangent basis (t1, t2) at x.
  std::array<double, 3> seed{1.0, 0.0, 0.0};
  if (std::abs(p[0]) > 0.9) seed = {0.0, 1.0, 0.0};
  const double sd = dot3(seed, p);
  std::array<double, 3> t1{seed[0] - sd * p[0], seed[1] - sd * p[1], seed[2] - sd * p[2]};
  const double n1 = std::sqrt(dot3(t1, t1));
  for (double& v : t1) v /= n1;
  const std::array<double, 3> t2{p[1] * t1[2] - p[2] * t1[1], p[2] * t1[0] - p[0] * t1[2],
                                 p[0] * t1[1] - p[1] * t1[0]};

  Eigen::Matrix2d M;
  M << dot3(ga, t1), dot3(ga, t2), dot3(gb, t1), dot3(gb, t2);
  const Eigen::Vector2d rhs(prescribed[0], prescribed[1]);
  Eigen::Vector2d sol;
  if (std::abs(M.determinant()) > 1e-10) {
    sol = M.partialPivLu().solve(rhs);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix2d> cod(M);
    cod.setThreshold(1e-10);
    sol = cod.solve(rhs);
    if ((M * sol - rhs).norm() > 1e-10)
      fail(ErrorCode::degenerate,
           "prescribed rates are not realizable: distance gradients to a and b align");
  }

  SphereVelocity out;
  for (std::size_t i = 0; i < 3; ++i) out.ambient[i] = sol[0] * t1[i] + sol[1] * t2[i];
  for (std::size_t k = 0; k < system.size(); ++k) {
    const auto c = as3(system.point(k));
    const double d = std::clamp(dot3(p, c), -1.0, 1.0);
    if (std::sqrt(std::max(0.0, 1.0 - d * d)) < 1e-12) {
      out.induced.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      out.induced.push_back(dot3(out.ambient, sphere_gradient(p, c)));
    }
  }
  return out;
}

Trajectory integrate_sphere_flow(const CoordField& field, const CoordinateSystem& system,
                                 const SpacePoint& x0, double t_end, double step) {
  validate_point(system.space(), x0);
  const auto times = time_grid(t_end, step);
  Trajectory traj;
  traj.step = step;
  traj.method = Method::rk4;
  traj.times.push_back(0.0);
  traj.coords.push_back(coords_of(system, x0));
  traj.points.push_back(x0);
  traj.residuals.push_back(0.0);

  auto rhs = [&](const Vec& y) {
    const double n = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    const SpacePoint unit{y[0] / n, y[1] / n, y[2] / n};
    const auto v = realize_on_sphere(field, system, unit);
    return Vec{v.ambient[0], v.ambient[1], v.ambient[2]};
  };
  Vec y = x0.values;
  for (std::size_t k = 1; k < times.size(); ++k) {
    Vec next;
    try {
      next = advance(rhs, y, times[k] - times[k - 1], Method::rk4);
    } catch (const Error& e) {
      throw IntegrationError(e.code(), e.what(), std::move(traj));
    }
    const double n = std::sqrt(next[0] * next[0] + next[1] * next[1] + next[2] * next[2]);
    for (double& v : next) v /= n;
    SpacePoint p(next);
    traj.times.push_back(times[k]);
    traj.coords.push_back(coords_of(system, p));
    traj.points.push_back(std::move(p));
    traj.residuals.push_back(0.0);
    y = std::move(next);
  }
  return traj;
}

LipschitzEstimate lipschitz_estimate(const CoordField& field, const CoordinateSystem& system,
                                     const std::vector<SpacePoint>& samples) {
  if (samples.size() < 2) fail(ErrorCode::invalid_input, "need at least two samples");
  std::vector<TangentRep> reps;
  reps.reserve(samples.size());
  for (const auto& s : samples) reps.push_back(eval_field(field, coords_of(system, s)));

  LipschitzEstimate best;
  bool any = false;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (std::size_t j = i + 1; j < reps.size(); ++j) {
      const double dc = sup_distance(reps[i].base.values, reps[j].base.values);
      if (dc <= 1e-9)
        fail(ErrorCode::invalid_input, "samples " + std::to_string(i) + " and " +
                                           std::to_string(j) + " are not separated by d_C");
      const double ratio = tangent_metric(reps[i], reps[j]) / dc;
      if (!any || ratio > best.value) {
        best = {ratio, i, j};
        any = true;
      }
    }
  }
  return best;
}

ScalarFunction mcshane_extend(std::vector<std::pair<EmbeddedPoint, double>> values, double K) {
  if (values.empty()) fail(ErrorCode::invalid_input, "no data to extend");
  if (!(K >= 0)) fail(ErrorCode::invalid_input, "Lipschitz constant must be nonnegative");
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      const double dist = sup_distance(values[i].first.values, values[j].first.values);
      const double gap = std::abs(values[i].second - values[j].second);
      const double slack = 1e-12 * (1.0 + std::abs(values[i].second) + std::abs(values[j].second));
      if (gap > K * dist + slack) {
        std::ostringstream os;
        os << "data is not " << K << "-Lipschitz: points " << i << " and " << j << " have value gap "
           << gap << " at distance " << dist;
        fail(ErrorCode::invalid_input, os.str());
      }
    }
  }
  return [values = std::move(values), K](const EmbeddedPoint& x) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [y, fy] : values) best = std::max(best, fy - K * sup_distance(x.values, y.values));
    return best;
  };
}

VectorFunction mcshane_extend_vector(
    const std::vector<std::pair<EmbeddedPoint, std::vector<double>>>& values, double K) {
  if (values.empty()) fail(ErrorCode::invalid_input, "no data to extend");
  const std::size_t dim = values.front().second.size();
  std::vector<ScalarFunction> parts;
  for (std::size_t c = 0; c < dim; ++c) {
    std::vector<std::pair<EmbeddedPoint, double>> scalar;
    scalar.reserve(values.size());
    for (const auto& [p, v] : values) {
      if (v.size() != dim) fail(ErrorCode::invalid_input, "vector data of mixed lengths");
      scalar.emplace_back(p, v[c]);
    }
    parts.push_back(mcshane_extend(std::move(scalar), K));
  }
  return [parts = std::move(parts)](const EmbeddedPoint& x) {
    std::vector<double> out;
    out.reserve(parts.size());
    for (const auto& f : parts) out.push_back(f(x));
    return out;
  };
}

VectorFunction cutoff(VectorFunction f, EmbeddedPoint center, double r) {
  if (!(r > 0)) fail(ErrorCode::invalid_input, "cutoff radius must be positive");
  const std::size_t dim = f(center).size();
  return [f = std::move(f), center = std::move(center), r, dim](const EmbeddedPoint& x) {
    const double rho = sup_distance(x.values, center.values);
    if (rho >= r) return std::vector<double>(dim, 0.0);
    auto v = f(x);
    if (rho >= r / 2) {
      const double scale = 2.0 - (2.0 / r) * rho;
      for (double& c : v) c *= scale;
    }
    return v;
  };
}

VectorFunction embedded_field(const CoordField& field, const CoordinateSystem& system) {
  std::vector<double> offsets;
  for (std::size_t k = 0; k < system.size(); ++k) offsets.push_back(system.base_offset(k));
  return [field, offsets = std::move(offsets)](const EmbeddedPoint& w) {
    std::vector<double> coords(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) coords[k] = w[k] + offsets[k];
    return eval_velocity(field, coords);
  };
}

const char* to_string(LawKind k) noexcept {
  switch (k) {
    case LawKind::sphere: return "sphere";
    case LawKind::ellipsoid: return "ellipsoid";
    case LawKind::hyperboloid: return "hyperboloid";
  }
  return "?";
}

double ConservationLaw::quantity(std::span<const double> coords) const {
  switch (kind) {
    case LawKind::sphere: return coords[i];
    case LawKind::ellipsoid: return coords[i] + coords[j];
    case LawKind::hyperboloid: return coords[i] - coords[j];
  }
  return 0.0;
}

std::string ConservationLaw::describe(const std::vector<std::string>& names) const {
  const std::string& a = names.at(i);
  switch (kind) {
    case LawKind::sphere: return "x_" + a + " conserved (sphere, center " + a + ")";
    case LawKind::ellipsoid:
      return "x_" + a + " + x_" + names.at(j) + " conserved (ellipsoid, foci " + a + "," +
             names.at(j) + ")";
    case LawKind::hyperboloid:
      return "x_" + a + " - x_" + names.at(j) + " conserved (hyperboloid, foci " + a + "," +
             names.at(j) + ")";
  }
  return "?";
}

std::vector<ConservationLaw> conserved_quantities(const CoordField& field,
                                                  const std::vector<MetricCoords>& probes,
                                                  double tol) {
  const std::size_t n = field.size();
  if (n < 2) fail(ErrorCode::invalid_input, "need at least two coordinates");
  if (probes.empty()) fail(ErrorCode::invalid_input, "need at least one probe");
  std::vector<Vec> vel;
  vel.reserve(probes.size());
  for (const auto& p : probes) vel.push_back(eval_velocity(field, p.values));

  auto holds = [&](auto pred) {
    return std::all_of(vel.begin(), vel.end(), [&](const Vec& v) { return pred(v); });
  };
  std::vector<ConservationLaw> laws;
  for (std::size_t i = 0; i < n; ++i) {
    if (holds([&](const Vec& v) { return std::abs(v[i]) <= tol; }))
      laws.push_back({LawKind::sphere, i, i});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (holds([&](const Vec& v) { return std::abs(v[i] + v[j]) <= tol; }))
        laws.push_back({LawKind::ellipsoid, i, j});
      if (holds([&](const Vec& v) { return std::abs(v[i] - v[j]) <= tol; }))
        laws.push_back({LawKind::hyperboloid, i, j});
    }
  }
  return laws;
}

std::vector<MetricCoords> random_probes(const CoordinateSystem& system, std::size_t count,
                                        std::uint64_t seed, double inflate) {
  std::vector<MetricCoords> probes;
  for (const auto& p : sample_points(system, count, seed, inflate)) probes.push_back(coords_of(system, p));
  return probes;
}

}  // namespace metrikos
