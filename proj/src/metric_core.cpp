#include "metrikos/metric_core.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <functional>
#include <limits>
#include <sstream>

#include "metrikos/error.hpp"

namespace metrikos {

CoordinateSystem::CoordinateSystem(Space space, std::vector<SpacePoint> points,
                                   SpacePoint base_point, std::vector<std::string> names)
    : space_(std::move(space)),
      points_(std::move(points)),
      base_(std::move(base_point)),
      names_(std::move(names)) {
  if (points_.empty()) fail(ErrorCode::invalid_input, "coordinatizing set is empty");
  for (const auto& p : points_) validate_point(space_, p);
  if (!member(space_, base_))
    fail(ErrorCode::invalid_input, "base point is not a member of X");

  const std::size_t n = points_.size();
  if (names_.empty()) {
    for (std::size_t k = 0; k < n; ++k) names_.push_back("c" + std::to_string(k));
  } else if (names_.size() != n) {
    fail(ErrorCode::invalid_input, "coordinate name count does not match point count");
  }

  pair_dist_.assign(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d = distance(space_, points_[a], points_[b]);
      if (d == 0.0) {
        fail(ErrorCode::invalid_input, "coordinatizing points " + names_[a] + " and " +
                                           names_[b] + " coincide");
      }
      pair_dist_[a * n + b] = d;
      pair_dist_[b * n + a] = d;
    }
  }
  base_offset_.reserve(n);
  for (const auto& p : points_) base_offset_.push_back(distance(space_, p, base_));
}

CoordinateSystem CoordinateSystem::without(std::size_t index) const {
  if (index >= points_.size()) fail(ErrorCode::invalid_input, "drop index out of range");
  if (points_.size() < 2)
    fail(ErrorCode::invalid_input, "cannot drop the only coordinatizing point");
  auto pts = points_;
  auto names = names_;
  pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(index));
  names.erase(names.begin() + static_cast<std::ptrdiff_t>(index));
  return CoordinateSystem(space_, std::move(pts), base_, std::move(names));
}

std::optional<std::size_t> CoordinateSystem::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

MetricCoords coords_of(const CoordinateSystem& system, const SpacePoint& x) {
  validate_point(system.space(), x);
  MetricCoords out;
  out.values.reserve(system.size());
  for (const auto& c : system.points()) out.values.push_back(distance(system.space(), x, c));
  return out;
}

double sup_distance(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) fail(ErrorCode::invalid_input, "sup distance: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
  return m;
}

double d_C(const CoordinateSystem& system, const SpacePoint& x, const SpacePoint& y) {
  return sup_distance(coords_of(system, x).values, coords_of(system, y).values);
}

EmbeddedPoint embed_coords(const CoordinateSystem& system, const MetricCoords& coords) {
  if (coords.size() != system.size())
    fail(ErrorCode::invalid_input, "coordinate tuple length does not match C");
  EmbeddedPoint e;
  e.values.reserve(coords.size());
  for (std::size_t k = 0; k < coords.size(); ++k)
    e.values.push_back(coords[k] - system.base_offset(k));
  return e;
}

EmbeddedPoint embed(const CoordinateSystem& system, const SpacePoint& x) {
  return embed_coords(system, coords_of(system, x));
}

const char* to_string(Inequality which) noexcept {
  switch (which) {
    case Inequality::nonnegative: return "nonnegative";
    case Inequality::difference: return "difference";
    case Inequality::sum: return "sum";
  }
  return "?";
}

std::string FeasibilityReport::describe() const {
  if (feasible()) return "feasible";
  std::ostringstream os;
  os << violations.size() << " violation(s):";
  for (const auto& v : violations) {
    os << " [" << to_string(v.inequality) << " " << v.first;
    if (v.second != v.first) os << "," << v.second;
    os << " slack " << v.slack << "]";
  }
  return os.str();
}

FeasibilityReport check_feasible(const CoordinateSystem& system, const MetricCoords& coords,
                                 double tol) {
  const std::size_t n = system.size();
  if (coords.size() != n)
    fail(ErrorCode::invalid_input, "coordinate tuple length does not match C");
  FeasibilityReport report;
  for (std::size_t a = 0; a < n; ++a) {
    if (coords[a] < -tol) report.violations.push_back({a, a, Inequality::nonnegative, coords[a]});
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double dab = system.pair_distance(a, b);
      // rounding allowance for distances computed in floating point
      const double allow =
          tol + 8 * std::numeric_limits<double>::epsilon() *
                    std::max({std::abs(coords[a]), std::abs(coords[b]), dab});
      const double diff_slack = dab - std::abs(coords[a] - coords[b]);
      if (diff_slack < -allow)
        report.violations.push_back({a, b, Inequality::difference, diff_slack});
      const double sum_slack = coords[a] + coords[b] - dab;
      if (sum_slack < -allow) report.violations.push_back({a, b, Inequality::sum, sum_slack});
    }
  }
  return report;
}

std::vector<WitnessPair> verify_coordinatizing(const CoordinateSystem& system,
                                               const std::vector<SpacePoint>& samples,
                                               double tol) {
  if (samples.size() < 2) fail(ErrorCode::invalid_input, "need at least two samples");
  std::vector<MetricCoords> coords;
  coords.reserve(samples.size());
  for (const auto& s : samples) coords.push_back(coords_of(system, s));

  std::vector<WitnessPair> witnesses;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double dc = sup_distance(coords[i].values, coords[j].values);
      if (dc > tol) continue;
      const double d = distance(system.space(), samples[i], samples[j]);
      if (d > tol) witnesses.push_back({i, j, d, dc});
    }
  }
  return witnesses;
}

std::vector<WitnessPair> redundant_point_check(const CoordinateSystem& system,
                                               std::size_t drop_index,
                                               const std::vector<SpacePoint>& samples,
                                               double tol) {
  return verify_coordinatizing(system.without(drop_index), samples, tol);
}

ConvergenceReport compare_convergence(const CoordinateSystem& system,
                                      const std::vector<SpacePoint>& sequence,
                                      const SpacePoint& candidate_limit) {
  if (sequence.empty()) fail(ErrorCode::invalid_input, "sequence is empty");
  ConvergenceReport r;
  const auto limit = coords_of(system, candidate_limit);
  for (const auto& x : sequence) {
    r.dC_gaps.push_back(sup_distance(coords_of(system, x).values, limit.values));
    r.d_gaps.push_back(distance(system.space(), x, candidate_limit));
  }
  return r;
}

Box sampling_box(const CoordinateSystem& system, double inflate) {
  const Space& space = system.space();
  if (space.kind != SpaceKind::euclidean && space.kind != SpaceKind::sup_plane)
    fail(ErrorCode::invalid_input, "sampling box needs a euclidean or sup-metric space");
  const std::size_t n = space.dim;
  Box box{std::vector<double>(n, std::numeric_limits<double>::infinity()),
          std::vector<double>(n, -std::numeric_limits<double>::infinity())};
  for (const auto& c : system.points()) {
    for (std::size_t i = 0; i < n; ++i) {
      box.lo[i] = std::min(box.lo[i], c[i]);
      box.hi[i] = std::max(box.hi[i], c[i]);
    }
  }
  double diameter = 0.0;
  for (std::size_t a = 0; a < system.size(); ++a)
    for (std::size_t b = a + 1; b < system.size(); ++b)
      diameter = std::max(diameter, system.pair_distance(a, b));
  if (diameter == 0.0) diameter = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    box.lo[i] -= inflate * diameter;
    box.hi[i] += inflate * diameter;
  }
  return box;
}

std::vector<SpacePoint> sample_points(const CoordinateSystem& system, std::size_t count,
                                      std::uint64_t seed, double inflate, bool members_only) {
  const Space& space = system.space();
  std::mt19937_64 rng(seed);
  std::vector<SpacePoint> out;
  out.reserve(count);

  std::function<SpacePoint()> draw;
  Box box;
  switch (space.kind) {
    case SpaceKind::euclidean:
    case SpaceKind::sup_plane:
      box = sampling_box(system, inflate);
      draw = [&] {
        SpacePoint p(std::vector<double>(space.dim));
        for (std::size_t i = 0; i < space.dim; ++i)
          p[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(rng);
        return p;
      };
      break;
    case SpaceKind::sphere:
      draw = [&] {
        std::normal_distribution<double> g;
        for (;;) {
          const double x = g(rng), y = g(rng), z = g(rng);
          const double n = std::sqrt(x * x + y * y + z * z);
          if (n > 1e-6) return SpacePoint{x / n, y / n, z / n};
        }
      };
      break;
    case SpaceKind::discrete:
      draw = [&] {
        std::uniform_int_distribution<std::size_t> pick(0, space.dim - 1);
        return SpacePoint{static_cast<double>(pick(rng))};
      };
      break;
    case SpaceKind::grid_function:
      fail(ErrorCode::invalid_input, "random sampling of grid functions is not supported");
  }

  std::size_t attempts = 0;
  const std::size_t budget = 1000 * std::max<std::size_t>(count, 1);
  while (out.size() < count) {
    if (++attempts > budget) fail(ErrorCode::invalid_input, "could not sample points of X");
    SpacePoint p = draw();
    if (members_only && !member(space, p)) continue;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace metrikos
