#include "metrikos/spaces.hpp"

#include <algorithm>
#include <cmath>

#include "metrikos/error.hpp"

namespace metrikos {

namespace {

constexpr double kSphereNormTol = 1e-12;

bool in_strips(double y) {
  if (y > 0.0 && y < 1.0) return true;
  if (y >= 2.0) return static_cast<long long>(std::floor(y)) % 2 == 0;
  if (y <= -1.0) return static_cast<long long>(std::floor(-y)) % 2 == 1;
  return false;
}

double sup_dist2(double x, double y, double cx, double cy) {
  return std::max(std::abs(x - cx), std::abs(y - cy));
}

}  // namespace

Space Space::euclidean(std::size_t n, Subset subset) {
  if (n == 0) fail(ErrorCode::invalid_input, "euclidean dimension must be >= 1");
  Space s;
  s.kind = SpaceKind::euclidean;
  s.dim = n;
  s.subset = std::move(subset);
  return s;
}

Space Space::sup_plane(Subset subset) {
  Space s;
  s.kind = SpaceKind::sup_plane;
  s.dim = 2;
  s.subset = std::move(subset);
  return s;
}

Space Space::discrete(std::size_t point_count) {
  if (point_count == 0) fail(ErrorCode::invalid_input, "discrete space needs at least one point");
  Space s;
  s.kind = SpaceKind::discrete;
  s.dim = point_count;
  return s;
}

Space Space::sphere() {
  Space s;
  s.kind = SpaceKind::sphere;
  s.dim = 3;
  return s;
}

Space Space::grid_function(std::vector<double> grid) {
  if (grid.size() < 2) fail(ErrorCode::invalid_input, "grid needs at least two nodes");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]))
      fail(ErrorCode::invalid_input, "grid must be strictly increasing");
  }
  Space s;
  s.kind = SpaceKind::grid_function;
  s.dim = grid.size();
  s.weights.assign(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = grid[i] - grid[i - 1];
    s.weights[i - 1] += 0.5 * h;
    s.weights[i] += 0.5 * h;
  }
  s.grid = std::move(grid);
  return s;
}

Space Space::grid_function(double lo, double hi, std::size_t cells) {
  if (!(hi > lo) || cells == 0) fail(ErrorCode::invalid_input, "bad grid bounds");
  std::vector<double> g(cells + 1);
  const double h = (hi - lo) / static_cast<double>(cells);
  for (std::size_t i = 0; i <= cells; ++i) g[i] = lo + h * static_cast<double>(i);
  g.back() = hi;
  return grid_function(std::move(g));
}

std::size_t Space::point_size() const noexcept {
  return kind == SpaceKind::discrete ? 1 : dim;
}

std::string_view to_string(SpaceKind kind) noexcept {
  switch (kind) {
    case SpaceKind::euclidean: return "euclidean";
    case SpaceKind::sup_plane: return "sup_metric_plane";
    case SpaceKind::discrete: return "discrete";
    case SpaceKind::sphere: return "sphere_geodesic";
    case SpaceKind::grid_function: return "grid_function_space";
  }
  return "?";
}

std::string_view to_string(SubsetKind kind) noexcept {
  switch (kind) {
    case SubsetKind::all: return "all";
    case SubsetKind::half_plane: return "half_plane";
    case SubsetKind::half_space: return "half_space";
    case SubsetKind::open_strips: return "open_strips";
    case SubsetKind::slit_regions: return "slit_regions";
    case SubsetKind::sup_two_balls: return "sup_two_balls";
    case SubsetKind::abs_graph: return "abs_graph";
    case SubsetKind::custom_half_space: return "custom_half_space";
  }
  return "?";
}

std::optional<SpaceKind> space_kind_from_string(std::string_view name) {
  for (auto k : {SpaceKind::euclidean, SpaceKind::sup_plane, SpaceKind::discrete,
                 SpaceKind::sphere, SpaceKind::grid_function}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<SubsetKind> subset_kind_from_string(std::string_view name) {
  for (auto k : {SubsetKind::all, SubsetKind::half_plane, SubsetKind::half_space,
                 SubsetKind::open_strips, SubsetKind::slit_regions,
                 SubsetKind::sup_two_balls, SubsetKind::abs_graph,
                 SubsetKind::custom_half_space}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void validate_point(const Space& space, const SpacePoint& x) {
  if (x.size() != space.point_size()) {
    fail(ErrorCode::invalid_input,
         "point has " + std::to_string(x.size()) + " values, space " +
             std::string(to_string(space.kind)) + " expects " +
             std::to_string(space.point_size()));
  }
  for (double v : x.values) {
    if (!std::isfinite(v)) fail(ErrorCode::invalid_input, "point has a non-finite value");
  }
  if (space.kind == SpaceKind::discrete) {
    const double idx = x[0];
    if (idx < 0 || idx != std::floor(idx) || idx >= static_cast<double>(space.dim))
      fail(ErrorCode::invalid_input, "discrete point index out of range");
  }
  if (space.kind == SpaceKind::sphere) {
    const double n = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (std::abs(n - 1.0) > kSphereNormTol)
      fail(ErrorCode::invalid_input, "sphere point is not unit norm");
  }
}

double distance(const Space& space, const SpacePoint& x, const SpacePoint& y) {
  validate_point(space, x);
  validate_point(space, y);
  switch (space.kind) {
    case SpaceKind::euclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < space.dim; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case SpaceKind::sup_plane:
      return std::max(std::abs(x[0] - y[0]), std::abs(x[1] - y[1]));
    case SpaceKind::discrete:
      return x[0] == y[0] ? 0.0 : 1.0;
    case SpaceKind::sphere: {
      const double dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
      return std::acos(std::clamp(dot, -1.0, 1.0));
    }
    case SpaceKind::grid_function: {
      double s = 0.0;
      for (std::size_t i = 0; i < space.dim; ++i) {
        const double d = x[i] - y[i];
        s += space.weights[i] * d * d;
      }
      return std::sqrt(s);
    }
  }
  fail(ErrorCode::internal, "unknown space kind");
}

bool member(const Space& space, const SpacePoint& x) {
  validate_point(space, x);
  const Subset& s = space.subset;
  switch (s.kind) {
    case SubsetKind::all:
      return true;
    case SubsetKind::half_plane:
    case SubsetKind::half_space:
      return x.values.back() > 0.0;
    case SubsetKind::open_strips:
      return in_strips(x[1]);
    case SubsetKind::slit_regions:
      return (x[1] > 1.0 && x[0] != 0.0) || (x[0] == 0.0 && x[1] == -1.0);
    case SubsetKind::sup_two_balls:
      return (sup_dist2(x[0], x[1], 1.0, 1.0) < 0.25 ||
              sup_dist2(x[0], x[1], 0.0, -1.0) < 0.25) &&
             x[0] - x[1] != 1.0;
    case SubsetKind::abs_graph:
      return std::abs(x[0]) <= 1.0 && x[1] == std::abs(x[0]);
    case SubsetKind::custom_half_space: {
      if (s.normal.size() != x.size())
        fail(ErrorCode::invalid_input, "half-space normal has wrong dimension");
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += s.normal[i] * x[i];
      return dot > s.offset;
    }
  }
  return false;
}

std::optional<SpacePoint> mirror_hint(const Space& space, const SpacePoint& x) {
  switch (space.subset.kind) {
    case SubsetKind::open_strips:
    case SubsetKind::slit_regions:
      return SpacePoint{x[0], -x[1]};
    default:
      return std::nullopt;
  }
}

SpacePoint sample_function(const Space& space, const std::function<double(double)>& f) {
  if (space.kind != SpaceKind::grid_function)
    fail(ErrorCode::invalid_input, "sample_function needs a grid function space");
  SpacePoint p;
  p.values.reserve(space.dim);
  for (double t : space.grid) p.values.push_back(f(t));
  return p;
}

SpacePoint indicator(const Space& space, double lo, double hi) {
  if (space.kind != SpaceKind::grid_function)
    fail(ErrorCode::invalid_input, "indicator needs a grid function space");
  // Nodes within a tiny fraction of the spacing count as on the boundary, so
  // shifted intervals that land on nodes up to rounding keep exact support.
  double min_h = space.grid[1] - space.grid[0];
  for (std::size_t i = 2; i < space.grid.size(); ++i)
    min_h = std::min(min_h, space.grid[i] - space.grid[i - 1]);
  const double eps = 1e-9 * min_h;
  return sample_function(space, [=](double t) {
    return (t >= lo - eps && t <= hi + eps) ? 1.0 : 0.0;
  });
}

SpacePoint hat(const Space& space, double center, double half_width, bool normalize) {
  if (!(half_width > 0)) fail(ErrorCode::invalid_input, "hat half width must be positive");
  SpacePoint p = sample_function(space, [=](double t) {
    return std::max(0.0, 1.0 - std::abs(t - center) / half_width);
  });
  if (normalize) {
    double s = 0.0;
    for (std::size_t i = 0; i < space.dim; ++i) s += space.weights[i] * p[i] * p[i];
    if (s <= 0) fail(ErrorCode::invalid_input, "hat support misses the grid");
    const double n = std::sqrt(s);
    for (double& v : p.values) v /= n;
  }
  return p;
}

double evaluate_at(const Space& space, const SpacePoint& f, double t) {
  if (space.kind != SpaceKind::grid_function)
    fail(ErrorCode::invalid_input, "evaluate_at needs a grid function space");
  const auto& g = space.grid;
  if (t < g.front() || t > g.back()) return 0.0;
  auto it = std::upper_bound(g.begin(), g.end(), t);
  if (it == g.end()) return f.values.back();
  const std::size_t hi = static_cast<std::size_t>(it - g.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - g[lo]) / (g[hi] - g[lo]);
  return (1.0 - w) * f[lo] + w * f[hi];
}

}  // namespace metrikos
