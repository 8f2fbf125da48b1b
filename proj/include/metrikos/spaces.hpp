#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metrikos {

/// Ambient representation of a point. Euclidean, sup-metric and sphere
/// points hold Cartesian coordinates; a discrete-space point holds its
/// index as a single value; a grid-function point holds samples at the
/// grid nodes.
struct SpacePoint {
  std::vector<double> values;

  SpacePoint() = default;
  SpacePoint(std::initializer_list<double> v) : values(v) {}
  explicit SpacePoint(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  bool operator==(const SpacePoint&) const = default;
};

enum class SpaceKind { euclidean, sup_plane, discrete, sphere, grid_function };

enum class SubsetKind {
  all,
  half_plane,         // last coordinate > 0, dimension 2
  half_space,         // last coordinate > 0, dimension 3
  open_strips,        // R x ((0,1) u [2n,2n+1) u (-2n-2,-2n-1])
  slit_regions,       // {y > 1, x != 0} u {(0,-1)}
  sup_two_balls,      // sup-balls of radius 1/4 at (1,1), (0,-1) minus line s - t = 1
  abs_graph,          // {(x,|x|) : |x| <= 1}
  custom_half_space,  // normal . x > offset
};

struct Subset {
  SubsetKind kind = SubsetKind::all;
  std::vector<double> normal;
  double offset = 0.0;
};

struct Space {
  SpaceKind kind = SpaceKind::euclidean;
  std::size_t dim = 0;  // ambient dimension, point count or grid size
  std::vector<double> grid;
  std::vector<double> weights;
  Subset subset;

  static Space euclidean(std::size_t n, Subset subset = {});
  static Space sup_plane(Subset subset = {});
  static Space discrete(std::size_t point_count);
  static Space sphere();
  /// Function space on a strictly increasing grid with trapezoid weights.
  static Space grid_function(std::vector<double> grid);
  /// Uniform grid with `cells` cells on [lo, hi].
  static Space grid_function(double lo, double hi, std::size_t cells);

  /// Number of values a SpacePoint of this space carries.
  std::size_t point_size() const noexcept;
};

std::string_view to_string(SpaceKind kind) noexcept;
std::string_view to_string(SubsetKind kind) noexcept;
std::optional<SpaceKind> space_kind_from_string(std::string_view name);
std::optional<SubsetKind> subset_kind_from_string(std::string_view name);

/// Throws Error(invalid_input) when x does not fit the space.
void validate_point(const Space& space, const SpacePoint& x);

double distance(const Space& space, const SpacePoint& x, const SpacePoint& y);

bool member(const Space& space, const SpacePoint& x);

/// Alternative representative of x for subsets whose d_C-identified points
/// live on a mirrored branch (reflection across the first axis); empty when
/// the subset has no such hint.
std::optional<SpacePoint> mirror_hint(const Space& space, const SpacePoint& x);

/// Grid-function helpers.
SpacePoint sample_function(const Space& space,
                           const std::function<double(double)>& f);
SpacePoint indicator(const Space& space, double lo, double hi);
/// Hat function with support [center - half_width, center + half_width],
/// scaled to unit L2 norm under the space's quadrature when `normalize`.
SpacePoint hat(const Space& space, double center, double half_width,
               bool normalize = true);
/// Linear interpolation of grid samples at t; zero outside the grid.
double evaluate_at(const Space& space, const SpacePoint& f, double t);

}  // namespace metrikos
