#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metrikos/spaces.hpp"

namespace metrikos {

/// Distances x_c = d(x, c), indexed parallel to CoordinateSystem::points().
struct MetricCoords {
  std::vector<double> values;

  MetricCoords() = default;
  MetricCoords(std::initializer_list<double> v) : values(v) {}
  explicit MetricCoords(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

/// i(x)_c = x_c - d(c, w) for the system's base point w.
struct EmbeddedPoint {
  std::vector<double> values;

  EmbeddedPoint() = default;
  EmbeddedPoint(std::initializer_list<double> v) : values(v) {}
  explicit EmbeddedPoint(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// The quadruple (M, d, X, C): a space with its subset predicate, an ordered
/// duplicate-free list of coordinatizing points and a base point in X.
class CoordinateSystem {
 public:
  CoordinateSystem(Space space, std::vector<SpacePoint> points, SpacePoint base_point,
                   std::vector<std::string> names = {});

  const Space& space() const noexcept { return space_; }
  const std::vector<SpacePoint>& points() const noexcept { return points_; }
  const SpacePoint& point(std::size_t k) const { return points_.at(k); }
  const SpacePoint& base_point() const noexcept { return base_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return points_.size(); }

  /// d(C[a], C[b]), precomputed.
  double pair_distance(std::size_t a, std::size_t b) const {
    return pair_dist_[a * points_.size() + b];
  }
  /// d(C[k], w), precomputed.
  double base_offset(std::size_t k) const { return base_offset_[k]; }

  /// Same space and base point with C[index] removed.
  CoordinateSystem without(std::size_t index) const;

  std::optional<std::size_t> index_of(const std::string& name) const;

 private:
  Space space_;
  std::vector<SpacePoint> points_;
  SpacePoint base_;
  std::vector<std::string> names_;
  std::vector<double> pair_dist_;
  std::vector<double> base_offset_;
};

MetricCoords coords_of(const CoordinateSystem& system, const SpacePoint& x);

/// sup_c |x_c - y_c|.
double d_C(const CoordinateSystem& system, const SpacePoint& x, const SpacePoint& y);
double sup_distance(const std::vector<double>& u, const std::vector<double>& v);

EmbeddedPoint embed(const CoordinateSystem& system, const SpacePoint& x);
EmbeddedPoint embed_coords(const CoordinateSystem& system, const MetricCoords& coords);

enum class Inequality { nonnegative, difference, sum };
const char* to_string(Inequality which) noexcept;

struct Violation {
  std::size_t first = 0;
  std::size_t second = 0;  // equals `first` for the nonnegativity check
  Inequality inequality = Inequality::nonnegative;
  double slack = 0.0;      // negative: amount by which the inequality fails
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  bool feasible() const noexcept { return violations.empty(); }
  std::string describe() const;
};

/// Checks x_c >= 0, |x_a - x_b| <= d(a,b) and x_a + x_b >= d(a,b) for all
/// coordinatizing points, allowing a violation of at most `tol` plus a few
/// ulps of the operands in the pairwise inequalities.
FeasibilityReport check_feasible(const CoordinateSystem& system, const MetricCoords& coords,
                                 double tol = 0.0);

struct WitnessPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double d = 0.0;
  double dC = 0.0;
};

/// Sample pairs that the coordinatizing set fails to separate. An empty
/// result means only that no counterexample was found among the samples.
std::vector<WitnessPair> verify_coordinatizing(const CoordinateSystem& system,
                                               const std::vector<SpacePoint>& samples,
                                               double tol = 1e-9);

std::vector<WitnessPair> redundant_point_check(const CoordinateSystem& system,
                                               std::size_t drop_index,
                                               const std::vector<SpacePoint>& samples,
                                               double tol = 1e-9);

struct ConvergenceReport {
  std::vector<double> dC_gaps;
  std::vector<double> d_gaps;
};

ConvergenceReport compare_convergence(const CoordinateSystem& system,
                                      const std::vector<SpacePoint>& sequence,
                                      const SpacePoint& candidate_limit);

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Bounding box of C inflated by `inflate` times its diameter on each side
/// (euclidean and sup-metric spaces).
Box sampling_box(const CoordinateSystem& system, double inflate = 3.0);

/// Seeded random points: uniform in sampling_box for vector spaces, uniform
/// on the sphere, uniform indices for discrete spaces. With `members_only`,
/// rejection-samples points of X (gives up after 1000 * count draws).
std::vector<SpacePoint> sample_points(const CoordinateSystem& system, std::size_t count,
                                      std::uint64_t seed, double inflate = 3.0,
                                      bool members_only = false);

}  // namespace metrikos
