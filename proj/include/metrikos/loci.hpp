#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "metrikos/invariance.hpp"
#include "metrikos/metric_core.hpp"

namespace metrikos {

enum class LocusKind { sphere, ellipsoid, hyperboloid, cylinder, cone, plane, segment, ray, line };

std::string_view to_string(LocusKind kind) noexcept;
std::optional<LocusKind> locus_kind_from_string(std::string_view name);

/// Geometric locus written in metric coordinates. `i` and `j` index C;
/// `param` is the radius r (sphere, ellipsoid, hyperboloid), the Heron area
/// r (cylinder of radius 2r/d(a,b)) or the angle theta (cone). Plane,
/// segment, ray and line ignore it.
struct Locus {
  LocusKind kind = LocusKind::sphere;
  std::size_t i = 0;
  std::size_t j = 1;
  double param = 0.0;
};

/// Throws empty_locus when the parameters describe an empty set and
/// invalid_input for malformed loci.
void validate_locus(const Locus& locus, const CoordinateSystem& system);

struct LocusEvaluation {
  double residual = 0.0;
  /// Ray/line: 0 when the x_a + x_b branch matched, 1 for x_a - x_b.
  int branch = 0;
};

LocusEvaluation locus_evaluate(const Locus& locus, const MetricCoords& coords,
                               const CoordinateSystem& system);
double locus_residual(const Locus& locus, const MetricCoords& coords,
                      const CoordinateSystem& system);
bool locus_membership(const Locus& locus, const MetricCoords& coords,
                      const CoordinateSystem& system, double tol);

struct LocusSampling {
  double inflate = 3.0;
  bool members_only = false;
  std::size_t attempts_per_point = 200;
};

/// Seeded random points projected onto the locus by Newton steps along the
/// residual gradient in ambient space; each has |residual| <= 1e-8.
std::vector<SpacePoint> sample_locus(const Locus& locus, const CoordinateSystem& system,
                                     std::size_t count, std::uint64_t seed,
                                     const LocusSampling& opts = {});

/// The locus as an implicit set in metric-coordinate space.
CoordSet locus_set(const Locus& locus, const CoordinateSystem& system);

}  // namespace metrikos
