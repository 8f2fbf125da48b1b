#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "metrikos/calculus.hpp"
#include "metrikos/conversion.hpp"
#include "metrikos/metric_core.hpp"

namespace metrikos {

/// One scalar component F_k(x_C) per coordinatizing point.
struct CoordField {
  using Component = std::function<double(std::span<const double>)>;

  std::vector<Component> components;
  std::string label;

  std::size_t size() const noexcept { return components.size(); }

  static CoordField constant(std::vector<double> values, std::string label = {});
};

/// Velocity F(x_C) of the field; throws on failing or non-finite components.
TangentRep eval_field(const CoordField& field, const MetricCoords& coords);
std::vector<double> eval_velocity(const CoordField& field, std::span<const double> coords);

enum class Method { euler, rk4 };
enum class TrajectoryStatus { completed, stopped_infeasible, stopped_domain };

const char* to_string(Method m) noexcept;
const char* to_string(TrajectoryStatus s) noexcept;

struct Trajectory {
  std::vector<double> times;
  std::vector<MetricCoords> coords;
  std::vector<SpacePoint> points;  // empty unless points were recovered
  std::vector<double> residuals;   // multilateration residual per recovered point
  double step = 0.0;
  Method method = Method::rk4;
  TrajectoryStatus status = TrajectoryStatus::completed;

  std::size_t size() const noexcept { return times.size(); }
  bool has_points() const noexcept { return !points.empty(); }
};

/// Raised when integration fails part-way; carries what was computed.
class IntegrationError : public Error {
 public:
  IntegrationError(ErrorCode code, const std::string& what, Trajectory partial)
      : Error(code, what), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

inline constexpr double kFeasibilityGuardTol = 1e-6;

/// Integrates the field in coordinate space R^C from coords_of(x0). Stops
/// with stopped_infeasible when an accepted step leaves the feasible region.
Trajectory integrate_coords(const CoordField& field, const CoordinateSystem& system,
                            const SpacePoint& x0, double t_end, double step,
                            Method method = Method::rk4);
Trajectory integrate_coords(const CoordField& field, const CoordinateSystem& system,
                            const MetricCoords& start, double t_end, double step,
                            Method method = Method::rk4);

/// integrate_coords followed by multilateration of every state, each warm
/// started from the previous point. A recovered point outside X is replaced
/// by its mirror representative when the subset provides one; otherwise the
/// trajectory ends with stopped_domain.
Trajectory integrate_points(const CoordField& field, const CoordinateSystem& system,
                            const SpacePoint& x0, double t_end, double step,
                            const MultilaterationOptions& recover = {},
                            Method method = Method::rk4);

struct SphereVelocity {
  std::array<double, 3> ambient{};
  std::vector<double> induced;  // u . grad d(., c) for every c in C
};

/// Tangent vector u at x on the unit sphere with prescribed rates
/// d/dt d(x, a) = F_0(x_C) and d/dt d(x, b) = F_1(x_C) for a = C[0], b = C[1].
/// The remaining components of the field are ignored; the induced rates are
/// reported instead.
SphereVelocity realize_on_sphere(const CoordField& field, const CoordinateSystem& system,
                                 const SpacePoint& x);

/// Ambient RK4 of realize_on_sphere velocities with renormalization after
/// every step.
Trajectory integrate_sphere_flow(const CoordField& field, const CoordinateSystem& system,
                                 const SpacePoint& x0, double t_end, double step);

struct LipschitzEstimate {
  double value = 0.0;
  std::size_t first = 0;
  std::size_t second = 0;
};

/// max over sample pairs of d_C^T(V(x), V(y)) / d_C(x, y); a lower bound on
/// the field's Lipschitz constant.
LipschitzEstimate lipschitz_estimate(const CoordField& field, const CoordinateSystem& system,
                                     const std::vector<SpacePoint>& samples);

using ScalarFunction = std::function<double(const EmbeddedPoint&)>;
using VectorFunction = std::function<std::vector<double>(const EmbeddedPoint&)>;

/// f(x) = sup_y { f(y) - K |x - y|_inf } over the supplied data.
ScalarFunction mcshane_extend(std::vector<std::pair<EmbeddedPoint, double>> values, double K);

/// Coordinate-wise McShane extension of vector data.
VectorFunction mcshane_extend_vector(
    const std::vector<std::pair<EmbeddedPoint, std::vector<double>>>& values, double K);

/// f inside the sup-ball of radius r/2, zero outside radius r, and
/// (2 - (2/r)|x - center|) f(x) in between.
VectorFunction cutoff(VectorFunction f, EmbeddedPoint center, double r);

/// The field transferred to embedded points: w -> F(w + d(., base)).
VectorFunction embedded_field(const CoordField& field, const CoordinateSystem& system);

enum class LawKind { sphere, ellipsoid, hyperboloid };
const char* to_string(LawKind k) noexcept;

/// sphere: x_i conserved; ellipsoid: x_i + x_j; hyperboloid: x_i - x_j.
struct ConservationLaw {
  LawKind kind = LawKind::sphere;
  std::size_t i = 0;
  std::size_t j = 0;

  double quantity(std::span<const double> coords) const;
  std::string describe(const std::vector<std::string>& names) const;
  bool operator==(const ConservationLaw&) const = default;
};

std::vector<ConservationLaw> conserved_quantities(const CoordField& field,
                                                  const std::vector<MetricCoords>& probes,
                                                  double tol = 1e-10);

/// Coordinates of `count` seeded random points in the bounding box of C
/// inflated by `inflate` times its diameter (sphere: random unit vectors).
std::vector<MetricCoords> random_probes(const CoordinateSystem& system, std::size_t count,
                                        std::uint64_t seed, double inflate = 3.0);

}  // namespace metrikos
