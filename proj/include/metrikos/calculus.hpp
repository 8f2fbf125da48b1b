#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "metrikos/metric_core.hpp"

namespace metrikos {

struct Curve {
  std::function<SpacePoint(double)> map;
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();

  SpacePoint operator()(double t) const;
};

/// Forward coordinate derivatives at a base point; the pi-image of a
/// tangent class.
struct TangentRep {
  MetricCoords base;
  std::vector<double> velocity;
  double speed_bound = 0.0;
};

TangentRep make_tangent(MetricCoords base, std::vector<double> velocity);

struct DerivativeOptions {
  /// Decreasing positive step sizes; default 1e-2 * 2^-k, k = 0..12.
  std::vector<double> h_seq;
  double tol = 1e-6;
  bool richardson = true;
};

std::vector<double> default_h_seq();

struct ForwardDerivative {
  TangentRep tangent;
  std::vector<bool> converged;  // per coordinate
  bool all_converged() const;
};

/// Per-coordinate limits of (phi_c(t+h) - phi_c(t)) / h over the step
/// sequence, with one Richardson extrapolation step.
ForwardDerivative forward_derivative(const Curve& curve, const CoordinateSystem& system, double t,
                                     const DerivativeOptions& opts = {});

enum class Differentiability { differentiable, non_differentiable, indeterminate };
const char* to_string(Differentiability d) noexcept;

struct CentralDerivative {
  TangentRep tangent;            // velocity from the right-hand limit
  std::vector<double> left;      // extrapolated backward quotients
  std::vector<double> right;     // extrapolated forward quotients
  std::vector<Differentiability> flags;
};

/// Left and right quotients per coordinate. A coordinate is differentiable
/// when both sides converge and agree within tol, non-differentiable when
/// they differ by more than 100 tol, indeterminate otherwise.
CentralDerivative central_derivative(const Curve& curve, const CoordinateSystem& system, double t,
                                     const DerivativeOptions& opts = {});

enum class Tangency { tangent, not_tangent, indeterminate };
const char* to_string(Tangency t) noexcept;

Tangency tangency_test(const Curve& first, const Curve& second, const CoordinateSystem& system,
                       double t0, double tol, const DerivativeOptions& opts = {});

/// max(sup |u.base - v.base|, sup |u.velocity - v.velocity|).
double tangent_metric(const TangentRep& u, const TangentRep& v);

/// Closed-form coordinate derivative of t -> indicator of [t, t+1] with
/// respect to a continuous grid function c: (c(t) - c(t+1)) / phi_c(t).
double char_shift_derivative(const Space& grid_space, const SpacePoint& c, double t);

}  // namespace metrikos
