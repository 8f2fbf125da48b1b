#pragma once

#include <cstddef>
#include <vector>

#include "metrikos/error.hpp"
#include "metrikos/metric_core.hpp"

namespace metrikos {

/// Coordinatizing system {e_1, ..., e_n, 0} of R^n; the zero point is last.
CoordinateSystem hilbert_system(std::size_t n);

/// Orthonormal coordinates -> metric coordinates over {e_1..e_n, 0}:
/// w_c = (|w|^2 - 2 w~_c + 1)^(1/2), w_0 = |w|.
MetricCoords hilbert_to_metric(const std::vector<double>& w);

/// Metric coordinates over {e_1..e_n, 0} -> orthonormal coordinates:
/// w~_c = (w_0^2 - w_c^2 + 1) / 2. Throws InfeasibleCoordsError when the
/// tuple violates the triangle inequalities.
std::vector<double> metric_to_hilbert(const MetricCoords& coords);

class InfeasibleCoordsError : public Error {
 public:
  InfeasibleCoordsError(const std::string& what, FeasibilityReport report)
      : Error(ErrorCode::infeasible, what), report_(std::move(report)) {}
  const FeasibilityReport& report() const noexcept { return report_; }

 private:
  FeasibilityReport report_;
};

struct MultilaterationOptions {
  int max_iter = 100;
  double tol = 1e-10;
};

struct MultilaterationResult {
  SpacePoint point;
  int iterations = 0;
  double residual = 0.0;  // max_k |d(x, C[k]) - target[k]|
};

/// Recovers a point from its distances to C by damped Gauss-Newton on
/// r_k(x) = d(x, C[k]) - target[k]. Euclidean and sphere spaces only.
/// When several points realize the target, the initial guess's basin decides.
MultilaterationResult multilaterate(const CoordinateSystem& system, const MetricCoords& target,
                                    const SpacePoint& initial_guess,
                                    const MultilaterationOptions& opts = {});

}  // namespace metrikos
