#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "metrikos/fields.hpp"

namespace metrikos {

/// Closed set in R^C under the sup-norm, either a finite cloud or the zero
/// set of a residual function. Sets are frame-agnostic: the caller decides
/// whether points are metric coordinates or embedded points.
struct CoordSet {
  enum class Kind { sampled, implicit };
  using Residual = std::function<double(std::span<const double>)>;

  Kind kind = Kind::sampled;
  std::vector<std::vector<double>> cloud;
  double resolution = 0.0;  // cloud spacing, reported alongside residuals
  Residual residual;
  /// distance ~ |residual| / calibration; when unset, the l1 norm of the
  /// residual's numerical gradient (the dual of the sup-norm) is used.
  std::optional<double> calibration;

  static CoordSet sampled(std::vector<std::vector<double>> cloud, double resolution = 0.0);
  static CoordSet implicit(Residual residual, std::optional<double> calibration = std::nullopt,
                           std::vector<std::vector<double>> cloud = {});
  /// {w : law.quantity(w) = value}, with exact sup-norm calibration.
  static CoordSet level_set(const ConservationLaw& law, double value);
  /// Closed sup-norm ball.
  static CoordSet sup_ball(std::vector<double> center, double radius);
};

/// inf over S of |w - s|_inf (implicit sets: first-order estimate, capped by
/// the cloud distance when a cloud is attached).
double set_distance(const CoordSet& set, std::span<const double> w);

/// (dist(w + h V(w), S) - dist(w, S)) / h.
double nagumo_residual(const VectorFunction& field, const CoordSet& set,
                       std::span<const double> w, double h);

std::vector<double> default_nagumo_h_seq();

struct NagumoSample {
  double limsup = 0.0;    // max residual over the tail half of h_seq
  double distance = 0.0;  // dist(w, S)
  double margin = 0.0;    // K dist + tol - limsup; negative means violation
};

struct NagumoReport {
  std::vector<NagumoSample> samples;
  std::vector<std::size_t> violations;
  double max_limsup = 0.0;
  double resolution = 0.0;
  bool passed() const noexcept { return violations.empty(); }
};

NagumoReport nagumo_check(const VectorFunction& field, const CoordSet& set,
                          const std::vector<std::vector<double>>& samples,
                          const std::vector<double>& h_seq, double K, double tol);

struct InvarianceResult {
  bool invariant = true;
  std::optional<std::size_t> first_exit;
  double max_distance = 0.0;
};

InvarianceResult invariance_test(const Trajectory& trajectory, const CoordSet& set, double tol);

}  // namespace metrikos
