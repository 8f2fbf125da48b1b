#include "metrikos/loci.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "metrikos/error.hpp"

namespace metrikos {

namespace {

constexpr double kHeronTol = 1e-12;
constexpr double kSampleTol = 1e-8;

bool two_point(LocusKind k) { return k != LocusKind::sphere; }

double heron(double xa, double xb, double d) {
  const double s = (xa + xb + d) / 2.0;
  const double radicand = s * (s - xa) * (s - xb) * (s - d);
  if (radicand < -kHeronTol)
    fail(ErrorCode::infeasible, "negative Heron radicand: coordinates violate the triangle inequality");
  return std::sqrt(std::max(0.0, radicand));
}

LocusEvaluation evaluate_raw(const Locus& L, std::span<const double> x, double d) {
  const double xa = x[L.i];
  const double xb = two_point(L.kind) ? x[L.j] : 0.0;
  switch (L.kind) {
    case LocusKind::sphere: return {xa - L.param, 0};
    case LocusKind::ellipsoid: return {xa + xb - L.param, 0};
    case LocusKind::hyperboloid: return {std::abs(xa - xb) - L.param, 0};
    case LocusKind::cylinder: return {heron(xa, xb, d) - L.param, 0};
    case LocusKind::cone: return {xb * xb - d * d - xa * xa + 2.0 * xa * d * std::cos(L.param), 0};
    case LocusKind::plane: return {xa - xb, 0};
    case LocusKind::segment: return {xa + xb - d, 0};
    case LocusKind::ray: {
      const double plus = xa + xb - d, minus = xa - xb - d;
      return std::abs(plus) <= std::abs(minus) ? LocusEvaluation{plus, 0} : LocusEvaluation{minus, 1};
    }
    case LocusKind::line: {
      const double plus = xa + xb - d, minus = std::abs(xa - xb) - d;
      return std::abs(plus) <= std::abs(minus) ? LocusEvaluation{plus, 0} : LocusEvaluation{minus, 1};
    }
  }
  return {0.0, 0};
}

double pair_d(const Locus& L, const CoordinateSystem& system) {
  return two_point(L.kind) ? system.pair_distance(L.i, L.j) : 0.0;
}

}  // namespace

std::string_view to_string(LocusKind kind) noexcept {
  switch (kind) {
    case LocusKind::sphere: return "sphere";
    case LocusKind::ellipsoid: return "ellipsoid";
    case LocusKind::hyperboloid: return "hyperboloid";
    case LocusKind::cylinder: return "cylinder";
    case LocusKind::cone: return "cone";
    case LocusKind::plane: return "plane";
    case LocusKind::segment: return "segment";
    case LocusKind::ray: return "ray";
    case LocusKind::line: return "line";
  }
  return "?";
}

std::optional<LocusKind> locus_kind_from_string(std::string_view name) {
  for (auto k : {LocusKind::sphere, LocusKind::ellipsoid, LocusKind::hyperboloid,
                 LocusKind::cylinder, LocusKind::cone, LocusKind::plane, LocusKind::segment,
                 LocusKind::ray, LocusKind::line}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void validate_locus(const Locus& L, const CoordinateSystem& system) {
  const std::string name(to_string(L.kind));
  if (L.i >= system.size()) fail(ErrorCode::invalid_input, name + ": index i out of range");
  if (two_point(L.kind)) {
    if (L.j >= system.size()) fail(ErrorCode::invalid_input, name + ": index j out of range");
    if (L.i == L.j) fail(ErrorCode::invalid_input, name + ": needs two distinct points");
  }
  if (!std::isfinite(L.param)) fail(ErrorCode::invalid_input, name + ": parameter is not finite");
  const double d = pair_d(L, system);
  switch (L.kind) {
    case LocusKind::sphere:
      if (L.param < 0) fail(ErrorCode::empty_locus, "sphere: radius must be >= 0");
      break;
    case LocusKind::ellipsoid:
      if (L.param < d)
        fail(ErrorCode::empty_locus, "ellipsoid: r = " + std::to_string(L.param) +
                                         " is below the focal distance " + std::to_string(d));
      break;
    case LocusKind::hyperboloid:
      if (!(L.param > 0 && L.param < d))
        fail(ErrorCode::empty_locus, "hyperboloid: r must satisfy 0 < r < " + std::to_string(d));
      break;
    case LocusKind::cylinder:
      if (L.param < 0) fail(ErrorCode::empty_locus, "cylinder: area parameter must be >= 0");
      break;
    case LocusKind::cone:
      if (!(L.param > 0 && L.param < std::numbers::pi))
        fail(ErrorCode::invalid_input, "cone: angle must lie in (0, pi)");
      break;
    default:
      break;
  }
}

LocusEvaluation locus_evaluate(const Locus& locus, const MetricCoords& coords,
                               const CoordinateSystem& system) {
  validate_locus(locus, system);
  if (coords.size() != system.size())
    fail(ErrorCode::invalid_input, "coordinate tuple length does not match C");
  return evaluate_raw(locus, coords.values, pair_d(locus, system));
}

double locus_residual(const Locus& locus, const MetricCoords& coords,
                      const CoordinateSystem& system) {
  return locus_evaluate(locus, coords, system).residual;
}

bool locus_membership(const Locus& locus, const MetricCoords& coords,
                      const CoordinateSystem& system, double tol) {
  return std::abs(locus_residual(locus, coords, system)) <= tol;
}

std::vector<SpacePoint> sample_locus(const Locus& locus, const CoordinateSystem& system,
                                     std::size_t count, std::uint64_t seed,
                                     const LocusSampling& opts) {
  validate_locus(locus, system);
  const Space& space = system.space();
  if (space.kind != SpaceKind::euclidean && space.kind != SpaceKind::sphere)
    fail(ErrorCode::invalid_input, "locus sampling needs a euclidean or sphere space");
  const bool sphere = space.kind == SpaceKind::sphere;
  const double d = pair_d(locus, system);
  const std::size_t n = space.dim;

  auto normalize = [&](std::vector<double>& y) {
    if (!sphere) return;
    double s = 0.0;
    for (double v : y) s += v * v;
    s = std::sqrt(s);
    for (double& v : y) v /= s;
  };
  auto residual_at = [&](std::vector<double> y) {
    normalize(y);
    return evaluate_raw(locus, coords_of(system, SpacePoint(std::move(y))).values, d).residual;
  };

  std::mt19937_64 rng(seed);
  Box box;
  if (!sphere) box = sampling_box(system, opts.inflate);
  auto draw = [&] {
    std::vector<double> y(n);
    if (sphere) {
      std::normal_distribution<double> g;
      for (double& v : y) v = g(rng);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        y[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(rng);
    }
    normalize(y);
    return y;
  };

  std::vector<SpacePoint> out;
  const std::size_t budget = opts.attempts_per_point * std::max<std::size_t>(count, 1);
  for (std::size_t attempt = 0; attempt < budget && out.size() < count; ++attempt) {
    std::vector<double> y = draw();
    bool ok = false;
    try {
      for (int it = 0; it < 60; ++it) {
        const double r = residual_at(y);
        if (!std::isfinite(r)) break;
        if (std::abs(r) <= 1e-12 * std::max(1.0, d * d)) {
          ok = true;
          break;
        }
        std::vector<double> grad(n);
        double g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double h = 1e-7 * std::max(1.0, std::abs(y[i]));
          auto up = y, down = y;
          up[i] += h;
          down[i] -= h;
          grad[i] = (residual_at(up) - residual_at(down)) / (2 * h);
          g2 += grad[i] * grad[i];
        }
        if (!(g2 > 1e-24)) break;
        for (std::size_t i = 0; i < n; ++i) y[i] -= r * grad[i] / g2;
        normalize(y);
      }
      if (!ok) ok = std::abs(residual_at(y)) <= kSampleTol * 1e-2;
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) continue;
    SpacePoint p(std::move(y));
    if (opts.members_only && !member(space, p)) continue;
    out.push_back(std::move(p));
  }
  if (out.empty())
    fail(ErrorCode::empty_locus, std::string(to_string(locus.kind)) +
                                     ": no point found in the sampling region");
  if (out.size() < count)
    fail(ErrorCode::no_convergence, "found only " + std::to_string(out.size()) + " of " +
                                        std::to_string(count) + " locus points");
  return out;
}

CoordSet locus_set(const Locus& locus, const CoordinateSystem& system) {
  validate_locus(locus, system);
  const double d = pair_d(locus, system);
  return CoordSet::implicit(
      [locus, d](std::span<const double> w) { return evaluate_raw(locus, w, d).residual; });
}

}  // namespace metrikos
