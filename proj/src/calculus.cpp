#include "metrikos/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "metrikos/error.hpp"

namespace metrikos {

namespace {

constexpr double kNonDiffFactor = 100.0;

MetricCoords coords_at(const Curve& curve, const CoordinateSystem& system, double t) {
  SpacePoint p;
  try {
    p = curve(t);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::evaluation_failure, std::string("curve evaluation failed: ") + e.what());
  }
  return coords_of(system, p);
}

void check_h_seq(const std::vector<double>& h) {
  if (h.empty()) fail(ErrorCode::invalid_input, "empty step sequence");
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(h[k] > 0)) fail(ErrorCode::invalid_input, "step sizes must be positive");
    if (k > 0 && !(h[k] < h[k - 1]))
      fail(ErrorCode::invalid_input, "step sizes must be strictly decreasing");
  }
}

struct OneSided {
  std::vector<double> value;
  std::vector<bool> converged;
};

// sign = +1: forward quotients (f(t+h) - f(t))/h; sign = -1: backward
// quotients (f(t) - f(t-h))/h.
OneSided one_sided(const Curve& curve, const CoordinateSystem& system, double t,
                   const MetricCoords& f0, const DerivativeOptions& opts,
                   const std::vector<double>& h_seq, double sign) {
  const std::size_t n = system.size();
  std::vector<std::vector<double>> est;  // est[k][coord]
  std::vector<double> prev_q;
  for (std::size_t k = 0; k < h_seq.size(); ++k) {
    const double h = h_seq[k];
    const MetricCoords fh = coords_at(curve, system, t + sign * h);
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = sign * (fh[i] - f0[i]) / h;
    if (opts.richardson && k > 0) {
      const double rho = h_seq[k - 1] / h;
      std::vector<double> r(n);
      for (std::size_t i = 0; i < n; ++i) r[i] = (rho * q[i] - prev_q[i]) / (rho - 1.0);
      est.push_back(std::move(r));
    } else if (!opts.richardson) {
      est.push_back(q);
    }
    prev_q = std::move(q);
  }
  OneSided out;
  if (est.empty()) {
    out.value = prev_q;
    out.converged.assign(n, false);
    return out;
  }
  out.value = est.back();
  out.converged.assign(n, false);
  if (est.size() >= 2) {
    const auto& before = est[est.size() - 2];
    for (std::size_t i = 0; i < n; ++i)
      out.converged[i] = std::isfinite(out.value[i]) && std::abs(out.value[i] - before[i]) < opts.tol;
  }
  return out;
}

}  // namespace

SpacePoint Curve::operator()(double t) const {
  if (t < t_min || t > t_max)
    fail(ErrorCode::invalid_input, "curve parameter " + std::to_string(t) + " outside domain");
  return map(t);
}

TangentRep make_tangent(MetricCoords base, std::vector<double> velocity) {
  TangentRep rep;
  rep.base = std::move(base);
  rep.velocity = std::move(velocity);
  for (double v : rep.velocity) {
    if (!std::isfinite(v)) fail(ErrorCode::evaluation_failure, "non-finite velocity");
    rep.speed_bound = std::max(rep.speed_bound, std::abs(v));
  }
  return rep;
}

std::vector<double> default_h_seq() {
  std::vector<double> h;
  for (int k = 0; k <= 12; ++k) h.push_back(1e-2 * std::ldexp(1.0, -k));
  return h;
}

bool ForwardDerivative::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](bool b) { return b; });
}

ForwardDerivative forward_derivative(const Curve& curve, const CoordinateSystem& system, double t,
                                     const DerivativeOptions& opts) {
  const auto h_seq = opts.h_seq.empty() ? default_h_seq() : opts.h_seq;
  check_h_seq(h_seq);
  if (t < curve.t_min || t + h_seq.front() > curve.t_max)
    fail(ErrorCode::invalid_input, "forward difference leaves the curve domain");
  const MetricCoords f0 = coords_at(curve, system, t);
  OneSided right = one_sided(curve, system, t, f0, opts, h_seq, 1.0);

  ForwardDerivative out;
  out.converged = right.converged;
  // Non-convergent coordinates may carry huge quotients; the tangent keeps
  // them but speed_bound only reflects finite values.
  out.tangent.base = f0;
  out.tangent.velocity = right.value;
  for (double v : right.value) {
    if (std::isfinite(v)) out.tangent.speed_bound = std::max(out.tangent.speed_bound, std::abs(v));
  }
  return out;
}

const char* to_string(Differentiability d) noexcept {
  switch (d) {
    case Differentiability::differentiable: return "differentiable";
    case Differentiability::non_differentiable: return "non_differentiable";
    case Differentiability::indeterminate: return "indeterminate";
  }
  return "?";
}

CentralDerivative central_derivative(const Curve& curve, const CoordinateSystem& system, double t,
                                     const DerivativeOptions& opts) {
  const auto h_seq = opts.h_seq.empty() ? default_h_seq() : opts.h_seq;
  check_h_seq(h_seq);
  if (t - h_seq.front() < curve.t_min || t + h_seq.front() > curve.t_max)
    fail(ErrorCode::invalid_input, "central difference leaves the curve domain");
  const MetricCoords f0 = coords_at(curve, system, t);
  OneSided right = one_sided(curve, system, t, f0, opts, h_seq, 1.0);
  OneSided left = one_sided(curve, system, t, f0, opts, h_seq, -1.0);

  CentralDerivative out;
  out.left = left.value;
  out.right = right.value;
  out.tangent.base = f0;
  out.tangent.velocity = right.value;
  for (std::size_t i = 0; i < system.size(); ++i) {
    if (std::isfinite(right.value[i]))
      out.tangent.speed_bound = std::max(out.tangent.speed_bound, std::abs(right.value[i]));
    Differentiability flag = Differentiability::indeterminate;
    if (left.converged[i] && right.converged[i]) {
      const double gap = std::abs(left.value[i] - right.value[i]);
      if (gap <= opts.tol) {
        flag = Differentiability::differentiable;
      } else if (gap > kNonDiffFactor * opts.tol) {
        flag = Differentiability::non_differentiable;
      }
    }
    out.flags.push_back(flag);
  }
  return out;
}

const char* to_string(Tangency t) noexcept {
  switch (t) {
    case Tangency::tangent: return "tangent";
    case Tangency::not_tangent: return "not_tangent";
    case Tangency::indeterminate: return "indeterminate";
  }
  return "?";
}

Tangency tangency_test(const Curve& first, const Curve& second, const CoordinateSystem& system,
                       double t0, double tol, const DerivativeOptions& opts) {
  const auto a = forward_derivative(first, system, t0, opts);
  const auto b = forward_derivative(second, system, t0, opts);
  if (!a.all_converged() || !b.all_converged()) return Tangency::indeterminate;
  if (sup_distance(a.tangent.base.values, b.tangent.base.values) > tol) return Tangency::not_tangent;
  if (sup_distance(a.tangent.velocity, b.tangent.velocity) > tol) return Tangency::not_tangent;
  return Tangency::tangent;
}

double tangent_metric(const TangentRep& u, const TangentRep& v) {
  if (u.base.size() != v.base.size() || u.velocity.size() != v.velocity.size() ||
      u.base.size() != u.velocity.size())
    fail(ErrorCode::invalid_input, "tangent representatives index different coordinate sets");
  return std::max(sup_distance(u.base.values, v.base.values),
                  sup_distance(u.velocity, v.velocity));
}

double char_shift_derivative(const Space& grid_space, const SpacePoint& c, double t) {
  if (grid_space.kind != SpaceKind::grid_function)
    fail(ErrorCode::invalid_input, "char_shift_derivative needs a grid function space");
  validate_point(grid_space, c);
  const SpacePoint phi = indicator(grid_space, t, t + 1.0);
  const double phi_c = distance(grid_space, phi, c);
  if (phi_c == 0.0)
    fail(ErrorCode::division_by_zero, "curve passes through the coordinate point");
  return (evaluate_at(grid_space, c, t) - evaluate_at(grid_space, c, t + 1.0)) / phi_c;
}

}  // namespace metrikos
