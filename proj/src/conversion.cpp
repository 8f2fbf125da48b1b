#include "metrikos/conversion.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace metrikos {

namespace {

constexpr double kRadicandTol = 1e-12;
constexpr double kSingularTol = 1e-12;

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::VectorXd residuals(const CoordinateSystem& system, const MetricCoords& target,
                          const SpacePoint& x) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(system.size()));
  for (std::size_t k = 0; k < system.size(); ++k)
    r[static_cast<Eigen::Index>(k)] = distance(system.space(), x, system.point(k)) - target[k];
  return r;
}

// Rows are gradients of x -> d(x, C[k]); sphere rows are tangent projections.
// Rows at a coordinatizing point (gradient undefined) are left zero.
Eigen::MatrixXd jacobian(const CoordinateSystem& system, const SpacePoint& x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(system.size()), n);
  const bool sphere = system.space().kind == SpaceKind::sphere;
  for (std::size_t k = 0; k < system.size(); ++k) {
    const auto& c = system.point(k);
    const auto row = static_cast<Eigen::Index>(k);
    if (sphere) {
      double dot = 0.0;
      for (std::size_t i = 0; i < 3; ++i) dot += x[i] * c[i];
      dot = std::clamp(dot, -1.0, 1.0);
      const double s = std::sqrt(std::max(0.0, 1.0 - dot * dot));
      if (s < 1e-14) continue;
      for (std::size_t i = 0; i < 3; ++i)
        J(row, static_cast<Eigen::Index>(i)) = -(c[i] - dot * x[i]) / s;
    } else {
      const double d = distance(system.space(), x, c);
      if (d < 1e-14) continue;
      for (std::size_t i = 0; i < x.size(); ++i)
        J(row, static_cast<Eigen::Index>(i)) = (x[i] - c[i]) / d;
    }
  }
  return J;
}

SpacePoint step_to(const SpacePoint& x, const Eigen::VectorXd& delta, double alpha, bool sphere) {
  SpacePoint y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * delta[static_cast<Eigen::Index>(i)];
  if (sphere) {
    const double n = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    if (n == 0.0) return x;
    for (double& v : y.values) v /= n;
  }
  return y;
}

}  // namespace

CoordinateSystem hilbert_system(std::size_t n) {
  if (n == 0) fail(ErrorCode::invalid_input, "dimension must be >= 1");
  std::vector<SpacePoint> pts;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    SpacePoint e(std::vector<double>(n, 0.0));
    e[i] = 1.0;
    pts.push_back(std::move(e));
    names.push_back("e" + std::to_string(i + 1));
  }
  pts.emplace_back(std::vector<double>(n, 0.0));
  names.emplace_back("o");
  return CoordinateSystem(Space::euclidean(n), std::move(pts),
                          SpacePoint(std::vector<double>(n, 0.0)), std::move(names));
}

MetricCoords hilbert_to_metric(const std::vector<double>& w) {
  if (w.empty()) fail(ErrorCode::invalid_input, "empty vector");
  double norm2 = 0.0;
  for (double v : w) norm2 += v * v;
  MetricCoords out;
  out.values.reserve(w.size() + 1);
  for (double wc : w) {
    const double radicand = norm2 - 2.0 * wc + 1.0;
    if (radicand < -kRadicandTol)
      fail(ErrorCode::internal, "negative radicand in conversion");
    out.values.push_back(std::sqrt(std::max(0.0, radicand)));
  }
  out.values.push_back(std::sqrt(norm2));
  return out;
}

std::vector<double> metric_to_hilbert(const MetricCoords& coords) {
  if (coords.size() < 2) fail(ErrorCode::invalid_input, "need at least one basis coordinate");
  const std::size_t n = coords.size() - 1;
  auto report = check_feasible(hilbert_system(n), coords, 1e-12);
  if (!report.feasible())
    throw InfeasibleCoordsError("metric coordinates are infeasible: " + report.describe(),
                                std::move(report));
  const double w0sq = coords[n] * coords[n];
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = (w0sq - coords[i] * coords[i] + 1.0) / 2.0;
  return w;
}

MultilaterationResult multilaterate(const CoordinateSystem& system, const MetricCoords& target,
                                    const SpacePoint& initial_guess,
                                    const MultilaterationOptions& opts) {
  const Space& space = system.space();
  if (space.kind != SpaceKind::euclidean && space.kind != SpaceKind::sphere)
    fail(ErrorCode::invalid_input, "multilateration supports euclidean and sphere spaces");
  if (target.size() != system.size())
    fail(ErrorCode::invalid_input, "target length does not match C");
  validate_point(space, initial_guess);
  const bool sphere = space.kind == SpaceKind::sphere;
  const std::size_t rank_needed = sphere ? 2 : space.dim;
  if (system.size() < rank_needed)
    fail(ErrorCode::degenerate, "too few coordinatizing points to recover a point");

  MultilaterationResult res;
  res.point = initial_guess;
  Eigen::VectorXd r = residuals(system, target, res.point);
  double cost = r.squaredNorm();

  for (int it = 0; it < opts.max_iter; ++it) {
    res.residual = max_abs(r);
    if (res.residual <= opts.tol) {
      res.iterations = it;
      return res;
    }
    const Eigen::MatrixXd J = jacobian(system, res.point);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
    cod.setThreshold(kSingularTol);
    if (static_cast<std::size_t>(cod.rank()) < rank_needed)
      fail(ErrorCode::degenerate, "singular multilateration Jacobian (degenerate configuration)");
    const Eigen::VectorXd delta = cod.solve(-r);

    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, alpha *= 0.5) {
      SpacePoint trial = step_to(res.point, delta, alpha, sphere);
      Eigen::VectorXd rt = residuals(system, target, trial);
      const double ct = rt.squaredNorm();
      if (ct < cost) {
        res.point = std::move(trial);
        r = std::move(rt);
        cost = ct;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.residual = max_abs(r);
      if (res.residual <= opts.tol) {
        res.iterations = it;
        return res;
      }
      fail(ErrorCode::no_convergence,
           "multilateration stalled with residual " + std::to_string(res.residual));
    }
  }
  res.residual = max_abs(r);
  if (res.residual <= opts.tol) {
    res.iterations = opts.max_iter;
    return res;
  }
  fail(ErrorCode::no_convergence, "multilateration did not converge in " +
                                      std::to_string(opts.max_iter) + " iterations (residual " +
                                      std::to_string(res.residual) + ")");
}

}  // namespace metrikos
