#include "metrikos/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metrikos/error.hpp"

namespace metrikos {

namespace {

double cloud_distance(const std::vector<std::vector<double>>& cloud, std::span<const double> w) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : cloud) {
    if (s.size() != w.size()) fail(ErrorCode::invalid_input, "set point has wrong dimension");
    double m = 0.0;
    for (std::size_t i = 0; i < w.size() && m < best; ++i) m = std::max(m, std::abs(w[i] - s[i]));
    best = std::min(best, m);
  }
  return best;
}

double gradient_l1(const CoordSet::Residual& g, std::span<const double> w) {
  std::vector<double> p(w.begin(), w.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[i]));
    const double keep = p[i];
    p[i] = keep + h;
    const double up = g(p);
    p[i] = keep - h;
    const double down = g(p);
    p[i] = keep;
    sum += std::abs(up - down) / (2 * h);
  }
  return sum;
}

}  // namespace

CoordSet CoordSet::sampled(std::vector<std::vector<double>> cloud, double resolution) {
  if (cloud.empty()) fail(ErrorCode::invalid_input, "sampled set is empty");
  CoordSet s;
  s.kind = Kind::sampled;
  s.cloud = std::move(cloud);
  s.resolution = resolution;
  return s;
}

CoordSet CoordSet::implicit(Residual residual, std::optional<double> calibration,
                            std::vector<std::vector<double>> cloud) {
  if (!residual) fail(ErrorCode::invalid_input, "implicit set needs a residual");
  if (calibration && !(*calibration > 0))
    fail(ErrorCode::invalid_input, "calibration factor must be positive");
  CoordSet s;
  s.kind = Kind::implicit;
  s.residual = std::move(residual);
  s.calibration = calibration;
  s.cloud = std::move(cloud);
  return s;
}

CoordSet CoordSet::level_set(const ConservationLaw& law, double value) {
  // |grad|_1 of x_i is 1, of x_i +- x_j is 2.
  const double calib = law.kind == LawKind::sphere ? 1.0 : 2.0;
  return implicit([law, value](std::span<const double> w) { return law.quantity(w) - value; },
                  calib);
}

CoordSet CoordSet::sup_ball(std::vector<double> center, double radius) {
  if (!(radius >= 0)) fail(ErrorCode::invalid_input, "ball radius must be nonnegative");
  return implicit(
      [center = std::move(center), radius](std::span<const double> w) {
        if (w.size() != center.size()) fail(ErrorCode::invalid_input, "ball has wrong dimension");
        double m = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) m = std::max(m, std::abs(w[i] - center[i]));
        return std::max(0.0, m - radius);
      },
      1.0);
}

double set_distance(const CoordSet& set, std::span<const double> w) {
  if (set.kind == CoordSet::Kind::sampled) return cloud_distance(set.cloud, w);
  const double r = std::abs(set.residual(w));
  double estimate = 0.0;
  if (r > 0.0) {
    const double scale = set.calibration ? *set.calibration : gradient_l1(set.residual, w);
    estimate = scale > 0.0 ? r / scale : std::numeric_limits<double>::infinity();
  }
  if (!set.cloud.empty()) estimate = std::min(estimate, cloud_distance(set.cloud, w));
  return estimate;
}

double nagumo_residual(const VectorFunction& field, const CoordSet& set,
                       std::span<const double> w, double h) {
  if (!(h > 0)) fail(ErrorCode::invalid_input, "h must be positive");
  EmbeddedPoint p(std::vector<double>(w.begin(), w.end()));
  const auto v = field(p);
  if (v.size() != w.size()) fail(ErrorCode::invalid_input, "field dimension mismatch");
  std::vector<double> moved(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) moved[i] = w[i] + h * v[i];
  return (set_distance(set, moved) - set_distance(set, w)) / h;
}

std::vector<double> default_nagumo_h_seq() {
  std::vector<double> h;
  for (int k = 0; k <= 6; ++k) h.push_back(1e-2 * std::ldexp(1.0, -k));
  h.push_back(1e-4);
  return h;
}

NagumoReport nagumo_check(const VectorFunction& field, const CoordSet& set,
                          const std::vector<std::vector<double>>& samples,
                          const std::vector<double>& h_seq_in, double K, double tol) {
  const auto h_seq = h_seq_in.empty() ? default_nagumo_h_seq() : h_seq_in;
  for (std::size_t k = 0; k < h_seq.size(); ++k) {
    if (!(h_seq[k] > 0) || (k > 0 && !(h_seq[k] < h_seq[k - 1])))
      fail(ErrorCode::invalid_input, "h_seq must be decreasing and positive");
  }
  const std::size_t tail_start = h_seq.size() / 2;
  NagumoReport report;
  report.resolution = set.resolution;
  report.max_limsup = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    NagumoSample out;
    out.limsup = -std::numeric_limits<double>::infinity();
    for (std::size_t k = tail_start; k < h_seq.size(); ++k)
      out.limsup = std::max(out.limsup, nagumo_residual(field, set, samples[s], h_seq[k]));
    out.distance = set_distance(set, samples[s]);
    out.margin = K * out.distance + tol - out.limsup;
    if (out.margin < 0) report.violations.push_back(s);
    report.max_limsup = std::max(report.max_limsup, out.limsup);
    report.samples.push_back(out);
  }
  if (samples.empty()) report.max_limsup = 0.0;
  return report;
}

InvarianceResult invariance_test(const Trajectory& trajectory, const CoordSet& set, double tol) {
  if (trajectory.size() == 0) fail(ErrorCode::invalid_input, "trajectory is empty");
  InvarianceResult res;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const double d = set_distance(set, trajectory.coords[k].values);
    res.max_distance = std::max(res.max_distance, d);
    if (d > tol && res.invariant) {
      res.invariant = false;
      res.first_exit = k;
    }
  }
  return res;
}

}  // namespace metrikos
