#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wirebill/chord.hpp"
#include "wirebill/curve.hpp"
#include "wirebill/numeric/quadrature.hpp"
#include "wirebill/numeric/stats.hpp"
#include "wirebill/reflection.hpp"
#include "wirebill/types.hpp"

namespace wirebill {

/// Near-boundary coordinates u(x) = \int_0^x k^{2/3} dx', v = k^{-1/3} sin(a/2).
/// Requires strictly positive curvature.
class LazutkinChart {
 public:
  static LazutkinChart build(const Curve& curve, int resolution = 512) {
    if (!(curve.min_curvature() > 1e-10))
      throw std::invalid_argument(
          "lazutkin_chart: curvature vanishes somewhere (k^{-1/3} undefined)");
    LazutkinChart chart;
    chart.curve_ = curve;
    chart.chart_ = CumulativeChart::build(
        [curve](double x) { return std::pow(curve.curvature(x), 2.0 / 3.0); },
        0.0, curve.length(), resolution);
    return chart;
  }

  double total() const { return chart_.total(); }

  /// u(x) for lifted arc length (adds a full period count).
  double u(double x) const {
    const double period = curve_.length();
    const double wraps = std::floor(x / period);
    return wraps * chart_.total() + chart_.value(x - wraps * period);
  }

  double x_from_u(double uu) const {
    const double total = chart_.total();
    const double wraps = std::floor(uu / total);
    return wraps * curve_.length() + chart_.inverse(uu - wraps * total);
  }

  /// u(y) - u(x) with full accuracy for small gaps (direct quadrature avoids
  /// the cancellation of differencing two table values).
  double u_between(double x, double y) const {
    if (y < x) return -u_between(y, x);
    if (y - x < 0.05 * curve_.length()) {
      const Curve& c = curve_;
      return gauss16(
          [&c](double t) { return std::pow(c.curvature(t), 2.0 / 3.0); }, x, y);
    }
    return u(y) - u(x);
  }

  double v(double x, double alpha) const {
    return std::pow(curve_.curvature(x), -1.0 / 3.0) * std::sin(0.5 * alpha);
  }

 private:
  Curve curve_;
  CumulativeChart chart_;
};

inline LazutkinChart lazutkin_chart(const Curve& curve, int resolution = 512) {
  return LazutkinChart::build(curve, resolution);
}

struct LazutkinResidualSample {
  double alpha = 0.0;
  double v = 0.0;
  double residual_u = 0.0;  // |u1 - u - 4v|
  double residual_v = 0.0;  // |v1 - v|
};

struct LazutkinFit {
  double e_u = 0.0;  // fitted power of residual_u in v
  double e_v = 0.0;  // fitted power of residual_v in v
  std::vector<LazutkinResidualSample> samples;
};

/// One reflection step per (angle, base point); the residuals of the
/// near-integrable normal form are fit as power laws in v. The base points
/// are drawn once and reused for every angle, and per-angle values are
/// aggregated geometrically, so the location-dependent prefactor cancels
/// from the slope. Residuals at the round-off floor are excluded.
inline LazutkinFit lazutkin_residuals(const Curve& curve,
                                      const std::vector<double>& alphas,
                                      std::uint64_t seed = 20240817u,
                                      int points_per_angle = 8) {
  const LazutkinChart chart = LazutkinChart::build(curve);
  Rng rng(seed);
  std::vector<double> bases(static_cast<std::size_t>(points_per_angle));
  for (double& b : bases) b = rng.uniform(0.0, curve.length());

  LazutkinFit fit;
  std::vector<double> vs, rus, rvs;
  for (const double alpha : alphas) {
    if (!(alpha > 0.0 && alpha < 0.5 * kPi))
      throw std::invalid_argument("lazutkin_residuals: angles must be glancing");
    double log_v = 0.0, log_ru = 0.0, log_rv = 0.0;
    int n_v = 0, n_ru = 0, n_rv = 0;
    for (const double x : bases) {
      const double y = chord_with_angle(curve, x, alpha);
      const ChordFrame f = chord_frame(curve, x, y);
      const double a_att = std::atan2(f.sin_alpha, f.cos_alpha);
      const double b_att = std::atan2(f.sin_beta, f.cos_beta);
      const double v0 = chart.v(x, a_att);
      const double v1 = chart.v(y, b_att);
      const double ru = std::abs(chart.u_between(x, y) - 4.0 * v0);
      const double rv = std::abs(v1 - v0);
      log_v += std::log(v0);
      ++n_v;
      if (ru > 1e-13) {
        log_ru += std::log(ru);
        ++n_ru;
      }
      if (rv > 1e-13) {
        log_rv += std::log(rv);
        ++n_rv;
      }
    }
    LazutkinResidualSample s;
    s.alpha = alpha;
    s.v = std::exp(log_v / n_v);
    // keep an angle only if most draws sit above the round-off floor
    s.residual_u = (2 * n_ru > n_v) ? std::exp(log_ru / n_ru) : 0.0;
    s.residual_v = (2 * n_rv > n_v) ? std::exp(log_rv / n_rv) : 0.0;
    fit.samples.push_back(s);
    vs.push_back(s.v);
    rus.push_back(s.residual_u);
    rvs.push_back(s.residual_v);
  }
  fit.e_u = loglog_slope(vs, rus, 1e-13);
  fit.e_v = loglog_slope(vs, rvs, 1e-13);
  return fit;
}

struct RotationEstimate {
  double value = 0.0;
  std::optional<std::pair<long, long>> rational;
};

/// Mean advance per reflection in units of the curve period, with
/// continued-fraction detection of rational values.
inline RotationEstimate rotation_number(const Orbit& orbit, double period,
                                        double rational_tol = 1e-9) {
  const std::size_t chords = orbit.chord_count();
  if (chords < 100)
    throw std::invalid_argument("rotation_number: orbit too short (< 100 chords)");
  RotationEstimate est;
  est.value = (orbit.vertices.back() - orbit.vertices.front()) /
              (period * static_cast<double>(chords));
  est.rational = rational_approximation(est.value, rational_tol);
  return est;
}

}  // namespace wirebill
