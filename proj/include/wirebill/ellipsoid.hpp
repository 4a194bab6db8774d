#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wirebill/numeric/ode.hpp"
#include "wirebill/numeric/roots.hpp"
#include "wirebill/types.hpp"

namespace wirebill {

/// Confocal quadrics sum_i x_i^2 / (a_i^2 + lambda) = 1 with distinct
/// decreasing semi-axes. Members are real ellipsoids for lambda > -a_n^2.
class ConfocalFamily {
 public:
  explicit ConfocalFamily(Vec semi_axes) : axes_(std::move(semi_axes)) {
    const int n = static_cast<int>(axes_.size());
    if (n < 2)
      throw std::invalid_argument("ConfocalFamily: need dimension >= 2");
    for (int i = 0; i < n; ++i) {
      if (!(axes_[i] > 0.0))
        throw std::invalid_argument("ConfocalFamily: semi-axes must be positive");
      if (i > 0 && !(axes_[i] < axes_[i - 1]))
        throw std::invalid_argument(
            "ConfocalFamily: semi-axes must be strictly decreasing (distinct)");
    }
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  const Vec& axes() const { return axes_; }

  double min_member() const {
    return -axes_[dim() - 1] * axes_[dim() - 1];
  }

  Vec apply(double lambda, const Vec& x) const {
    Vec y = x;
    for (int i = 0; i < dim(); ++i) y[i] /= axes_[i] * axes_[i] + lambda;
    return y;
  }

  double form(double lambda, const Vec& x) const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i)
      s += x[i] * x[i] / (axes_[i] * axes_[i] + lambda);
    return s;
  }

  Vec unit_normal(double lambda, const Vec& x) const {
    Vec n = apply(lambda, x);
    return n / n.norm();
  }

  /// Ambient curvature of the geodesic through (x, v) on the member lambda:
  /// k = (A v . v) / |A x|.
  double geodesic_curvature(double lambda, const Vec& x, const Vec& v) const {
    return apply(lambda, v).dot(v) / apply(lambda, x).norm();
  }

 private:
  Vec axes_;
};

struct GeodesicState {
  Vec x;         // point on the member
  Vec v;         // unit tangent velocity
  double clock = 0.0;  // accumulated flow time (arc length or xi-time)
};

/// Oriented line through foot point p with unit direction q.
struct LineState {
  Vec p;
  Vec q;

  /// Moves the foot to the point closest to the origin (canonical
  /// representative used for line-gap metrics).
  LineState canonical() const {
    LineState out;
    out.q = q / q.norm();
    out.p = p - p.dot(out.q) * out.q;
    return out;
  }
};

inline double line_gap(const LineState& a, const LineState& b) {
  const LineState ca = a.canonical(), cb = b.canonical();
  return (ca.p - cb.p).norm() + (ca.q - cb.q).norm();
}

enum class FlowMode { ArcLength, Xi };

namespace detail {

inline void project_to_member(const ConfocalFamily& fam, double lambda, Vec& x,
                              Vec& v) {
  for (int it = 0; it < 2; ++it) {
    const Vec ax = fam.apply(lambda, x);
    const double defect = fam.form(lambda, x) - 1.0;
    x -= (0.5 * defect / ax.squaredNorm()) * ax;
  }
  const Vec n = fam.unit_normal(lambda, x);
  v -= v.dot(n) * n;
  v /= v.norm();
}

}  // namespace detail

inline void validate_geodesic_state(const ConfocalFamily& fam, double lambda,
                                    const GeodesicState& s, double tol = 1e-10) {
  if (std::abs(fam.form(lambda, s.x) - 1.0) > tol)
    throw std::invalid_argument("GeodesicState: point is off the member");
  if (std::abs(s.v.norm() - 1.0) > tol)
    throw std::invalid_argument("GeodesicState: velocity is not unit");
  if (std::abs(s.v.dot(fam.apply(lambda, s.x))) > tol * fam.apply(lambda, s.x).norm())
    throw std::invalid_argument("GeodesicState: velocity is not tangent");
}

/// Integrates the constrained geodesic equation x'' = -((Av.v)/|Ax|^2) Ax on
/// the member lambda. Xi mode rescales time so the speed is k^{-2/3}; the
/// rescaling is applied inside the right-hand side, keeping adaptive error
/// control in the new time variable. Each accepted step is projected back
/// onto the constraint manifold.
inline GeodesicState geodesic_flow(const ConfocalFamily& fam, double lambda,
                                   GeodesicState s0, double duration,
                                   FlowMode mode, const OdeOptions& opts = {}) {
  const int n = fam.dim();
  validate_geodesic_state(fam, lambda, s0, 1e-8);
  detail::project_to_member(fam, lambda, s0.x, s0.v);

  State y(2 * n);
  y.head(n) = s0.x;
  y.tail(n) = s0.v;

  auto rhs = [&fam, lambda, mode, n](const State& state) {
    const Vec x = state.head(n);
    const Vec v = state.tail(n);
    const Vec ax = fam.apply(lambda, x);
    const double mu = fam.apply(lambda, v).dot(v) / ax.squaredNorm();
    double w = 1.0;
    if (mode == FlowMode::Xi) {
      const double k = fam.apply(lambda, v).dot(v) / ax.norm();
      w = std::pow(k, -2.0 / 3.0);
    }
    State d(state.size());
    d.head(n) = w * v;
    d.tail(n) = -(w * mu) * ax;
    return d;
  };
  auto project = [&fam, lambda, n](State& state) {
    Vec x = state.head(n);
    Vec v = state.tail(n);
    detail::project_to_member(fam, lambda, x, v);
    state.head(n) = x;
    state.tail(n) = v;
  };

  y = integrate_ode(rhs, project, y, duration, opts);

  GeodesicState out;
  out.x = y.head(n);
  out.v = y.tail(n);
  out.clock = s0.clock + duration;
  if (std::abs(fam.form(lambda, out.x) - 1.0) > 1e-8)
    throw NumericalError("geodesic_flow: constraint drift after projection");
  return out;
}

/// Advances the line to its second intersection with the member lambda and
/// reflects the direction in the tangent hyperplane there.
inline LineState reflect_line(const ConfocalFamily& fam, double lambda,
                              const LineState& line) {
  const Vec q = line.q / line.q.norm();
  const double qa = fam.apply(lambda, q).dot(q);
  const double qb = fam.apply(lambda, q).dot(line.p);
  const double qc = fam.form(lambda, line.p) - 1.0;
  const double disc = qb * qb - qa * qc;
  if (!(disc > 0.0))
    throw NumericalError("reflect_line: line misses or is tangent to the member");
  const double sq = std::sqrt(disc);
  // hit point is the larger parameter (second intersection in orientation
  // order); qa > 0 for real members
  const double s_hit = (-qb + sq) / qa;
  if (!(s_hit > 1e-12))
    throw NumericalError("reflect_line: backward or tangent configuration");
  const Vec x = line.p + s_hit * q;
  const Vec n = fam.unit_normal(lambda, x);
  LineState out;
  out.p = x;
  out.q = q - 2.0 * q.dot(n) * n;
  return out;
}

/// All lambda for which the line is tangent to the member M_lambda: zeros of
/// the discriminant D(lambda) = (A q.p)^2 - (A q.q)(A p.p - 1), located by
/// bracketed bisection between its poles at lambda = -a_i^2. Generic lines
/// have exactly n - 1 tangency parameters; degenerate (focal) lines, whose
/// tangency parameter collides with a pole, report fewer.
inline std::vector<double> tangency_parameters(const ConfocalFamily& fam,
                                               const LineState& line) {
  const Vec q = line.q / line.q.norm();
  const Vec& p = line.p;
  auto disc = [&](double lambda) {
    const double qb = fam.apply(lambda, q).dot(p);
    const double qa = fam.apply(lambda, q).dot(q);
    const double qc = fam.form(lambda, p) - 1.0;
    return qb * qb - qa * qc;
  };

  std::vector<double> poles;
  for (int i = 0; i < fam.dim(); ++i) poles.push_back(-fam.axes()[i] * fam.axes()[i]);
  std::sort(poles.begin(), poles.end());
  const double h2 = (p - p.dot(q) * q).squaredNorm();
  const double cap = h2 + fam.axes()[0] * fam.axes()[0] + 1.0;
  poles.push_back(cap);

  std::vector<double> roots;
  constexpr int kScan = 4096;
  for (std::size_t b = 0; b + 1 < poles.size(); ++b) {
    const double width = poles[b + 1] - poles[b];
    const double lo = poles[b] + 1e-9 * std::max(width, 1.0);
    const double hi = poles[b + 1] - ((b + 2 == poles.size()) ? 0.0 : 1e-9 * std::max(width, 1.0));
    double l_prev = lo, d_prev = disc(lo);
    for (int i = 1; i <= kScan; ++i) {
      const double l = lo + (hi - lo) * i / kScan;
      const double d = disc(l);
      if (d_prev * d <= 0.0 && (d_prev != 0.0 || d != 0.0)) {
        const auto res = solve_bracketed(disc, l_prev, l, d_prev, d, 1e-14,
                                         1e-13 * std::max(1.0, std::abs(l)), 200);
        if (res.converged) roots.push_back(res.x);
      }
      l_prev = l;
      d_prev = d;
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-10; }),
              roots.end());
  return roots;
}

/// Tangency point of a line tangent to the member lambda (vertex of the
/// restriction of the quadratic form along the line).
inline Vec tangency_point(const ConfocalFamily& fam, double lambda,
                          const LineState& line, double tol = 1e-6) {
  const Vec q = line.q / line.q.norm();
  const double s_star =
      -fam.apply(lambda, q).dot(line.p) / fam.apply(lambda, q).dot(q);
  const Vec y = line.p + s_star * q;
  if (std::abs(fam.form(lambda, y) - 1.0) > tol)
    throw NumericalError("tangency_point: line is not tangent to the member");
  return y;
}

struct CommuteReport {
  double xi_gap = 0.0;         // reparameterized flow: should commute
  double arc_length_gap = 0.0; // plain arc-length flow: contrast value
};

namespace detail {

inline LineState commute_path_gap(const ConfocalFamily& fam, double lambda,
                                  const GeodesicState& geo, double tau,
                                  FlowMode mode, const OdeOptions& opts,
                                  LineState& reflected_then_flowed) {
  // path A: flow the tangent line, then reflect in M_lambda
  const GeodesicState flowed = geodesic_flow(fam, 0.0, geo, tau, mode, opts);
  const LineState path_a = reflect_line(fam, lambda, {flowed.x, flowed.v});

  // path B: reflect first; the image line is tangent to M_0 at the vertex of
  // the quadratic, flow the new geodesic from there
  const LineState refl = reflect_line(fam, lambda, {geo.x, geo.v});
  GeodesicState start;
  start.x = tangency_point(fam, 0.0, refl, 1e-5);
  start.v = refl.q / refl.q.norm();
  project_to_member(fam, 0.0, start.x, start.v);
  const GeodesicState flowed_b = geodesic_flow(fam, 0.0, start, tau, mode, opts);
  reflected_then_flowed = {flowed_b.x, flowed_b.v};
  return path_a;
}

}  // namespace detail

/// Compares reflect-then-flow against flow-then-reflect on the tangent-line
/// state of a geodesic of M_0, in both time parameterizations. The xi gap
/// certifies commutation; the arc-length gap is the non-commutation contrast.
inline CommuteReport commute_report(const ConfocalFamily& fam, double lambda,
                                    const GeodesicState& geo, double tau,
                                    const OdeOptions& opts = {}) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("commute_report: reflector must satisfy lambda > 0");
  validate_geodesic_state(fam, 0.0, geo, 1e-8);
  CommuteReport report;
  {
    LineState path_b;
    const LineState path_a =
        detail::commute_path_gap(fam, lambda, geo, tau, FlowMode::Xi, opts, path_b);
    report.xi_gap = line_gap(path_a, path_b);
  }
  {
    LineState path_b;
    const LineState path_a = detail::commute_path_gap(fam, lambda, geo, tau,
                                                      FlowMode::ArcLength, opts,
                                                      path_b);
    report.arc_length_gap = line_gap(path_a, path_b);
  }
  return report;
}

}  // namespace wirebill
