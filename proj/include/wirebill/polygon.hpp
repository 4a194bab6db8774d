#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wirebill/chord.hpp"
#include "wirebill/curve.hpp"
#include "wirebill/lazutkin.hpp"
#include "wirebill/numeric/roots.hpp"
#include "wirebill/numeric/stats.hpp"
#include "wirebill/types.hpp"

namespace wirebill {

/// Inscribed polygon: an open chain (vertices include both fixed endpoints)
/// or a closed cyclic sequence with winding p (vertices are one period of the
/// lift; the edge from the last vertex wraps to vertices[0] + p |gamma|).
struct Polygon {
  std::vector<double> vertices;
  bool cyclic = false;
  int winding = 0;
  double total_length = 0.0;
  std::vector<double> residuals;  // interior (chain) or all (cyclic) vertices
  bool converged = false;
  bool collapsed = false;

  double max_residual() const {
    double r = 0.0;
    for (double v : residuals) r = std::max(r, std::abs(v));
    return r;
  }
};

struct ChainOptions {
  int ascent_sweeps = 4;
  int max_newton = 80;
  double residual_tol = 1e-11;
  double min_gap_fraction = 1e-8;  // ordering floor relative to |gamma|
};

struct DeficitResult {
  std::vector<int> n_values;
  std::vector<double> scaled_deficits;   // n^2 (l - l_n)
  std::vector<double> polygon_lengths;
  double arc_length = 0.0;
  double extrapolated = 0.0;
  double extrapolation_residual = 0.0;
  double reference_cubed = 0.0;   // (1/24) (int k^{2/3} dx)^3
  double reference_linear = 0.0;  // (1/24)  int k^{2/3} dx
};

namespace detail {

inline double chord_len(const Curve& curve, double a, double b) {
  return (curve.position(b) - curve.position(a)).norm();
}

struct ChainDerivatives {
  double g = 0.0;    // gradient entry
  double sub = 0.0;  // d g / d left   = L12(left, mid)
  double diag = 0.0; // d g / d mid    = L22(left, mid) + L11(mid, right)
  double super = 0.0;// d g / d right  = L12(mid, right)
};

inline ChainDerivatives chain_derivatives(const Curve& curve, double left,
                                          double mid, double right) {
  const ChordFrame a = chord_frame(curve, left, mid);
  const ChordFrame b = chord_frame(curve, mid, right);
  ChainDerivatives d;
  d.g = a.l2 + b.l1;
  d.sub = a.l12;
  d.diag = a.l22 + b.l11;
  d.super = b.l12;
  return d;
}

/// Single coordinate-ascent sweep: every interior vertex is moved to the
/// maximizer of its two adjacent chord lengths (golden section, then a few
/// safeguarded Newton polishes on the gradient). Preserves ordering by
/// construction.
inline void ascent_sweep(const Curve& curve, std::vector<double>& x,
                         std::size_t lo, std::size_t hi, double min_gap,
                         bool cyclic, double wrap) {
  const std::size_t n = x.size();
  for (std::size_t i = lo; i <= hi; ++i) {
    const double left = (cyclic && i == 0) ? x[n - 1] - wrap : x[i - 1];
    const double right = (cyclic && i == n - 1) ? x[0] + wrap : x[i + 1];
    auto f = [&](double xi) {
      return chord_len(curve, left, xi) + chord_len(curve, xi, right);
    };
    double xi = golden_max(f, left + min_gap, right - min_gap,
                            1e-10 * curve.length());
    for (int it = 0; it < 3; ++it) {
      const auto d = chain_derivatives(curve, left, xi, right);
      if (d.diag == 0.0) break;
      double step = -d.g / d.diag;
      const double limit = 0.25 * std::min(xi - left, right - xi);
      step = std::clamp(step, -limit, limit);
      xi += step;
      if (std::abs(step) < 1e-15 * curve.length()) break;
    }
    x[i] = std::clamp(xi, left + min_gap, right - min_gap);
  }
}

inline double chain_total_length(const Curve& curve,
                                 const std::vector<double>& x, bool cyclic,
                                 double wrap) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    total += chord_len(curve, x[i], x[i + 1]);
  if (cyclic) total += chord_len(curve, x.back(), x.front() + wrap);
  return total;
}

}  // namespace detail

/// Longest polygon properly inscribed in the arc [x_start, x_end]: n interior
/// vertices strictly ordered between the fixed endpoints, maximizing total
/// chord length. At convergence every interior vertex satisfies the
/// reflection equation, which is exactly the first-order condition.
///
/// Strategy: equal Lazutkin-measure initialization, a few coordinate-ascent
/// sweeps (they respect ordering), then damped tridiagonal Newton on the
/// gradient for fast terminal convergence.
inline Polygon longest_inscribed_polygon(const Curve& curve, double x_start,
                                         double x_end, int n,
                                         const ChainOptions& opts = {}) {
  if (n < 1) throw std::invalid_argument("longest_inscribed_polygon: n >= 1");
  if (!(x_end > x_start) || x_end - x_start > curve.length() + 1e-12)
    throw std::invalid_argument(
        "longest_inscribed_polygon: need x_start < x_end within one period");

  Polygon poly;
  poly.cyclic = false;
  const double min_gap = opts.min_gap_fraction * curve.length();

  // equal-u initialization (k^{2/3} measure); equal arc length if curvature
  // vanishes somewhere on the curve
  std::vector<double>& x = poly.vertices;
  x.resize(static_cast<std::size_t>(n) + 2);
  x.front() = x_start;
  x.back() = x_end;
  if (curve.min_curvature() > 1e-10) {
    const LazutkinChart chart = LazutkinChart::build(curve);
    const double u0 = chart.u(x_start), u1 = chart.u(x_end);
    for (int i = 1; i <= n; ++i)
      x[static_cast<std::size_t>(i)] =
          chart.x_from_u(u0 + (u1 - u0) * i / (n + 1));
  } else {
    for (int i = 1; i <= n; ++i)
      x[static_cast<std::size_t>(i)] =
          x_start + (x_end - x_start) * i / (n + 1);
  }

  for (int sweep = 0; sweep < opts.ascent_sweeps; ++sweep)
    detail::ascent_sweep(curve, x, 1, static_cast<std::size_t>(n), min_gap,
                         false, 0.0);

  // damped Newton on the interior gradient; tridiagonal Thomas solve
  std::vector<double> g(n), sub(n), diag(n), super(n), delta(n);
  auto fill = [&](const std::vector<double>& xs, double& norm) {
    norm = 0.0;
    for (int i = 1; i <= n; ++i) {
      const auto d = detail::chain_derivatives(curve, xs[i - 1], xs[i], xs[i + 1]);
      g[i - 1] = d.g;
      sub[i - 1] = d.sub;
      diag[i - 1] = d.diag;
      super[i - 1] = d.super;
      norm = std::max(norm, std::abs(d.g));
    }
  };
  double g_norm = 0.0;
  fill(x, g_norm);
  for (int it = 0; it < opts.max_newton && g_norm > opts.residual_tol; ++it) {
    // Thomas algorithm on (sub, diag, super) delta = -g
    std::vector<double> cp(n, 0.0), rp(n, 0.0);
    double denom = diag[0];
    if (denom == 0.0) break;
    cp[0] = super[0] / denom;
    rp[0] = -g[0] / denom;
    for (int i = 1; i < n; ++i) {
      denom = diag[i] - sub[i] * cp[i - 1];
      if (denom == 0.0) {
        denom = 1e-300;
      }
      cp[i] = super[i] / denom;
      rp[i] = (-g[i] - sub[i] * rp[i - 1]) / denom;
    }
    delta[n - 1] = rp[n - 1];
    for (int i = n - 2; i >= 0; --i) delta[i] = rp[i] - cp[i] * delta[i + 1];

    double t = 1.0;
    bool accepted = false;
    for (int back = 0; back < 30 && !accepted; ++back, t *= 0.5) {
      std::vector<double> trial = x;
      bool ordered = true;
      for (int i = 1; i <= n; ++i) {
        trial[i] = x[i] + t * delta[i - 1];
        if (!(trial[i] > trial[i - 1] + min_gap)) ordered = false;
      }
      if (ordered && !(trial[n] < trial[n + 1] - min_gap)) ordered = false;
      if (!ordered) continue;
      double trial_norm = 0.0;
      fill(trial, trial_norm);
      if (trial_norm < g_norm || trial_norm <= opts.residual_tol) {
        x = trial;
        g_norm = trial_norm;
        accepted = true;
      }
    }
    if (!accepted) {
      detail::ascent_sweep(curve, x, 1, static_cast<std::size_t>(n), min_gap,
                           false, 0.0);
      fill(x, g_norm);
    }
  }

  poly.total_length = detail::chain_total_length(curve, x, false, 0.0);
  poly.residuals.assign(g.begin(), g.end());
  poly.converged = g_norm <= opts.residual_tol;
  if (!poly.converged)
    throw NumericalError(
        "longest_inscribed_polygon: optimizer stalled at residual " +
        std::to_string(g_norm));
  return poly;
}

/// Longest closed q-gon with winding p: cyclic perimeter maximization.
/// Rotationally symmetric curves make the Hessian singular along the
/// symmetry direction, so the Newton solve carries Levenberg damping.
inline Polygon periodic_orbit_search(const Curve& curve, int p, int q,
                                     const ChainOptions& opts = {}) {
  if (q < 2) throw std::invalid_argument("periodic_orbit_search: q >= 2");
  if (p < 1 || p > q - 1)
    throw std::invalid_argument("periodic_orbit_search: need 1 <= p <= q - 1");
  const double period = curve.length();
  const double wrap = p * period;
  const double min_gap = opts.min_gap_fraction * period;

  Polygon poly;
  poly.cyclic = true;
  poly.winding = p;
  std::vector<double>& x = poly.vertices;
  x.resize(static_cast<std::size_t>(q));
  if (curve.min_curvature() > 1e-10) {
    const LazutkinChart chart = LazutkinChart::build(curve);
    const double total_u = chart.total();
    for (int i = 0; i < q; ++i)
      x[static_cast<std::size_t>(i)] =
          chart.x_from_u(total_u * p * i / static_cast<double>(q));
  } else {
    for (int i = 0; i < q; ++i)
      x[static_cast<std::size_t>(i)] = wrap * i / static_cast<double>(q);
  }

  for (int sweep = 0; sweep < opts.ascent_sweeps; ++sweep)
    detail::ascent_sweep(curve, x, 0, static_cast<std::size_t>(q) - 1, min_gap,
                         true, wrap);

  // dense cyclic Newton with Levenberg damping
  Eigen::MatrixXd jac(q, q);
  Eigen::VectorXd g(q), delta(q);
  auto fill = [&](const std::vector<double>& xs, Eigen::VectorXd& grad,
                  Eigen::MatrixXd* jmat) {
    if (jmat) jmat->setZero();
    double norm = 0.0;
    for (int i = 0; i < q; ++i) {
      const int il = (i + q - 1) % q, ir = (i + 1) % q;
      const double left = xs[il] - (i == 0 ? wrap : 0.0);
      const double right = xs[ir] + (i == q - 1 ? wrap : 0.0);
      const auto d = detail::chain_derivatives(curve, left, xs[i], right);
      grad[i] = d.g;
      norm = std::max(norm, std::abs(d.g));
      if (jmat) {
        (*jmat)(i, il) += d.sub;
        (*jmat)(i, i) += d.diag;
        (*jmat)(i, ir) += d.super;
      }
    }
    return norm;
  };

  double g_norm = fill(x, g, &jac);
  double lambda = 0.0;
  for (int it = 0; it < opts.max_newton && g_norm > opts.residual_tol; ++it) {
    Eigen::MatrixXd m = jac;
    if (lambda > 0.0) m.diagonal().array() -= lambda;
    delta = m.partialPivLu().solve(-g);
    if (!delta.allFinite()) {
      lambda = (lambda == 0.0) ? 1e-9 : lambda * 10.0;
      continue;
    }
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial_g(q);
    for (int back = 0; back < 25 && !accepted; ++back, t *= 0.5) {
      std::vector<double> trial(x);
      for (int i = 0; i < q; ++i) trial[i] = x[i] + t * delta[i];
      bool ordered = true;
      for (int i = 0; i + 1 < q; ++i)
        if (!(trial[i + 1] > trial[i] + min_gap)) ordered = false;
      if (!(trial[0] + wrap > trial[q - 1] + min_gap)) ordered = false;
      if (!ordered) continue;
      const double trial_norm = fill(trial, trial_g, nullptr);
      if (trial_norm < g_norm || trial_norm <= opts.residual_tol) {
        x = trial;
        g_norm = trial_norm;
        accepted = true;
      }
    }
    if (!accepted) {
      lambda = (lambda == 0.0) ? 1e-9 : lambda * 10.0;
      if (lambda > 1.0) break;
    } else {
      lambda = 0.0;
      g_norm = fill(x, g, &jac);
    }
  }

  g_norm = fill(x, g, &jac);
  poly.total_length = detail::chain_total_length(curve, x, true, wrap);
  poly.residuals.assign(g.data(), g.data() + q);
  poly.converged = g_norm <= std::max(opts.residual_tol, 1e-9);
  for (int i = 0; i + 1 < q; ++i)
    if (x[i + 1] - x[i] < 10.0 * min_gap) poly.collapsed = true;
  if (x[0] + wrap - x[q - 1] < 10.0 * min_gap) poly.collapsed = true;
  return poly;
}

/// Per-n scaled deficits n^2 (l - l_n) and their Richardson limit. The
/// extrapolation runs in 1/N^2 with N = n + 1 chords, matching the
/// asymptotic expansion of the chord-length deficit; both candidate
/// reference constants are reported.
inline DeficitResult deficit_limit(const Curve& curve, double x_start,
                                   double x_end, const std::vector<int>& n_list,
                                   const ChainOptions& opts = {}) {
  if (n_list.size() < 2)
    throw std::invalid_argument("deficit_limit: need at least two n values");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("deficit_limit: n_list must increase");

  DeficitResult result;
  result.arc_length = x_end - x_start;
  std::vector<double> h, w;
  for (int n : n_list) {
    Polygon poly;
    try {
      poly = longest_inscribed_polygon(curve, x_start, x_end, n, opts);
    } catch (const NumericalError&) {
      if (result.n_values.size() < 2) throw;  // nothing useful to report
      break;                                   // partial results
    }
    const double deficit = result.arc_length - poly.total_length;
    result.n_values.push_back(n);
    result.polygon_lengths.push_back(poly.total_length);
    result.scaled_deficits.push_back(static_cast<double>(n) * n * deficit);
    const double chords = static_cast<double>(n) + 1.0;
    h.push_back(1.0 / (chords * chords));
    w.push_back(chords * chords * deficit);
  }
  const auto [limit, resid] = richardson_limit(h, w);
  result.extrapolated = limit;
  result.extrapolation_residual = resid;

  const double integral = integrate(
      [&curve](double x) { return std::pow(curve.curvature(x), 2.0 / 3.0); },
      x_start, x_end, 1e-12);
  result.reference_cubed = integral * integral * integral / 24.0;
  result.reference_linear = integral / 24.0;
  return result;
}

/// Kolmogorov-style sup-discrepancy of the polygon's impact points against
/// the normalized k^{2/3} dx distribution on the arc (or the whole curve for
/// cyclic polygons).
inline double impact_discrepancy(const Polygon& poly, const Curve& curve) {
  const LazutkinChart chart = LazutkinChart::build(curve);
  std::vector<double> cdf;
  if (poly.cyclic) {
    for (double x : poly.vertices)
      cdf.push_back(std::fmod(chart.u(curve.reduce(x)) / chart.total(), 1.0));
  } else {
    if (poly.vertices.size() < 3) return 0.0;
    const double u0 = chart.u(poly.vertices.front());
    const double u1 = chart.u(poly.vertices.back());
    for (std::size_t i = 1; i + 1 < poly.vertices.size(); ++i)
      cdf.push_back((chart.u(poly.vertices[i]) - u0) / (u1 - u0));
  }
  return sup_discrepancy(std::move(cdf));
}

}  // namespace wirebill
