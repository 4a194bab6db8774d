#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wirebill/chord.hpp"
#include "wirebill/curve.hpp"
#include "wirebill/numeric/roots.hpp"
#include "wirebill/types.hpp"

namespace wirebill {

/// Oriented chord [gamma(x), gamma(y)] as a point of the phase cylinder.
struct PhasePoint {
  double x = 0.0;
  double y = 0.0;
};

struct ReflectOptions {
  // Scan cells for all-roots mode. The curve's cached scan table (>= 2048
  // samples) is used when it is at least this fine; larger values force a
  // direct sweep at the requested resolution.
  int grid = 1024;
  double g_tol = 1e-12;     // |L2 + L1| residual target
  double exclusion = 1e-4;  // trivial-root exclusion around y, fraction of |gamma|
};

struct ThirdIntersectionWitness {
  double x = 0.0, y = 0.0;  // the chord
  double t = 0.0;           // parameter of the extra crossing
  double distance = 0.0;    // attained line distance
};

/// Numerical certificate for the three conditions of a nice curve plus the
/// twist bound. Condition 1 is certified only up to the scan resolution.
struct NicenessReport {
  double min_curvature = 0.0;
  double min_cos_phi = 1.0;
  double min_twist = 0.0;         // min over the grid of L * L12
  double min_sin_product = 1.0;   // min sin(alpha) sin(beta), tangency indicator
  double margin = 0.0;
  std::vector<ThirdIntersectionWitness> witnesses;
  bool chord_condition_ok = false;      // condition 1
  bool curvature_ok = false;            // condition 2
  bool plane_angle_ok = false;          // condition 3
  bool twist_ok = false;
  bool passed() const {
    return chord_condition_ok && curvature_ok && plane_angle_ok && twist_ok;
  }
};

struct Orbit {
  std::vector<double> vertices;    // lifted arc-length positions, increasing
  std::vector<double> alphas;      // angle at the left endpoint of each chord
  std::vector<double> betas;       // angle at the right endpoint of each chord
  std::vector<double> lengths;     // chord lengths
  std::vector<double> residuals;   // |L2 + L1| at interior vertices
  bool completed = false;
  int steps_done = 0;

  std::size_t chord_count() const { return lengths.size(); }
};

namespace detail {

inline double cos_angle_from(const Vec& base, const Vec& tangent, const Vec& target) {
  const Vec r = target - base;
  return tangent.dot(r) / r.norm();
}

}  // namespace detail

/// Arc-length position y > x (lifted) such that the chord [gamma(x), gamma(y)]
/// makes the angle alpha with the tangent at gamma(x). Uses the twist
/// monotonicity of the angle in y, so the curve should be nice (or at least
/// the angle strictly monotone along the sweep).
inline double chord_with_angle(const Curve& curve, double x, double alpha) {
  if (!curve.closed())
    throw std::invalid_argument("chord_with_angle: curve must be closed");
  if (!(alpha > 0.0 && alpha < kPi))
    throw std::invalid_argument("chord_with_angle: angle must lie in (0, pi)");
  const double period = curve.length();
  const double target = std::cos(alpha);
  const auto px = curve.eval(x, 1);
  auto g = [&](double z) {
    return target - detail::cos_angle_from(px.position, px.deriv[0],
                                           curve.position(z));
  };
  const double lo = x + 1e-8 * period;
  const double hi = x + period - 1e-8 * period;
  // g is increasing: cos(angle) decreases from ~1 to ~-1 along the sweep
  const auto res = solve_bracketed(g, lo, hi, 1e-14, 0.0, 256);
  if (!res.converged)
    throw NumericalError("chord_with_angle: monotone solve failed");
  return res.x;
}

/// All successors z of the phase point (x, y): roots of
/// g(z) = L2(x, y) + L1(y, z), scanned over a uniform grid that excludes a
/// neighborhood of the trivial chord z = y, each root polished by a
/// bisection-safeguarded secant. Roots are sorted by forward distance from y.
inline std::vector<double> reflect_all(const Curve& curve, PhasePoint p,
                                       const ReflectOptions& opts = {}) {
  if (!curve.closed())
    throw std::invalid_argument("reflect: curve must be closed");
  const double period = curve.length();
  const double delta = opts.exclusion * period;

  const ChordFrame in = chord_frame(curve, p.x, p.y);
  const double c0 = in.cos_beta;  // L2(x, y); root condition cos a(y, z) = c0
  const auto py = curve.eval(p.y, 1);

  auto g_exact = [&](double z) {
    return c0 - detail::cos_angle_from(py.position, py.deriv[0],
                                       curve.position(z));
  };

  const auto& table = curve.scan_table();
  const double y0 = curve.reduce(p.y);
  std::vector<double> roots;
  double z_prev = 0.0, g_prev = 0.0;
  bool have_prev = false;
  auto visit = [&](double z, double g) {
    if (have_prev && g_prev * g <= 0.0 && (g_prev != 0.0 || g != 0.0)) {
      const auto res =
          solve_bracketed(g_exact, z_prev, z, g_prev, g, opts.g_tol, 0.0, 200);
      if (res.converged) roots.push_back(res.x);
    }
    z_prev = z;
    g_prev = g;
    have_prev = true;
  };

  if (static_cast<std::size_t>(opts.grid) <= table.size()) {
    // cached positions: sign scan costs dot products only
    const std::size_t n_table = table.size();
    const auto k_begin = static_cast<long>(std::ceil((y0 + delta) / table.step));
    const auto k_end =
        static_cast<long>(std::floor((y0 + period - delta) / table.step));
    for (long k = k_begin; k <= k_end; ++k) {
      const std::size_t idx = static_cast<std::size_t>(
          ((k % static_cast<long>(n_table)) + static_cast<long>(n_table)) %
          static_cast<long>(n_table));
      const double z = static_cast<double>(k) * table.step;  // lifted
      const Vec r = table.position[idx] - py.position;
      const double len = r.norm();
      if (len < 1e-12 * period) continue;
      visit(z, c0 - py.deriv[0].dot(r) / len);
    }
  } else {
    // requested resolution exceeds the cache: direct sweep
    const double lo = y0 + delta, hi = y0 + period - delta;
    for (int k = 0; k <= opts.grid; ++k) {
      const double z = lo + (hi - lo) * k / opts.grid;
      visit(z, g_exact(z));
    }
  }

  // dedupe near-coincident roots from tangential brackets
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](double a, double b) {
                            return std::abs(a - b) < 1e-9 * period;
                          }),
              roots.end());
  // report in (p.y, p.y + period) lifted relative to the caller's y
  for (double& z : roots) z = p.y + (z - y0);
  return roots;
}

/// Unique successor on a nice curve: the angle at gamma(y) is strictly
/// monotone in z (twist), so a single bracketed solve suffices. Returns
/// nothing when no sign change exists in the admissible window (tangent or
/// degenerate configuration).
inline std::optional<double> reflect_nice(const Curve& curve, PhasePoint p,
                                          const ReflectOptions& opts = {}) {
  if (!curve.closed())
    throw std::invalid_argument("reflect: curve must be closed");
  const double period = curve.length();
  const double delta = opts.exclusion * period;

  const ChordFrame in = chord_frame(curve, p.x, p.y);
  const double c0 = in.cos_beta;
  const auto py = curve.eval(p.y, 1);
  auto g = [&](double z) {
    return c0 - detail::cos_angle_from(py.position, py.deriv[0],
                                       curve.position(z));
  };
  const double lo = p.y + delta;
  const double hi = p.y + period - delta;
  const double g_lo = g(lo), g_hi = g(hi);
  if (g_lo * g_hi > 0.0) return std::nullopt;
  const auto res = solve_bracketed(g, lo, hi, g_lo, g_hi, opts.g_tol, 0.0, 256);
  if (!res.converged) throw NumericalError("reflect: root polish stagnated");
  return res.x;
}

inline std::optional<double> reflect_nice(const Curve& curve, PhasePoint p,
                                          const NicenessReport& cert,
                                          const ReflectOptions& opts = {}) {
  if (!cert.passed())
    throw std::invalid_argument(
        "reflect: nice mode requires a passing niceness report");
  return reflect_nice(curve, p, opts);
}

/// Iterates the single-valued (nice) reflection map n times from p0.
/// Stops early (completed = false) if the solver finds no successor.
inline Orbit iterate_orbit(const Curve& curve, PhasePoint p0, int n,
                           const ReflectOptions& opts = {}) {
  Orbit orbit;
  if (n < 0) throw std::invalid_argument("iterate_orbit: negative step count");
  double x = p0.x;
  double y = p0.x + curve.reduce(p0.y - p0.x);  // lift y above x
  orbit.vertices = {x, y};
  ChordFrame prev = chord_frame(curve, x, y);
  orbit.alphas.push_back(std::atan2(prev.sin_alpha, prev.cos_alpha));
  orbit.betas.push_back(std::atan2(prev.sin_beta, prev.cos_beta));
  orbit.lengths.push_back(prev.length);
  for (int step = 0; step < n; ++step) {
    std::optional<double> z;
    try {
      z = reflect_nice(curve, {x, y}, opts);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (orbit step " +
                           std::to_string(step) + ")");
    }
    if (!z) {
      orbit.completed = false;
      return orbit;
    }
    const double z_lift = y + curve.reduce(*z - y);
    const auto f = chord_frame(curve, y, z_lift);
    orbit.residuals.push_back(std::abs(prev.l2 + f.l1));
    orbit.vertices.push_back(z_lift);
    orbit.alphas.push_back(std::atan2(f.sin_alpha, f.cos_alpha));
    orbit.betas.push_back(std::atan2(f.sin_beta, f.cos_beta));
    orbit.lengths.push_back(f.length);
    x = y;
    y = z_lift;
    prev = f;
    orbit.steps_done = step + 1;
  }
  orbit.completed = true;
  return orbit;
}

/// Checks the three niceness conditions on a grid and certifies the twist
/// bound. Witness search for condition 1 scans the distance from the curve
/// to each grid chord's line, refines local minima, and records crossings
/// below 1e-7 (absolute).
inline NicenessReport check_nice(const Curve& curve, int grid = 64,
                                 double margin = 0.05) {
  if (!curve.closed())
    throw std::invalid_argument("check_nice: curve must be closed");
  if (grid < 8) throw std::invalid_argument("check_nice: grid must be >= 8");
  NicenessReport report;
  report.margin = margin;
  const double period = curve.length();

  // condition 2: curvature minimum on a fine grid with local refinement
  {
    const int fine = 8 * grid;
    double kmin = std::numeric_limits<double>::max();
    double argmin = 0.0;
    for (int i = 0; i < fine; ++i) {
      const double x = period * i / fine;
      const double k = curve.curvature(x);
      if (k < kmin) {
        kmin = k;
        argmin = x;
      }
    }
    const double h = period / fine;
    const double refined = golden_max(
        [&](double x) { return -curve.curvature(x); }, argmin - h, argmin + h,
        1e-10 * period);
    kmin = std::min(kmin, curve.curvature(refined));
    report.min_curvature = kmin;
    report.curvature_ok = kmin > 1e-10;
  }

  // conditions 3 and twist over the chord grid; the diagonal limit of
  // cos(phi) is 1 (osculating plane), so interior samples suffice
  {
    double min_cos_phi = 1.0;
    double min_twist = std::numeric_limits<double>::max();
    double min_sin_prod = 1.0;
    for (int i = 0; i < grid; ++i) {
      const double x = period * i / grid;
      for (int j = 1; j < grid; ++j) {
        const double s = period * j / grid;
        const auto f = chord_frame(curve, x, x + s);
        min_twist = std::min(min_twist, f.length * f.l12);
        min_sin_prod = std::min(min_sin_prod, f.sin_alpha * f.sin_beta);
        if (f.cos_phi_defined) min_cos_phi = std::min(min_cos_phi, f.cos_phi);
      }
    }
    report.min_cos_phi = min_cos_phi;
    report.min_twist = min_twist;
    report.min_sin_product = min_sin_prod;
    report.plane_angle_ok = min_cos_phi > margin;
    report.twist_ok = min_twist > 0.0;
  }

  // condition 1: third intersections of chord lines with the curve
  {
    const auto& table = curve.scan_table();
    const std::size_t n_table = table.size();
    const double exclusion = std::max(1e-3 * period, 3.0 * table.step);
    const double coarse_threshold = 1e-4;
    for (int i = 0; i < grid; ++i) {
      const double x = period * i / grid;
      const Vec px = curve.position(x);
      for (int j = 1; j < grid; ++j) {
        const double y = x + period * j / grid;
        const Vec py = curve.position(y);
        Vec u = py - px;
        const double len = u.norm();
        if (len < 1e-9 * period) continue;
        u /= len;
        double d_prev2 = -1.0, d_prev = -1.0;
        double t_prev = 0.0, t_prev2 = 0.0;
        for (std::size_t k = 0; k <= n_table; ++k) {
          const std::size_t idx = k % n_table;
          const double t = static_cast<double>(k) * table.step;
          double d;
          if (curve.circular_distance(t, x) < exclusion ||
              curve.circular_distance(t, y) < exclusion) {
            d = -1.0;  // masked
          } else {
            const Vec w = table.position[idx] - px;
            const double a = w.dot(u);
            d = std::sqrt(std::max(0.0, w.squaredNorm() - a * a));
          }
          if (d_prev >= 0.0 && d_prev < coarse_threshold &&
              (d_prev2 < 0.0 || d_prev <= d_prev2) && (d < 0.0 || d_prev <= d)) {
            // local minimum below the coarse threshold: refine
            const double lo = (d_prev2 >= 0.0) ? t_prev2 : t_prev - table.step;
            const double hi = (d >= 0.0) ? t : t_prev + table.step;
            auto line_dist = [&](double tt) {
              const Vec w = curve.position(tt) - px;
              const double a = w.dot(u);
              return std::sqrt(std::max(0.0, w.squaredNorm() - a * a));
            };
            const double t_min =
                golden_max([&](double tt) { return -line_dist(tt); }, lo, hi,
                           1e-11 * period);
            const double d_min = line_dist(t_min);
            if (d_min < 1e-7 &&
                curve.circular_distance(t_min, x) > 0.5 * exclusion &&
                curve.circular_distance(t_min, y) > 0.5 * exclusion)
              report.witnesses.push_back({x, y, curve.reduce(t_min), d_min});
          }
          d_prev2 = d_prev;
          t_prev2 = t_prev;
          d_prev = d;
          t_prev = t;
        }
      }
    }
    report.chord_condition_ok = report.witnesses.empty();
  }
  return report;
}

/// Finite-difference Jacobian determinant of the billiard map in the
/// canonical coordinates (x, cos alpha). Area preservation of
/// omega = -d(cos alpha) ^ dx means the determinant is 1.
inline double jacobian_check(const Curve& curve, PhasePoint p, double h = 1e-5) {
  const ChordFrame f0 = chord_frame(curve, p.x, p.y);
  if (f0.sin_alpha < 1e-3 || f0.sin_beta < 1e-3)
    throw NumericalError("jacobian_check: ill-conditioned near alpha in {0, pi}");
  const double c = f0.cos_alpha;

  ReflectOptions tight;
  tight.g_tol = 1e-14;
  auto map = [&](double x_in, double c_in, double& x_out, double& c_out) {
    const double alpha = std::acos(std::clamp(c_in, -1.0, 1.0));
    const double y = chord_with_angle(curve, x_in, alpha);
    const auto z = reflect_nice(curve, {x_in, y}, tight);
    if (!z) throw NumericalError("jacobian_check: reflection failed");
    const ChordFrame out = chord_frame(curve, y, *z);
    x_out = y;
    c_out = out.cos_alpha;
  };

  double xp_x, xp_c, xm_x, xm_c, cp_x, cp_c, cm_x, cm_c;
  map(p.x + h, c, xp_x, xp_c);
  map(p.x - h, c, xm_x, xm_c);
  map(p.x, c + h, cp_x, cp_c);
  map(p.x, c - h, cm_x, cm_c);

  const double dxdx = (xp_x - xm_x) / (2 * h);
  const double dcdx = (xp_c - xm_c) / (2 * h);
  const double dxdc = (cp_x - cm_x) / (2 * h);
  const double dcdc = (cp_c - cm_c) / (2 * h);
  return dxdx * dcdc - dxdc * dcdx;
}

}  // namespace wirebill
