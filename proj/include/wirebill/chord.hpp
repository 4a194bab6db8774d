#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wirebill/curve.hpp"
#include "wirebill/types.hpp"

namespace wirebill {

/// Scalar data of one oriented chord [gamma(x), gamma(y)]: the generating
/// function L, its first and second partials, the chord angles and the
/// angle between the two chord planes.
///
/// Sign conventions: L1 = -cos(alpha), L2 = cos(beta); sin(alpha) and
/// sin(beta) are reported non-negative. cos_phi is the cosine of the angle
/// between span{T(x), R} and span{T(y), -R}; no sign convention for phi
/// itself is imposed.
struct ChordFrame {
  double x = 0.0, y = 0.0;
  double length = 0.0;
  double cos_alpha = 0.0, sin_alpha = 0.0;
  double cos_beta = 0.0, sin_beta = 0.0;
  double l1 = 0.0, l2 = 0.0;
  double l11 = 0.0, l12 = 0.0, l22 = 0.0;
  double cos_phi = 1.0;
  bool cos_phi_defined = true;
};

namespace detail {

/// Numerically stable (cos, sin) of the angle between a unit tangent and a
/// chord vector r of length len. The sine comes from the rejected component,
/// so small angles keep full relative accuracy.
inline void chord_angle(const Vec& tangent, const Vec& r, double len,
                        double& cos_out, double& sin_out) {
  const double proj = tangent.dot(r);
  cos_out = proj / len;
  sin_out = (r - proj * tangent).norm() / len;
}

}  // namespace detail

/// The mixed partial L12 from tangents and positions only (order-1 data).
/// Dimension-free form of the quadruple-product identity:
/// L12 = (-(T(x).T(y)) |R|^2 + (T(x).R)(T(y).R)) / L^3.
inline double chord_l12(const Vec& tangent_x, const Vec& tangent_y, const Vec& r,
                        double len) {
  const double num =
      -(tangent_x.dot(tangent_y)) * (len * len) + tangent_x.dot(r) * tangent_y.dot(r);
  return num / (len * len * len);
}

inline ChordFrame chord_frame(const Curve& curve, double x, double y) {
  if (curve.dimension() < 2)
    throw std::invalid_argument("chord_frame: curve dimension must be >= 2");
  const auto px = curve.eval(x, 2);
  const auto py = curve.eval(y, 2);
  const Vec r = py.position - px.position;
  const double len = r.norm();
  if (len < 1e-9 * curve.length())
    throw std::invalid_argument(
        "chord_frame: chord too close to the diagonal (|y - x| ~ 0)");

  ChordFrame f;
  f.x = x;
  f.y = y;
  f.length = len;
  detail::chord_angle(px.deriv[0], r, len, f.cos_alpha, f.sin_alpha);
  detail::chord_angle(py.deriv[0], r, len, f.cos_beta, f.sin_beta);
  f.l1 = -f.cos_alpha;
  f.l2 = f.cos_beta;

  const double kx_term =
      px.normal_defined ? px.curvature * (px.normal.dot(r) / len) : 0.0;
  const double ky_term =
      py.normal_defined ? py.curvature * (py.normal.dot(r) / len) : 0.0;
  f.l11 = f.sin_alpha * f.sin_alpha / len - kx_term;
  f.l22 = f.sin_beta * f.sin_beta / len + ky_term;
  f.l12 = chord_l12(px.deriv[0], py.deriv[0], r, len);

  // Plane angle: near the diagonal both planes converge to the osculating
  // plane, so the limit is phi = 0.
  if (curve.circular_distance(x, y) < 1e-4 * curve.length()) {
    f.cos_phi = 1.0;
    f.cos_phi_defined = true;
  } else if (f.sin_alpha * f.sin_beta < 1e-12) {
    f.cos_phi = 0.0;
    f.cos_phi_defined = false;  // tangent chord: planes degenerate
  } else {
    f.cos_phi = std::clamp(len * f.l12 / (f.sin_alpha * f.sin_beta), -1.0, 1.0);
    f.cos_phi_defined = true;
  }
  return f;
}

/// Total area of the phase cylinder under omega = sin(alpha) d alpha ^ dx,
/// computed as the double integral of L12 over {(x, y) : x < y < x + |gamma|}.
/// For nice curves this equals 2 |gamma|.
inline double phase_area(const Curve& curve, int grid = 128) {
  if (grid < 128)
    throw std::invalid_argument("phase_area: grid must be >= 128 per direction");
  const double period = curve.length();

  static constexpr double kNodes4[2] = {0.3399810435848563, 0.8611363115940526};
  static constexpr double kWeights4[2] = {0.6521451548625461, 0.3478548451374538};

  auto l12_at = [&curve](double x, double s) {
    const auto px = curve.eval(x, 1);
    const auto py = curve.eval(x + s, 1);
    const Vec r = py.position - px.position;
    const double len = r.norm();
    if (len < 1e-13 * curve.length()) return 0.0;
    return chord_l12(px.deriv[0], py.deriv[0], r, len);
  };

  auto composite = [&](int cells) {
    const double h = period / cells;
    double total = 0.0;
    for (int ix = 0; ix < cells; ++ix) {
      const double x_mid = (ix + 0.5) * h;
      for (int is = 0; is < cells; ++is) {
        const double s_mid = (is + 0.5) * h;
        double cell_sum = 0.0;
        for (int a = 0; a < 2; ++a) {
          for (int sa = -1; sa <= 1; sa += 2) {
            const double xg = x_mid + sa * 0.5 * h * kNodes4[a];
            double inner = 0.0;
            for (int b = 0; b < 2; ++b)
              for (int sb = -1; sb <= 1; sb += 2)
                inner += kWeights4[b] *
                         l12_at(xg, s_mid + sb * 0.5 * h * kNodes4[b]);
            cell_sum += kWeights4[a] * inner;
          }
        }
        total += cell_sum * 0.25 * h * h;
      }
    }
    return total;
  };

  int cells = grid;
  double prev = composite(cells);
  for (int round = 0; round < 3; ++round) {
    cells *= 2;
    const double cur = composite(cells);
    const double rel = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    if (rel <= 1e-4) return cur;
    prev = cur;
  }
  // last refinement unsettled beyond the documented failure threshold
  const double cur = composite(cells * 2);
  if (std::abs(cur - prev) > 1e-3 * std::max(std::abs(cur), 1e-300))
    throw NumericalError("phase_area: quadrature did not converge");
  return cur;
}

}  // namespace wirebill
