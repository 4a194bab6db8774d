#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wirebill/curve.hpp"
#include "wirebill/numeric/interpolate.hpp"
#include "wirebill/numeric/roots.hpp"
#include "wirebill/reflection.hpp"
#include "wirebill/types.hpp"

namespace wirebill {

/// One-parameter family of chords [gamma(t), gamma(f(t))] of a closed curve,
/// with f a monotone degree-one circle map (a Birkhoff invariant-circle
/// graph or an exact shift). The lift satisfies f(t + |gamma|) = f(t) + |gamma|
/// and t < f(t) < t + |gamma|.
class ChordFamily {
 public:
  /// Exact shift family f(t) = t + d_raw * speed on a constant-raw-speed
  /// curve (paper coordinates: d is the raw-parameter offset).
  static ChordFamily shift(const Curve& curve, double raw_d) {
    if (!curve.constant_raw_speed())
      throw std::invalid_argument(
          "ChordFamily::shift: curve must have constant raw speed");
    const double d_arc = raw_d * curve.raw_speed();
    if (!(d_arc > 0.0 && d_arc < curve.length()))
      throw std::invalid_argument("ChordFamily::shift: offset outside (0, period)");
    ChordFamily fam;
    fam.curve_ = curve;
    fam.is_shift_ = true;
    fam.shift_arc_ = d_arc;
    return fam;
  }

  /// Reconstructs the circle map of an invariant circle from one long orbit:
  /// sort the phase points by footpoint and interpolate monotonically.
  static ChordFamily from_orbit(const Curve& curve, const Orbit& orbit) {
    const double period = curve.length();
    std::vector<std::pair<double, double>> data;
    for (std::size_t i = 0; i + 1 < orbit.vertices.size(); ++i) {
      const double base = curve.reduce(orbit.vertices[i]);
      const double gap = orbit.vertices[i + 1] - orbit.vertices[i];
      if (!(gap > 0.0 && gap < period))
        throw std::invalid_argument(
            "ChordFamily::from_orbit: orbit advance outside (0, period)");
      data.emplace_back(base, base + gap);
    }
    std::sort(data.begin(), data.end());
    // drop near-duplicate footpoints; PCHIP needs strict increase
    std::vector<double> ts, fs;
    for (const auto& [t, ft] : data) {
      if (!ts.empty() && t - ts.back() < 1e-9 * period) continue;
      ts.push_back(t);
      fs.push_back(ft);
    }
    if (ts.size() < 16)
      throw std::invalid_argument("ChordFamily::from_orbit: too few distinct points");
    for (std::size_t i = 1; i < fs.size(); ++i)
      if (!(fs[i] > fs[i - 1]))
        throw std::invalid_argument(
            "ChordFamily::from_orbit: orbit is not a monotone circle-map graph "
            "(not an invariant circle?)");
    // periodic ghost extension for smooth interpolation across the seam
    std::vector<double> tx, fx;
    const std::size_t ghosts = std::min<std::size_t>(4, ts.size());
    for (std::size_t g = ghosts; g >= 1; --g) {
      tx.push_back(ts[ts.size() - g] - period);
      fx.push_back(fs[ts.size() - g] - period);
    }
    tx.insert(tx.end(), ts.begin(), ts.end());
    fx.insert(fx.end(), fs.begin(), fs.end());
    for (std::size_t g = 0; g < ghosts; ++g) {
      tx.push_back(ts[g] + period);
      fx.push_back(fs[g] + period);
    }
    ChordFamily fam;
    fam.curve_ = curve;
    fam.is_shift_ = false;
    fam.map_ = Pchip(tx, fx);
    double min_cell = period;
    for (std::size_t i = 1; i < ts.size(); ++i)
      min_cell = std::min(min_cell, ts[i] - ts[i - 1]);
    fam.cell_ = min_cell;
    fam.grid_ = std::move(ts);
    return fam;
  }

  const Curve& curve() const { return curve_; }
  bool is_shift() const { return is_shift_; }

  /// Lifted partner f(t).
  double partner(double t) const {
    if (is_shift_) return t + shift_arc_;
    const double period = curve_.length();
    const double wraps = std::floor(t / period);
    return map_(t - wraps * period) + wraps * period;
  }

  double partner_prime(double t) const {
    if (is_shift_) return 1.0;
    const double period = curve_.length();
    return map_.derivative(t - std::floor(t / period) * period);
  }

  /// Lifted inverse f^{-1}(t).
  double inverse_partner(double t) const {
    if (is_shift_) return t - shift_arc_;
    const double period = curve_.length();
    // bracket: f(t - period) < t < f(t)
    auto g = [&](double s) { return partner(s) - t; };
    const auto res = solve_bracketed(g, t - period, t, 1e-13, 1e-13, 200);
    if (!res.converged)
      throw NumericalError("ChordFamily::inverse_partner: solve failed");
    return res.x;
  }

  /// Representative parameter grid (cell midpoints keep finite differences
  /// inside single interpolation cells, where the map is smooth).
  std::vector<double> sample_parameters(int count) const {
    std::vector<double> out;
    const double period = curve_.length();
    if (is_shift_ || grid_.empty()) {
      out.reserve(count);
      for (int i = 0; i < count; ++i)
        out.push_back(period * (i + 0.5) / static_cast<double>(count));
      return out;
    }
    const std::size_t stride =
        std::max<std::size_t>(1, grid_.size() / static_cast<std::size_t>(count));
    for (std::size_t i = 0; i + 1 < grid_.size(); i += stride)
      out.push_back(0.5 * (grid_[i] + grid_[i + 1]));
    return out;
  }

  /// Safe finite-difference step: analytic shifts take a scale-relative
  /// step, interpolated maps stay inside one interpolation cell (where the
  /// monotone cubic is smooth).
  double fd_step() const {
    if (is_shift_) return 1e-2 * curve_.length() / kTwoPi;
    return cell_ / 8.0;
  }

 private:
  Curve curve_;
  bool is_shift_ = true;
  double shift_arc_ = 0.0;
  Pchip map_;
  std::vector<double> grid_;
  double cell_ = 0.0;
};

struct StrictionSample {
  double t = 0.0;
  Vec point;                       // striction point delta(t)
  double s_star_over_length = 0.0; // normalized position along the chord
  double deviation = 0.0;          // angle between R and FD delta-dot, radians
  double non_cylindricity = 0.0;   // |R x Rdot| surrogate (Gram area)
  bool degenerate = false;         // cylindrical ruling, excluded
};

namespace detail {

struct RulingData {
  Vec base_pos, base_tan;
  Vec r;        // gamma(f(t)) - gamma(t)
  Vec r_dot;    // d/dt of r along the family
  double len = 0.0;
  double non_cyl = 0.0;
  double fraction = 0.0;  // s* / L
  bool degenerate = false;
};

/// Striction fraction from Gram determinants in the 3-space spanned by
/// {R, tangent(t), tangent(f(t))}: with the quadruple-product identity,
/// s*/L = ((R.T)(Rdot.R) - L^2 (Rdot.T)) / (L^2 |Rdot|^2 - (R.Rdot)^2).
inline RulingData ruling_data(const Curve& curve, const ChordFamily& fam,
                              double t) {
  RulingData d;
  const auto pt = curve.eval(t, 1);
  const double ft = fam.partner(t);
  const double fp = fam.partner_prime(t);
  const auto pf = curve.eval(ft, 1);
  d.base_pos = pt.position;
  d.base_tan = pt.deriv[0];
  d.r = pf.position - pt.position;
  d.r_dot = pf.deriv[0] * fp - pt.deriv[0];
  d.len = d.r.norm();
  const double gram = d.len * d.len * d.r_dot.squaredNorm() -
                      d.r.dot(d.r_dot) * d.r.dot(d.r_dot);
  d.non_cyl = std::sqrt(std::max(0.0, gram));
  if (d.non_cyl <= 1e-10) {
    d.degenerate = true;
    return d;
  }
  const double num = d.r.dot(d.base_tan) * d.r_dot.dot(d.r) -
                     d.len * d.len * d.r_dot.dot(d.base_tan);
  d.fraction = num / gram;
  return d;
}

inline Vec striction_point(const Curve& curve, const ChordFamily& fam, double t) {
  const RulingData d = ruling_data(curve, fam, t);
  if (d.degenerate)
    throw NumericalError("striction_point: cylindrical ruling");
  return d.base_pos + d.fraction * d.r;
}

/// Fourth-order five-point derivative of the striction curve.
inline Vec striction_derivative(const Curve& curve, const ChordFamily& fam,
                                double t, double h) {
  const Vec pm2 = striction_point(curve, fam, t - 2 * h);
  const Vec pm1 = striction_point(curve, fam, t - h);
  const Vec pp1 = striction_point(curve, fam, t + h);
  const Vec pp2 = striction_point(curve, fam, t + 2 * h);
  return (pm2 - 8.0 * pm1 + 8.0 * pp1 - pp2) / (12.0 * h);
}

inline double angle_between_line_directions(const Vec& a, const Vec& b) {
  const double an = a.norm(), bn = b.norm();
  if (an < 1e-12 || bn < 1e-12) return 0.0;
  const double dot = std::abs(a.dot(b)) / (an * bn);
  const Vec unit_b = b / bn;
  const Vec perp = a - (a.dot(unit_b)) * unit_b;
  return std::atan2(perp.norm() / an, dot);
}

}  // namespace detail

/// Striction samples along the family. The developability deviation is the
/// angle between the ruling R(t) and the finite-difference derivative of the
/// striction curve, with the step refined until the value stabilizes to 1%
/// (floored near zero so exactly-developable families terminate).
inline std::vector<StrictionSample> striction_profile(const Curve& curve,
                                                      const ChordFamily& fam,
                                                      int samples = 256) {
  std::vector<StrictionSample> out;
  for (const double t : fam.sample_parameters(samples)) {
    StrictionSample s;
    s.t = t;
    const auto d = detail::ruling_data(curve, fam, t);
    s.non_cylindricity = d.non_cyl;
    if (d.degenerate) {
      s.degenerate = true;
      out.push_back(s);
      continue;
    }
    s.s_star_over_length = d.fraction;
    s.point = d.base_pos + d.fraction * d.r;

    double h = fam.fd_step();
    double dev_prev = detail::angle_between_line_directions(
        detail::striction_derivative(curve, fam, t, h), d.r);
    for (int refine = 0; refine < 4; ++refine) {
      h *= 0.5;
      const double dev = detail::angle_between_line_directions(
          detail::striction_derivative(curve, fam, t, h), d.r);
      const bool stable = std::abs(dev - dev_prev) <= 0.01 * std::max(dev, 1e-9);
      dev_prev = dev;
      if (stable) break;
    }
    s.deviation = dev_prev;
    out.push_back(s);
  }
  return out;
}

/// Roots d in (0, 2 pi) of tan(m d / 2) = m tan(d / 2), found by bracketed
/// bisection on every continuity branch between tangent poles. Pole
/// crossings are sign changes but not roots and are excluded by the branch
/// decomposition.
inline std::vector<double> gutkin_roots(int m) {
  if (m < 2) throw std::invalid_argument("gutkin_roots: m must be >= 2");
  auto g = [m](double u) {
    return std::tan(m * u) - static_cast<double>(m) * std::tan(u);
  };
  // poles of tan(u) and tan(mu) inside (0, pi)
  std::vector<double> poles = {0.0, kPi};
  poles.push_back(0.5 * kPi);
  for (int l = 0; l < m; ++l) {
    const double p = (2.0 * l + 1.0) * kPi / (2.0 * m);
    if (p > 0.0 && p < kPi) poles.push_back(p);
  }
  std::sort(poles.begin(), poles.end());
  poles.erase(std::unique(poles.begin(), poles.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-13; }),
              poles.end());

  std::vector<double> roots_u;
  constexpr int kScan = 4096;
  for (std::size_t b = 0; b + 1 < poles.size(); ++b) {
    const double width = poles[b + 1] - poles[b];
    const double lo = poles[b] + 1e-7 * width;
    const double hi = poles[b + 1] - 1e-7 * width;
    double u_prev = lo, g_prev = g(lo);
    for (int i = 1; i <= kScan; ++i) {
      const double u = lo + (hi - lo) * i / kScan;
      const double gu = g(u);
      if (g_prev * gu <= 0.0 && (g_prev != 0.0 || gu != 0.0)) {
        const auto res = solve_bracketed(g, u_prev, u, g_prev, gu, 1e-13, 1e-15, 200);
        if (res.converged) roots_u.push_back(res.x);
      }
      u_prev = u;
      g_prev = gu;
    }
  }
  std::sort(roots_u.begin(), roots_u.end());
  roots_u.erase(std::unique(roots_u.begin(), roots_u.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                roots_u.end());
  std::vector<double> roots_d;
  for (double u : roots_u) {
    if (u < 1e-6 || u > kPi - 1e-6) continue;  // trivial endpoint zeros
    roots_d.push_back(2.0 * u);
  }
  return roots_d;
}

/// Max residual of the transport identity (a1 + a2)' = delta2'.v2 - delta1'.v1
/// along the family, with the chord split at the striction point:
/// delta2 is the striction point of the outgoing chord [gamma(t), gamma(f(t))],
/// delta1 of the incoming chord [gamma(f^{-1}(t)), gamma(t)], and v_i the unit
/// directions into/out of the reflection vertex gamma(t).
inline double string_invariant(const Curve& curve, const ChordFamily& fam,
                               int samples = 128) {
  const double h = 0.5 * fam.fd_step();

  auto split_lengths = [&](double t) {
    // a1: striction-to-vertex along the incoming chord; a2: vertex-to-striction
    const double w = fam.inverse_partner(t);
    const auto din = detail::ruling_data(curve, fam, w);
    const auto dout = detail::ruling_data(curve, fam, t);
    if (din.degenerate || dout.degenerate)
      throw NumericalError("string_invariant: cylindrical sample");
    return (1.0 - din.fraction) * din.len + dout.fraction * dout.len;
  };

  double max_residual = 0.0;
  for (const double t : fam.sample_parameters(samples)) {
    const auto dout = detail::ruling_data(curve, fam, t);
    const double w = fam.inverse_partner(t);
    const auto din = detail::ruling_data(curve, fam, w);
    if (dout.degenerate || din.degenerate) continue;

    const Vec v2 = dout.r / dout.len;
    const Vec v1 = din.r / din.len;

    auto total = [&](double tt) { return split_lengths(tt); };
    const double lhs = (total(t - 2 * h) - 8.0 * total(t - h) +
                        8.0 * total(t + h) - total(t + 2 * h)) /
                       (12.0 * h);

    auto delta2 = [&](double tt) { return detail::striction_point(curve, fam, tt); };
    auto delta1 = [&](double tt) {
      return detail::striction_point(curve, fam, fam.inverse_partner(tt));
    };
    const Vec d2dot = (delta2(t - 2 * h) - 8.0 * delta2(t - h) +
                       8.0 * delta2(t + h) - delta2(t + 2 * h)) /
                      (12.0 * h);
    const Vec d1dot = (delta1(t - 2 * h) - 8.0 * delta1(t - h) +
                       8.0 * delta1(t + h) - delta1(t + 2 * h)) /
                      (12.0 * h);
    const double rhs = d2dot.dot(v2) - d1dot.dot(v1);
    max_residual = std::max(max_residual, std::abs(lhs - rhs));
  }
  return max_residual;
}

}  // namespace wirebill
