#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "wirebill/numeric/interpolate.hpp"
#include "wirebill/types.hpp"

namespace wirebill {

// 16-point Gauss-Legendre rule on [-1, 1], positive half (rule is symmetric).
inline constexpr double kGauss16Nodes[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
inline constexpr double kGauss16Weights[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

/// Integral of f over [a, b] with a single 16-point Gauss-Legendre rule.
template <class F>
double gauss16(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = half * kGauss16Nodes[i];
    sum += kGauss16Weights[i] * (f(mid - dx) + f(mid + dx));
  }
  return half * sum;
}

/// Composite Gauss-Legendre integration with doubling refinement.
/// Refines until successive totals agree to rel_tol or max_cells is reached.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-13,
                 int min_cells = 16, int max_cells = 1 << 14) {
  auto composite = [&](int cells) {
    const double h = (b - a) / cells;
    double sum = 0.0;
    for (int j = 0; j < cells; ++j) sum += gauss16(f, a + j * h, a + (j + 1) * h);
    return sum;
  };
  int cells = std::max(1, min_cells);
  double prev = composite(cells);
  while (cells < max_cells) {
    cells *= 2;
    const double cur = composite(cells);
    const double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
    if (std::abs(cur - prev) <= rel_tol * scale) return cur;
    prev = cur;
  }
  return prev;
}

/// Strictly increasing cumulative map F(t) = \int_{t0}^{t} g, with inverse.
///
/// Used for arc-length charts and Lazutkin charts. Per-cell integrals are
/// 16-point Gauss; the inverse is a monotone-cubic initial guess polished by
/// bracketed Newton, so both directions resolve to near machine precision
/// for smooth positive g.
class CumulativeChart {
 public:
  CumulativeChart() = default;

  template <class G>
  static CumulativeChart build(G&& g, double t0, double t1, int min_cells = 256,
                               double rel_tol = 1e-13, int max_cells = 1 << 14) {
    CumulativeChart chart;
    chart.g_ = std::function<double(double)>(g);
    chart.t0_ = t0;
    chart.t1_ = t1;
    int cells = 64;
    while (cells < min_cells) cells *= 2;
    chart.tabulate(cells);
    double prev_total = chart.total();
    while (cells < max_cells) {
      cells *= 2;
      chart.tabulate(cells);
      if (std::abs(chart.total() - prev_total) <=
          rel_tol * std::max(std::abs(chart.total()), 1e-300))
        break;
      prev_total = chart.total();
    }
    chart.build_inverse_guess();
    return chart;
  }

  double total() const { return cum_.back(); }
  double domain_begin() const { return t0_; }
  double domain_end() const { return t1_; }

  /// F(t) for t in [t0, t1].
  double value(double t) const {
    t = std::clamp(t, t0_, t1_);
    const std::size_t j = cell_of(t);
    return cum_[j] + gauss16(g_, nodes_[j], t);
  }

  /// Integral of g over [ta, tb] (no domain clamping beyond [t0, t1]).
  double between(double ta, double tb) const {
    if (tb < ta) return -between(tb, ta);
    // Short spans get a direct rule: exact cancellation-free small values.
    if (tb - ta <= 2.0 * cell_width()) return gauss16(g_, ta, tb);
    return value(tb) - value(ta);
  }

  /// t with F(t) = s, for s in [0, total].
  double inverse(double s) const {
    s = std::clamp(s, 0.0, total());
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t j = static_cast<std::size_t>(
        std::max<std::ptrdiff_t>(0, (it - cum_.begin()) - 1));
    j = std::min(j, nodes_.size() - 2);
    double lo = nodes_[j], hi = nodes_[j + 1];
    double t = std::clamp(inverse_guess_(s), lo, hi);
    const double f_tol = 1e-15 * std::max(1.0, total());
    for (int iter = 0; iter < 12; ++iter) {
      const double fval = cum_[j] + gauss16(g_, nodes_[j], t) - s;
      if (std::abs(fval) <= f_tol) break;
      if (fval > 0.0)
        hi = t;
      else
        lo = t;
      const double slope = g_(t);
      double t_next = (slope > 0.0) ? t - fval / slope : 0.5 * (lo + hi);
      if (!(t_next >= lo && t_next <= hi)) t_next = 0.5 * (lo + hi);
      if (t_next == t) break;
      t = t_next;
    }
    return t;
  }

 private:
  void tabulate(int cells) {
    nodes_.resize(cells + 1);
    cum_.resize(cells + 1);
    const double h = (t1_ - t0_) / cells;
    nodes_[0] = t0_;
    cum_[0] = 0.0;
    for (int j = 0; j < cells; ++j) {
      nodes_[j + 1] = (j + 1 == cells) ? t1_ : t0_ + (j + 1) * h;
      cum_[j + 1] = cum_[j] + gauss16(g_, nodes_[j], nodes_[j + 1]);
    }
  }

  void build_inverse_guess() { inverse_guess_ = Pchip(cum_, nodes_); }

  double cell_width() const { return nodes_[1] - nodes_[0]; }

  std::size_t cell_of(double t) const {
    const double w = cell_width();
    auto j = static_cast<std::ptrdiff_t>((t - t0_) / w);
    j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(nodes_.size()) - 2);
    return static_cast<std::size_t>(j);
  }

  std::function<double(double)> g_;
  double t0_ = 0.0, t1_ = 1.0;
  std::vector<double> nodes_, cum_;
  Pchip inverse_guess_;
};

}  // namespace wirebill
