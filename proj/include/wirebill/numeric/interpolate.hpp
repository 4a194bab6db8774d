#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace wirebill {

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).
/// Preserves strict monotonicity of the data, which makes it safe for
/// chart inverses and circle-map graphs.
class Pchip {
 public:
  Pchip() = default;

  Pchip(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2)
      throw std::invalid_argument("Pchip: need at least two matching samples");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1]))
        throw std::invalid_argument("Pchip: abscissae must be strictly increasing");
    compute_slopes();
  }

  double operator()(double t) const {
    const std::size_t j = find_cell(t);
    const double h = x_[j + 1] - x_[j];
    const double s = (t - x_[j]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[j] + h10 * h * d_[j] + h01 * y_[j + 1] + h11 * h * d_[j + 1];
  }

  double derivative(double t) const {
    const std::size_t j = find_cell(t);
    const double h = x_[j + 1] - x_[j];
    const double s = (t - x_[j]) / h;
    const double s2 = s * s;
    const double h00 = (6 * s2 - 6 * s) / h;
    const double h10 = 3 * s2 - 4 * s + 1;
    const double h01 = (-6 * s2 + 6 * s) / h;
    const double h11 = 3 * s2 - 2 * s;
    return h00 * y_[j] + h10 * d_[j] + h01 * y_[j + 1] + h11 * d_[j + 1];
  }

  double front_x() const { return x_.front(); }
  double back_x() const { return x_.back(); }
  const std::vector<double>& abscissae() const { return x_; }

  /// Index of the cell containing t (clamped to the domain).
  std::size_t find_cell(double t) const {
    if (t <= x_.front()) return 0;
    if (t >= x_.back()) return x_.size() - 2;
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    return static_cast<std::size_t>((it - x_.begin()) - 1);
  }

 private:
  void compute_slopes() {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        const double w1 = 2 * h[i] + h[i - 1];
        const double w2 = h[i] + 2 * h[i - 1];
        d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    d_[0] = endpoint_slope(h[0], n > 2 ? h[1] : h[0], delta[0],
                           n > 2 ? delta[1] : delta[0]);
    d_[n - 1] = endpoint_slope(h[n - 2], n > 2 ? h[n - 3] : h[n - 2],
                               delta[n - 2], n > 2 ? delta[n - 3] : delta[n - 2]);
  }

  static double endpoint_slope(double h0, double h1, double d0, double d1) {
    double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0)
      d = 0.0;
    else if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0))
      d = 3.0 * d0;
    return d;
  }

  std::vector<double> x_, y_, d_;
};

/// Natural cubic spline (second derivative zero at the ends).
/// Used for open raw-sample curves; closed ones use a trigonometric fit.
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 3)
      throw std::invalid_argument("CubicSpline: need at least three samples");
    solve_moments();
  }

  /// Value or derivative of order 0..3. Order 4 and above is identically zero.
  double eval(double t, int order = 0) const {
    if (t <= x_.front()) t = x_.front();
    if (t >= x_.back()) t = x_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const std::size_t j = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>((it - x_.begin()) - 1, 0,
                                   static_cast<std::ptrdiff_t>(x_.size()) - 2));
    const double h = x_[j + 1] - x_[j];
    const double a = (x_[j + 1] - t) / h;
    const double b = (t - x_[j]) / h;
    switch (order) {
      case 0:
        return a * y_[j] + b * y_[j + 1] +
               ((a * a * a - a) * m_[j] + (b * b * b - b) * m_[j + 1]) * h * h / 6.0;
      case 1:
        return (y_[j + 1] - y_[j]) / h +
               h / 6.0 * ((3 * b * b - 1) * m_[j + 1] - (3 * a * a - 1) * m_[j]);
      case 2:
        return a * m_[j] + b * m_[j + 1];
      case 3:
        return (m_[j + 1] - m_[j]) / h;
      default:
        return 0.0;
    }
  }

 private:
  void solve_moments() {
    const std::size_t n = x_.size();
    std::vector<double> a(n, 0.0), b(n, 2.0), c(n, 0.0), r(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
      a[i] = hl / (hl + hr);
      c[i] = hr / (hl + hr);
      r[i] = 6.0 / (hl + hr) *
             ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
    }
    // Thomas algorithm; natural ends keep m[0] = m[n-1] = 0.
    m_.assign(n, 0.0);
    std::vector<double> cp(n, 0.0), rp(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double denom = b[i] - a[i] * cp[i - 1];
      cp[i] = c[i] / denom;
      rp[i] = (r[i] - a[i] * rp[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) m_[i] = rp[i] - cp[i] * m_[i + 1];
  }

  std::vector<double> x_, y_, m_;
};

}  // namespace wirebill
