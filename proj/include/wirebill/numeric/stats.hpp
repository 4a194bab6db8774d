#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wirebill/types.hpp"

namespace wirebill {

/// One-sample Kolmogorov-style sup-discrepancy between n points and a
/// continuous CDF. `cdf_values` are F(x_i) for the sorted sample.
inline double sup_discrepancy(std::vector<double> cdf_values) {
  std::sort(cdf_values.begin(), cdf_values.end());
  const double n = static_cast<double>(cdf_values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < cdf_values.size(); ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, cdf_values[i] - lo, hi - cdf_values[i]});
  }
  return d;
}

/// Neville extrapolation of samples (h_i, y_i) to h = 0. The h_i must be
/// distinct and are typically 1/N^2 for a second-order error model.
/// Returns the extrapolated value and the magnitude of the last correction.
inline std::pair<double, double> richardson_limit(const std::vector<double>& h,
                                                  const std::vector<double>& y) {
  const std::size_t n = h.size();
  std::vector<double> tableau = y;
  double prev = tableau.back();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      tableau[i] = (h[i] * tableau[i + 1] - h[i + level] * tableau[i]) /
                   (h[i] - h[i + level]);
    }
    prev = (level + 1 < n) ? tableau[0] : prev;
  }
  const double limit = tableau[0];
  return {limit, std::abs(limit - prev)};
}

/// Best rational p/q with q <= max_den approximating x, via continued
/// fractions. Returns nothing if no convergent lands within tol.
inline std::optional<std::pair<long, long>> rational_approximation(
    double x, double tol = 1e-9, long max_den = 1'000'000) {
  long p_prev = 1, q_prev = 0;
  long p_cur = static_cast<long>(std::floor(x)), q_cur = 1;
  double frac = x - std::floor(x);
  for (int it = 0; it < 64; ++it) {
    if (std::abs(x - static_cast<double>(p_cur) / q_cur) <= tol)
      return std::make_pair(p_cur, q_cur);
    if (frac < 1e-18) break;
    const double inv = 1.0 / frac;
    const long a = static_cast<long>(std::floor(inv));
    frac = inv - std::floor(inv);
    const long p_next = a * p_cur + p_prev;
    const long q_next = a * q_cur + q_prev;
    if (q_next > max_den) break;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
  }
  if (std::abs(x - static_cast<double>(p_cur) / q_cur) <= tol)
    return std::make_pair(p_cur, q_cur);
  return std::nullopt;
}

/// Least-squares slope of log(y) against log(x), ignoring pairs with
/// y below the floor (round-off plateau exclusion).
inline double loglog_slope(const std::vector<double>& x,
                           const std::vector<double>& y, double floor = 1e-13) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > floor) || !(x[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Deterministic uniform variates; identical streams across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ull) : state_(seed) {
    if (state_ == 0) state_ = 1;
  }

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

 private:
  std::uint64_t state_;
};

/// FNV-1a hash of a byte string; used for config digests in outputs.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace wirebill
