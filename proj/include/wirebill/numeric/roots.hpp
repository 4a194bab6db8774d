#pragma once

#include <cmath>
#include <utility>

#include "wirebill/types.hpp"

namespace wirebill {

struct RootResult {
  double x = 0.0;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Root of f on a sign-changing bracket [a, b] by secant steps safeguarded
/// with bisection. Stops when |f| <= f_tol or the bracket width falls
/// below x_tol.
template <class F>
RootResult solve_bracketed(F&& f, double a, double b, double fa, double fb,
                           double f_tol = 1e-12, double x_tol = 0.0,
                           int max_iter = 200) {
  RootResult res;
  if (fa == 0.0) return {a, 0.0, 0, true};
  if (fb == 0.0) return {b, 0.0, 0, true};
  if (fa * fb > 0.0) return {0.5 * (a + b), fa, 0, false};
  double x_prev = a, f_prev = fa;
  double x_cur = b, f_cur = fb;
  for (int it = 0; it < max_iter; ++it) {
    double x_next;
    const double df = f_cur - f_prev;
    if (df != 0.0) {
      x_next = x_cur - f_cur * (x_cur - x_prev) / df;
      if (!(x_next > std::min(a, b) && x_next < std::max(a, b)))
        x_next = 0.5 * (a + b);
    } else {
      x_next = 0.5 * (a + b);
    }
    const double f_next = f(x_next);
    ++res.evaluations;
    if (std::abs(f_next) <= f_tol) return {x_next, f_next, res.evaluations, true};
    if (fa * f_next < 0.0) {
      b = x_next;
      fb = f_next;
    } else {
      a = x_next;
      fa = f_next;
    }
    x_prev = x_cur;
    f_prev = f_cur;
    x_cur = x_next;
    f_cur = f_next;
    if (std::abs(b - a) <= x_tol) {
      const double mid = 0.5 * (a + b);
      return {mid, f_cur, res.evaluations, true};
    }
  }
  res.x = x_cur;
  res.f = f_cur;
  res.converged = std::abs(f_cur) <= 16.0 * f_tol;
  return res;
}

template <class F>
RootResult solve_bracketed(F&& f, double a, double b, double f_tol = 1e-12,
                           double x_tol = 0.0, int max_iter = 200) {
  const double fa = f(a);
  const double fb = f(b);
  return solve_bracketed(std::forward<F>(f), a, b, fa, fb, f_tol, x_tol, max_iter);
}

/// Maximizer of a unimodal f on [a, b] by golden-section search.
template <class F>
double golden_max(F&& f, double a, double b, double x_tol = 1e-12) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace wirebill
