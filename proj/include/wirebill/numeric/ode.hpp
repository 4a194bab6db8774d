#pragma once

#include <algorithm>
#include <cmath>

#include "wirebill/types.hpp"

namespace wirebill {

struct OdeOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  double min_step = 1e-14;
  double max_step = 0.25;
  long max_steps = 2'000'000;
};

using State = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2 * kMaxDim, 1>;

/// Adaptive Dormand-Prince 5(4) integration of y' = rhs(y) from t = 0 to
/// t = duration (either sign). `project` is applied after every accepted
/// step; use it to pull the state back onto a constraint manifold.
template <class Rhs, class Project>
State integrate_ode(Rhs&& rhs, Project&& project, State y, double duration,
                    const OdeOptions& opt = {}) {
  if (duration == 0.0) return y;
  const double dir = duration > 0.0 ? 1.0 : -1.0;
  const double t_end = duration;
  double t = 0.0;
  double h = dir * std::min(opt.initial_step, opt.max_step);

  State k1, k2, k3, k4, k5, k6, k7, y5, y4, ytmp;
  long steps = 0;
  while (dir * (t_end - t) > 0.0) {
    if (++steps > opt.max_steps)
      throw NumericalError("integrate_ode: step budget exhausted");
    if (dir * h > dir * (t_end - t)) h = t_end - t;
    if (std::abs(h) < opt.min_step)
      throw NumericalError("integrate_ode: step size underflow");

    k1 = rhs(y);
    ytmp = y + h * (1.0 / 5.0) * k1;
    k2 = rhs(ytmp);
    ytmp = y + h * ((3.0 / 40.0) * k1 + (9.0 / 40.0) * k2);
    k3 = rhs(ytmp);
    ytmp = y + h * ((44.0 / 45.0) * k1 - (56.0 / 15.0) * k2 + (32.0 / 9.0) * k3);
    k4 = rhs(ytmp);
    ytmp = y + h * ((19372.0 / 6561.0) * k1 - (25360.0 / 2187.0) * k2 +
                    (64448.0 / 6561.0) * k3 - (212.0 / 729.0) * k4);
    k5 = rhs(ytmp);
    ytmp = y + h * ((9017.0 / 3168.0) * k1 - (355.0 / 33.0) * k2 +
                    (46732.0 / 5247.0) * k3 + (49.0 / 176.0) * k4 -
                    (5103.0 / 18656.0) * k5);
    k6 = rhs(ytmp);
    y5 = y + h * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3 +
                  (125.0 / 192.0) * k4 - (2187.0 / 6784.0) * k5 +
                  (11.0 / 84.0) * k6);
    k7 = rhs(y5);
    y4 = y + h * ((5179.0 / 57600.0) * k1 + (7571.0 / 16695.0) * k3 +
                  (393.0 / 640.0) * k4 - (92097.0 / 339200.0) * k5 +
                  (187.0 / 2100.0) * k6 + (1.0 / 40.0) * k7);

    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale =
          opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      const double e = (y5[i] - y4[i]) / scale;
      err += e * e;
    }
    err = std::sqrt(err / static_cast<double>(y.size()));

    if (err <= 1.0) {
      t += h;
      y = y5;
      project(y);
    }
    const double factor =
        std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    h *= factor;
    if (std::abs(h) > opt.max_step) h = dir * opt.max_step;
  }
  return y;
}

}  // namespace wirebill
