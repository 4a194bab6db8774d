#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wirebill/chord.hpp"
#include "wirebill/curve.hpp"
#include "wirebill/numeric/stats.hpp"
#include "wirebill/reflection.hpp"
#include "wirebill/types.hpp"

namespace wirebill {

struct GlanceResult {
  std::vector<double> vertices;  // lifted
  std::vector<double> alphas;    // chord angle at each left endpoint
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  int steps_done = 0;
  bool multivalued_encountered = false;
  bool stopped_early = false;
};

/// Iterates a glancing orbit in all-roots mode, starting from the chord
/// with angle alpha0 at x0. When several successors exist, the root whose
/// advance is closest to the previous advance is chosen (branch
/// continuation) and the event is flagged. Reports the alpha excursion.
inline GlanceResult glancing_escape(const Curve& curve, double alpha0, int steps,
                                    double x0 = 0.0,
                                    const ReflectOptions& opts = {}) {
  GlanceResult result;
  double x = x0;
  double y = chord_with_angle(curve, x0, alpha0);
  result.vertices = {x, y};
  result.alpha_min = result.alpha_max = alpha0;
  result.alphas.push_back(alpha0);

  for (int step = 0; step < steps; ++step) {
    const auto roots = reflect_all(curve, {x, y}, opts);
    if (roots.empty()) {
      result.stopped_early = true;
      return result;
    }
    double z = roots.front();
    if (roots.size() > 1) {
      result.multivalued_encountered = true;
      const double prev_advance = y - x;
      double best = std::abs((roots.front() - y) - prev_advance);
      for (double cand : roots) {
        const double score = std::abs((cand - y) - prev_advance);
        if (score < best) {
          best = score;
          z = cand;
        }
      }
    }
    const ChordFrame f = chord_frame(curve, y, z);
    const double alpha = std::atan2(f.sin_alpha, f.cos_alpha);
    result.alphas.push_back(alpha);
    result.alpha_min = std::min(result.alpha_min, alpha);
    result.alpha_max = std::max(result.alpha_max, alpha);
    result.vertices.push_back(z);
    x = y;
    y = z;
    result.steps_done = step + 1;
  }
  return result;
}

/// Minimum of L11(q, z) + L22(w, q) over sampled chords through the point
/// gamma(q). At a curvature zero the curvature terms drop out and the sum
/// reduces to sin^2(a)/L + sin^2(b)/L > 0, the sign that rules out
/// non-contractible invariant curves.
inline double flat_point_positivity(const Curve& curve, double q, int samples,
                                    std::uint64_t seed = 7u) {
  Rng rng(seed);
  const double period = curve.length();
  double min_value = std::numeric_limits<double>::max();
  for (int i = 0; i < samples; ++i) {
    const double z = q + rng.uniform(0.02, 0.98) * period;
    const double w = q - rng.uniform(0.02, 0.98) * period;
    const ChordFrame out = chord_frame(curve, q, z);
    const ChordFrame in = chord_frame(curve, w, q);
    min_value = std::min(min_value, out.l11 + in.l22);
  }
  return min_value;
}

}  // namespace wirebill
