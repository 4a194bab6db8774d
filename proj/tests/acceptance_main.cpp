// Acceptance suite: one pass/fail line per criterion, each pinned at its
// stated tolerance and runtime budget. Exit status is the number of failed
// criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "wirebill/wirebill.hpp"

using namespace wirebill;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

class Criterion {
 public:
  Criterion(int number, std::string title)
      : number_(number), title_(std::move(title)), start_(Clock::now()) {}

  void check(bool ok, const std::string& detail) {
    ok_ = ok_ && ok;
    if (!ok) details_ += (details_.empty() ? "" : "; ") + detail + " FAILED";
  }

  void metric(const std::string& detail) {
    details_ += (details_.empty() ? "" : "; ") + detail;
  }

  void finish(double budget_seconds = 0.0) {
    const double elapsed = std::chrono::duration<double>(Clock::now() - start_).count();
    if (budget_seconds > 0.0 && elapsed > budget_seconds) {
      ok_ = false;
      details_ += (details_.empty() ? "" : "; ") + std::string("runtime budget exceeded");
    }
    std::printf("[%s] %2d. %s (%s%.1f s%s)\n", ok_ ? "PASS" : "FAIL", number_,
                title_.c_str(), details_.empty() ? "" : (details_ + "; ").c_str(),
                elapsed, budget_seconds > 0 ? (" < " + format(budget_seconds)).c_str() : "");
    std::fflush(stdout);
    if (!ok_) ++g_failures;
  }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g s", v);
    return buf;
  }
  int number_;
  std::string title_;
  Clock::time_point start_;
  bool ok_ = true;
  std::string details_;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

// Criterion 1: the five partials of L against central finite differences at
// 200 random chords on each of four curves, absolute error < 1e-6.
void criterion_1() {
  Criterion crit(1, "second partials of L match finite differences");
  const std::vector<const Curve*> curves = {
      &wbtest::unit_circle(), &wbtest::ellipse21(), &wbtest::coil_small(),
      &wbtest::flat_curve()};
  double worst = 0.0;
  for (const Curve* c : curves) {
    Rng rng(101);
    for (int i = 0; i < 200; ++i) {
      const double x = rng.uniform(0.0, c->length());
      const double y = x + rng.uniform(0.05, 0.95) * c->length();
      const auto f = chord_frame(*c, x, y);
      const auto fd = wbtest::fd_partials(*c, x, y);
      worst = std::max({worst, std::abs(f.l1 - fd.l1), std::abs(f.l2 - fd.l2),
                        std::abs(f.l11 - fd.l11), std::abs(f.l22 - fd.l22),
                        std::abs(f.l12 - fd.l12)});
    }
  }
  crit.check(worst < 1e-6, fmt("max abs err %.2e", worst));
  crit.metric(fmt("max abs err %.2e < 1e-6", worst));
  crit.finish(10.0);
}

// Criterion 2: FD Jacobian determinant in (x, cos alpha) within 1e-6 of 1 at
// 50 random phase points on the ellipse and the coil.
void criterion_2() {
  Criterion crit(2, "area preservation: |det J - 1| < 1e-6");
  double worst = 0.0;
  for (const Curve* c : {&wbtest::ellipse21(), &wbtest::coil_small()}) {
    Rng rng(202);
    for (int i = 0; i < 50; ++i) {
      const double x = rng.uniform(0.0, c->length());
      const double y = x + rng.uniform(0.15, 0.85) * c->length();
      worst = std::max(worst, std::abs(jacobian_check(*c, {x, y}) - 1.0));
    }
  }
  crit.check(worst < 1e-6, fmt("max |det-1| %.2e", worst));
  crit.metric(fmt("max |det-1| %.2e < 1e-6", worst));
  crit.finish(10.0);
}

// Criterion 3: total phase area equals 2 |gamma| within 1e-3 relative.
void criterion_3() {
  Criterion crit(3, "total phase area equals twice the length");
  const double a_circle = phase_area(wbtest::unit_circle());
  const double gap_circle = std::abs(a_circle - 4.0 * kPi) / (4.0 * kPi);
  const auto& coil = wbtest::coil_small();
  const double a_coil = phase_area(coil);
  const double gap_coil =
      std::abs(a_coil - 2.0 * coil.length()) / (2.0 * coil.length());
  crit.check(gap_circle < 1e-3, fmt("circle rel gap %.2e", gap_circle));
  crit.check(gap_coil < 1e-3, fmt("coil rel gap %.2e", gap_coil));
  crit.metric(fmt("circle %.2e", gap_circle) + fmt(", coil %.2e < 1e-3", gap_coil));
  crit.finish();
}

// Criterion 4: the coil is certified nice; its reflections track the exact
// shift to 1e-8 over 1e4 steps with the angle conserved to 1e-8.
void criterion_4() {
  Criterion crit(4, "integrable coil: niceness, exact shift, conserved angle");
  const auto& coil = wbtest::coil_small();
  const auto rep = check_nice(coil, 64, 0.05);
  crit.check(rep.passed(), "niceness certificate");
  const double d = 1.3;
  const auto orbit = iterate_orbit(coil, {0.0, d}, 10000);
  crit.check(orbit.completed, "orbit completed");
  double shift_err = 0.0, alpha_err = 0.0;
  for (std::size_t i = 0; i < orbit.vertices.size(); ++i)
    shift_err = std::max(shift_err,
                         std::abs(orbit.vertices[i] - d * static_cast<double>(i)));
  for (const double a : orbit.alphas)
    alpha_err = std::max(alpha_err, std::abs(a - orbit.alphas[0]));
  crit.check(shift_err < 1e-8, fmt("shift error %.2e", shift_err));
  crit.check(alpha_err < 1e-8, fmt("alpha drift %.2e", alpha_err));
  crit.metric(fmt("shift err %.2e", shift_err) + fmt(", alpha drift %.2e < 1e-8", alpha_err));
  crit.finish();
}

// Criterion 5: Lazutkin normal-form exponents on the ellipse a=1.5, b=1.
void criterion_5() {
  Criterion crit(5, "Lazutkin residual exponents e_u >= 2.9, e_v >= 3.9");
  std::vector<double> alphas;
  for (int k = 3; k <= 12; ++k) alphas.push_back(std::pow(2.0, -k));
  const auto c = Curve::build(CurveSpec::ellipse(1.5, 1.0));
  const auto fit = lazutkin_residuals(c, alphas);
  crit.check(fit.e_u >= 2.9, fmt("e_u %.3f", fit.e_u));
  crit.check(fit.e_v >= 3.9, fmt("e_v %.3f", fit.e_v));
  crit.metric(fmt("e_u %.3f", fit.e_u) + fmt(", e_v %.3f", fit.e_v));
  crit.finish(30.0);
}

// Criterion 6: extrapolated length deficits against the cubed reference.
void criterion_6() {
  Criterion crit(6, "length deficit limits (circle arc and ellipse quarter)");
  const auto circle_res =
      deficit_limit(wbtest::unit_circle(), 0.0, kPi / 2, {32, 64, 128, 256});
  const double circle_target = std::pow(kPi / 2, 3) / 24.0;
  const double circle_err = std::abs(circle_res.extrapolated - circle_target);
  crit.check(circle_err < 1e-4, fmt("circle err %.2e", circle_err));

  const auto& ell = wbtest::ellipse21();
  const auto ell_res =
      deficit_limit(ell, 0.0, ell.length() / 4.0, {32, 64, 128, 256});
  const double rel =
      std::abs(ell_res.extrapolated - ell_res.reference_cubed) /
      ell_res.reference_cubed;
  crit.check(rel < 0.01, fmt("ellipse rel err %.2e", rel));
  crit.metric(fmt("circle abs err %.2e < 1e-4", circle_err) +
              fmt(", ellipse rel err %.2e < 1e-2", rel));
  crit.finish(120.0);
}

// Criterion 7: impact-point discrepancy against the k^{2/3} distribution.
void criterion_7() {
  Criterion crit(7, "impact distribution follows the k^{2/3} measure");
  const auto& ell = wbtest::ellipse21();
  const double quarter = ell.length() / 4.0;
  std::vector<double> ds;
  for (int n : {64, 128, 256})
    ds.push_back(impact_discrepancy(
        longest_inscribed_polygon(ell, 0.0, quarter, n), ell));
  crit.check(ds[2] < 0.01, fmt("D(256) %.4f", ds[2]));
  crit.check(ds[0] > ds[1] && ds[1] > ds[2], "monotone decrease");
  crit.metric(fmt("D(64) %.4f", ds[0]) + fmt(", D(128) %.4f", ds[1]) +
              fmt(", D(256) %.4f < 0.01", ds[2]));
  crit.finish();
}

// Criterion 8: striction of the integrable coil and the Gutkin condition.
void criterion_8() {
  Criterion crit(8, "striction midpoint and Gutkin developability");
  const auto& coil = wbtest::coil_small();
  Rng rng(808);
  double frac_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double d = rng.uniform(0.2, kTwoPi - 0.2);
    for (const auto& s : striction_profile(coil, ChordFamily::shift(coil, d), 8))
      frac_err = std::max(frac_err, std::abs(s.s_star_over_length - 0.5));
  }
  crit.check(frac_err < 1e-10, fmt("|s*/L - 1/2| %.2e", frac_err));

  const auto roots = gutkin_roots(4);
  const double root_err =
      roots.empty() ? 1.0 : std::abs(roots[0] - 2.0 * std::atan(std::sqrt(5.0)));
  crit.check(root_err < 1e-10, fmt("gutkin root err %.2e", root_err));

  const auto coil4 = Curve::build(CurveSpec::coil(0.05, 4));
  auto max_dev = [&coil4](double d) {
    double dev = 0.0;
    for (const auto& s :
         striction_profile(coil4, ChordFamily::shift(coil4, d), 16))
      dev = std::max(dev, s.deviation);
    return dev;
  };
  const double at_root = max_dev(roots[0]);
  const double off_plus = max_dev(roots[0] + 0.2);
  const double off_minus = max_dev(roots[0] - 0.2);
  crit.check(at_root < 1e-6, fmt("deviation at root %.2e", at_root));
  crit.check(off_plus > 1e-3 && off_minus > 1e-3,
             fmt("off-root deviation %.2e", std::min(off_plus, off_minus)));
  crit.metric(fmt("|s*/L-1/2| %.1e", frac_err) + fmt(", root err %.1e", root_err) +
              fmt(", dev at root %.1e", at_root) +
              fmt(", off-root dev %.1e", std::min(off_plus, off_minus)));
  crit.finish();
}

// Criterion 9: the transport identity along the string construction.
void criterion_9() {
  Criterion crit(9, "string identity residual < 1e-6");
  const auto& circle = wbtest::unit_circle();
  const double r_circle = string_invariant(circle, ChordFamily::shift(circle, 1.2));
  crit.check(r_circle < 1e-6, fmt("circle residual %.2e", r_circle));

  const auto& ell = wbtest::ellipse21();
  const double y0 = chord_with_angle(ell, 0.0, 0.29);
  const auto orbit = iterate_orbit(ell, {0.0, y0}, 6000);
  const auto fam = ChordFamily::from_orbit(ell, orbit);
  const double r_ell = string_invariant(ell, fam, 64);
  crit.check(r_ell < 1e-6, fmt("ellipse residual %.2e", r_ell));
  crit.metric(fmt("circle %.2e", r_circle) + fmt(", ellipse %.2e < 1e-6", r_ell));
  crit.finish();
}

// Criterion 10: ellipsoid suite on axes (2, 1.5, 1).
void criterion_10() {
  Criterion crit(10, "confocal ellipsoid: curvature, integrals, commutation");
  Vec axes(3);
  axes << 2.0, 1.5, 1.0;
  const ConfocalFamily fam(axes);
  Rng rng(1010);
  Vec x(3), t(3);
  for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-1.0, 1.0);
  x /= std::sqrt(fam.form(0.0, x));
  const Vec normal = fam.unit_normal(0.0, x);
  for (int i = 0; i < 3; ++i) t[i] = rng.uniform(-1.0, 1.0);
  t -= t.dot(normal) * normal;
  t /= t.norm();
  const GeodesicState state{x, t, 0.0};

  OdeOptions tight;
  tight.rel_tol = tight.abs_tol = 1e-13;
  const double h = 3e-4;
  auto vel = [&](double s) {
    return geodesic_flow(fam, 0.0, state, s, FlowMode::ArcLength, tight).v;
  };
  const Vec acc =
      (vel(-2 * h) - 8.0 * vel(-h) + 8.0 * vel(h) - vel(2 * h)) / (12.0 * h);
  const double k_err =
      std::abs(acc.norm() - fam.geodesic_curvature(0.0, state.x, state.v));
  crit.check(k_err < 1e-10, fmt("curvature err %.2e", k_err));

  Vec p(3), q(3);
  p << 0.3, 0.2, 0.1;
  q << 0.5, -0.4, 0.76;
  q /= q.norm();
  LineState line{p, q};
  const auto lam0 = tangency_parameters(fam, line);
  double drift = 0.0;
  bool count_ok = lam0.size() == 2;
  for (int i = 0; i < 100; ++i) {
    line = reflect_line(fam, 0.5, line);
    const auto lam = tangency_parameters(fam, line);
    count_ok = count_ok && lam.size() == lam0.size();
    for (std::size_t j = 0; j < std::min(lam.size(), lam0.size()); ++j)
      drift = std::max(drift, std::abs(lam[j] - lam0[j]));
  }
  crit.check(count_ok, "tangency count n-1");
  crit.check(drift < 1e-8, fmt("tangency drift %.2e", drift));

  OdeOptions opts;
  opts.rel_tol = opts.abs_tol = 1e-11;
  const auto rep = commute_report(fam, 0.3, state, 0.5, opts);
  crit.check(rep.xi_gap < 1e-6, fmt("xi gap %.2e", rep.xi_gap));
  crit.check(rep.arc_length_gap > 1e-2, fmt("arc gap %.2e", rep.arc_length_gap));
  crit.metric(fmt("curvature err %.1e", k_err) + fmt(", drift %.1e", drift) +
              fmt(", xi gap %.1e", rep.xi_gap) +
              fmt(", arc gap %.1e", rep.arc_length_gap));
  crit.finish(60.0);
}

// Criterion 11: the glancing dichotomy at a curvature zero.
void criterion_11() {
  Criterion crit(11, "curvature zero: positivity and glancing escape");
  const auto& flat = wbtest::flat_curve();
  const double min_sum = flat_point_positivity(flat, 0.0, 100);
  crit.check(min_sum > 0.0, fmt("min L11+L22 %.2e", min_sum));

  const double alpha0 = 0.05;
  const auto escape = glancing_escape(flat, alpha0, 10000);
  crit.check(escape.alpha_max > 10.0 * alpha0,
             fmt("flat excursion %.3f", escape.alpha_max));
  const auto confined = glancing_escape(wbtest::ellipse21(), alpha0, 10000);
  crit.check(confined.alpha_max < 2.0 * alpha0,
             fmt("ellipse excursion %.3f", confined.alpha_max));
  crit.metric(fmt("min L11+L22 %.1e > 0", min_sum) +
              fmt(", flat max alpha %.2f > 0.5", escape.alpha_max) +
              fmt(", ellipse max alpha %.3f < 0.1", confined.alpha_max));
  crit.finish();
}

}  // namespace

int main() {
  std::printf("wire billiards acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures == 0)
    std::printf("all 11 criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", g_failures);
  return g_failures;
}
