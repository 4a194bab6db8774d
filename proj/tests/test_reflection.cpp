#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"
#include "wirebill/wirebill.hpp"

using namespace wirebill;
using Catch::Matchers::WithinAbs;

TEST_CASE("circle reflection doubles the arc") {
  const auto& c = wbtest::unit_circle();
  for (double s : {0.4, 1.1, 2.8}) {
    const auto z = reflect_nice(c, {0.0, s});
    REQUIRE(z.has_value());
    REQUIRE_THAT(*z, WithinAbs(2.0 * s, 1e-10));
    const auto roots = reflect_all(c, {0.0, s});
    REQUIRE(roots.size() == 1);
    REQUIRE_THAT(roots[0], WithinAbs(2.0 * s, 1e-10));
  }
}

TEST_CASE("coil reflection is the shift map") {
  const auto& c = wbtest::coil_small();
  for (double d : {0.7, 1.5, 2.9}) {
    const auto z = reflect_nice(c, {0.0, d});
    REQUIRE(z.has_value());
    REQUIRE_THAT(*z, WithinAbs(2.0 * d, 1e-9));
  }
}

TEST_CASE("two-circle blend produces multiple successors") {
  const auto& c = wbtest::two_circle_blend();
  // chord from the first circle arc into the transition region
  const double x = c.arc_from_raw(kTwoPi * 0.10);
  const double y = c.arc_from_raw(kTwoPi * 0.45);
  const auto roots = reflect_all(c, {x, y});
  REQUIRE(roots.size() > 1);
  // every accepted root satisfies the reflection equation
  const auto in = chord_frame(c, x, y);
  for (const double z : roots) {
    const auto out = chord_frame(c, y, z);
    REQUIRE_THAT(in.l2 + out.l1, WithinAbs(0.0, 1e-10));
  }
}

TEST_CASE("all-roots scan honors resolutions beyond the cache") {
  const auto& c = wbtest::unit_circle();
  ReflectOptions fine;
  fine.grid = 8192;
  const auto roots = reflect_all(c, {0.0, 1.1}, fine);
  REQUIRE(roots.size() == 1);
  REQUIRE_THAT(roots[0], WithinAbs(2.2, 1e-10));
}

TEST_CASE("glancing continuation flags multivalued steps") {
  const auto& c = wbtest::two_circle_blend();
  const double x0 = c.arc_from_raw(kTwoPi * 0.10);
  const double y0 = c.arc_from_raw(kTwoPi * 0.45);
  GlanceResult res;
  // drive the all-roots stepper directly from a multivalued chord
  res = glancing_escape(c, std::acos(std::clamp(
                               chord_frame(c, x0, y0).cos_alpha, -1.0, 1.0)),
                        30, x0);
  REQUIRE(res.steps_done > 0);
  REQUIRE(res.multivalued_encountered);
}

TEST_CASE("accepted roots satisfy the equal-angle law") {
  const auto& c = wbtest::ellipse21();
  Rng rng(3);
  for (int i = 0; i < 25; ++i) {
    const double x = rng.uniform(0.0, c.length());
    const double y = x + rng.uniform(0.1, 0.9) * c.length();
    const auto z = reflect_nice(c, {x, y});
    REQUIRE(z.has_value());
    const auto in = chord_frame(c, x, y);
    const auto out = chord_frame(c, y, *z);
    REQUIRE_THAT(in.cos_beta, WithinAbs(out.cos_alpha, 1e-10));
  }
}

TEST_CASE("twist: the outgoing angle is monotone along the sweep") {
  for (const Curve* c : {&wbtest::ellipse21(), &wbtest::coil_small()}) {
    const double y = 0.7;
    const auto py = c->eval(y, 1);
    double prev = 0.0;
    const int samples = 256;
    for (int i = 1; i < samples; ++i) {
      const double z = y + c->length() * (0.001 + 0.998 * i / samples);
      const Vec r = c->position(z) - py.position;
      const double alpha = std::acos(
          std::clamp(py.deriv[0].dot(r) / r.norm(), -1.0, 1.0));
      if (i > 1) REQUIRE(alpha > prev);
      prev = alpha;
    }
  }
}

TEST_CASE("orbit on the circle closes at rational rotation") {
  const auto& c = wbtest::unit_circle();
  const double y0 = chord_with_angle(c, 0.0, kPi / 4);
  REQUIRE_THAT(y0, WithinAbs(kPi / 2, 1e-10));
  const auto orbit = iterate_orbit(c, {0.0, y0}, 4);
  REQUIRE(orbit.completed);
  // x advances by pi/2 per step and closes after 4 steps
  REQUIRE_THAT(orbit.vertices[4] - orbit.vertices[0], WithinAbs(kTwoPi, 1e-10));
}

TEST_CASE("coil orbit closes after five steps at d = 2 pi / 5") {
  const auto& c = wbtest::coil_small();
  const double d_arc = c.length() / 5.0;
  const auto orbit = iterate_orbit(c, {0.0, d_arc}, 5);
  REQUIRE(orbit.completed);
  REQUIRE_THAT(orbit.vertices[5] - orbit.vertices[0], WithinAbs(c.length(), 1e-8));
}

TEST_CASE("ellipse glancing orbit keeps tiny reflection residuals") {
  const auto& c = wbtest::ellipse21();
  const double y0 = chord_with_angle(c, 0.0, 0.3);
  const auto orbit = iterate_orbit(c, {0.0, y0}, 10000);
  REQUIRE(orbit.completed);
  double worst = 0.0;
  for (const double r : orbit.residuals) worst = std::max(worst, r);
  REQUIRE(worst < 1e-10);
}

TEST_CASE("reflect_nice reports no successor for sub-resolution chords") {
  // the outgoing chord would land inside the trivial-root exclusion zone
  const auto& c = wbtest::unit_circle();
  const auto z = reflect_nice(c, {0.0, 1e-5});
  REQUIRE_FALSE(z.has_value());
}

TEST_CASE("niceness certificates") {
  SECTION("coil passes") {
    const auto rep = check_nice(wbtest::coil_small(), 48, 0.05);
    REQUIRE(rep.passed());
    REQUIRE(rep.min_curvature > 1.0);
    REQUIRE(rep.min_twist > 0.0);
    REQUIRE(rep.witnesses.empty());
  }
  SECTION("planar strictly convex curve passes") {
    const auto rep = check_nice(wbtest::ellipse21(), 48, 0.05);
    REQUIRE(rep.passed());
    REQUIRE_THAT(rep.min_cos_phi, WithinAbs(1.0, 1e-9));
  }
  SECTION("flat-point curve fails the curvature condition") {
    const auto rep = check_nice(wbtest::flat_curve(), 32, 0.05);
    REQUIRE_FALSE(rep.passed());
    REQUIRE_FALSE(rep.curvature_ok);
    REQUIRE(rep.min_curvature < 1e-8);
  }
  SECTION("non-convex planar curve yields third-intersection witnesses") {
    const auto rep = check_nice(wbtest::bean_curve(), 24, 0.05);
    REQUIRE_FALSE(rep.passed());
    REQUIRE_FALSE(rep.chord_condition_ok);
    REQUIRE_FALSE(rep.witnesses.empty());
    // witnesses really lie on the chord's line
    const auto& w = rep.witnesses.front();
    REQUIRE(w.distance < 1e-7);
  }
}

TEST_CASE("niceness is stable under a C2-small perturbation") {
  const auto curve = wbtest::perturbed_coil(1e-3, 99u);
  const auto rep = check_nice(curve, 40, 0.05);
  REQUIRE(rep.passed());
}

TEST_CASE("nice mode refuses a failed certificate") {
  const auto rep = check_nice(wbtest::flat_curve(), 16, 0.05);
  REQUIRE_FALSE(rep.passed());
  REQUIRE_THROWS_AS(reflect_nice(wbtest::flat_curve(), {0.0, 2.0}, rep),
                    std::invalid_argument);
}

TEST_CASE("area preservation in (x, cos alpha) coordinates") {
  SECTION("circle is a rigid rotation") {
    Rng rng(1);
    for (int i = 0; i < 5; ++i) {
      const double x = rng.uniform(0.0, kTwoPi);
      const double y = x + rng.uniform(0.8, 0.9 * kTwoPi);
      REQUIRE_THAT(jacobian_check(wbtest::unit_circle(), {x, y}),
                   WithinAbs(1.0, 1e-8));
    }
  }
  SECTION("ellipse and coil") {
    for (const Curve* c : {&wbtest::ellipse21(), &wbtest::coil_small()}) {
      Rng rng(2);
      for (int i = 0; i < 10; ++i) {
        const double x = rng.uniform(0.0, c->length());
        const double y = x + rng.uniform(0.15, 0.85) * c->length();
        REQUIRE_THAT(jacobian_check(*c, {x, y}), WithinAbs(1.0, 1e-6));
      }
    }
  }
  SECTION("near-tangent phase points are flagged") {
    REQUIRE_THROWS_AS(
        jacobian_check(wbtest::unit_circle(), {0.0, 5e-4}),
        NumericalError);
  }
}
