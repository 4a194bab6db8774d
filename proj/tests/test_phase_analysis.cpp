#include <catch2/catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "test_support.hpp"
#include "wirebill/wirebill.hpp"

using namespace wirebill;
using Catch::Matchers::WithinAbs;

TEST_CASE("Lazutkin chart on circles") {
  const auto chart = LazutkinChart::build(wbtest::unit_circle());
  REQUIRE_THAT(chart.total(), WithinAbs(kTwoPi, 1e-10));
  for (double x : {0.3, 1.9, 5.0}) REQUIRE_THAT(chart.u(x), WithinAbs(x, 1e-10));
  REQUIRE_THAT(chart.v(1.0, 0.4), WithinAbs(std::sin(0.2), 1e-12));

  const auto big = Curve::build(CurveSpec::circle(3.0));
  const auto chart3 = LazutkinChart::build(big);
  REQUIRE_THAT(chart3.total(), WithinAbs(kTwoPi * std::pow(3.0, 1.0 / 3.0), 1e-8));
}

TEST_CASE("Lazutkin total matches an independent integrator") {
  const auto& c = wbtest::ellipse21();
  const auto chart = LazutkinChart::build(c);
  // independent oracle: adaptive Gauss-Kronrod on k^{2/3} in the raw
  // parameter, bypassing the library's chart machinery entirely
  const double a = 2.0, b = 1.0;
  auto integrand = [&](double t) {
    const double sp2 = a * a * std::sin(t) * std::sin(t) +
                       b * b * std::cos(t) * std::cos(t);
    const double k = a * b / std::pow(sp2, 1.5);
    return std::pow(k, 2.0 / 3.0) * std::sqrt(sp2);  // du = k^{2/3} dx
  };
  const double oracle =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          integrand, 0.0, kTwoPi, 12, 1e-12);
  REQUIRE_THAT(chart.total(), WithinAbs(oracle, 1e-8));
}

TEST_CASE("Lazutkin chart rejects vanishing curvature") {
  REQUIRE_THROWS_AS(LazutkinChart::build(wbtest::flat_curve()),
                    std::invalid_argument);
}

TEST_CASE("chart round trip in u") {
  const auto chart = LazutkinChart::build(wbtest::ellipse21());
  Rng rng(9);
  for (int i = 0; i < 30; ++i) {
    const double x = rng.uniform(0.0, wbtest::ellipse21().length());
    REQUIRE_THAT(chart.u(chart.x_from_u(chart.u(x))), WithinAbs(chart.u(x), 1e-10));
  }
}

TEST_CASE("circle residuals match the analytic expansion") {
  const auto fit = lazutkin_residuals(wbtest::unit_circle(),
                                      {0.1, 0.05, 0.025}, 3u, 4);
  for (const auto& s : fit.samples) {
    const double expected = std::abs(2.0 * s.alpha - 4.0 * std::sin(0.5 * s.alpha));
    REQUIRE_THAT(s.residual_u, WithinAbs(expected, 1e-9));
    // alpha is conserved on the circle, so v1 - v sits at round-off
    REQUIRE(s.residual_v < 1e-12);
  }
}

TEST_CASE("normal-form exponents on the ellipse") {
  std::vector<double> alphas;
  for (int k = 3; k <= 12; ++k) alphas.push_back(std::pow(2.0, -k));
  const auto c = Curve::build(CurveSpec::ellipse(1.5, 1.0));
  const auto fit = lazutkin_residuals(c, alphas);
  REQUIRE(fit.e_u >= 2.9);
  REQUIRE(fit.e_u <= 3.1);
  REQUIRE(fit.e_v >= 3.9);
}

TEST_CASE("rotation numbers") {
  const auto& c = wbtest::unit_circle();
  SECTION("rational detection") {
    for (const auto& [alpha, den] : {std::pair{kPi / 4, 4L}, {kPi / 5, 5L}}) {
      const double y0 = chord_with_angle(c, 0.0, alpha);
      const auto orbit = iterate_orbit(c, {0.0, y0}, 120);
      const auto rot = rotation_number(orbit, c.length());
      REQUIRE(rot.rational.has_value());
      REQUIRE(rot.rational->first == 1);
      REQUIRE(rot.rational->second == den);
    }
  }
  SECTION("golden shift on the coil") {
    const auto& coil = wbtest::coil_small();
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto orbit = iterate_orbit(coil, {0.0, phi * coil.length()}, 150);
    const auto rot = rotation_number(orbit, coil.length());
    REQUIRE_THAT(rot.value, WithinAbs(phi, 1e-6));
    // a finite orbit cannot certify irrationality; at most a large-denominator
    // convergent may be reported
    if (rot.rational) REQUIRE(rot.rational->second > 1000);
  }
  SECTION("short orbits are rejected") {
    const auto orbit = iterate_orbit(c, {0.0, 1.0}, 10);
    REQUIRE_THROWS_AS(rotation_number(orbit, c.length()), std::invalid_argument);
  }
}

TEST_CASE("longest inscribed polygon on a circular arc") {
  const auto& c = wbtest::unit_circle();
  const double theta = kPi / 2;
  for (int n : {1, 4, 9}) {
    const auto poly = longest_inscribed_polygon(c, 0.0, theta, n);
    REQUIRE(poly.converged);
    const double expected = 2.0 * (n + 1) * std::sin(theta / (2.0 * (n + 1)));
    REQUIRE_THAT(poly.total_length, WithinAbs(expected, 1e-10));
    // equally spaced vertices
    for (int i = 0; i <= n; ++i)
      REQUIRE_THAT(poly.vertices[static_cast<std::size_t>(i) + 1] -
                       poly.vertices[static_cast<std::size_t>(i)],
                   WithinAbs(theta / (n + 1), 1e-9));
  }
}

TEST_CASE("optimizer first-order condition is the reflection law") {
  const auto& c = wbtest::ellipse21();
  const auto poly = longest_inscribed_polygon(c, 0.0, c.length() / 4.0, 16);
  REQUIRE(poly.converged);
  REQUIRE(poly.max_residual() < 1e-10);
  for (std::size_t i = 1; i + 1 < poly.vertices.size(); ++i) {
    const auto in = chord_frame(c, poly.vertices[i - 1], poly.vertices[i]);
    const auto out = chord_frame(c, poly.vertices[i], poly.vertices[i + 1]);
    REQUIRE_THAT(in.cos_beta, WithinAbs(out.cos_alpha, 1e-9));
  }
}

TEST_CASE("polygon input validation") {
  const auto& c = wbtest::unit_circle();
  REQUIRE_THROWS_AS(longest_inscribed_polygon(c, 1.0, 1.0, 4),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(longest_inscribed_polygon(c, 0.0, 1.0, 0),
                    std::invalid_argument);
}

TEST_CASE("deficit limit on circular arcs") {
  const auto& c = wbtest::unit_circle();
  SECTION("quarter arc") {
    const auto res = deficit_limit(c, 0.0, kPi / 2, {8, 16, 32, 64});
    REQUIRE_THAT(res.extrapolated, WithinAbs(std::pow(kPi / 2, 3) / 24.0, 1e-6));
    REQUIRE_THAT(res.reference_cubed, WithinAbs(std::pow(kPi / 2, 3) / 24.0, 1e-9));
  }
  SECTION("half arc") {
    const auto res = deficit_limit(c, 0.0, kPi, {8, 16, 32, 64});
    REQUIRE_THAT(res.extrapolated, WithinAbs(std::pow(kPi, 3) / 24.0, 1e-6));
  }
  SECTION("the two candidate reference constants differ") {
    const auto res = deficit_limit(c, 0.0, kPi / 2, {8, 16});
    REQUIRE(std::abs(res.reference_cubed - res.reference_linear) > 0.05);
    REQUIRE_THAT(res.reference_linear, WithinAbs(kPi / 48.0, 1e-9));
  }
  SECTION("n_list must increase") {
    REQUIRE_THROWS_AS(deficit_limit(c, 0.0, 1.0, {16, 8}), std::invalid_argument);
  }
}

TEST_CASE("impact distribution") {
  SECTION("circle arcs are equally spaced") {
    const auto& c = wbtest::unit_circle();
    for (int n : {8, 32}) {
      const auto poly = longest_inscribed_polygon(c, 0.0, kPi / 2, n);
      REQUIRE(impact_discrepancy(poly, c) <= 1.0 / (n + 1) + 1e-9);
    }
  }
  SECTION("ellipse discrepancy decreases with n") {
    const auto& c = wbtest::ellipse21();
    const double quarter = c.length() / 4.0;
    const auto p64 = longest_inscribed_polygon(c, 0.0, quarter, 64);
    const auto p256 = longest_inscribed_polygon(c, 0.0, quarter, 256);
    const double d64 = impact_discrepancy(p64, c);
    const double d256 = impact_discrepancy(p256, c);
    REQUIRE(d256 < 0.01);
    REQUIRE(d64 / d256 >= 3.0);
  }
  SECTION("coil arc") {
    const auto& c = wbtest::coil_small();
    const auto poly = longest_inscribed_polygon(c, 0.0, 0.6 * c.length(), 128);
    REQUIRE(impact_discrepancy(poly, c) < 0.02);
  }
}

TEST_CASE("periodic orbit search") {
  const auto& c = wbtest::unit_circle();
  SECTION("equilateral triangle") {
    const auto poly = periodic_orbit_search(c, 1, 3);
    REQUIRE(poly.converged);
    REQUIRE_FALSE(poly.collapsed);
    REQUIRE_THAT(poly.total_length, WithinAbs(3.0 * std::sqrt(3.0), 1e-9));
    REQUIRE(poly.max_residual() < 1e-9);
  }
  SECTION("pentagram") {
    const auto poly = periodic_orbit_search(c, 2, 5);
    REQUIRE(poly.converged);
    REQUIRE_THAT(poly.total_length, WithinAbs(10.0 * std::sin(2.0 * kPi / 5), 1e-9));
  }
  SECTION("two-bounce diameter orbit (both neighbors coincide)") {
    const auto poly = periodic_orbit_search(c, 1, 2);
    REQUIRE(poly.converged);
    REQUIRE_FALSE(poly.collapsed);
    REQUIRE_THAT(poly.total_length, WithinAbs(4.0, 1e-9));
  }
  SECTION("coil shift orbit has congruent chords") {
    const auto& coil = wbtest::coil_small();
    const auto poly = periodic_orbit_search(coil, 1, 5);
    REQUIRE(poly.converged);
    REQUIRE(poly.max_residual() < 1e-9);
    std::vector<double> lengths;
    for (int i = 0; i < 5; ++i) {
      const double a = poly.vertices[static_cast<std::size_t>(i)];
      const double b = (i + 1 < 5) ? poly.vertices[static_cast<std::size_t>(i) + 1]
                                   : poly.vertices[0] + coil.length();
      lengths.push_back((coil.position(b) - coil.position(a)).norm());
    }
    for (double l : lengths) REQUIRE_THAT(l, WithinAbs(lengths[0], 1e-8));
  }
  SECTION("ellipse: the maximal 2-gon is the major axis") {
    const auto& ell = wbtest::ellipse21();
    const auto poly = periodic_orbit_search(ell, 1, 2);
    REQUIRE(poly.converged);
    REQUIRE_THAT(poly.total_length, WithinAbs(8.0, 1e-8));
  }
  SECTION("ellipse triangle is a genuine closed orbit") {
    const auto& ell = wbtest::ellipse21();
    const auto poly = periodic_orbit_search(ell, 1, 3);
    REQUIRE(poly.converged);
    REQUIRE(poly.max_residual() < 1e-9);
    // every vertex obeys the equal-angle law around the cycle
    const double wrap = ell.length();
    for (int i = 0; i < 3; ++i) {
      const double left =
          poly.vertices[static_cast<std::size_t>((i + 2) % 3)] - (i == 0 ? wrap : 0.0);
      const double right =
          poly.vertices[static_cast<std::size_t>((i + 1) % 3)] + (i == 2 ? wrap : 0.0);
      const auto in = chord_frame(ell, left, poly.vertices[static_cast<std::size_t>(i)]);
      const auto out =
          chord_frame(ell, poly.vertices[static_cast<std::size_t>(i)], right);
      REQUIRE_THAT(in.cos_beta, WithinAbs(out.cos_alpha, 1e-9));
    }
  }
  SECTION("invalid windings are rejected") {
    REQUIRE_THROWS_AS(periodic_orbit_search(c, 0, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(periodic_orbit_search(c, 3, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(periodic_orbit_search(c, 1, 1), std::invalid_argument);
  }
}

TEST_CASE("glancing escape with a curvature zero, confinement without") {
  SECTION("flat-point curve lets glancing orbits escape") {
    const auto res = glancing_escape(wbtest::flat_curve(), 0.05, 4000);
    REQUIRE(res.alpha_max > 0.5);
  }
  SECTION("ellipse confines the same initial angle") {
    const auto res = glancing_escape(wbtest::ellipse21(), 0.05, 4000);
    REQUIRE(res.alpha_max < 0.1);
  }
  SECTION("companion positivity at the flat point") {
    REQUIRE(flat_point_positivity(wbtest::flat_curve(), 0.0, 100) > 0.0);
  }
}

TEST_CASE("near-boundary band confinement") {
  const std::vector<double> v0s = {0.05, 0.025, 0.0125};
  ReflectOptions opts;
  opts.g_tol = 1e-13;
  auto sup_deviation = [&](const Curve& c, double v0) {
    const auto chart = LazutkinChart::build(c);
    const double x0 = 0.3;
    const double alpha0 =
        2.0 * std::asin(v0 * std::pow(c.curvature(x0), 1.0 / 3.0));
    const double y0 = chord_with_angle(c, x0, alpha0);
    const auto orbit = iterate_orbit(c, {x0, y0}, 4000, opts);
    REQUIRE(orbit.completed);
    double sup = 0.0;
    for (std::size_t i = 0; i < orbit.alphas.size(); ++i)
      sup = std::max(sup,
                     std::abs(chart.v(orbit.vertices[i], orbit.alphas[i]) - v0));
    return sup;
  };
  SECTION("ellipse: sup deviation scales like v0^3") {
    std::vector<double> sups;
    for (double v0 : v0s) sups.push_back(sup_deviation(wbtest::ellipse21(), v0));
    for (std::size_t i = 0; i < v0s.size(); ++i)
      REQUIRE(sups[i] <= 1.0 * v0s[i] * v0s[i] * v0s[i]);
    REQUIRE(loglog_slope(v0s, sups, 1e-11) >= 2.5);
  }
  SECTION("coil: v is conserved to the solver floor") {
    for (double v0 : v0s) REQUIRE(sup_deviation(wbtest::coil_small(), v0) < 1e-7);
  }
}
