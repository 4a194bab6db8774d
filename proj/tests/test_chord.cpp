#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"
#include "wirebill/wirebill.hpp"

using namespace wirebill;
using Catch::Matchers::WithinAbs;

TEST_CASE("unit circle quarter chord closed form") {
  const auto& c = wbtest::unit_circle();
  const auto f = chord_frame(c, 0.0, kPi / 2);
  REQUIRE_THAT(f.length, WithinAbs(std::sqrt(2.0), 1e-12));
  REQUIRE_THAT(f.cos_alpha, WithinAbs(std::cos(kPi / 4), 1e-12));
  REQUIRE_THAT(f.cos_beta, WithinAbs(std::cos(kPi / 4), 1e-12));
  REQUIRE(f.cos_phi_defined);
  REQUIRE_THAT(f.cos_phi, WithinAbs(1.0, 1e-10));  // planar: phi = 0
  const double expected_l12 = 0.5 / std::sqrt(2.0);  // sin^2(pi/4) / L
  REQUIRE_THAT(f.l12, WithinAbs(expected_l12, 1e-12));
  REQUIRE_THAT(f.l1, WithinAbs(-f.cos_alpha, 1e-15));
  REQUIRE_THAT(f.l2, WithinAbs(f.cos_beta, 1e-15));
}

TEST_CASE("unit circle diameter") {
  const auto f = chord_frame(wbtest::unit_circle(), 0.0, kPi);
  REQUIRE_THAT(f.length, WithinAbs(2.0, 1e-12));
  REQUIRE_THAT(f.cos_alpha, WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(f.cos_beta, WithinAbs(0.0, 1e-12));
}

TEST_CASE("coil chords have equal angles at both endpoints") {
  const auto& c = wbtest::coil_small();
  for (double d : {0.4, 1.0, 2.2, 3.7, 5.5}) {
    for (double x : {0.0, 1.3, 4.1}) {
      const auto f = chord_frame(c, x, x + d);
      REQUIRE_THAT(f.cos_alpha, WithinAbs(f.cos_beta, 1e-12));
    }
  }
}

TEST_CASE("generating-function symmetry") {
  // L(x, y) = L(y, x); reversing the chord swaps the endpoint angles up to
  // the orientation flip of the travel direction: alpha(x,y) = pi - beta(y,x).
  const auto& c = wbtest::ellipse21();
  Rng rng(17);
  for (int i = 0; i < 40; ++i) {
    const double x = rng.uniform(0.0, c.length());
    const double y = x + rng.uniform(0.05, 0.95) * c.length();
    const auto f = chord_frame(c, x, y);
    const auto g = chord_frame(c, y, x + c.length());  // reversed chord
    REQUIRE_THAT(f.length, WithinAbs(g.length, 1e-12));
    REQUIRE_THAT(f.cos_alpha, WithinAbs(-g.cos_beta, 1e-12));
    REQUIRE_THAT(f.cos_beta, WithinAbs(-g.cos_alpha, 1e-12));
    REQUIRE_THAT(f.sin_alpha, WithinAbs(g.sin_beta, 1e-12));
  }
}

TEST_CASE("partials match central finite differences of L") {
  auto fd_check = [](const Curve& c, int chords, double tol) {
    Rng rng(23);
    for (int i = 0; i < chords; ++i) {
      const double x = rng.uniform(0.0, c.length());
      const double y = x + rng.uniform(0.05, 0.95) * c.length();
      const auto f = chord_frame(c, x, y);
      const auto fd = wbtest::fd_partials(c, x, y);
      REQUIRE_THAT(f.l1, WithinAbs(fd.l1, tol));
      REQUIRE_THAT(f.l2, WithinAbs(fd.l2, tol));
      REQUIRE_THAT(f.l11, WithinAbs(fd.l11, tol));
      REQUIRE_THAT(f.l22, WithinAbs(fd.l22, tol));
      REQUIRE_THAT(f.l12, WithinAbs(fd.l12, tol));
    }
  };
  fd_check(wbtest::ellipse21(), 50, 1e-6);
  fd_check(wbtest::coil_small(), 50, 1e-6);
}

TEST_CASE("planar curves have cos phi = +1 on all sampled chords") {
  for (const Curve* c : {&wbtest::unit_circle(), &wbtest::ellipse21()}) {
    Rng rng(31);
    for (int i = 0; i < 60; ++i) {
      const double x = rng.uniform(0.0, c->length());
      const double y = x + rng.uniform(0.02, 0.98) * c->length();
      const auto f = chord_frame(*c, x, y);
      if (!f.cos_phi_defined) continue;
      REQUIRE_THAT(f.cos_phi, WithinAbs(1.0, 1e-9));
    }
  }
}

TEST_CASE("plane angle matches an explicit cross-product route in R^3") {
  // independent check of the dimension-free mixed-partial identity: in R^3
  // the two chord-plane normals are honest cross products
  std::vector<Vec> pts;
  const int n = 512;
  for (int i = 0; i < n; ++i) {
    const double t = kTwoPi * i / n;
    Vec p(3);
    p << std::cos(t), std::sin(t), 0.25 * std::sin(2.0 * t);
    pts.push_back(p);
  }
  const auto c = Curve::build(CurveSpec::raw_samples(pts, true));
  auto cross = [](const Vec& a, const Vec& b) {
    Vec r(3);
    r << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0];
    return r;
  };
  Rng rng(41);
  for (int i = 0; i < 40; ++i) {
    const double x = rng.uniform(0.0, c.length());
    const double y = x + rng.uniform(0.1, 0.9) * c.length();
    const auto f = chord_frame(c, x, y);
    if (!f.cos_phi_defined) continue;
    const Vec r = c.position(y) - c.position(x);
    const Vec n1 = cross(c.tangent(x), r);
    const Vec n2 = cross(c.tangent(y), -r);
    const double direct = n1.dot(n2) / (n1.norm() * n2.norm());
    REQUIRE_THAT(f.cos_phi, WithinAbs(direct, 1e-9));
    // Lemma identity: L * L12 = cos(phi) sin(alpha) sin(beta)
    REQUIRE_THAT(f.length * f.l12,
                 WithinAbs(direct * f.sin_alpha * f.sin_beta, 1e-10));
  }
}

TEST_CASE("near-diagonal chords report the osculating-plane limit") {
  const auto& c = wbtest::coil_small();
  const auto f = chord_frame(c, 1.0, 1.0 + 5e-5 * c.length());
  REQUIRE(f.cos_phi_defined);
  REQUIRE(f.cos_phi == 1.0);
}

TEST_CASE("angle expansion in the chord gap") {
  // alpha(x, x+e) = (e/2) k + (e^2/6) kdot + O(e^3); the base points are
  // shared across the e-levels so the location prefactor cancels from the fit
  const auto& c = wbtest::ellipse21();
  Rng rng(5);
  std::vector<double> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(rng.uniform(0.0, c.length()));
  std::vector<double> eps_list, residuals;
  for (double e = 0.1; e > 1.2e-3; e *= 0.6) {
    double worst = 0.0;
    for (const double x : xs) {
      const auto p = c.eval(x, 3);
      const double k = p.curvature;
      const double kdot = p.deriv[1].dot(p.deriv[2]) / k;
      const auto f = chord_frame(c, x, x + e);
      const double alpha = std::atan2(f.sin_alpha, f.cos_alpha);
      worst = std::max(worst,
                       std::abs(alpha - 0.5 * e * k - e * e / 6.0 * kdot));
    }
    eps_list.push_back(e);
    residuals.push_back(worst);
  }
  REQUIRE(loglog_slope(eps_list, residuals, 1e-15) >= 2.9);
}

TEST_CASE("diagonal chords are rejected") {
  const auto& c = wbtest::unit_circle();
  REQUIRE_THROWS_AS(chord_frame(c, 1.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(chord_frame(c, 1.0, 1.0 + 1e-12), std::invalid_argument);
}

TEST_CASE("phase area equals twice the length") {
  const double a1 = phase_area(wbtest::unit_circle());
  REQUIRE_THAT(a1, WithinAbs(4.0 * kPi, 1e-4 * 4.0 * kPi));
  const auto big = Curve::build(CurveSpec::circle(2.0));
  const double a2 = phase_area(big);
  REQUIRE_THAT(a2, WithinAbs(8.0 * kPi, 1e-4 * 8.0 * kPi));
}

TEST_CASE("phase area rejects sub-minimal grids") {
  REQUIRE_THROWS_AS(phase_area(wbtest::unit_circle(), 64), std::invalid_argument);
}
