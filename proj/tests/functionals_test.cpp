#include "doctest.h"

#include "crofton/constants.hpp"
#include "crofton/functionals.hpp"
#include "crofton/geometry.hpp"
#include "crofton/measures.hpp"
#include "crofton/verification.hpp"

#include <cmath>
#include <numbers>

using namespace crofton;

namespace {

constexpr double kPi = std::numbers::pi;

EstimatorOptions options(std::uint64_t n, std::uint64_t base) {
  EstimatorOptions opt;
  opt.n = n;
  opt.seed = 5;
  opt.shards = 8;
  opt.stream_base = base << 24;
  return opt;
}

double combined_z(const MCEstimate& a, const MCEstimate& b) {
  return std::abs(z_score(a, b));
}

}  // namespace

TEST_CASE("mc_run mean, standard error, and rejection accounting") {
  EstimatorOptions opt;
  opt.n = 10000;
  opt.shards = 4;
  MCEstimate est = mc_run(opt, 1, [](RngStream& rng, bool& rejected) {
    const double u = rng.uniform();
    if (u > 0.5) {
      rejected = true;
      return 123.0;  // must be discarded
    }
    return 2.0;
  });
  CHECK(est.n == 10000);
  CHECK(est.rejected > 4000);
  CHECK(est.rejected < 6000);
  // Rejected draws contribute zero, so the mean sits near 2 * P(keep) = 1.
  CHECK(est.mean == doctest::Approx(1.0).epsilon(0.05));
  CHECK(est.se > 0.0);
}

TEST_CASE("z_score handles exact references") {
  MCEstimate a;
  a.mean = 1.0;
  a.se = 0.0;
  MCEstimate b = a;
  CHECK(z_score(a, b) == 0.0);
  b.mean = 2.0;
  CHECK(std::isinf(z_score(a, b)));
  a.se = 0.1;
  CHECK(z_score(a, 0.8) == doctest::Approx(2.0));
}

TEST_CASE("sum_independent combines means and variances") {
  MCEstimate a;
  a.mean = 1.0;
  a.se = 0.3;
  a.n = 10;
  MCEstimate b;
  b.mean = 2.0;
  b.se = 0.4;
  b.n = 20;
  MCEstimate s = sum_independent({a, b});
  CHECK(s.mean == doctest::Approx(3.0));
  CHECK(s.se == doctest::Approx(0.5));
  CHECK(s.n == 30);
}

TEST_CASE("perimeter quadrature matches the elliptic integral") {
  BodyDescriptor ell = parse_body("ellipsoid:2,1", 0);
  // Perimeter of an ellipse with semi-axes (2,1): 8 E(sqrt(3)/2).
  const double exact = 8.0 * std::comp_ellint_2(std::sqrt(3.0) / 2.0);
  CHECK(perimeter_quadrature(ell) == doctest::Approx(exact).epsilon(1e-10));
  CHECK(perimeter_quadrature(make_ball(2)) ==
        doctest::Approx(2.0 * kPi).epsilon(1e-12));
}

TEST_CASE("circle cosine product quadrature") {
  for (double phi : {0.0, 0.7, kPi / 2.0, kPi, 2.2, 5.9}) {
    CHECK(std::abs(circle_cosine_product_quadrature(phi) - 0.5 * std::cos(phi)) <
          1e-13);
  }
}

TEST_CASE("ball complement moment quadrature") {
  for (int n = 3; n <= 8; ++n) {
    CHECK(std::abs(ball_complement_moment_quadrature(n) - 2.0 / n) < 1e-12);
  }
  CHECK_THROWS_AS(ball_complement_moment_quadrature(2), std::invalid_argument);
}

TEST_CASE("chord functional on the unit ball has a closed form") {
  // For the unit ball in R^3 and h(t) = t^m:
  //   integral of L^m over hitting lines = 2^{m+1} pi / (m + 2).
  BodyDescriptor ball = make_ball(3);
  TestFunction h = monomial_test_function(4);
  MCEstimate est = chord_functional_lhs(ball, h, options(200000, 1));
  const double exact = std::pow(2.0, 5) * kPi / 6.0;  // 16 pi / 3
  CHECK(std::abs(est.mean - exact) / est.se < 4.0);
  CHECK(exact == doctest::Approx(16.0 * kPi / 3.0));
}

TEST_CASE("two-point boundary form reproduces the chord functional") {
  BodyDescriptor ball = make_ball(3);
  TestFunction h = monomial_test_function(3);
  auto opt = options(200000, 2);
  MCEstimate lhs = chord_functional_lhs(ball, h, opt);
  MCEstimate rhs = thm1_rhs(ball, h, opt);
  CHECK(combined_z(lhs, rhs) < 4.0);
  // Exact value for h(t) = t^3 on the unit ball: 16 pi / 5.
  CHECK(std::abs(lhs.mean - 16.0 * kPi / 5.0) / lhs.se < 4.0);
  CHECK(std::abs(rhs.mean - 16.0 * kPi / 5.0) / rhs.se < 4.0);
}

TEST_CASE("a scaled prefactor is detected, not absorbed") {
  BodyDescriptor ball = make_ball(3);
  TestFunction h = monomial_test_function(3);
  auto opt = options(200000, 3);
  MCEstimate lhs = chord_functional_lhs(ball, h, opt);
  MCEstimate rhs = thm1_rhs(ball, h, opt, 2.0);
  CHECK(combined_z(lhs, rhs) > 6.0);
}

TEST_CASE("planar cotangent form on a polygon needs the side correction") {
  // For a convex polygon the two-point cotangent form misses the boundary
  // self-interaction: the difference is (1/pi) sum_i H(a_i) over side
  // lengths a_i, with H the antiderivative of h.
  BodyDescriptor square = make_cube(2);
  TestFunction h = monomial_test_function(2);
  auto opt = options(400000, 4);
  MCEstimate lhs = chord_functional_lhs(square, h, opt);
  MCEstimate cot = pleijel_cot_rhs(square, h, opt);
  const double side_term = 4.0 / kPi * h.antiderivative(1.0);
  MCEstimate rhs = cot;
  rhs.mean += side_term;
  CHECK(combined_z(lhs, rhs) < 4.0);
  CHECK(lhs.rejection_fraction() < 1e-3);
  CHECK(cot.rejection_fraction() < 1e-3);
}

TEST_CASE("isoperimetric defect of the disk vanishes") {
  DefectResult res = isoperimetric_defect(make_ball(2), options(100000, 5));
  CHECK(std::abs(res.lhs) < 1e-9);
  CHECK(std::abs(res.rhs.mean) < 4.0 * res.rhs.se + 1e-12);
}

TEST_CASE("interior pair moments against closed forms on the disk") {
  // Mean distance between uniform points in the unit disk: 128 / (45 pi).
  BodyDescriptor disk = make_ball(2);
  PairResult res = kingman_check(disk, 1, options(400000, 6));
  const double exact = kPi * kPi * 128.0 / (45.0 * kPi);
  CHECK(std::abs(res.lhs.mean - exact) / res.lhs.se < 4.0);
  CHECK(std::abs(res.rhs.mean - exact) / res.rhs.se < 4.0);
}

TEST_CASE("interior pair moments against closed forms on the ball") {
  // Mean distance between uniform points in the unit ball: 36/35.
  BodyDescriptor ball = make_ball(3);
  PairResult res = kingman_check(ball, 1, options(400000, 7));
  const double v = 4.0 * kPi / 3.0;
  const double exact = v * v * 36.0 / 35.0;
  CHECK(std::abs(res.lhs.mean - exact) / res.lhs.se < 4.0);
  CHECK(std::abs(res.rhs.mean - exact) / res.rhs.se < 4.0);
}

TEST_CASE("flat decomposition of point tuples (one- and two-flats)") {
  BodyDescriptor ball = make_ball(3);
  for (int l : {1, 2}) {
    PairResult res = bpf_check(ball, l, 1, options(200000, 8 + l));
    CHECK(combined_z(res.lhs, res.rhs) < 4.0);
  }
}

TEST_CASE("cotangent endpoint lemma on a fixed ellipsoid configuration") {
  BodyDescriptor ell = parse_body("ellipsoid:1.7,1.1,0.6", 0);
  Vec base(3);
  base << 0.2, -0.1, 0.0;
  Vec dir(3);
  dir << 1.0, 0.4, 0.3;
  Chord chord = line_intersect(ell, base, dir.normalized());
  REQUIRE(chord.hit);
  RngStream rng(31, 8);
  Mat dirs(3, 1);
  dirs.col(0) = dir.normalized();
  AffineSubspace line = make_affine_subspace(dirs, base);
  for (int i = 0; i < 25; ++i) {
    AffineSubspace plane = sample_plane_containing_line(line, rng);
    CotLemmaResult res = cot_lemma_check(ell, chord, plane);
    if (res.degenerate) continue;
    CHECK(res.residual() < 1e-10);
  }
}

TEST_CASE("sphere product integral matches <u1,u2>/(d-1)") {
  for (int d : {3, 4, 5}) {
    Vec u1 = Vec::Zero(d);
    Vec u2 = Vec::Zero(d);
    u1[0] = 1.0;
    u2[0] = std::sqrt(0.5);
    u2[1] = std::sqrt(0.5);
    MCEstimate est = sphere_product_integral(u1, u2, d, options(200000, 20 + d));
    const double exact = u1.dot(u2) / (d - 1);
    CHECK(std::abs(est.mean - exact) / est.se < 4.0);
  }
  Vec bad = Vec::Zero(3);
  bad[2] = 1.0;
  CHECK_THROWS_AS(sphere_product_integral(bad, bad, 3, options(10, 30)),
                  std::invalid_argument);
}

TEST_CASE("smooth-body identities reject polytopes") {
  BodyDescriptor cube = make_cube(3);
  TestFunction h = monomial_test_function(3);
  auto opt = options(10, 31);
  CHECK_THROWS_AS(thm1_rhs(cube, h, opt), std::invalid_argument);
  CHECK_THROWS_AS(zahle_two_point_check(cube, 1, opt), std::invalid_argument);
  CHECK_THROWS_AS(thm3_check(cube, 1, 1, 1, opt), std::invalid_argument);
  CHECK_THROWS_AS(corollary_check(cube, 1, opt), std::invalid_argument);
  CHECK_THROWS_AS(isoperimetric_defect(make_cube(2), opt), std::invalid_argument);
}

TEST_CASE("polytope identities reject smooth bodies and wrong dimensions") {
  BodyDescriptor ball = make_ball(3);
  TestFunction h = monomial_test_function(3);
  auto opt = options(10, 32);
  CHECK_THROWS_AS(thm2_check(ball, h, opt), std::invalid_argument);
  CHECK_THROWS_AS(thm4_check(ball, 1, opt), std::invalid_argument);
  CHECK_THROWS_AS(pleijel_rhs_2d(make_ball(3), h, opt), std::invalid_argument);
}

TEST_CASE("undetermined constant fit is body-independent") {
  CaseConfig cfg;
  cfg.case_id = "thm1";
  cfg.n = 200000;
  cfg.seed = 5;
  for (const char* spec : {"ball", "ellipsoid:1.5,1,0.7"}) {
    cfg.body_spec = spec;
    FitResult fit = fit_constant(cfg);
    CHECK(std::abs(fit.ratio - 1.0 / (8.0 * kPi)) < 4.0 * fit.se);
  }
  cfg.body_spec = "ball";
  cfg.dim = 4;
  FitResult fit4 = fit_constant(cfg);
  CHECK(std::abs(fit4.ratio - 1.0 / (6.0 * kPi * kPi)) < 4.0 * fit4.se);
}
