#include <doctest.h>

#include <cmath>

#include "posekit/affine.hpp"
#include "posekit/rng.hpp"

using namespace posekit;

namespace {

AffineMap random_map(Rng& rng, double min_det = 1e-3) {
  AffineMap map;
  do {
    map.A = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2),
             rng.uniform(-2, 2)};
  } while (std::abs(map.A.det()) < min_det);
  map.t = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return map;
}

// Finite-difference oracle for the probe loss J = <C_G, G> + <c_g, g>,
// independent of sdtn_backprop.
double probe(const AffineMap& map, const Mat2& cg, const Vec2& cv) {
  const DetransformMap inv = sdtn_invert(map);
  return cg.a * inv.G.a + cg.b * inv.G.b + cg.c * inv.G.c + cg.d * inv.G.d +
         cv.x * inv.g.x + cv.y * inv.g.y;
}

}  // namespace

TEST_CASE("stn_apply examples") {
  SUBCASE("identity") {
    const Vec2 out = stn_apply({Mat2::identity(), {0, 0}}, {0.3, -0.7});
    CHECK(out.x == 0.3);
    CHECK(out.y == -0.7);
  }
  SUBCASE("scale and shift") {
    const Vec2 out = stn_apply({{2, 0, 0, 2}, {1, 1}}, {1, 0});
    CHECK(out.x == 3.0);
    CHECK(out.y == 1.0);
  }
  SUBCASE("quarter turn") {
    const Vec2 out = stn_apply({{0, -1, 1, 0}, {0, 0}}, {1, 0});
    CHECK(out.x == 0.0);
    CHECK(out.y == 1.0);
  }
}

TEST_CASE("sdtn_invert produces the exact inverse") {
  SUBCASE("identity is self-inverse") {
    const DetransformMap inv = sdtn_invert({Mat2::identity(), {0, 0}});
    CHECK(inv.G.a == 1.0);
    CHECK(inv.G.d == 1.0);
    CHECK(inv.g.x == 0.0);
  }
  SUBCASE("scale and shift") {
    const DetransformMap inv = sdtn_invert({{2, 0, 0, 2}, {1, 1}});
    CHECK(inv.G.a == doctest::Approx(0.5));
    CHECK(inv.G.d == doctest::Approx(0.5));
    CHECK(inv.g.x == doctest::Approx(-0.5));
    CHECK(inv.g.y == doctest::Approx(-0.5));
  }
  SUBCASE("G*A is the identity and g = -G*t") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
      const AffineMap map = random_map(rng);
      const DetransformMap inv = sdtn_invert(map);
      const Mat2 prod = inv.G * map.A;
      CHECK(std::abs(prod.a - 1.0) <= 1e-9);
      CHECK(std::abs(prod.b) <= 1e-9);
      CHECK(std::abs(prod.c) <= 1e-9);
      CHECK(std::abs(prod.d - 1.0) <= 1e-9);
      const Vec2 expect = -1.0 * (inv.G * map.t);
      CHECK(std::abs(inv.g.x - expect.x) <= 1e-9);
      CHECK(std::abs(inv.g.y - expect.y) <= 1e-9);
    }
  }
  SUBCASE("singular maps are rejected") {
    CHECK_THROWS_AS(sdtn_invert({{1, 2, 2, 4}, {0, 0}}), SingularMapError);
    CHECK_THROWS_AS(sdtn_invert({{0, 0, 0, 0}, {1, 1}}), SingularMapError);
  }
}

TEST_CASE("sdtn_apply inverts stn_apply on a point grid") {
  SUBCASE("identity") {
    const Vec2 out = sdtn_apply({Mat2::identity(), {0, 0}}, {0.1, 0.2});
    CHECK(out.x == 0.1);
    CHECK(out.y == 0.2);
  }
  SUBCASE("worked inverse") {
    const Vec2 out = sdtn_apply({{0.5, 0, 0, 0.5}, {-0.5, -0.5}}, {3, 1});
    CHECK(out.x == doctest::Approx(1.0));
    CHECK(out.y == doctest::Approx(0.0));
  }
  SUBCASE("round trip on 1000 random maps x 16 grid points") {
    Rng rng(23);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const AffineMap map = random_map(rng);
      const DetransformMap inv = sdtn_invert(map);
      for (int gx = 0; gx < 4; ++gx) {
        for (int gy = 0; gy < 4; ++gy) {
          const Vec2 p{-1.0 + 2.0 * gx / 3.0, -1.0 + 2.0 * gy / 3.0};
          const Vec2 back = sdtn_apply(inv, stn_apply(map, p));
          worst = std::max({worst, std::abs(back.x - p.x),
                            std::abs(back.y - p.y)});
        }
      }
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("sdtn_backprop") {
  SUBCASE("zero upstream gradient gives zero") {
    const AffineGrad grad =
        sdtn_backprop({{1.5, 0.2, -0.3, 0.9}, {0.4, -0.1}}, GradPacket{});
    CHECK(grad.dJ_dA.a == 0.0);
    CHECK(grad.dJ_dA.d == 0.0);
    CHECK(grad.dJ_dt.x == 0.0);
  }
  SUBCASE("identity map with unit gradient on G") {
    GradPacket grads;
    grads.dJ_dG = Mat2::identity();
    const AffineGrad grad =
        sdtn_backprop({Mat2::identity(), {0, 0}}, grads);
    CHECK(grad.dJ_dA.a == doctest::Approx(-1.0));
    CHECK(grad.dJ_dA.b == doctest::Approx(0.0));
    CHECK(grad.dJ_dA.c == doctest::Approx(0.0));
    CHECK(grad.dJ_dA.d == doctest::Approx(-1.0));
    CHECK(grad.dJ_dt.x == 0.0);
    CHECK(grad.dJ_dt.y == 0.0);
  }
  SUBCASE("matches central finite differences on 100 random cases") {
    Rng rng(31);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const AffineMap map = random_map(rng, 0.1);
      GradPacket grads;
      grads.dJ_dG = {rng.uniform(-1, 1), rng.uniform(-1, 1),
                     rng.uniform(-1, 1), rng.uniform(-1, 1)};
      grads.dJ_dg = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const AffineGrad analytic = sdtn_backprop(map, grads);
      const double vals[6] = {analytic.dJ_dA.a, analytic.dJ_dA.b,
                              analytic.dJ_dA.c, analytic.dJ_dA.d,
                              analytic.dJ_dt.x, analytic.dJ_dt.y};
      for (int p = 0; p < 6; ++p) {
        AffineMap plus = map;
        AffineMap minus = map;
        double* fp[6] = {&plus.A.a, &plus.A.b, &plus.A.c,
                         &plus.A.d, &plus.t.x, &plus.t.y};
        double* fm[6] = {&minus.A.a, &minus.A.b, &minus.A.c,
                         &minus.A.d, &minus.t.x, &minus.t.y};
        *fp[p] += h;
        *fm[p] -= h;
        const double numeric = (probe(plus, grads.dJ_dG, grads.dJ_dg) -
                                probe(minus, grads.dJ_dG, grads.dJ_dg)) /
                               (2 * h);
        worst = std::max(worst, std::abs(vals[p] - numeric) /
                                    std::max(1.0, std::abs(vals[p])));
      }
    }
    CHECK(worst <= 1e-5);
  }
  SUBCASE("singular maps are rejected") {
    CHECK_THROWS_AS(sdtn_backprop({{1, 1, 1, 1}, {0, 0}}, GradPacket{}),
                    SingularMapError);
  }
}

TEST_CASE("gradcheck runner agrees with its tolerance") {
  const GradCheckResult result = sdtn_gradcheck(100, 1e-5, 5);
  CHECK(result.pass);
  CHECK(result.max_rel_err <= 1e-5);
  CHECK(result.trials == 100);
}

TEST_CASE("box frame conversions round trip") {
  const BBox box{10, 20, 110, 220};
  const AffineMap map = affine_from_box(box);
  const Vec2 corner = stn_apply(map, {-1, -1});
  CHECK(corner.x == doctest::Approx(10));
  CHECK(corner.y == doctest::Approx(20));
  const Vec2 norm = to_normalized(box, {60, 120});
  CHECK(norm.x == doctest::Approx(0.0));
  CHECK(norm.y == doctest::Approx(0.0));
  const Vec2 pix = to_pixel(box, {0.5, -0.5});
  CHECK(pix.x == doctest::Approx(85));
  CHECK(pix.y == doctest::Approx(70));
}
