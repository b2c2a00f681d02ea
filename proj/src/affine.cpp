#include "posekit/affine.hpp"

#include <cmath>

#include "posekit/rng.hpp"

namespace posekit {

Vec2 stn_apply(const AffineMap& map, Vec2 p_target) {
  return map.A * p_target + map.t;
}

DetransformMap sdtn_invert(const AffineMap& map) {
  const double det = map.A.det();
  if (!(std::abs(det) > kSingularEps)) {
    throw SingularMapError("affine map is singular (|det| <= 1e-8)");
  }
  const Mat2 G{map.A.d / det, -map.A.b / det, -map.A.c / det, map.A.a / det};
  const Vec2 g = -1.0 * (G * map.t);
  return {G, g};
}

Vec2 sdtn_apply(const DetransformMap& dmap, Vec2 p_source) {
  return dmap.G * p_source + dmap.g;
}

AffineGrad sdtn_backprop(const AffineMap& map, const GradPacket& grads) {
  const DetransformMap inv = sdtn_invert(map);
  const Mat2& G = inv.G;
  const Vec2& v = grads.dJ_dg;
  // Fold the g = -G t path into an effective gradient on G, then push it
  // through d(A^{-1}) = -A^{-1} dA A^{-1}.
  const Mat2 outer{v.x * map.t.x, v.x * map.t.y, v.y * map.t.x,
                   v.y * map.t.y};
  const Mat2 effective{grads.dJ_dG.a - outer.a, grads.dJ_dG.b - outer.b,
                       grads.dJ_dG.c - outer.c, grads.dJ_dG.d - outer.d};
  const Mat2 gt = G.transpose();
  const Mat2 dJ_dA = -(gt * effective * gt);
  const Vec2 dJ_dt = -1.0 * (gt * v);
  return {dJ_dA, dJ_dt};
}

AffineMap affine_from_box(const BBox& box) {
  validate_box(box);
  return {{box.width() / 2.0, 0.0, 0.0, box.height() / 2.0},
          {box.center_x(), box.center_y()}};
}

Vec2 to_normalized(const BBox& box, Vec2 pixel) {
  validate_box(box);
  return {(pixel.x - box.center_x()) / (box.width() / 2.0),
          (pixel.y - box.center_y()) / (box.height() / 2.0)};
}

Vec2 to_pixel(const BBox& box, Vec2 normalized) {
  return stn_apply(affine_from_box(box), normalized);
}

namespace {

double probe_loss(const AffineMap& map, const GradPacket& probe) {
  const DetransformMap inv = sdtn_invert(map);
  return probe.dJ_dG.a * inv.G.a + probe.dJ_dG.b * inv.G.b +
         probe.dJ_dG.c * inv.G.c + probe.dJ_dG.d * inv.G.d +
         probe.dJ_dg.x * inv.g.x + probe.dJ_dg.y * inv.g.y;
}

double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

}  // namespace

GradCheckResult sdtn_gradcheck(int trials, double tol, std::uint64_t seed) {
  Rng rng(seed);
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    AffineMap map;
    do {
      map.A = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
               rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
    } while (std::abs(map.A.det()) < 0.1);
    map.t = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};

    GradPacket probe;
    probe.dJ_dG = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                   rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    probe.dJ_dg = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};

    const AffineGrad analytic = sdtn_backprop(map, probe);

    const double analytic_vals[6] = {analytic.dJ_dA.a, analytic.dJ_dA.b,
                                     analytic.dJ_dA.c, analytic.dJ_dA.d,
                                     analytic.dJ_dt.x, analytic.dJ_dt.y};
    for (int p = 0; p < 6; ++p) {
      AffineMap plus = map;
      AffineMap minus = map;
      double* fields_plus[6] = {&plus.A.a, &plus.A.b, &plus.A.c,
                                &plus.A.d, &plus.t.x, &plus.t.y};
      double* fields_minus[6] = {&minus.A.a, &minus.A.b, &minus.A.c,
                                 &minus.A.d, &minus.t.x, &minus.t.y};
      *fields_plus[p] += h;
      *fields_minus[p] -= h;
      const double numeric =
          (probe_loss(plus, probe) - probe_loss(minus, probe)) / (2.0 * h);
      worst = std::max(worst, rel_err(analytic_vals[p], numeric));
    }
  }
  return {trials, worst, tol, worst <= tol};
}

}  // namespace posekit
