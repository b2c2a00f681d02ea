#pragma once

#include <cstdint>

#include "posekit/geometry.hpp"

namespace posekit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

struct Mat2 {
  // Row-major: [a b; c d].
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  double det() const { return a * d - b * c; }

  Mat2 transpose() const { return {a, c, b, d}; }

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

inline Vec2 operator*(const Mat2& m, Vec2 v) {
  return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

inline Mat2 operator*(const Mat2& l, const Mat2& r) {
  return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
          l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

inline Mat2 operator-(const Mat2& m) { return {-m.a, -m.b, -m.c, -m.d}; }

// Crop-side 2D affine map: p_source = A * p_target + t, with coordinates in
// the [-1, 1] normalized frame.
struct AffineMap {
  Mat2 A;
  Vec2 t;
};

// The inverse map carried back after estimation: p_target = G * p_source + g.
struct DetransformMap {
  Mat2 G;
  Vec2 g;
};

// Upstream gradients of a scalar loss with respect to the inverse-map
// parameters. Defaults to all zeros.
struct GradPacket {
  Mat2 dJ_dG{0.0, 0.0, 0.0, 0.0};
  Vec2 dJ_dg;
};

struct AffineGrad {
  Mat2 dJ_dA{0.0, 0.0, 0.0, 0.0};
  Vec2 dJ_dt;
};

// Maps with |det| at or below this are rejected as singular.
inline constexpr double kSingularEps = 1e-8;

Vec2 stn_apply(const AffineMap& map, Vec2 p_target);

// G = A^{-1}, g = -G t. Throws SingularMapError.
DetransformMap sdtn_invert(const AffineMap& map);

Vec2 sdtn_apply(const DetransformMap& dmap, Vec2 p_source);

// Chain rule through the inversion: given dJ/dG and dJ/dg, returns dJ/dA and
// dJ/dt. Uses d(A^{-1}) = -A^{-1} dA A^{-1}; the translation column also
// feeds back through g = -G t.
AffineGrad sdtn_backprop(const AffineMap& map, const GradPacket& grads);

// The affine map sending the [-1,1]^2 frame onto a pixel box, and the two
// point conversions between frames.
AffineMap affine_from_box(const BBox& box);
Vec2 to_normalized(const BBox& box, Vec2 pixel);
Vec2 to_pixel(const BBox& box, Vec2 normalized);

struct GradCheckResult {
  int trials = 0;
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Compares sdtn_backprop against central finite differences of the scalar
// probe loss J = <C_G, G> + <c_g, g> on random nonsingular maps.
GradCheckResult sdtn_gradcheck(int trials, double tol, std::uint64_t seed);

}  // namespace posekit
