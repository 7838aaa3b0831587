#pragma once

#include "dn/camera.h"

namespace dn {

inline constexpr double kEpsFace = 1e-3;  // n_z must be < -kEpsFace to parameterize

// Surface normal as n = (a, b, -1) before normalization. Solver steps clip
// |a|, |b| to 20.0.
struct ParamNormal {
  double a = 0.0, b = 0.0;
};

// Plane z = a*p + b*q + t in camera coordinates. Passes through its
// generating point by construction: t = z0 - a*p0 - b*q0.
struct SlantedPlane {
  double a = 0.0, b = 0.0, t = 0.0;

  double eval(double p, double q) const { return a * p + b * q + t; }
};

// t = (1 - a*ut - b*vt) * d, the offset of the plane through the unprojection
// of (u, v, d) with slopes (a, b).
inline SlantedPlane plane_from(const Intrinsics& K, double u, double v,
                               double d, const ParamNormal& n) {
  if (!(std::isfinite(d) && d > 0.0))
    fail(ErrorKind::InvalidDepth, "plane_from: depth must be finite and > 0");
  auto [ut, vt] = normalized_coords(K, u, v);
  return {n.a, n.b, (1.0 - n.a * ut - n.b * vt) * d};
}

inline ParamNormal param_from_unit(const Vec3& n) {
  if (!(n.z < -kEpsFace))
    fail(ErrorKind::Orientation,
         "param_from_unit: surface parallel to the viewing ray (n_z >= -1e-3)");
  return {-n.x / n.z, -n.y / n.z};
}

inline Vec3 unit_from_param(const ParamNormal& n) {
  double s = std::sqrt(n.a * n.a + n.b * n.b + 1.0);
  return {n.a / s, n.b / s, -1.0 / s};
}

}  // namespace dn
