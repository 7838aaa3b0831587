#pragma once

#include <array>
#include <utility>

#include "dn/grid.h"

namespace dn {

// Pinhole camera, no distortion. +z forward, x right, y down, image origin
// top-left, integer coordinates at pixel centers.
struct Intrinsics {
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;

  void validate() const {
    if (!(fx > 0.0 && fy > 0.0))
      fail(ErrorKind::Config, "intrinsics: focal lengths must be positive");
  }
};

// Camera-frame 3D point; for unprojected points z equals the source depth.
struct Point3 {
  double p = 0.0, q = 0.0, z = 0.0;
};

// (u - cx)/fx, (v - cy)/fy
inline std::pair<double, double> normalized_coords(const Intrinsics& K,
                                                   double u, double v) {
  return {(u - K.cx) / K.fx, (v - K.cy) / K.fy};
}

inline Point3 unproject(const Intrinsics& K, double u, double v, double d) {
  if (!(std::isfinite(d) && d > 0.0))
    fail(ErrorKind::InvalidDepth, "unproject: depth must be finite and > 0");
  auto [ut, vt] = normalized_coords(K, u, v);
  return {ut * d, vt * d, d};
}

// Perspective projection; requires z > 0.
inline std::pair<double, double> project(const Intrinsics& K, const Point3& x) {
  return {K.fx * x.p / x.z + K.cx, K.fy * x.q / x.z + K.cy};
}

// Rigid camera-to-world transform. Rotation rows are stored row-major.
struct Pose {
  std::array<double, 9> R = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 t = {0, 0, 0};

  Vec3 apply(const Vec3& x) const {
    return {R[0] * x.x + R[1] * x.y + R[2] * x.z + t.x,
            R[3] * x.x + R[4] * x.y + R[5] * x.z + t.y,
            R[6] * x.x + R[7] * x.y + R[8] * x.z + t.z};
  }

  Vec3 rotate(const Vec3& x) const {
    return {R[0] * x.x + R[1] * x.y + R[2] * x.z,
            R[3] * x.x + R[4] * x.y + R[5] * x.z,
            R[6] * x.x + R[7] * x.y + R[8] * x.z};
  }

  Pose inverse() const {
    Pose inv;
    inv.R = {R[0], R[3], R[6], R[1], R[4], R[7], R[2], R[5], R[8]};
    Vec3 it = inv.rotate(t);
    inv.t = {-it.x, -it.y, -it.z};
    return inv;
  }

  Pose compose(const Pose& o) const {  // this ∘ o (apply o first)
    Pose r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += R[i * 3 + k] * o.R[k * 3 + j];
        r.R[i * 3 + j] = s;
      }
    r.t = apply(o.t);
    return r;
  }

  // rotation^T rotation = I and det = +1, both within tol.
  bool is_rigid(double tol = 1e-9) const {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += R[k * 3 + i] * R[k * 3 + j];
        if (std::abs(s - (i == j ? 1.0 : 0.0)) > tol) return false;
      }
    double det = R[0] * (R[4] * R[8] - R[5] * R[7]) -
                 R[1] * (R[3] * R[8] - R[5] * R[6]) +
                 R[2] * (R[3] * R[7] - R[4] * R[6]);
    return std::abs(det - 1.0) <= tol;
  }
};

// Nearest rotation to R (polar factor), via the Newton iteration
// X <- (X + X^-T)/2; converges quadratically for near-rotations.
Pose snap_to_rotation(const Pose& pose);

}  // namespace dn
