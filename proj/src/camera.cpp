#include "dn/camera.h"

namespace dn {

namespace {

std::array<double, 9> invert3(const std::array<double, 9>& m) {
  double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
               m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
  if (std::abs(det) < 1e-300)
    fail(ErrorKind::Config, "pose: rotation block is singular");
  double s = 1.0 / det;
  return {s * (m[4] * m[8] - m[5] * m[7]), s * (m[2] * m[7] - m[1] * m[8]),
          s * (m[1] * m[5] - m[2] * m[4]), s * (m[5] * m[6] - m[3] * m[8]),
          s * (m[0] * m[8] - m[2] * m[6]), s * (m[2] * m[3] - m[0] * m[5]),
          s * (m[3] * m[7] - m[4] * m[6]), s * (m[1] * m[6] - m[0] * m[7]),
          s * (m[0] * m[4] - m[1] * m[3])};
}

}  // namespace

Pose snap_to_rotation(const Pose& pose) {
  // Polar Newton iteration X <- (X + X^-T)/2. For inputs within 1e-6 of a
  // rotation this reaches machine precision in a handful of steps.
  std::array<double, 9> X = pose.R;
  for (int iter = 0; iter < 32; ++iter) {
    std::array<double, 9> inv = invert3(X);
    std::array<double, 9> next;
    double delta = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        // X^-T element (i, j) = inv(j, i)
        next[i * 3 + j] = 0.5 * (X[i * 3 + j] + inv[j * 3 + i]);
        delta = std::max(delta, std::abs(next[i * 3 + j] - X[i * 3 + j]));
      }
    X = next;
    if (delta < 1e-15) break;
  }
  Pose out;
  out.R = X;
  out.t = pose.t;
  if (!out.is_rigid(1e-9))
    fail(ErrorKind::Config, "pose: matrix is too far from a rotation to snap");
  return out;
}

}  // namespace dn
