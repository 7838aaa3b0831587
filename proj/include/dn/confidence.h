#pragma once

#include <vector>

#include "dn/camera.h"

namespace dn {

// A posed depth map used as reprojection target/reference.
struct View {
  ScalarGrid depth;
  Pose pose;  // camera-to-world
  Intrinsics K;
};

struct ConfidenceConfig {
  double gamma1 = 5.0;     // depth-error scale
  double gamma2 = 5.0;     // normal-angle scale, angle in radians
  double gamma_geo = 5.0;  // geometric-check scale
  double oob_value = 1.0;  // per-view confidence where the check is unavailable

  void validate() const;
};

// c = max(1 - gamma1 * |pred - gt| / gt, 0); invalid gt -> 0.
ScalarGrid gt_depth_confidence(const ScalarGrid& pred, const ScalarGrid& gt,
                               const ConfidenceConfig& cfg);

// c = max(1 - gamma2 * arccos(clamp(dot, -1, 1)), 0), angle in radians.
ScalarGrid gt_normal_confidence(const NormalGrid& pred, const NormalGrid& gt,
                                const ConfidenceConfig& cfg);

// Strict cross-view consistency: per target pixel, unproject, transform into
// each reference, project, nearest-neighbor sample the reference depth,
// e_rel = |z_proj - d_ref| / d_ref, per-view c = max(1 - gamma_geo*e_rel, 0);
// out-of-bounds or invalid reference samples give cfg.oob_value for that
// view; the result is the minimum over views. Invalid target depth -> 0.
ScalarGrid geometric_confidence(const View& target,
                                const std::vector<View>& refs,
                                const ConfidenceConfig& cfg);

// Element-wise product.
ScalarGrid hybrid_confidence(const ScalarGrid& deep, const ScalarGrid& geometric);

}  // namespace dn
