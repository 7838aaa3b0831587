#include "dn/confidence.h"

#include <algorithm>
#include <cmath>

namespace dn {

void ConfidenceConfig::validate() const {
  if (!(gamma1 > 0.0 && gamma2 > 0.0 && gamma_geo > 0.0))
    fail(ErrorKind::Config, "confidence: scales must be > 0");
  if (!(oob_value >= 0.0 && oob_value <= 1.0))
    fail(ErrorKind::Config, "confidence: oob_value must be in [0,1]");
}

ScalarGrid gt_depth_confidence(const ScalarGrid& pred, const ScalarGrid& gt,
                               const ConfidenceConfig& cfg) {
  cfg.validate();
  require_same_shape(pred, gt, "gt_depth_confidence");
  ScalarGrid out(pred.width(), pred.height());
  for (size_t i = 0; i < pred.size(); ++i) {
    if (!(gt[i] > 0.0)) {
      out[i] = 0.0;
      continue;
    }
    double e_rel = std::abs(pred[i] - gt[i]) / gt[i];
    out[i] = std::max(1.0 - cfg.gamma1 * e_rel, 0.0);
  }
  return out;
}

ScalarGrid gt_normal_confidence(const NormalGrid& pred, const NormalGrid& gt,
                                const ConfidenceConfig& cfg) {
  cfg.validate();
  require_same_shape(pred, gt, "gt_normal_confidence");
  ScalarGrid out(pred.width(), pred.height());
  for (size_t i = 0; i < pred.size(); ++i) {
    double e_ang = std::acos(std::clamp(pred[i].dot(gt[i]), -1.0, 1.0));
    out[i] = std::max(1.0 - cfg.gamma2 * e_ang, 0.0);
  }
  return out;
}

ScalarGrid geometric_confidence(const View& target,
                                const std::vector<View>& refs,
                                const ConfidenceConfig& cfg) {
  cfg.validate();
  if (refs.empty())
    fail(ErrorKind::Config, "geometric_confidence: at least one reference view");
  target.K.validate();
  for (const View& r : refs) r.K.validate();

  const int W = target.depth.width(), H = target.depth.height();
  ScalarGrid out(W, H);

  // Precompute reference-from-target transforms T_ref^-1 * T_tgt.
  std::vector<Pose> rel;
  rel.reserve(refs.size());
  for (const View& r : refs) rel.push_back(r.pose.inverse().compose(target.pose));

  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      double d = target.depth.at(u, v);
      if (!(d > 0.0)) {
        out.at(u, v) = 0.0;
        continue;
      }
      Point3 x = unproject(target.K, u, v, d);
      double c_min = 1.0;
      bool first = true;
      for (size_t k = 0; k < refs.size(); ++k) {
        const View& ref = refs[k];
        Vec3 xr = rel[k].apply({x.p, x.q, x.z});
        double cview = cfg.oob_value;
        if (xr.z > 0.0) {
          auto [ur, vr] = project(ref.K, {xr.x, xr.y, xr.z});
          int ui = static_cast<int>(std::lround(ur));
          int vi = static_cast<int>(std::lround(vr));
          if (ref.depth.in_bounds(ui, vi) && ref.depth.at(ui, vi) > 0.0) {
            double dref = ref.depth.at(ui, vi);
            double e_rel = std::abs(xr.z - dref) / dref;
            cview = std::max(1.0 - cfg.gamma_geo * e_rel, 0.0);
          }
        }
        c_min = first ? cview : std::min(c_min, cview);
        first = false;
      }
      out.at(u, v) = c_min;
    }
  return out;
}

ScalarGrid hybrid_confidence(const ScalarGrid& deep,
                             const ScalarGrid& geometric) {
  require_same_shape(deep, geometric, "hybrid_confidence");
  ScalarGrid out(deep.width(), deep.height());
  for (size_t i = 0; i < deep.size(); ++i) out[i] = deep[i] * geometric[i];
  return out;
}

}  // namespace dn
