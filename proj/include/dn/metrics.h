#pragma once

#include <optional>
#include <string>

#include "dn/grid.h"

namespace dn {

struct DepthMetrics {
  double abs_rel = 0.0;
  double abs_diff = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;  // natural log
  double delta_1 = 0.0;   // fraction with max(p/g, g/p) < 1.25
  double delta_2 = 0.0;   // < 1.25^2
  double delta_3 = 0.0;   // < 1.25^3
};

struct NormalMetrics {
  double mean_deg = 0.0;
  double median_deg = 0.0;  // lower middle element for even counts
  double within_11_25 = 0.0;
  double within_22_5 = 0.0;
  double within_30 = 0.0;
};

// Valid pixels: gt > 0 and mask (when given). Reductions are
// order-independent (values sorted, then pairwise-summed). Predictions must
// be finite and > 0 at valid pixels.
DepthMetrics depth_metrics(const ScalarGrid& pred, const ScalarGrid& gt,
                           const MaskGrid* mask = nullptr);

NormalMetrics normal_metrics(const NormalGrid& pred, const NormalGrid& gt,
                             const MaskGrid* mask = nullptr);

// Flat JSON document; keys exactly: abs_rel, abs_diff, sq_rel, rmse,
// rmse_log, delta_1, delta_2, delta_3 and mean_deg, median_deg,
// within_11_25, within_22_5, within_30.
std::string metrics_json(const DepthMetrics& d,
                         const std::optional<NormalMetrics>& n);

}  // namespace dn
