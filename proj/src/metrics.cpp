#include "dn/metrics.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

namespace dn {

namespace {

// Canonical order-independent reduction: sort ascending, then sum pairwise.
// Any permutation of the inputs produces bit-identical results.
double pairwise(const double* x, size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  size_t half = n / 2;
  return pairwise(x, half) + pairwise(x + half, n - half);
}

double sorted_mean(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  return pairwise(v.data(), v.size()) / static_cast<double>(v.size());
}

bool valid_pixel(const ScalarGrid& gt, const MaskGrid* mask, size_t i) {
  if (!(gt[i] > 0.0)) return false;
  return mask == nullptr || (*mask)[i] != 0;
}

}  // namespace

DepthMetrics depth_metrics(const ScalarGrid& pred, const ScalarGrid& gt,
                           const MaskGrid* mask) {
  require_same_shape(pred, gt, "depth_metrics");
  if (mask) require_same_shape(pred, *mask, "depth_metrics");

  std::vector<double> abs_rel, abs_diff, sq_rel, sq, log_sq;
  size_t n = 0, d1 = 0, d2 = 0, d3 = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (!valid_pixel(gt, mask, i)) continue;
    double p = pred[i], g = gt[i];
    if (!(std::isfinite(p) && p > 0.0))
      fail(ErrorKind::InvalidDepth,
           "depth_metrics: prediction must be finite and > 0 at valid pixels");
    ++n;
    double diff = std::abs(p - g);
    abs_rel.push_back(diff / g);
    abs_diff.push_back(diff);
    sq_rel.push_back((p - g) * (p - g) / g);
    sq.push_back((p - g) * (p - g));
    double l = std::log(p) - std::log(g);
    log_sq.push_back(l * l);
    double ratio = std::max(p / g, g / p);
    if (ratio < 1.25) ++d1;
    if (ratio < 1.25 * 1.25) ++d2;
    if (ratio < 1.25 * 1.25 * 1.25) ++d3;
  }
  if (n == 0) fail(ErrorKind::Config, "depth_metrics: no valid pixels");

  DepthMetrics m;
  m.abs_rel = sorted_mean(abs_rel);
  m.abs_diff = sorted_mean(abs_diff);
  m.sq_rel = sorted_mean(sq_rel);
  m.rmse = std::sqrt(sorted_mean(sq));
  m.rmse_log = std::sqrt(sorted_mean(log_sq));
  m.delta_1 = static_cast<double>(d1) / n;
  m.delta_2 = static_cast<double>(d2) / n;
  m.delta_3 = static_cast<double>(d3) / n;
  return m;
}

NormalMetrics normal_metrics(const NormalGrid& pred, const NormalGrid& gt,
                             const MaskGrid* mask) {
  require_same_shape(pred, gt, "normal_metrics");
  if (mask) require_same_shape(pred, *mask, "normal_metrics");

  std::vector<double> deg;
  size_t w1 = 0, w2 = 0, w3 = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (mask && (*mask)[i] == 0) continue;
    double a =
        std::acos(std::clamp(pred[i].dot(gt[i]), -1.0, 1.0)) * 180.0 / M_PI;
    deg.push_back(a);
    if (a < 11.25) ++w1;
    if (a < 22.5) ++w2;
    if (a < 30.0) ++w3;
  }
  if (deg.empty()) fail(ErrorKind::Config, "normal_metrics: no valid pixels");

  NormalMetrics m;
  size_t n = deg.size();
  std::sort(deg.begin(), deg.end());
  m.mean_deg = pairwise(deg.data(), n) / static_cast<double>(n);
  m.median_deg = deg[(n - 1) / 2];  // lower middle for even counts
  m.within_11_25 = static_cast<double>(w1) / n;
  m.within_22_5 = static_cast<double>(w2) / n;
  m.within_30 = static_cast<double>(w3) / n;
  return m;
}

std::string metrics_json(const DepthMetrics& d,
                         const std::optional<NormalMetrics>& n) {
  nlohmann::json j;
  j["abs_rel"] = d.abs_rel;
  j["abs_diff"] = d.abs_diff;
  j["sq_rel"] = d.sq_rel;
  j["rmse"] = d.rmse;
  j["rmse_log"] = d.rmse_log;
  j["delta_1"] = d.delta_1;
  j["delta_2"] = d.delta_2;
  j["delta_3"] = d.delta_3;
  if (n) {
    j["mean_deg"] = n->mean_deg;
    j["median_deg"] = n->median_deg;
    j["within_11_25"] = n->within_11_25;
    j["within_22_5"] = n->within_22_5;
    j["within_30"] = n->within_30;
  }
  return j.dump(2) + "\n";
}

}  // namespace dn
