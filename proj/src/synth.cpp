#include "dn/synth.h"

#include <algorithm>
#include <cmath>

#include "dn/rng.h"

namespace dn {

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0)
    fail(ErrorKind::Config, "scene: dimensions must be positive");
  K.validate();
  if (regions.empty()) fail(ErrorKind::Config, "scene: no regions");
  if (!(jitter >= 0.0)) fail(ErrorKind::Config, "scene: jitter must be >= 0");

  // Rects tile the image exactly: every pixel covered exactly once.
  Grid<int> cover(width, height, 0);
  for (const PlanarRegion& r : regions) {
    if (r.rect.w <= 0 || r.rect.h <= 0 || r.rect.u0 < 0 || r.rect.v0 < 0 ||
        r.rect.u0 + r.rect.w > width || r.rect.v0 + r.rect.h > height)
      fail(ErrorKind::Config, "scene: region rect out of bounds");
    for (int v = r.rect.v0; v < r.rect.v0 + r.rect.h; ++v)
      for (int u = r.rect.u0; u < r.rect.u0 + r.rect.w; ++u)
        cover.at(u, v) += 1;
    for (double c : r.color)
      if (!(c >= 0.0 && c <= 255.0))
        fail(ErrorKind::Config, "scene: base color outside [0,255]");
  }
  for (size_t i = 0; i < cover.size(); ++i)
    if (cover[i] != 1)
      fail(ErrorKind::Config, "scene: region rects must tile the image exactly");
}

void CorruptionSpec::validate() const {
  if (!(p_noise >= 0.0 && p_noise <= 1.0))
    fail(ErrorKind::Config, "corrupt: p_noise must be in [0,1]");
  if (depth_lo > 0.0 && !(depth_hi > depth_lo))
    fail(ErrorKind::Config, "corrupt: depth range must satisfy hi > lo > 0");
  if (!(confidence_clean >= 0.0 && confidence_clean <= 1.0 &&
        confidence_noisy >= 0.0 && confidence_noisy <= 1.0))
    fail(ErrorKind::Config, "corrupt: confidences must be in [0,1]");
}

SceneSpec default_four_plane_spec() {
  SceneSpec s;
  s.width = 200;
  s.height = 200;
  s.K = {200.0, 200.0, 100.0, 100.0};
  s.jitter = 10.0;
  s.regions = {
      {{0, 0, 100, 100}, {0.4, -0.2, 2.0}, {70.0, 115.0, 65.0}},
      {{100, 0, 100, 100}, {-0.3, 0.25, 2.6}, {150.0, 155.0, 105.0}},
      {{0, 100, 100, 100}, {0.15, 0.35, 1.8}, {110.0, 75.0, 145.0}},
      {{100, 100, 100, 100}, {-0.45, -0.3, 3.0}, {150.0, 75.0, 65.0}},
  };
  return s;
}

GroundTruthScene gen_planar_scene(const SceneSpec& spec) {
  spec.validate();
  const int W = spec.width, H = spec.height;
  GroundTruthScene out{ScalarGrid(W, H), NormalGrid(W, H), ColorImage(W, H),
                       Grid<int>(W, H, -1), spec.K};

  // Texture jitter is seedless: fixed seed 0, integer offsets in
  // [-A, A] per channel, clipped to the valid color range.
  int A = static_cast<int>(std::llround(spec.jitter));

  for (size_t ri = 0; ri < spec.regions.size(); ++ri) {
    const PlanarRegion& reg = spec.regions[ri];
    Vec3 normal = unit_from_param({reg.plane.a, reg.plane.b});
    for (int v = reg.rect.v0; v < reg.rect.v0 + reg.rect.h; ++v)
      for (int u = reg.rect.u0; u < reg.rect.u0 + reg.rect.w; ++u) {
        auto [ut, vt] = normalized_coords(spec.K, u, v);
        double den = 1.0 - reg.plane.a * ut - reg.plane.b * vt;
        double d = std::abs(den) < 1e-12 ? -1.0 : reg.plane.t / den;
        if (!(d > 0.0) || !std::isfinite(d))
          fail(ErrorKind::Config,
               "scene: plane behind camera or through a pixel ray");
        out.depth.at(u, v) = d;
        out.normal.at(u, v) = normal;
        out.region_id.at(u, v) = static_cast<int>(ri);

        uint64_t pixel = static_cast<uint64_t>(v) * W + u;
        Vec3 color;
        double* ch[3] = {&color.x, &color.y, &color.z};
        for (int c = 0; c < 3; ++c) {
          double base = reg.color[static_cast<size_t>(c)];
          if (A > 0) {
            double x = rng_u01(0, RngPurpose::Jitter, pixel,
                               static_cast<uint64_t>(c));
            base += std::floor(x * (2 * A + 1)) - A;
          }
          *ch[c] = std::clamp(base, 0.0, 255.0);
        }
        out.image.at(u, v) = color;
      }
  }
  return out;
}

CorruptResult corrupt(const GroundTruthScene& scene, const CorruptionSpec& c) {
  c.validate();
  const int W = scene.depth.width(), H = scene.depth.height();

  double lo = c.depth_lo, hi = c.depth_hi;
  if (!(lo > 0.0)) {
    double dmin = 0.0, dmax = 0.0;
    bool first = true;
    for (size_t i = 0; i < scene.depth.size(); ++i) {
      double d = scene.depth[i];
      if (!(d > 0.0)) continue;
      dmin = first ? d : std::min(dmin, d);
      dmax = first ? d : std::max(dmax, d);
      first = false;
    }
    if (first) fail(ErrorKind::InvalidDepth, "corrupt: scene has no valid depth");
    lo = 0.25 * dmin;
    hi = 2.0 * dmax;
  }

  CorruptResult out{scene.depth, scene.normal, ScalarGrid(W, H),
                    ScalarGrid(W, H)};
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      uint64_t pixel = static_cast<uint64_t>(v) * W + u;
      bool noisy =
          rng_u01(c.seed, RngPurpose::Substitute, pixel, 0) < c.p_noise;
      if (noisy) {
        double x = rng_u01(c.seed, RngPurpose::DepthNoise, pixel, 0);
        out.depth.at(u, v) = lo + x * (hi - lo);
        // Uniform camera-facing hemisphere (z uniform = uniform area),
        // rejecting near-tangent directions.
        uint64_t k = 0;
        double z, phi;
        do {
          z = -rng_u01(c.seed, RngPurpose::NormalNoise, pixel, 2 * k);
          phi = 2.0 * M_PI * rng_u01(c.seed, RngPurpose::NormalNoise, pixel,
                                     2 * k + 1);
          ++k;
        } while (z > -1e-2);
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        out.normal.at(u, v) = {r * std::cos(phi), r * std::sin(phi), z};
      }
      out.conf_d.at(u, v) = noisy ? c.confidence_noisy : c.confidence_clean;
      out.conf_n.at(u, v) = noisy ? c.confidence_noisy : c.confidence_clean;
    }
  return out;
}

SparsifyResult sparsify(const GroundTruthScene& scene, double keep_fraction,
                        uint64_t seed) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    fail(ErrorKind::Config, "sparsify: keep_fraction must be in (0,1]");
  const int W = scene.depth.width(), H = scene.depth.height();
  SparsifyResult out{ScalarGrid(W, H), ScalarGrid(W, H)};
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      uint64_t pixel = static_cast<uint64_t>(v) * W + u;
      bool keep = rng_u01(seed, RngPurpose::Sparsify, pixel, 0) < keep_fraction;
      out.depth.at(u, v) = keep ? scene.depth.at(u, v) : 0.0;
      out.conf_d.at(u, v) = keep ? 1.0 : 0.0;
    }
  return out;
}

}  // namespace dn
