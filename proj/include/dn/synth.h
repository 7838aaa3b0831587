#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dn/camera.h"
#include "dn/plane.h"

namespace dn {

// Axis-aligned pixel rectangle [u0, u0+w) x [v0, v0+h).
struct PixelRect {
  int u0 = 0, v0 = 0, w = 0, h = 0;
};

struct PlanarRegion {
  PixelRect rect;
  SlantedPlane plane;          // camera-frame, z = a*p + b*q + t
  std::array<double, 3> color; // base RGB, 0-255
};

// Piecewise-planar synthetic world. Texture jitter is seedless by contract:
// the same spec always renders the same image.
struct SceneSpec {
  int width = 0, height = 0;
  Intrinsics K;
  std::vector<PlanarRegion> regions;
  double jitter = 10.0;  // per-pixel per-channel color jitter amplitude

  void validate() const;  // rects tile exactly; planes positive-depth, camera-facing
};

struct GroundTruthScene {
  ScalarGrid depth;
  NormalGrid normal;
  ColorImage image;
  Grid<int> region_id;
  Intrinsics K;
};

struct CorruptionSpec {
  double p_noise = 0.95;
  double depth_lo = 0.0;  // <= 0: derive [0.25*min, 2*max] from the scene
  double depth_hi = 0.0;
  uint64_t seed = 0;
  double confidence_clean = 1.0;
  double confidence_noisy = 0.0;

  void validate() const;
};

struct CorruptResult {
  ScalarGrid depth;
  NormalGrid normal;
  ScalarGrid conf_d;
  ScalarGrid conf_n;
};

struct SparsifyResult {
  ScalarGrid depth;   // dropped pixels at sentinel 0.0
  ScalarGrid conf_d;  // kept 1.0, dropped 0.0
};

// The four-quadrant 200x200 benchmark scene (fx=fy=200, cx=cy=100).
SceneSpec default_four_plane_spec();

GroundTruthScene gen_planar_scene(const SceneSpec& spec);

// Per pixel, with probability p_noise (deterministic per seed): depth ~
// Uniform[depth range], normal ~ uniform camera-facing hemisphere; otherwise
// the groundtruth values. Confidence grids from the substitution mask.
CorruptResult corrupt(const GroundTruthScene& scene, const CorruptionSpec& c);

// Keeps a deterministic random subset of pixels at confidence 1; dropped
// pixels get depth 0.0 and confidence 0.
SparsifyResult sparsify(const GroundTruthScene& scene, double keep_fraction,
                        uint64_t seed);

}  // namespace dn
