#pragma once

#include <string>
#include <variant>
#include <vector>

#include "dn/camera.h"
#include "dn/synth.h"

namespace dn {

// Portable Float Map. "Pf" = 1 channel, "PF" = 3 channels; negative scale =
// little-endian; 32-bit floats in bottom-to-top row order. Grids here are
// top-left origin, so rows are flipped on read/write. Writes always use
// scale -1.0 (little-endian).
ScalarGrid read_pfm_scalar(const std::string& path);

// 3-channel PFM loaded as normals: normalized on load; if every vector has
// z > 0 the map is assumed to use the opposite facing convention and is
// negated; any z >= 0 after that is an error.
NormalGrid read_pfm_normals(const std::string& path);

void write_pfm(const ScalarGrid& grid, const std::string& path);
void write_pfm(const NormalGrid& grid, const std::string& path);

// 16-bit single-channel PNG, depth_m = raw / scale_divisor, raw 0 -> 0.0.
ScalarGrid read_depth_png16(const std::string& path, double scale_divisor = 1000.0);

// 8-bit RGB (or gray, expanded) PNG as a 0-255 float image.
ColorImage read_image_png(const std::string& path);
void write_image_png(const ColorImage& image, const std::string& path);

// Text file with four numbers: fx fy cx cy.
Intrinsics parse_intrinsics(const std::string& path);

// Whitespace-separated 4x4 row-major camera-to-world matrices, one per four
// lines. Bottom row must be 0 0 0 1 within 1e-9; rotation orthonormality is
// validated to 1e-6, then snapped to the nearest rotation so the stored Pose
// meets its 1e-9 invariant.
std::vector<Pose> parse_poses(const std::string& path);

// Depth: min-max normalized viridis-style ramp, sentinels black.
// Normals: RGB = round-half-up((n+1)/2 * 255).
void colormap_render(const ScalarGrid& depth, const std::string& path);
void colormap_render(const NormalGrid& normals, const std::string& path);

// Line-oriented key/value scene config (grammar documented in the README).
SceneSpec parse_scene_spec(const std::string& path);
void write_intrinsics(const Intrinsics& K, const std::string& path);

}  // namespace dn
