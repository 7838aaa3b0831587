#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dn/grid.h"

namespace dn {

using Offset = std::pair<int, int>;  // (du, dv)

enum class PatternKind { Checkerboard, RandomWindow };

// Neighborhood pattern: either a fixed offset list (checkerboard; the default
// is the 16-entry +-{1,3,5,10} axis layout) or a deterministic per-pixel
// random sample within a square window.
struct NeighborhoodPattern {
  PatternKind kind = PatternKind::Checkerboard;
  std::vector<Offset> offsets;  // checkerboard only; (0,0) never appears
  int window_radius = 10;       // random-window only
  int sample_count = 16;        // random-window only
  uint64_t seed = 0;            // random-window only

  // The 16 default offsets in their fixed enumeration order.
  static NeighborhoodPattern checkerboard();
  // All offsets of the (2r+1)^2 square window except (0,0), row-major order.
  static NeighborhoodPattern dense_window(int radius);
  static NeighborhoodPattern random_window(int radius, int samples,
                                           uint64_t seed);

  void validate() const;
};

// In-bounds neighbor coordinates of (u, v), in the pattern's fixed order.
// Checkerboard: offsets filtered to in-bounds. Random-window: sample_count
// distinct in-bounds pixels of the window (all of them if fewer exist),
// deterministic given (seed, pixel).
std::vector<Offset> neighborhood(const NeighborhoodPattern& pattern, int u,
                                 int v, int width, int height);

}  // namespace dn
