#include "dn/pattern.h"

#include "dn/rng.h"

namespace dn {

NeighborhoodPattern NeighborhoodPattern::checkerboard() {
  NeighborhoodPattern p;
  p.kind = PatternKind::Checkerboard;
  p.offsets = {{1, 0},  {-1, 0},  {3, 0},  {-3, 0}, {5, 0},  {-5, 0},
               {10, 0}, {-10, 0}, {0, 1},  {0, -1}, {0, 3},  {0, -3},
               {0, 5},  {0, -5},  {0, 10}, {0, -10}};
  return p;
}

NeighborhoodPattern NeighborhoodPattern::dense_window(int radius) {
  if (radius <= 0) fail(ErrorKind::Config, "pattern: window radius must be > 0");
  NeighborhoodPattern p;
  p.kind = PatternKind::Checkerboard;
  p.window_radius = radius;
  for (int dv = -radius; dv <= radius; ++dv)
    for (int du = -radius; du <= radius; ++du)
      if (du != 0 || dv != 0) p.offsets.emplace_back(du, dv);
  return p;
}

NeighborhoodPattern NeighborhoodPattern::random_window(int radius, int samples,
                                                       uint64_t seed) {
  if (radius <= 0) fail(ErrorKind::Config, "pattern: window radius must be > 0");
  if (samples <= 0) fail(ErrorKind::Config, "pattern: sample count must be > 0");
  NeighborhoodPattern p;
  p.kind = PatternKind::RandomWindow;
  p.window_radius = radius;
  p.sample_count = samples;
  p.seed = seed;
  return p;
}

void NeighborhoodPattern::validate() const {
  if (kind == PatternKind::Checkerboard) {
    if (offsets.empty())
      fail(ErrorKind::Config, "pattern: checkerboard offset list is empty");
    for (auto [du, dv] : offsets)
      if (du == 0 && dv == 0)
        fail(ErrorKind::Config, "pattern: (0,0) is never an offset");
  } else {
    if (window_radius <= 0 || sample_count <= 0)
      fail(ErrorKind::Config, "pattern: invalid random-window parameters");
  }
}

std::vector<Offset> neighborhood(const NeighborhoodPattern& pattern, int u,
                                 int v, int width, int height) {
  std::vector<Offset> out;
  if (pattern.kind == PatternKind::Checkerboard) {
    out.reserve(pattern.offsets.size());
    for (auto [du, dv] : pattern.offsets) {
      int nu = u + du, nv = v + dv;
      if (nu >= 0 && nu < width && nv >= 0 && nv < height)
        out.emplace_back(du, dv);
    }
    return out;
  }

  // Random window: enumerate the in-bounds window cells (row-major, (0,0)
  // excluded), then draw sample_count distinct cells with the counter RNG
  // keyed by (seed, pixel). Deterministic and order-free across pixels.
  int r = pattern.window_radius;
  std::vector<Offset> cells;
  cells.reserve(static_cast<size_t>(2 * r + 1) * (2 * r + 1) - 1);
  for (int dv = -r; dv <= r; ++dv)
    for (int du = -r; du <= r; ++du) {
      if (du == 0 && dv == 0) continue;
      int nu = u + du, nv = v + dv;
      if (nu >= 0 && nu < width && nv >= 0 && nv < height)
        cells.emplace_back(du, dv);
    }
  if (static_cast<int>(cells.size()) <= pattern.sample_count) return cells;

  uint64_t pixel = static_cast<uint64_t>(v) * width + u;
  std::vector<char> picked(cells.size(), 0);
  uint64_t draw = 0;
  out.reserve(pattern.sample_count);
  while (static_cast<int>(out.size()) < pattern.sample_count) {
    double x = rng_u01(pattern.seed, RngPurpose::PatternSample, pixel, draw++);
    size_t idx = static_cast<size_t>(x * cells.size());
    if (idx >= cells.size()) idx = cells.size() - 1;
    if (picked[idx]) continue;
    picked[idx] = 1;
    out.push_back(cells[idx]);
  }
  return out;
}

}  // namespace dn
