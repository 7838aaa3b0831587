#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dn/error.h"

namespace dn {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    double n = norm();
    return {x / n, y / n, z / n};
  }
};

// Row-major H x W grid. Depth grids use the sentinel 0.0 for missing pixels;
// every valid depth is finite and strictly positive.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        values_(checked_size(width, height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& at(int u, int v) { return values_[static_cast<size_t>(v) * width_ + u]; }
  const T& at(int u, int v) const {
    return values_[static_cast<size_t>(v) * width_ + u];
  }
  T& operator[](size_t i) { return values_[i]; }
  const T& operator[](size_t i) const { return values_[i]; }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }

  bool in_bounds(int u, int v) const {
    return u >= 0 && u < width_ && v >= 0 && v < height_;
  }

  template <typename U>
  bool same_shape(const Grid<U>& o) const {
    return width_ == o.width() && height_ == o.height();
  }

 private:
  static size_t checked_size(int width, int height) {
    if (width <= 0 || height <= 0)
      fail(ErrorKind::Shape, "grid dimensions must be positive");
    return static_cast<size_t>(width) * height;
  }

  int width_ = 0, height_ = 0;
  std::vector<T> values_;
};

using ScalarGrid = Grid<double>;
using ColorImage = Grid<Vec3>;   // channels in [0, 255] floating scale
using NormalGrid = Grid<Vec3>;   // unit vectors, z < 0 (camera-facing)
using MaskGrid = Grid<unsigned char>;

template <typename A, typename B>
inline void require_same_shape(const Grid<A>& a, const Grid<B>& b,
                               const char* what) {
  if (!a.same_shape(b))
    fail(ErrorKind::Shape, std::string(what) + ": grid shape mismatch");
}

// Boundary-enforced validation helpers; grids are plain containers and these
// are applied where the type contracts demand them (io load, solver output).
inline void validate_confidence(const ScalarGrid& g, const char* what) {
  for (size_t i = 0; i < g.size(); ++i)
    if (!(g[i] >= 0.0 && g[i] <= 1.0))
      fail(ErrorKind::Config, std::string(what) + ": confidence outside [0,1]");
}

inline void validate_depth(const ScalarGrid& g, const char* what) {
  for (size_t i = 0; i < g.size(); ++i) {
    double d = g[i];
    if (!(std::isfinite(d) && d >= 0.0))
      fail(ErrorKind::InvalidDepth,
           std::string(what) + ": depth must be finite and >= 0 (0 = missing)");
  }
}

inline void validate_normals(const NormalGrid& g, const char* what) {
  for (size_t i = 0; i < g.size(); ++i) {
    const Vec3& n = g[i];
    if (std::abs(n.norm() - 1.0) > 1e-6)
      fail(ErrorKind::Orientation, std::string(what) + ": normal not unit length");
    if (!(n.z < 0.0))
      fail(ErrorKind::Orientation, std::string(what) + ": normal not camera-facing");
  }
}

}  // namespace dn
