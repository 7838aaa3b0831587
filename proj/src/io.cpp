#include "dn/io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <png.h>

namespace dn {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  fail(ErrorKind::Io, path + ": " + what);
}

[[noreturn]] void format_fail(const std::string& path, const std::string& what) {
  fail(ErrorKind::Format, path + ": " + what);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) io_fail(path, "cannot open");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool host_is_little_endian() {
  uint16_t x = 1;
  unsigned char b;
  std::memcpy(&b, &x, 1);
  return b == 1;
}

float swap_float(float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  u = ((u & 0xFF000000u) >> 24) | ((u & 0x00FF0000u) >> 8) |
      ((u & 0x0000FF00u) << 8) | ((u & 0x000000FFu) << 24);
  std::memcpy(&v, &u, 4);
  return v;
}

struct PfmData {
  int width = 0, height = 0, channels = 0;
  std::vector<float> values;  // top-left origin, row-major, interleaved
};

PfmData read_pfm_raw(const std::string& path) {
  std::string data = read_file(path);
  size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos])))
      ++pos;
    size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])))
      ++pos;
    if (start == pos) format_fail(path, "truncated PFM header");
    return data.substr(start, pos - start);
  };

  std::string magic = next_token();
  int channels;
  if (magic == "Pf")
    channels = 1;
  else if (magic == "PF")
    channels = 3;
  else
    format_fail(path, "not a PFM file (bad magic '" + magic + "')");

  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    scale = std::stod(next_token());
  } catch (const std::exception&) {
    format_fail(path, "malformed PFM header numbers");
  }
  if (width <= 0 || height <= 0) format_fail(path, "bad PFM dimensions");
  if (scale == 0.0) format_fail(path, "PFM scale must be nonzero");
  if (pos >= data.size()) format_fail(path, "truncated PFM payload");
  ++pos;  // exactly one whitespace byte separates header and payload

  size_t count = static_cast<size_t>(width) * height * channels;
  if (data.size() - pos < count * 4) format_fail(path, "truncated PFM payload");

  bool file_le = scale < 0.0;
  bool need_swap = file_le != host_is_little_endian();

  PfmData out;
  out.width = width;
  out.height = height;
  out.channels = channels;
  out.values.resize(count);
  // PFM rows run bottom-to-top; grids are top-left origin.
  for (int v = 0; v < height; ++v) {
    const char* src =
        data.data() + pos +
        static_cast<size_t>(height - 1 - v) * width * channels * 4;
    float* dst = out.values.data() + static_cast<size_t>(v) * width * channels;
    std::memcpy(dst, src, static_cast<size_t>(width) * channels * 4);
    if (need_swap)
      for (int k = 0; k < width * channels; ++k) dst[k] = swap_float(dst[k]);
  }
  return out;
}

void write_pfm_raw(const std::string& path, int width, int height,
                   int channels, const float* values) {
  if (width <= 0 || height <= 0)
    fail(ErrorKind::Config, path + ": cannot write an empty grid");
  std::ofstream f(path, std::ios::binary);
  if (!f) io_fail(path, "cannot open for writing");
  f << (channels == 1 ? "Pf" : "PF") << "\n"
    << width << " " << height << "\n"
    << "-1.0\n";
  bool need_swap = !host_is_little_endian();
  std::vector<float> row(static_cast<size_t>(width) * channels);
  for (int v = height - 1; v >= 0; --v) {
    const float* src = values + static_cast<size_t>(v) * width * channels;
    if (need_swap) {
      for (int k = 0; k < width * channels; ++k) row[k] = swap_float(src[k]);
      src = row.data();
    }
    f.write(reinterpret_cast<const char*>(src),
            static_cast<std::streamsize>(width) * channels * 4);
  }
  if (!f) io_fail(path, "write failed");
}

// ---- libpng helpers --------------------------------------------------------

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;

  explicit PngReader(const std::string& path) {
    fp = std::fopen(path.c_str(), "rb");
    if (!fp) io_fail(path, "cannot open");
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
    info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      close();
      io_fail(path, "libpng init failed");
    }
  }
  void close() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
    png = nullptr;
    info = nullptr;
    fp = nullptr;
  }
  ~PngReader() { close(); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;

  explicit PngWriter(const std::string& path) {
    fp = std::fopen(path.c_str(), "wb");
    if (!fp) io_fail(path, "cannot open for writing");
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  nullptr);
    info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      close();
      io_fail(path, "libpng init failed");
    }
  }
  void close() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
    png = nullptr;
    info = nullptr;
    fp = nullptr;
  }
  ~PngWriter() { close(); }
};

void write_png_rgb8(const std::string& path, int width, int height,
                    const std::vector<unsigned char>& rgb) {
  PngWriter w(path);
  if (setjmp(png_jmpbuf(w.png))) {
    w.close();
    io_fail(path, "libpng write error");
  }
  png_init_io(w.png, w.fp);
  png_set_IHDR(w.png, w.info, width, height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  std::vector<png_bytep> rows(height);
  for (int v = 0; v < height; ++v)
    rows[v] = const_cast<png_bytep>(rgb.data() + static_cast<size_t>(v) * width * 3);
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

unsigned char round_half_up_255(double x) {
  double r = std::floor(x + 0.5);
  return static_cast<unsigned char>(std::clamp(r, 0.0, 255.0));
}

// Viridis anchor colors at t = k/8, linearly interpolated.
const double kViridis[9][3] = {
    {68, 1, 84},    {72, 40, 120},  {62, 74, 137},  {49, 104, 142},
    {38, 130, 142}, {31, 158, 137}, {53, 183, 121}, {109, 205, 89},
    {253, 231, 37},
};

void viridis(double t, unsigned char* rgb) {
  t = std::clamp(t, 0.0, 1.0);
  double s = t * 8.0;
  int k = std::min(7, static_cast<int>(s));
  double f = s - k;
  for (int c = 0; c < 3; ++c)
    rgb[c] = round_half_up_255(kViridis[k][c] +
                               f * (kViridis[k + 1][c] - kViridis[k][c]));
}

std::vector<double> parse_numbers(const std::string& path,
                                  const std::string& text) {
  std::istringstream ss(text);
  std::vector<double> out;
  double x;
  while (ss >> x) out.push_back(x);
  std::string trailing;
  if (ss.clear(), ss >> trailing)
    format_fail(path, "unexpected token '" + trailing + "'");
  return out;
}

}  // namespace

ScalarGrid read_pfm_scalar(const std::string& path) {
  PfmData p = read_pfm_raw(path);
  if (p.channels != 1)
    format_fail(path, "expected a 1-channel PFM (got 3-channel)");
  ScalarGrid g(p.width, p.height);
  for (size_t i = 0; i < p.values.size(); ++i) {
    if (std::isnan(p.values[i])) format_fail(path, "NaN in scalar map");
    g[i] = p.values[i];
  }
  return g;
}

NormalGrid read_pfm_normals(const std::string& path) {
  PfmData p = read_pfm_raw(path);
  if (p.channels != 3)
    format_fail(path, "expected a 3-channel PFM (got 1-channel)");
  NormalGrid g(p.width, p.height);
  bool all_positive_z = true;
  for (size_t i = 0; i < g.size(); ++i) {
    Vec3 n{p.values[3 * i], p.values[3 * i + 1], p.values[3 * i + 2]};
    double len = n.norm();
    if (!std::isfinite(len) || len < 1e-12)
      format_fail(path, "normal map contains a degenerate vector");
    g[i] = n * (1.0 / len);
    if (!(g[i].z > 0.0)) all_positive_z = false;
  }
  // Facing convention check: a map stored with +z facing is negated wholesale.
  if (all_positive_z)
    for (size_t i = 0; i < g.size(); ++i) g[i] = g[i] * -1.0;
  for (size_t i = 0; i < g.size(); ++i)
    if (!(g[i].z < 0.0))
      fail(ErrorKind::Orientation, path + ": normal map is not camera-facing");
  return g;
}

void write_pfm(const ScalarGrid& grid, const std::string& path) {
  std::vector<float> v(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) v[i] = static_cast<float>(grid[i]);
  write_pfm_raw(path, grid.width(), grid.height(), 1, v.data());
}

void write_pfm(const NormalGrid& grid, const std::string& path) {
  std::vector<float> v(grid.size() * 3);
  for (size_t i = 0; i < grid.size(); ++i) {
    v[3 * i] = static_cast<float>(grid[i].x);
    v[3 * i + 1] = static_cast<float>(grid[i].y);
    v[3 * i + 2] = static_cast<float>(grid[i].z);
  }
  write_pfm_raw(path, grid.width(), grid.height(), 3, v.data());
}

ScalarGrid read_depth_png16(const std::string& path, double scale_divisor) {
  if (!(scale_divisor > 0.0))
    fail(ErrorKind::Config, "read_depth_png16: scale divisor must be > 0");
  PngReader r(path);
  if (setjmp(png_jmpbuf(r.png))) {
    r.close();
    format_fail(path, "libpng read error");
  }
  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);
  int bit_depth = png_get_bit_depth(r.png, r.info);
  int color_type = png_get_color_type(r.png, r.info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY)
    format_fail(path, "expected 16-bit single-channel PNG");
  int W = static_cast<int>(png_get_image_width(r.png, r.info));
  int H = static_cast<int>(png_get_image_height(r.png, r.info));
  if (host_is_little_endian()) png_set_swap(r.png);
  png_read_update_info(r.png, r.info);

  std::vector<uint16_t> raw(static_cast<size_t>(W) * H);
  std::vector<png_bytep> rows(H);
  for (int v = 0; v < H; ++v)
    rows[v] = reinterpret_cast<png_bytep>(raw.data() + static_cast<size_t>(v) * W);
  png_read_image(r.png, rows.data());

  ScalarGrid g(W, H);
  for (size_t i = 0; i < g.size(); ++i)
    g[i] = raw[i] == 0 ? 0.0 : raw[i] / scale_divisor;
  return g;
}

ColorImage read_image_png(const std::string& path) {
  PngReader r(path);
  if (setjmp(png_jmpbuf(r.png))) {
    r.close();
    format_fail(path, "libpng read error");
  }
  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);
  png_set_expand(r.png);           // palettes, low bit depths
  png_set_scale_16(r.png);         // 16-bit down to 8
  png_set_strip_alpha(r.png);
  png_set_gray_to_rgb(r.png);
  png_read_update_info(r.png, r.info);
  int W = static_cast<int>(png_get_image_width(r.png, r.info));
  int H = static_cast<int>(png_get_image_height(r.png, r.info));

  std::vector<unsigned char> raw(static_cast<size_t>(W) * H * 3);
  std::vector<png_bytep> rows(H);
  for (int v = 0; v < H; ++v)
    rows[v] = raw.data() + static_cast<size_t>(v) * W * 3;
  png_read_image(r.png, rows.data());

  ColorImage img(W, H);
  for (size_t i = 0; i < img.size(); ++i)
    img[i] = {static_cast<double>(raw[3 * i]),
              static_cast<double>(raw[3 * i + 1]),
              static_cast<double>(raw[3 * i + 2])};
  return img;
}

void write_image_png(const ColorImage& image, const std::string& path) {
  std::vector<unsigned char> rgb(image.size() * 3);
  for (size_t i = 0; i < image.size(); ++i) {
    rgb[3 * i] = round_half_up_255(image[i].x);
    rgb[3 * i + 1] = round_half_up_255(image[i].y);
    rgb[3 * i + 2] = round_half_up_255(image[i].z);
  }
  write_png_rgb8(path, image.width(), image.height(), rgb);
}

Intrinsics parse_intrinsics(const std::string& path) {
  std::vector<double> n = parse_numbers(path, read_file(path));
  if (n.size() != 4)
    format_fail(path, "intrinsics file must hold exactly 4 numbers: fx fy cx cy");
  Intrinsics K{n[0], n[1], n[2], n[3]};
  K.validate();
  return K;
}

std::vector<Pose> parse_poses(const std::string& path) {
  std::vector<double> n = parse_numbers(path, read_file(path));
  if (n.empty() || n.size() % 16 != 0)
    format_fail(path, "pose file must hold 4x4 matrices (16 numbers each)");
  std::vector<Pose> out;
  for (size_t base = 0; base < n.size(); base += 16) {
    const double* m = n.data() + base;
    if (std::abs(m[12]) > 1e-9 || std::abs(m[13]) > 1e-9 ||
        std::abs(m[14]) > 1e-9 || std::abs(m[15] - 1.0) > 1e-9)
      format_fail(path, "pose bottom row must be 0 0 0 1");
    Pose p;
    p.R = {m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]};
    p.t = {m[3], m[7], m[11]};
    if (!p.is_rigid(1e-6))
      format_fail(path, "pose rotation is not orthonormal (tolerance 1e-6)");
    // Text-serialized rotations rarely meet the 1e-9 type invariant; snap.
    out.push_back(snap_to_rotation(p));
  }
  return out;
}

void colormap_render(const ScalarGrid& depth, const std::string& path) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (size_t i = 0; i < depth.size(); ++i) {
    double d = depth[i];
    if (!(d > 0.0) || !std::isfinite(d)) continue;
    lo = first ? d : std::min(lo, d);
    hi = first ? d : std::max(hi, d);
    first = false;
  }
  std::vector<unsigned char> rgb(depth.size() * 3, 0);
  for (size_t i = 0; i < depth.size(); ++i) {
    double d = depth[i];
    if (!(d > 0.0) || !std::isfinite(d)) continue;  // sentinel: black
    double t = hi > lo ? (d - lo) / (hi - lo) : 0.0;
    viridis(t, rgb.data() + 3 * i);
  }
  write_png_rgb8(path, depth.width(), depth.height(), rgb);
}

void colormap_render(const NormalGrid& normals, const std::string& path) {
  std::vector<unsigned char> rgb(normals.size() * 3);
  for (size_t i = 0; i < normals.size(); ++i) {
    rgb[3 * i] = round_half_up_255((normals[i].x + 1.0) / 2.0 * 255.0);
    rgb[3 * i + 1] = round_half_up_255((normals[i].y + 1.0) / 2.0 * 255.0);
    rgb[3 * i + 2] = round_half_up_255((normals[i].z + 1.0) / 2.0 * 255.0);
  }
  write_png_rgb8(path, normals.width(), normals.height(), rgb);
}

SceneSpec parse_scene_spec(const std::string& path) {
  std::istringstream in(read_file(path));
  SceneSpec spec;
  spec.K = {0, 0, 0, 0};
  PlanarRegion* region = nullptr;
  std::vector<std::array<bool, 3>> have;  // per region: rect, plane, color
  std::string line;
  int lineno = 0;

  auto cfg_fail = [&](const std::string& what) {
    fail(ErrorKind::Config,
         path + ":" + std::to_string(lineno) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);

    if (line == "[region]") {
      spec.regions.emplace_back();
      region = &spec.regions.back();
      have.push_back({false, false, false});
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) cfg_fail("expected 'key = value'");
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    std::vector<double> vals;
    {
      std::istringstream vs(line.substr(eq + 1));
      double x;
      while (vs >> x) vals.push_back(x);
      std::string extra;
      if (vs.clear(), vs >> extra) cfg_fail("non-numeric value");
    }
    auto need = [&](size_t n) {
      if (vals.size() != n)
        cfg_fail("key '" + key + "' needs " + std::to_string(n) + " value(s)");
    };

    if (!region) {
      if (key == "width") { need(1); spec.width = static_cast<int>(vals[0]); }
      else if (key == "height") { need(1); spec.height = static_cast<int>(vals[0]); }
      else if (key == "fx") { need(1); spec.K.fx = vals[0]; }
      else if (key == "fy") { need(1); spec.K.fy = vals[0]; }
      else if (key == "cx") { need(1); spec.K.cx = vals[0]; }
      else if (key == "cy") { need(1); spec.K.cy = vals[0]; }
      else if (key == "jitter") { need(1); spec.jitter = vals[0]; }
      else cfg_fail("unknown key '" + key + "'");
    } else {
      if (key == "rect") {
        need(4);
        region->rect = {static_cast<int>(vals[0]), static_cast<int>(vals[1]),
                        static_cast<int>(vals[2]), static_cast<int>(vals[3])};
        have.back()[0] = true;
      } else if (key == "plane") {
        need(3);
        region->plane = {vals[0], vals[1], vals[2]};
        have.back()[1] = true;
      } else if (key == "color") {
        need(3);
        region->color = {vals[0], vals[1], vals[2]};
        have.back()[2] = true;
      } else {
        cfg_fail("unknown region key '" + key + "'");
      }
    }
  }
  for (size_t i = 0; i < have.size(); ++i)
    if (!have[i][0] || !have[i][1] || !have[i][2])
      fail(ErrorKind::Config,
           path + ": region " + std::to_string(i + 1) +
               " needs rect, plane, and color");
  spec.validate();
  return spec;
}

void write_intrinsics(const Intrinsics& K, const std::string& path) {
  std::ofstream f(path);
  if (!f) io_fail(path, "cannot open for writing");
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", K.fx, K.fy, K.cx,
                K.cy);
  f << buf;
  if (!f) io_fail(path, "write failed");
}

}  // namespace dn
