#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curveseg/vec.hpp"

namespace curveseg {

// Raster image on [0,W]x[0,H] with pixel (x,y) covering [x,x+1]x[y,y+1].
// Row y = 0 is the BOTTOM row (the coordinate origin is the lower-left
// corner); file readers/writers flip rows to match the top-down layout of
// PNM files. `raw` keeps the original 8-bit samples when the image came
// from a file (or was quantized), so that byte-exact roundtrips and exact
// integer accumulation are possible; it is empty for synthetic
// double-valued images.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 (gray) or 3 (rgb)
  std::vector<double> data;   // row-major, [ (y*width + x)*channels + c ]
  std::vector<uint8_t> raw;   // same layout; may be empty

  Image() = default;
  Image(int w, int h, int ch, double fill = 0.0)
      : width(w), height(h), channels(ch),
        data(static_cast<size_t>(w) * h * ch, fill) {}

  bool has_raw() const { return !raw.empty(); }
  size_t index(int x, int y, int c = 0) const {
    return (static_cast<size_t>(y) * width + x) * channels + c;
  }
  double value(int x, int y, int c = 0) const { return data[index(x, y, c)]; }
  double& value(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  uint8_t raw_value(int x, int y, int c = 0) const {
    return raw[index(x, y, c)];
  }

  Vec3 rgb(int x, int y) const {
    if (channels == 1) {
      const double v = value(x, y);
      return Vec3(v, v, v);
    }
    return Vec3(value(x, y, 0), value(x, y, 1), value(x, y, 2));
  }

  // Quantizes `data` into `raw` (round to nearest of 255 levels) and
  // rewrites `data` from it, so both views agree exactly.
  void quantize8();
};

// Reads a binary PGM (P5) or PPM (P6) file with maxval <= 255. Values are
// scaled to [0,1] with 0 -> 0.0 and maxval -> 1.0. Throws IoError.
Image load_pnm(const std::string& path);

// Writes PGM for 1-channel and PPM for 3-channel images, maxval 255. Uses
// the stored raw bytes when present, otherwise quantizes. Throws IoError.
void save_pnm(const std::string& path, const Image& img);

}  // namespace curveseg
