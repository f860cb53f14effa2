#pragma once

#include <vector>

#include "curveseg/curve.hpp"
#include "curveseg/forcing.hpp"
#include "curveseg/geometry.hpp"
#include "curveseg/image.hpp"

namespace curveseg {

// Pixel-center classification of the image raster. Rows are stored
// bottom-up like Image; pixel (x,y) covers [x,x+1]x[y,y+1] and is labeled
// by its center (x+0.5, y+0.5). Region ids run from 1.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<int32_t> labels;

  LabelMap() = default;
  LabelMap(int w, int h, int32_t fill = 1)
      : width(w), height(h),
        labels(static_cast<size_t>(w) * h, fill) {}

  int32_t at(int x, int y) const {
    return labels[static_cast<size_t>(y) * width + x];
  }
  int32_t& at(int x, int y) {
    return labels[static_cast<size_t>(y) * width + x];
  }
};

// Region sums. Scalar and RGB images that came from 8-bit files are
// accumulated as exact integer sums of the raw samples, so incremental
// updates and full recounts agree bit for bit. Derived features
// (chromaticity/brightness, hue/saturation/value) are accumulated as
// doubles.
struct RegionAccum {
  long long n = 0;
  std::array<long long, 3> isum{0, 0, 0};
  std::array<double, 4> dsum{0.0, 0.0, 0.0, 0.0};
};

struct RegionStats {
  ColorModel model = ColorModel::Scalar;
  bool integer_mode = false;
  int region_count = 0;
  std::vector<RegionAccum> acc;  // index 0 unused; ids 1..region_count

  void add_pixel(const Image& img, int x, int y, int k);
  void remove_pixel(const Image& img, int x, int y, int k);
};

// Row-major full sweep.
RegionStats build_stats(const LabelMap& labels, const Image& img,
                        ColorModel model, int region_count);

// Region descriptors from the accumulators; entries for regions with
// n == 0 come back with valid == false. Throws DegenerateMean if a
// directional accumulator of a non-empty region has no direction.
std::vector<RegionCoefficients> region_coefficients(const RegionStats& stats);

// Side classification against one curve: true when the point lies on the
// front (normal) side of the nearest segment; distance ties and exact hits
// count as front. At shared vertices the adjacent edge normals are
// averaged.
struct SideResult {
  bool front = true;
  double distance = 0.0;
  int edge = -1;
};
SideResult side_of_curve(const Vec2& p, const Curve& c,
                         const CurveGeometry& g);

// Labels every pixel center by the side it takes against the globally
// nearest curve segment; away from all curves the labels are flood-filled
// (they are constant on each component). With no curves everything gets
// region 1. Throws InconsistentOrientation when the curves' declared
// regions contradict the resulting map.
LabelMap initialize_labels(const CurveNetwork& net,
                           const DiscreteGeometry& geom, int width,
                           int height);

struct UpdateReport {
  int changed = 0;
  std::vector<int> empty_regions;  // ids whose count reached zero
};

// Re-classifies every pixel whose center lies within Chebyshev distance
// `band` of some curve and applies the label/sum increments in row-major
// order. Curves must not have moved by more than `band` since the labels
// were last consistent.
UpdateReport update_labels_near_curves(const CurveNetwork& net,
                                       const DiscreteGeometry& geom,
                                       LabelMap& labels, RegionStats& stats,
                                       const Image& img, double band);

// Re-labels all pixel centers in the given half-open pixel rectangle by
// the globally nearest curve (used after topology surgery).
struct PixelBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // [x0,x1) x [y0,y1)
};
UpdateReport relabel_box(const CurveNetwork& net, const DiscreteGeometry& geom,
                         LabelMap& labels, RegionStats& stats,
                         const Image& img, PixelBox box);

struct EnergyBreakdown {
  double total = 0.0;
  double length = 0.0;    // sigma * |Gamma|
  double external = 0.0;  // data term
};

// sigma * total length + row-major sweep of the per-pixel residuals.
// Throws MissingRegion when a pixel's region has no valid coefficients.
EnergyBreakdown compute_energy(const CurveNetwork& net, const LabelMap& labels,
                               const std::vector<RegionCoefficients>& coeffs,
                               const Image& img, const ImageModel& model,
                               double sigma);

// Writes the ids as literal gray levels (id <= 255 required).
void save_labels_pgm(const std::string& path, const LabelMap& labels);
LabelMap load_labels_pgm(const std::string& path);

}  // namespace curveseg
