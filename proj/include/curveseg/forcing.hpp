#pragma once

#include <array>

#include "curveseg/curve.hpp"
#include "curveseg/image.hpp"

namespace curveseg {

enum class ColorModel { Scalar, Rgb, ChromaBright, Hsv };

// Data-term weights; meaning depends on the model:
//   Scalar:       w[0]
//   Rgb:          w[0..2] per channel
//   ChromaBright: w[0] chromaticity, w[1] brightness
//   Hsv:          w[0] hue, w[1] saturation, w[2] value
struct ImageModel {
  ColorModel model = ColorModel::Scalar;
  std::array<double, 3> weights{1.0, 1.0, 1.0};
  bool bilinear = false;  // node sampling; default nearest pixel
};

// Per-pixel feature tuple; the layout per model is
//   Scalar:       [u]
//   Rgb:          [r, g, b]
//   ChromaBright: [vx, vy, vz, b]   (unit chromaticity, brightness)
//   Hsv:          [hx, hy, s, v]    (unit hue vector, saturation, value)
using Feature = std::array<double, 4>;

int feature_arity(ColorModel m);

// Chromaticity-brightness split: v = u/|u|, b = |u|. Black maps to the
// neutral direction (1,1,1)/sqrt(3) with b = 0.
void rgb_to_cb(const Vec3& u, Vec3& v, double& b);

// Hexcone HSV with the hue carried as a unit 2-vector (cos t, sin t) so
// that averaging never wraps. Gray pixels get hue (1,0) and s = 0.
void rgb_to_hsv(const Vec3& u, Vec2& h, double& s, double& v);
Vec3 hsv_to_rgb(const Vec2& h, double s, double v);

// Normalizes a mean direction; throws DegenerateMean when the accumulated
// vector is shorter than 1e-12.
Vec2 constrained_mean(const Vec2& sum);
Vec3 constrained_mean(const Vec3& sum);

Feature pixel_feature(const Image& img, ColorModel model, int x, int y);

// Region descriptor in the same layout as Feature.
struct RegionCoefficients {
  Feature c{};
  bool valid = false;
};

// Weighted squared distance between a pixel feature and a region
// descriptor; this is the integrand of the data term and the building
// block of the forcing below.
double model_residual(const ImageModel& m, const Feature& f,
                      const RegionCoefficients& rc);

// Image value at a node position: pixel (floor(x), floor(y)) clamped to
// the raster, or bilinear interpolation of pixel centers when enabled.
Feature sample_at(const Image& img, const ImageModel& m, const Vec2& pos);

// Scalar normal forcing of a curve node: residual of the front region
// minus residual of the back region. Positive values push the node along
// its vertex normal. Throws MissingRegion when a referenced region has no
// valid coefficients.
double forcing_at(const ImageModel& m, const Feature& sample,
                  const RegionCoefficients& front,
                  const RegionCoefficients& back);

}  // namespace curveseg
