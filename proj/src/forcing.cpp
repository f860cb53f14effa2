#include "curveseg/forcing.hpp"

#include <algorithm>
#include <cmath>

#include "curveseg/errors.hpp"

namespace curveseg {

int feature_arity(ColorModel m) {
  switch (m) {
    case ColorModel::Scalar: return 1;
    case ColorModel::Rgb: return 3;
    default: return 4;
  }
}

void rgb_to_cb(const Vec3& u, Vec3& v, double& b) {
  b = u.norm();
  if (b < 1e-12) {
    v = Vec3(1.0, 1.0, 1.0) / std::sqrt(3.0);
    return;
  }
  v = u / b;
}

void rgb_to_hsv(const Vec3& u, Vec2& h, double& s, double& v) {
  const double r = u[0], g = u[1], bl = u[2];
  v = std::max({r, g, bl});
  const double mn = std::min({r, g, bl});
  const double d = v - mn;
  s = (v > 0.0) ? d / v : 0.0;
  if (d <= 0.0) {
    h = Vec2(1.0, 0.0);
    return;
  }
  double angle;  // degrees on the hexcone
  if (v == r) angle = 60.0 * ((g - bl) / d);
  else if (v == g) angle = 60.0 * ((bl - r) / d + 2.0);
  else angle = 60.0 * ((r - g) / d + 4.0);
  const double rad = angle * kPi / 180.0;
  h = Vec2(std::cos(rad), std::sin(rad));
}

Vec3 hsv_to_rgb(const Vec2& h, double s, double v) {
  double angle = std::atan2(h.y(), h.x()) * 180.0 / kPi;
  if (angle < 0.0) angle += 360.0;
  const double hh = angle / 60.0;
  const int sector = std::min(5, static_cast<int>(hh));
  const double f = hh - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return Vec3(v, t, p);
    case 1: return Vec3(q, v, p);
    case 2: return Vec3(p, v, t);
    case 3: return Vec3(p, q, v);
    case 4: return Vec3(t, p, v);
    default: return Vec3(v, p, q);
  }
}

Vec2 constrained_mean(const Vec2& sum) {
  const double n = sum.norm();
  if (n < 1e-12) throw DegenerateMean("hue accumulator has no direction");
  return sum / n;
}

Vec3 constrained_mean(const Vec3& sum) {
  const double n = sum.norm();
  if (n < 1e-12)
    throw DegenerateMean("chromaticity accumulator has no direction");
  return sum / n;
}

namespace {

Feature feature_from_rgb(ColorModel model, const Vec3& u) {
  Feature f{};
  switch (model) {
    case ColorModel::Scalar:
      f[0] = u[0];
      break;
    case ColorModel::Rgb:
      f = {u[0], u[1], u[2], 0.0};
      break;
    case ColorModel::ChromaBright: {
      Vec3 v;
      double b;
      rgb_to_cb(u, v, b);
      f = {v[0], v[1], v[2], b};
      break;
    }
    case ColorModel::Hsv: {
      Vec2 h;
      double s, v;
      rgb_to_hsv(u, h, s, v);
      f = {h[0], h[1], s, v};
      break;
    }
  }
  return f;
}

}  // namespace

Feature pixel_feature(const Image& img, ColorModel model, int x, int y) {
  if (model == ColorModel::Scalar) {
    Feature f{};
    f[0] = img.value(x, y, 0);
    return f;
  }
  return feature_from_rgb(model, img.rgb(x, y));
}

double model_residual(const ImageModel& m, const Feature& f,
                      const RegionCoefficients& rc) {
  const auto& w = m.weights;
  const auto& c = rc.c;
  auto sq = [](double x) { return x * x; };
  switch (m.model) {
    case ColorModel::Scalar:
      return w[0] * sq(f[0] - c[0]);
    case ColorModel::Rgb:
      return w[0] * sq(f[0] - c[0]) + w[1] * sq(f[1] - c[1]) +
             w[2] * sq(f[2] - c[2]);
    case ColorModel::ChromaBright:
      return w[0] * (sq(f[0] - c[0]) + sq(f[1] - c[1]) + sq(f[2] - c[2])) +
             w[1] * sq(f[3] - c[3]);
    case ColorModel::Hsv:
      return w[0] * (sq(f[0] - c[0]) + sq(f[1] - c[1])) +
             w[1] * sq(f[2] - c[2]) + w[2] * sq(f[3] - c[3]);
  }
  return 0.0;
}

Feature sample_at(const Image& img, const ImageModel& m, const Vec2& pos) {
  if (!m.bilinear) {
    const int x = std::clamp(static_cast<int>(std::floor(pos.x())), 0,
                             img.width - 1);
    const int y = std::clamp(static_cast<int>(std::floor(pos.y())), 0,
                             img.height - 1);
    return pixel_feature(img, m.model, x, y);
  }
  // Bilinear interpolation between the four nearest pixel centers, then
  // the model transform of the interpolated color.
  const double fx = std::clamp(pos.x() - 0.5, 0.0, img.width - 1.0);
  const double fy = std::clamp(pos.y() - 0.5, 0.0, img.height - 1.0);
  const int x0 = std::max(0, std::min(static_cast<int>(fx), img.width - 2));
  const int y0 = std::max(0, std::min(static_cast<int>(fy), img.height - 2));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double ax = fx - x0, ay = fy - y0;
  const Vec3 u = (1 - ax) * (1 - ay) * img.rgb(x0, y0) +
                 ax * (1 - ay) * img.rgb(x1, y0) +
                 (1 - ax) * ay * img.rgb(x0, y1) + ax * ay * img.rgb(x1, y1);
  return feature_from_rgb(m.model, u);
}

double forcing_at(const ImageModel& m, const Feature& sample,
                  const RegionCoefficients& front,
                  const RegionCoefficients& back) {
  if (!front.valid || !back.valid)
    throw MissingRegion("forcing references a region without coefficients");
  return model_residual(m, sample, front) - model_residual(m, sample, back);
}

}  // namespace curveseg
