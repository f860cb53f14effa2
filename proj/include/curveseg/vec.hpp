#pragma once

#include <Eigen/Dense>

namespace curveseg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// Rotation by +90 degrees: (x, y) -> (-y, x).
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace curveseg
