#include "curveseg/curve.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "curveseg/errors.hpp"

namespace curveseg {

int CurveNetwork::total_nodes() const {
  int n = 0;
  for (const Curve& c : curves) n += c.node_count();
  return n;
}

double CurveNetwork::total_length() const {
  double len = 0.0;
  for (const Curve& c : curves) {
    const int ne = c.edge_count();
    for (int e = 0; e < ne; ++e)
      len += (c.node_wrapped(e + 1) - c.nodes[e]).norm();
  }
  return len;
}

Vec2& CurveNetwork::endpoint(const EndpointRef& r) {
  Curve& c = curves[r.curve];
  return r.at_end ? c.nodes.back() : c.nodes.front();
}

const Vec2& CurveNetwork::endpoint(const EndpointRef& r) const {
  const Curve& c = curves[r.curve];
  return r.at_end ? c.nodes.back() : c.nodes.front();
}

int CurveNetwork::endpoint_index(const EndpointRef& r) const {
  return r.at_end ? curves[r.curve].node_count() - 1 : 0;
}

Vec2 CurveNetwork::wall_normal(int wall) {
  switch (wall) {
    case WallLeft: return Vec2(-1, 0);
    case WallRight: return Vec2(1, 0);
    case WallBottom: return Vec2(0, -1);
    default: return Vec2(0, 1);
  }
}

double CurveNetwork::wall_distance(const Vec2& p, int wall) const {
  switch (wall) {
    case WallLeft: return std::abs(p.x());
    case WallRight: return std::abs(width - p.x());
    case WallBottom: return std::abs(p.y());
    default: return std::abs(height - p.y());
  }
}

Vec2 CurveNetwork::project_to_wall(const Vec2& p, int wall) const {
  switch (wall) {
    case WallLeft: return Vec2(0.0, p.y());
    case WallRight: return Vec2(width, p.y());
    case WallBottom: return Vec2(p.x(), 0.0);
    default: return Vec2(p.x(), height);
  }
}

int CurveNetwork::nearest_wall(const Vec2& p) const {
  int best = WallLeft;
  double bestd = wall_distance(p, WallLeft);
  for (int w = WallRight; w <= WallTop; ++w) {
    const double d = wall_distance(p, w);
    if (d < bestd) { bestd = d; best = w; }
  }
  return best;
}

double CurveNetwork::signed_area(int curve_id) const {
  const Curve& c = curves[curve_id];
  double a = 0.0;
  const int n = c.node_count();
  for (int j = 0; j < n; ++j) {
    const Vec2& p = c.nodes[j];
    const Vec2& q = c.node_wrapped(j + 1);
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

int CurveNetwork::interior_region(int curve_id) const {
  // CCW traversal puts the +90-degree edge normals on the enclosed side.
  return signed_area(curve_id) > 0.0 ? curves[curve_id].front_region
                                     : curves[curve_id].back_region;
}

int CurveNetwork::exterior_region(int curve_id) const {
  return signed_area(curve_id) > 0.0 ? curves[curve_id].back_region
                                     : curves[curve_id].front_region;
}

void CurveNetwork::validate(double tol) const {
  std::map<std::pair<int, bool>, int> ref_count;

  for (size_t i = 0; i < curves.size(); ++i) {
    const Curve& c = curves[i];
    const int n = c.node_count();
    if (c.closed && n < 3)
      throw TooFewNodes("closed curve " + std::to_string(i) + " has " +
                        std::to_string(n) + " nodes");
    if (!c.closed && n < 2)
      throw TooFewNodes("open curve " + std::to_string(i) + " has " +
                        std::to_string(n) + " nodes");
    if (c.front_region == c.back_region)
      throw InvariantViolation("curve " + std::to_string(i) +
                               " separates a region from itself");
    const int ne = c.edge_count();
    for (int e = 0; e < ne; ++e) {
      if ((c.node_wrapped(e + 1) - c.nodes[e]).norm() <= 0.0)
        throw ZeroLengthEdge("curve " + std::to_string(i) + " edge " +
                             std::to_string(e));
    }
    if (c.closed) {
      if (c.start_binding.kind != BindingKind::Free ||
          c.end_binding.kind != BindingKind::Free)
        throw InvariantViolation("closed curve " + std::to_string(i) +
                                 " carries endpoint bindings");
    } else {
      if (c.start_binding.kind == BindingKind::Free ||
          c.end_binding.kind == BindingKind::Free)
        throw InvariantViolation("open curve " + std::to_string(i) +
                                 " has an unbound endpoint");
    }
  }

  for (size_t t = 0; t < junctions.size(); ++t) {
    const Junction& jn = junctions[t];
    for (const EndpointRef& r : jn.ends) {
      if (r.curve < 0 || r.curve >= static_cast<int>(curves.size()))
        throw InvariantViolation("junction references missing curve");
      if (curves[r.curve].closed)
        throw InvariantViolation("junction references a closed curve");
      ref_count[{r.curve, r.at_end}]++;
    }
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q)
        if (jn.ends[p] == jn.ends[q])
          throw InvariantViolation("junction references one endpoint twice");
    const Vec2& a = endpoint(jn.ends[0]);
    for (int k = 1; k < 3; ++k) {
      if ((endpoint(jn.ends[k]) - a).norm() > tol) {
        std::ostringstream os;
        os << "junction " << t << " endpoints separated by "
           << (endpoint(jn.ends[k]) - a).norm();
        throw InvariantViolation(os.str());
      }
    }
  }

  for (const BoundaryPoint& bp : boundary_points) {
    if (bp.end.curve < 0 || bp.end.curve >= static_cast<int>(curves.size()))
      throw InvariantViolation("boundary point references missing curve");
    if (curves[bp.end.curve].closed)
      throw InvariantViolation("boundary point references a closed curve");
    ref_count[{bp.end.curve, bp.end.at_end}]++;
    if (wall_distance(endpoint(bp.end), bp.wall) > tol)
      throw InvariantViolation("boundary point is off its wall");
  }

  for (size_t i = 0; i < curves.size(); ++i) {
    if (curves[i].closed) continue;
    for (bool at_end : {false, true}) {
      const auto it = ref_count.find({static_cast<int>(i), at_end});
      const int cnt = (it == ref_count.end()) ? 0 : it->second;
      if (cnt != 1)
        throw InvariantViolation(
            "open endpoint (" + std::to_string(i) + "," +
            (at_end ? std::string("end") : std::string("start")) +
            ") referenced " + std::to_string(cnt) + " times");
    }
  }
}

}  // namespace curveseg
