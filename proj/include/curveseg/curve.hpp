#pragma once

#include <array>
#include <vector>

#include "curveseg/vec.hpp"

namespace curveseg {

// Domain walls of Omega = [0,W] x [0,H].
enum Wall : int { WallLeft = 0, WallRight = 1, WallBottom = 2, WallTop = 3 };

enum class BindingKind { Free, Junction, Wall };

struct Binding {
  BindingKind kind = BindingKind::Free;
  int id = -1;  // junction index or wall id
};

// Oriented polygonal curve. Node order defines the tangent direction; the
// edge normal is the tangent rotated by +90 degrees and points from
// back_region into front_region. A closed curve stores each node once
// (indices wrap); an open curve keeps both endpoints and must have each of
// them bound to a junction or a wall.
struct Curve {
  std::vector<Vec2> nodes;
  bool closed = true;
  int front_region = 0;  // region on the normal side
  int back_region = 0;   // region on the opposite side
  Binding start_binding;
  Binding end_binding;
  int birth_step = 0;  // step the curve was created at (topology grace period)

  int node_count() const { return static_cast<int>(nodes.size()); }
  int edge_count() const { return closed ? node_count() : node_count() - 1; }

  const Vec2& node_wrapped(int j) const {
    const int n = node_count();
    return nodes[((j % n) + n) % n];
  }

  bool is_endpoint(int j) const {
    return !closed && (j == 0 || j == node_count() - 1);
  }
};

struct EndpointRef {
  int curve = -1;
  bool at_end = false;  // false: start node, true: last node

  bool operator==(const EndpointRef&) const = default;
};

// Triple junction: exactly three endpoints of three distinct curves that
// coincide in position.
struct Junction {
  std::array<EndpointRef, 3> ends;
};

// Open-curve endpoint constrained to slide along one wall.
struct BoundaryPoint {
  EndpointRef end;
  int wall = WallLeft;
};

struct CurveNetwork {
  double width = 0.0;
  double height = 0.0;
  std::vector<Curve> curves;
  std::vector<Junction> junctions;
  std::vector<BoundaryPoint> boundary_points;

  int total_nodes() const;
  double total_length() const;

  Vec2& endpoint(const EndpointRef& r);
  const Vec2& endpoint(const EndpointRef& r) const;
  int endpoint_index(const EndpointRef& r) const;  // node index within curve

  static Vec2 wall_normal(int wall);
  // Distance of p to the given wall line.
  double wall_distance(const Vec2& p, int wall) const;
  // Project p onto the wall line (exact coordinate assignment).
  Vec2 project_to_wall(const Vec2& p, int wall) const;
  // Wall whose line is nearest to p.
  int nearest_wall(const Vec2& p) const;

  // Signed polygon area of a closed curve; positive when the traversal is
  // counterclockwise, in which case the edge normals point into the
  // enclosed part and front_region is the interior.
  double signed_area(int curve_id) const;
  int interior_region(int curve_id) const;
  int exterior_region(int curve_id) const;

  // Checks the structural invariants and endpoint/junction coincidence up
  // to tol; throws InvariantViolation / TooFewNodes / ZeroLengthEdge.
  void validate(double tol = 1e-8) const;
};

}  // namespace curveseg
