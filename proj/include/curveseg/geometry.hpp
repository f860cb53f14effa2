#pragma once

#include <vector>

#include "curveseg/curve.hpp"

namespace curveseg {

// Discrete quantities of one polygonal curve. Edge e runs from node e to
// node e+1 (wrapping for closed curves), so the edge "before" node j is
// edge j-1 and the edge "after" it is edge j.
inline double h_before(const Curve& c, const std::vector<double>& lens,
                       int j) {
  return c.closed ? lens[(j - 1 + c.node_count()) % c.node_count()]
                  : lens[j - 1];
}
inline double h_after(const Curve& c, const std::vector<double>& lens,
                      int j) {
  return c.closed ? lens[j % c.node_count()] : lens[j];
}

struct CurveGeometry {
  std::vector<double> edge_len;     // per edge
  std::vector<Vec2> edge_normal;    // unit, edge tangent rotated by +90 deg
  std::vector<Vec2> vertex_normal;  // weighted vertex normal, not unit

  double h_before(const Curve& c, int j) const {
    return curveseg::h_before(c, edge_len, j);
  }
  double h_after(const Curve& c, int j) const {
    return curveseg::h_after(c, edge_len, j);
  }
};

struct DiscreteGeometry {
  std::vector<CurveGeometry> per_curve;
};

// Throws ZeroLengthEdge when consecutive nodes coincide.
std::vector<double> edge_lengths(const Curve& c);

std::vector<Vec2> edge_normals(const Curve& c,
                               const std::vector<double>& lens);

// omega_j = (X_{j+1} - X_{j-1})^perp / (h_before + h_after) at interior and
// closed-curve nodes; at open-curve endpoints the adjacent edge normal.
std::vector<Vec2> vertex_normals(const Curve& c,
                                 const std::vector<double>& lens,
                                 const std::vector<Vec2>& normals);

CurveGeometry build_curve_geometry(const Curve& c);
DiscreteGeometry build_geometry(const CurveNetwork& net);

// Second difference in arc length,
//   2/(h_- + h_+) * [ (X_{j+1}-X_j)/h_+ - (X_j-X_{j-1})/h_- ],
// evaluated with lengths `lens` and positions `pos` (which may be a
// different time level than the one the lengths came from). Endpoint
// entries of open curves are zero.
std::vector<Vec2> arc_laplacian(const Curve& c,
                                const std::vector<double>& lens,
                                const std::vector<Vec2>& pos);

double curve_length(const Curve& c);

// Inserts the midpoint of every edge; endpoints and bindings unchanged.
Curve refine_global(const Curve& c);

// Removes every second interior node; never removes endpoints. Throws
// TooFewNodes if the result would drop below the minimum node count.
Curve coarsen_global(const Curve& c);

}  // namespace curveseg
