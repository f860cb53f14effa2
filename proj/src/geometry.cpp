#include "curveseg/geometry.hpp"

#include <string>

#include "curveseg/errors.hpp"

namespace curveseg {

std::vector<double> edge_lengths(const Curve& c) {
  const int ne = c.edge_count();
  std::vector<double> lens(ne);
  for (int e = 0; e < ne; ++e) {
    lens[e] = (c.node_wrapped(e + 1) - c.nodes[e]).norm();
    if (lens[e] <= 0.0)
      throw ZeroLengthEdge("edge " + std::to_string(e) +
                           " has zero length");
  }
  return lens;
}

std::vector<Vec2> edge_normals(const Curve& c,
                               const std::vector<double>& lens) {
  const int ne = c.edge_count();
  std::vector<Vec2> normals(ne);
  for (int e = 0; e < ne; ++e)
    normals[e] = perp(c.node_wrapped(e + 1) - c.nodes[e]) / lens[e];
  return normals;
}

std::vector<Vec2> vertex_normals(const Curve& c,
                                 const std::vector<double>& lens,
                                 const std::vector<Vec2>& normals) {
  const int n = c.node_count();
  std::vector<Vec2> omega(n);
  const int lo = c.closed ? 0 : 1;
  const int hi = c.closed ? n : n - 1;
  for (int j = lo; j < hi; ++j) {
    const Vec2 chord = c.node_wrapped(j + 1) - c.node_wrapped(j - 1);
    omega[j] = perp(chord) / (h_before(c, lens, j) + h_after(c, lens, j));
  }
  if (!c.closed) {
    omega[0] = normals.front();
    omega[n - 1] = normals.back();
  }
  return omega;
}

CurveGeometry build_curve_geometry(const Curve& c) {
  CurveGeometry g;
  g.edge_len = edge_lengths(c);
  g.edge_normal = edge_normals(c, g.edge_len);
  g.vertex_normal = vertex_normals(c, g.edge_len, g.edge_normal);
  return g;
}

DiscreteGeometry build_geometry(const CurveNetwork& net) {
  DiscreteGeometry g;
  g.per_curve.reserve(net.curves.size());
  for (const Curve& c : net.curves) g.per_curve.push_back(build_curve_geometry(c));
  return g;
}

std::vector<Vec2> arc_laplacian(const Curve& c,
                                const std::vector<double>& lens,
                                const std::vector<Vec2>& pos) {
  const int n = c.node_count();
  std::vector<Vec2> lap(n, Vec2::Zero());
  const int lo = c.closed ? 0 : 1;
  const int hi = c.closed ? n : n - 1;
  auto at = [&](int j) -> const Vec2& { return pos[((j % n) + n) % n]; };
  for (int j = lo; j < hi; ++j) {
    const double hm = h_before(c, lens, j);
    const double hp = h_after(c, lens, j);
    lap[j] = 2.0 / (hm + hp) *
             ((at(j + 1) - at(j)) / hp - (at(j) - at(j - 1)) / hm);
  }
  return lap;
}

double curve_length(const Curve& c) {
  double len = 0.0;
  const int ne = c.edge_count();
  for (int e = 0; e < ne; ++e)
    len += (c.node_wrapped(e + 1) - c.nodes[e]).norm();
  return len;
}

Curve refine_global(const Curve& c) {
  Curve r = c;
  r.nodes.clear();
  r.nodes.reserve(c.node_count() + c.edge_count());
  const int n = c.node_count();
  for (int j = 0; j < n; ++j) {
    r.nodes.push_back(c.nodes[j]);
    const bool has_edge_after = c.closed || j + 1 < n;
    if (has_edge_after)
      r.nodes.push_back(0.5 * (c.nodes[j] + c.node_wrapped(j + 1)));
  }
  return r;
}

Curve coarsen_global(const Curve& c) {
  Curve r = c;
  r.nodes.clear();
  const int n = c.node_count();
  if (c.closed) {
    for (int j = 0; j < n; j += 2) r.nodes.push_back(c.nodes[j]);
    if (r.node_count() < 3)
      throw TooFewNodes("coarsening would leave a closed curve with " +
                        std::to_string(r.node_count()) + " nodes");
  } else {
    // Keep both endpoints, drop every second interior node.
    r.nodes.push_back(c.nodes.front());
    for (int j = 2; j < n - 1; j += 2) r.nodes.push_back(c.nodes[j]);
    r.nodes.push_back(c.nodes.back());
    if (r.node_count() < 2)
      throw TooFewNodes("coarsening would leave an open curve with " +
                        std::to_string(r.node_count()) + " nodes");
  }
  return r;
}

}  // namespace curveseg
