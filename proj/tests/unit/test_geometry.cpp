#include <doctest.h>

#include <cmath>

#include "curveseg/errors.hpp"
#include "curveseg/geometry.hpp"

using namespace curveseg;

namespace {

Curve regular_ngon(int n, double rho, double cx = 0.0, double cy = 0.0) {
  Curve c;
  c.closed = true;
  c.front_region = 2;
  c.back_region = 1;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * M_PI * k / n;
    c.nodes.emplace_back(cx + rho * std::cos(t), cy + rho * std::sin(t));
  }
  return c;
}

}  // namespace

TEST_CASE("regular polygon second difference is radial") {
  // For nodes on a circle of radius rho with equal spacing,
  // 2/(h+h) ((X_{j+1}-X_j)/h - (X_j-X_{j-1})/h) = -X_j / rho^2 holds
  // exactly up to rounding.
  const int n = 64;
  const double rho = 13.0;
  const Curve c = regular_ngon(n, rho);
  const auto lens = edge_lengths(c);
  const auto lap = arc_laplacian(c, lens, c.nodes);
  for (int j = 0; j < n; ++j) {
    const Vec2 want = -c.nodes[j] / (rho * rho);
    CHECK((lap[j] - want).norm() < 1e-12 * want.norm() + 1e-14);
  }
}

TEST_CASE("vertex normals of a counterclockwise polygon point inward") {
  const int n = 48;
  const double rho = 7.5;
  const Curve c = regular_ngon(n, rho);
  const CurveGeometry g = build_curve_geometry(c);
  const double want = std::cos(M_PI / n);
  for (int j = 0; j < n; ++j) {
    const Vec2 radial = c.nodes[j] / rho;
    // omega = -cos(pi/n) * outward radial direction
    CHECK((g.vertex_normal[j] + want * radial).norm() < 1e-12);
  }
}

TEST_CASE("edge normals rotate the tangent by +90 degrees") {
  Curve c;
  c.closed = false;
  c.front_region = 2;
  c.back_region = 1;
  c.nodes = {Vec2(0, 0), Vec2(2, 0)};
  const auto lens = edge_lengths(c);
  const auto nu = edge_normals(c, lens);
  CHECK(nu[0].x() == doctest::Approx(0.0));
  CHECK(nu[0].y() == doctest::Approx(1.0));
}

TEST_CASE("zero length edges are rejected") {
  Curve c;
  c.closed = false;
  c.nodes = {Vec2(1, 1), Vec2(1, 1), Vec2(2, 2)};
  CHECK_THROWS_AS(edge_lengths(c), ZeroLengthEdge);
}

TEST_CASE("half edge weights around a node") {
  Curve c;
  c.closed = false;
  c.nodes = {Vec2(0, 0), Vec2(1, 0), Vec2(3, 0)};
  const auto lens = edge_lengths(c);
  CHECK(h_before(c, lens, 1) == doctest::Approx(1.0));
  CHECK(h_after(c, lens, 1) == doctest::Approx(2.0));
  const Curve ring = regular_ngon(6, 2.0);
  const auto rl = edge_lengths(ring);
  CHECK(h_before(ring, rl, 0) == doctest::Approx(rl[5]));
  CHECK(h_after(ring, rl, 0) == doctest::Approx(rl[0]));
}

TEST_CASE("refine doubles the edges and keeps endpoints") {
  Curve c;
  c.closed = false;
  c.front_region = 2;
  c.back_region = 1;
  c.start_binding = {BindingKind::Wall, WallLeft};
  c.nodes = {Vec2(0, 1), Vec2(2, 1), Vec2(4, 1)};
  const Curve r = refine_global(c);
  CHECK(r.node_count() == 5);
  CHECK(r.nodes.front() == c.nodes.front());
  CHECK(r.nodes.back() == c.nodes.back());
  CHECK(r.nodes[1] == Vec2(1, 1));
  CHECK(r.start_binding.kind == BindingKind::Wall);

  const Curve ring = regular_ngon(8, 3.0);
  const Curve rr = refine_global(ring);
  CHECK(rr.node_count() == 16);
  CHECK(rr.closed);
}

TEST_CASE("coarsen halves interior nodes and keeps endpoints") {
  Curve c;
  c.closed = false;
  c.nodes = {Vec2(0, 0), Vec2(1, 0), Vec2(2, 0), Vec2(3, 0), Vec2(4, 0)};
  const Curve k = coarsen_global(c);
  CHECK(k.nodes.front() == Vec2(0, 0));
  CHECK(k.nodes.back() == Vec2(4, 0));
  CHECK(k.node_count() == 3);

  Curve tiny;
  tiny.closed = true;
  tiny.nodes = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  CHECK_THROWS_AS(coarsen_global(tiny), TooFewNodes);
}

TEST_CASE("curve length") {
  const Curve ring = regular_ngon(4, 1.0);
  CHECK(curve_length(ring) == doctest::Approx(4.0 * std::sqrt(2.0)));
}
