#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "curveseg/errors.hpp"
#include "curveseg/topology.hpp"

using namespace curveseg;

namespace {

Curve ring(double cx, double cy, double r, int n, int front = 2,
           int back = 1) {
  Curve c;
  c.closed = true;
  c.front_region = front;
  c.back_region = back;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * M_PI * k / n;
    c.nodes.emplace_back(cx + r * std::cos(t), cy + r * std::sin(t));
  }
  return c;
}

CurveNetwork domain(double w, double h) {
  CurveNetwork net;
  net.width = w;
  net.height = h;
  return net;
}

void check_cycle(const Curve& c, const std::vector<Vec2>& want) {
  REQUIRE(c.closed);
  REQUIRE(c.node_count() == static_cast<int>(want.size()));
  int k0 = -1;
  for (int k = 0; k < c.node_count(); ++k)
    if ((c.nodes[k] - want[0]).norm() == 0.0) {
      k0 = k;
      break;
    }
  REQUIRE(k0 >= 0);
  const int n = c.node_count();
  for (int t = 0; t < n; ++t)
    CHECK((c.nodes[(k0 + t) % n] - want[t]).norm() == 0.0);
}

const Curve& only_two_node_curve(const CurveNetwork& net) {
  const Curve* found = nullptr;
  for (const Curve& c : net.curves)
    if (c.node_count() == 2) {
      REQUIRE(found == nullptr);
      found = &c;
    }
  REQUIRE(found != nullptr);
  return *found;
}

}  // namespace

TEST_CASE("splitting a ring produces the two expected loops") {
  CurveNetwork net = domain(64, 64);
  net.curves.push_back(ring(32, 32, 10, 30));
  const std::vector<Vec2> old = net.curves[0].nodes;

  TopoEvent ev;
  ev.kind = TopoKind::Split;
  ev.curve_a = 0;
  ev.node_a = 5;
  ev.curve_b = 0;
  ev.node_b = 23;
  const TopoChange ch = apply_split(net, ev, 40);

  REQUIRE(net.curves.size() == 2);
  net.validate();
  std::vector<Vec2> inner, outer;
  for (int j = 6; j <= 23; ++j) inner.push_back(old[j]);
  for (int j = 24; j < 30; ++j) outer.push_back(old[j]);
  for (int j = 0; j <= 5; ++j) outer.push_back(old[j]);
  const Curve& big =
      net.curves[0].node_count() == 18 ? net.curves[0] : net.curves[1];
  const Curve& small =
      net.curves[0].node_count() == 18 ? net.curves[1] : net.curves[0];
  check_cycle(big, inner);
  check_cycle(small, outer);
  for (const Curve& c : net.curves) {
    CHECK(c.front_region == 2);
    CHECK(c.back_region == 1);
    CHECK(c.birth_step == 40);
  }
  CHECK(ch.block_sites.size() == 2);
  CHECK(ch.log.find("split") != std::string::npos);
}

TEST_CASE("degenerate splits are refused") {
  CurveNetwork net = domain(64, 64);
  net.curves.push_back(ring(32, 32, 10, 30));
  TopoEvent ev;
  ev.kind = TopoKind::Split;
  ev.curve_a = ev.curve_b = 0;
  ev.node_a = 4;
  ev.node_b = 4;
  CHECK_THROWS_AS(apply_split(net, ev, 0), DegenerateSplit);
  ev.node_b = 5;
  CHECK_THROWS_AS(apply_split(net, ev, 0), DegenerateSplit);
  ev.node_b = 6;  // would pinch off a single node
  CHECK_THROWS_AS(apply_split(net, ev, 0), DegenerateSplit);
}

TEST_CASE("merging two rings yields one loop in traversal order") {
  CurveNetwork net = domain(64, 64);
  net.curves.push_back(ring(20, 20, 5, 8));
  net.curves.push_back(ring(30, 20, 5, 8));
  const std::vector<Vec2> a = net.curves[0].nodes;
  const std::vector<Vec2> b = net.curves[1].nodes;

  TopoEvent ev;
  ev.kind = TopoKind::Merge;
  ev.curve_a = 0;
  ev.node_a = 0;
  ev.curve_b = 1;
  ev.node_b = 4;
  apply_merge(net, ev, 7);

  REQUIRE(net.curves.size() == 1);
  net.validate();
  std::vector<Vec2> want = {a[0], b[5], b[6], b[7], b[0], b[1], b[2], b[3],
                            b[4]};
  for (int j = 1; j < 8; ++j) want.push_back(a[j]);
  check_cycle(net.curves[0], want);
  CHECK(net.curves[0].front_region == 2);
  CHECK(net.curves[0].back_region == 1);
}

TEST_CASE("merge requires matching oriented region pairs") {
  CurveNetwork net = domain(64, 64);
  net.curves.push_back(ring(20, 20, 5, 8, 2, 1));
  net.curves.push_back(ring(30, 20, 5, 8, 1, 2));
  TopoEvent ev;
  ev.kind = TopoKind::Merge;
  ev.curve_a = 0;
  ev.node_a = 0;
  ev.curve_b = 1;
  ev.node_b = 4;
  CHECK_THROWS_AS(apply_merge(net, ev, 0), OrientationMismatch);
}

TEST_CASE("collision detection finds a self pinch and honors blocks") {
  CurveNetwork net = domain(64, 64);
  net.curves.push_back(ring(32, 32, 10, 30));
  net.curves[0].nodes[0] = Vec2(42.2, 32.3);
  net.curves[0].nodes[15] = Vec2(42.7, 32.6);
  TopologyParams params;

  const auto events = detect_events(net, params, {}, 50);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == TopoKind::Split);
  const std::set<int> nodes = {events[0].node_a, events[0].node_b};
  CHECK(nodes == std::set<int>{0, 15});

  // A live block on the collision cell silences it; an expired one does not.
  std::vector<BlockedSite> blocked = {{Vec2(42.5, 32.5), 51}};
  CHECK(detect_events(net, params, blocked, 50).empty());
  blocked[0].until_step = 50;
  CHECK(detect_events(net, params, blocked, 50).size() == 1);
}

TEST_CASE("near neighbors along one curve are not collisions") {
  CurveNetwork net = domain(64, 64);
  net.curves.push_back(ring(32, 32, 10, 30));
  net.curves[0].nodes[0] = Vec2(42.0, 32.1);
  net.curves[0].nodes[2] = Vec2(42.0, 32.4);
  CHECK(detect_events(net, TopologyParams{}, {}, 0).empty());
}

TEST_CASE("far apart curves produce no events") {
  CurveNetwork net = domain(40, 40);
  net.curves.push_back(ring(8, 8, 3, 16));
  net.curves.push_back(ring(32, 32, 3, 16));
  CHECK(detect_events(net, TopologyParams{}, {}, 0).empty());
}

TEST_CASE("arms meeting at their shared junction are exempt") {
  CurveNetwork net = domain(20, 20);
  auto arm = [&](Vec2 a, Vec2 b, int front, int back, int wall) {
    Curve c;
    c.closed = false;
    c.front_region = front;
    c.back_region = back;
    c.nodes = {a, a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0, b};
    c.start_binding = {BindingKind::Junction, 0};
    c.end_binding = {BindingKind::Wall, wall};
    const int id = static_cast<int>(net.curves.size());
    net.curves.push_back(c);
    net.boundary_points.push_back({{id, true}, wall});
  };
  arm({10, 10}, {10, 20}, 2, 1, WallTop);
  arm({10, 10}, {0, 10}, 3, 2, WallLeft);
  arm({10, 10}, {10, 0}, 1, 3, WallBottom);
  net.junctions.push_back({{{{0, false}, {1, false}, {2, false}}}});
  net.validate();
  CHECK(detect_events(net, TopologyParams{}, {}, 0).empty());
}

TEST_CASE("touching rings of different regions spawn a triple junction") {
  CurveNetwork net = domain(52, 40);
  net.curves.push_back(ring(20.3, 20.3, 6, 48, 2, 1));
  net.curves.push_back(ring(32.0, 20.3, 6, 48, 3, 1));

  const auto events = detect_events(net, TopologyParams{}, {}, 9);
  REQUIRE(!events.empty());
  const TopoEvent* best = &events[0];
  for (const TopoEvent& e : events)
    if (e.distance < best->distance) best = &e;
  REQUIRE(best->kind == TopoKind::TripleCreate);

  const TopoChange ch = create_triple_junctions(net, *best, 9);
  net.validate();
  REQUIRE(net.curves.size() == 3);
  REQUIRE(net.junctions.size() == 2);
  CHECK(net.boundary_points.empty());
  CHECK(!net.curves[0].closed);
  CHECK(!net.curves[1].closed);
  CHECK(net.curves[0].node_count() == 48);
  CHECK(net.curves[1].node_count() == 48);
  const Curve& bridge = only_two_node_curve(net);
  CHECK(std::set<int>{bridge.front_region, bridge.back_region} ==
        std::set<int>{2, 3});
  for (const Junction& jn : net.junctions) {
    std::set<int> members;
    for (const EndpointRef& e : jn.ends) members.insert(e.curve);
    CHECK(members.size() == 3);
  }
  CHECK(ch.log.find("triple_create") != std::string::npos);
}

TEST_CASE("a closed curve reaching a wall is opened onto it") {
  CurveNetwork net = domain(20, 20);
  net.curves.push_back(ring(10, 14.2, 5, 24));
  const std::vector<Vec2> old = net.curves[0].nodes;

  const auto events = detect_events(net, TopologyParams{}, {}, 0);
  REQUIRE(!events.empty());
  const TopoEvent* best = &events[0];
  for (const TopoEvent& e : events) {
    CHECK(e.kind == TopoKind::BoundaryHit);
    if (e.distance < best->distance) best = &e;
  }
  CHECK(best->curve_a == 0);
  CHECK(best->node_a == 6);
  CHECK(best->wall == WallTop);

  handle_boundary_hit(net, *best, 3);
  net.validate();
  REQUIRE(net.curves.size() == 1);
  const Curve& c = net.curves[0];
  CHECK(!c.closed);
  REQUIRE(c.node_count() == 25);
  CHECK((c.nodes[0] - Vec2(10, 20)).norm() == 0.0);
  CHECK((c.nodes[24] - Vec2(10, 20)).norm() == 0.0);
  CHECK((c.nodes[1] - old[7]).norm() == 0.0);
  CHECK((c.nodes[23] - old[5]).norm() == 0.0);
  REQUIRE(net.boundary_points.size() == 2);
  CHECK(net.boundary_points[0].wall == WallTop);
  CHECK(net.boundary_points[1].wall == WallTop);
  CHECK(c.front_region == 2);
  CHECK(c.back_region == 1);
}

TEST_CASE("wall feet of one curve that meet close it off the wall") {
  CurveNetwork net = domain(20, 20);
  Curve c;
  c.closed = false;
  c.front_region = 2;
  c.back_region = 1;
  c.nodes = {{9.2, 0}, {12, 4}, {9.5, 7}, {7, 4}, {9.8, 0}};
  c.start_binding = {BindingKind::Wall, WallBottom};
  c.end_binding = {BindingKind::Wall, WallBottom};
  net.curves.push_back(c);
  net.boundary_points.push_back({{0, false}, WallBottom});
  net.boundary_points.push_back({{0, true}, WallBottom});
  net.validate();

  const auto events = detect_events(net, TopologyParams{}, {}, 0);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == TopoKind::WallClose);

  handle_boundary_hit(net, events[0], 0);
  net.validate();
  REQUIRE(net.curves.size() == 1);
  CHECK(net.curves[0].closed);
  CHECK(net.curves[0].node_count() == 4);
  CHECK(net.boundary_points.empty());
  CHECK((net.curves[0].nodes[0] - Vec2(9.2, 0)).norm() == 0.0);
  CHECK((net.curves[0].nodes[3] - Vec2(7, 4)).norm() == 0.0);
}

TEST_CASE("wall feet of two curves that meet splice across the wall") {
  CurveNetwork net = domain(20, 20);
  Curve a;
  a.closed = false;
  a.front_region = 2;
  a.back_region = 1;
  a.nodes = {{0, 5}, {4, 2.5}, {9.3, 0}};
  a.start_binding = {BindingKind::Wall, WallLeft};
  a.end_binding = {BindingKind::Wall, WallBottom};
  Curve b;
  b.closed = false;
  b.front_region = 2;
  b.back_region = 1;
  b.nodes = {{9.7, 0}, {14, 2.5}, {20, 5}};
  b.start_binding = {BindingKind::Wall, WallBottom};
  b.end_binding = {BindingKind::Wall, WallRight};
  net.curves = {a, b};
  net.boundary_points.push_back({{0, false}, WallLeft});
  net.boundary_points.push_back({{0, true}, WallBottom});
  net.boundary_points.push_back({{1, false}, WallBottom});
  net.boundary_points.push_back({{1, true}, WallRight});
  net.validate();

  const auto events = detect_events(net, TopologyParams{}, {}, 0);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == TopoKind::WallMerge);

  handle_boundary_hit(net, events[0], 0);
  net.validate();
  REQUIRE(net.curves.size() == 1);
  const Curve& m = net.curves[0];
  CHECK(!m.closed);
  REQUIRE(m.node_count() == 6);
  CHECK((m.nodes[0] - Vec2(0, 5)).norm() == 0.0);
  CHECK((m.nodes[2] - Vec2(9.3, 0)).norm() == 0.0);
  CHECK((m.nodes[3] - Vec2(9.7, 0)).norm() == 0.0);
  CHECK((m.nodes[5] - Vec2(20, 5)).norm() == 0.0);
  REQUIRE(net.boundary_points.size() == 2);
  const std::set<int> walls = {net.boundary_points[0].wall,
                               net.boundary_points[1].wall};
  CHECK(walls == std::set<int>{WallLeft, WallRight});
}

TEST_CASE("short closed curves vanish after their grace period") {
  CurveNetwork net = domain(20, 20);
  net.curves.push_back(ring(10, 10, 0.3, 3));
  net.curves[0].birth_step = 95;
  TopologyParams params;

  CHECK(!delete_short_curves(net, params, 100).any());
  REQUIRE(net.curves.size() == 1);

  const DeletionOutcome out = delete_short_curves(net, params, 105);
  CHECK(out.changes.size() == 1);
  CHECK(net.curves.empty());
  CHECK(out.changes[0].log.find("curve_delete") != std::string::npos);
}

TEST_CASE("deleting a junction-to-wall stub lands the arms on the wall") {
  CurveNetwork net = domain(20, 20);
  Curve d;
  d.closed = false;
  d.front_region = 4;
  d.back_region = 3;
  d.nodes = {{10, 0.8}, {10, 0}};
  d.start_binding = {BindingKind::Junction, 0};
  d.end_binding = {BindingKind::Wall, WallBottom};
  Curve e1;
  e1.closed = false;
  e1.front_region = 3;
  e1.back_region = 2;
  e1.nodes = {{10, 0.8}, {5, 3}, {0, 5}};
  e1.start_binding = {BindingKind::Junction, 0};
  e1.end_binding = {BindingKind::Wall, WallLeft};
  Curve e2;
  e2.closed = false;
  e2.front_region = 2;
  e2.back_region = 4;
  e2.nodes = {{10, 0.8}, {15, 3}, {20, 5}};
  e2.start_binding = {BindingKind::Junction, 0};
  e2.end_binding = {BindingKind::Wall, WallRight};
  net.curves = {d, e1, e2};
  net.junctions.push_back({{{{0, false}, {1, false}, {2, false}}}});
  net.boundary_points.push_back({{0, true}, WallBottom});
  net.boundary_points.push_back({{1, true}, WallLeft});
  net.boundary_points.push_back({{2, true}, WallRight});
  net.validate();

  const DeletionOutcome out = delete_short_curves(net, TopologyParams{}, 100);
  REQUIRE(out.changes.size() == 1);
  net.validate();
  REQUIRE(net.curves.size() == 2);
  CHECK(net.junctions.empty());
  REQUIRE(net.boundary_points.size() == 4);
  for (const Curve& c : net.curves) {
    CHECK((c.nodes[0] - Vec2(10, 0)).norm() == 0.0);
    CHECK(c.start_binding.kind == BindingKind::Wall);
    CHECK(c.start_binding.id == WallBottom);
  }
}

TEST_CASE("deleting the bar of a theta graph closes both lobes") {
  CurveNetwork net = domain(20, 20);
  Curve d;
  d.closed = false;
  d.front_region = 3;
  d.back_region = 4;
  d.nodes = {{9.2, 10}, {10.8, 10}};
  d.start_binding = {BindingKind::Junction, 0};
  d.end_binding = {BindingKind::Junction, 1};
  Curve a;
  a.closed = false;
  a.front_region = 3;
  a.back_region = 1;
  a.nodes = {{9.2, 10}, {8, 13}, {10, 15}, {12, 13}, {10.8, 10}};
  a.start_binding = {BindingKind::Junction, 0};
  a.end_binding = {BindingKind::Junction, 1};
  Curve b;
  b.closed = false;
  b.front_region = 1;
  b.back_region = 4;
  b.nodes = {{9.2, 10}, {8, 7}, {10, 5}, {12, 7}, {10.8, 10}};
  b.start_binding = {BindingKind::Junction, 0};
  b.end_binding = {BindingKind::Junction, 1};
  net.curves = {d, a, b};
  net.junctions.push_back({{{{0, false}, {1, false}, {2, false}}}});
  net.junctions.push_back({{{{0, true}, {1, true}, {2, true}}}});
  net.validate();

  const DeletionOutcome out = delete_short_curves(net, TopologyParams{}, 100);
  REQUIRE(out.changes.size() == 1);
  CHECK(out.changes[0].log.find("two_curve") != std::string::npos);
  net.validate();
  REQUIRE(net.curves.size() == 2);
  CHECK(net.junctions.empty());
  std::set<std::pair<int, int>> pairs;
  for (const Curve& c : net.curves) {
    CHECK(c.closed);
    CHECK(c.node_count() == 5);
    pairs.insert({c.front_region, c.back_region});
  }
  CHECK(pairs == std::set<std::pair<int, int>>{{3, 1}, {1, 4}});
}

TEST_CASE("deleting a four-way separator swaps the junction pairing") {
  CurveNetwork net = domain(20, 20);
  Curve d;
  d.closed = false;
  d.front_region = 3;  // east of the bar
  d.back_region = 2;   // west
  d.nodes = {{10, 10.8}, {10, 9.2}};
  d.start_binding = {BindingKind::Junction, 0};
  d.end_binding = {BindingKind::Junction, 1};
  auto arm = [&](Vec2 from, Vec2 mid, Vec2 to, int front, int back, int jn,
                 int wall) {
    Curve c;
    c.closed = false;
    c.front_region = front;
    c.back_region = back;
    c.nodes = {from, mid, to};
    c.start_binding = {BindingKind::Junction, jn};
    c.end_binding = {BindingKind::Wall, wall};
    const int id = static_cast<int>(net.curves.size());
    net.curves.push_back(c);
    net.boundary_points.push_back({{id, true}, wall});
  };
  net.curves.push_back(d);
  arm({10, 10.8}, {5, 14}, {0, 16}, 2, 4, 0, WallLeft);    // ea: west/top
  arm({10, 10.8}, {15, 14}, {20, 16}, 4, 3, 0, WallRight); // eb: east/top
  arm({10, 9.2}, {5, 6}, {0, 4}, 5, 2, 1, WallLeft);       // ec: west/bottom
  arm({10, 9.2}, {15, 6}, {20, 4}, 3, 5, 1, WallRight);    // ed: east/bottom
  net.junctions.push_back({{{{0, false}, {1, false}, {2, false}}}});
  net.junctions.push_back({{{{0, true}, {3, false}, {4, false}}}});
  net.validate();

  const DeletionOutcome out = delete_short_curves(net, TopologyParams{}, 100);
  REQUIRE(out.changes.size() == 1);
  CHECK(out.changes[0].log.find("swap") != std::string::npos);
  net.validate();
  REQUIRE(net.curves.size() == 5);
  REQUIRE(net.junctions.size() == 2);

  const Curve& bridge = only_two_node_curve(net);
  CHECK(std::set<int>{bridge.front_region, bridge.back_region} ==
        std::set<int>{4, 5});
  // The new bar is orthogonal to the old one and joins same-side arms.
  CHECK(bridge.nodes[0].y() == doctest::Approx(10.0));
  CHECK(bridge.nodes[1].y() == doctest::Approx(10.0));
  std::set<double> xs = {bridge.nodes[0].x(), bridge.nodes[1].x()};
  CHECK(*xs.begin() == doctest::Approx(9.2));
  CHECK(*xs.rbegin() == doctest::Approx(10.8));
  // East arms share a junction, west arms share the other.
  for (const Junction& jn : net.junctions) {
    std::set<double> first_x;
    for (const EndpointRef& e : jn.ends)
      first_x.insert(net.endpoint(e).x());
    CHECK(first_x.size() == 1);
  }
}

TEST_CASE("reversing a curve flips regions bindings and references") {
  CurveNetwork net = domain(20, 20);
  Curve a;
  a.closed = false;
  a.front_region = 2;
  a.back_region = 1;
  a.nodes = {{0, 5}, {4, 2.5}, {9.3, 0}};
  a.start_binding = {BindingKind::Wall, WallLeft};
  a.end_binding = {BindingKind::Wall, WallBottom};
  net.curves.push_back(a);
  net.boundary_points.push_back({{0, false}, WallLeft});
  net.boundary_points.push_back({{0, true}, WallBottom});
  net.validate();

  reverse_curve(net, 0);
  net.validate();
  const Curve& c = net.curves[0];
  CHECK((c.nodes[0] - Vec2(9.3, 0)).norm() == 0.0);
  CHECK((c.nodes[2] - Vec2(0, 5)).norm() == 0.0);
  CHECK(c.front_region == 1);
  CHECK(c.back_region == 2);
  CHECK(c.start_binding.id == WallBottom);
  CHECK(c.end_binding.id == WallLeft);
  CHECK(net.boundary_points[0].end.at_end == true);
  CHECK(net.boundary_points[1].end.at_end == false);
}

TEST_CASE("background grid clamps and flags wall cells") {
  CHECK_THROWS_AS(BackgroundGrid(20, 20, 0.0), InvariantViolation);
  BackgroundGrid g(20, 20, 1.0);
  CHECK(g.key(Vec2(-3, -3)) == g.key(Vec2(0.2, 0.4)));
  CHECK(g.key(Vec2(25, 10)) == g.key(Vec2(19.5, 10.2)));
  CHECK(g.near_wall(Vec2(0.5, 10), WallLeft));
  CHECK(!g.near_wall(Vec2(1.5, 10), WallLeft));
  CHECK(g.near_wall(Vec2(10, 19.5), WallTop));
  CHECK(!g.near_wall(Vec2(10, 18.5), WallTop));
}

TEST_CASE("average edge length spans the whole network") {
  CurveNetwork net = domain(20, 20);
  CHECK(average_edge_length(net) == 1.0);
  Curve sq;
  sq.closed = true;
  sq.front_region = 2;
  sq.back_region = 1;
  sq.nodes = {{5, 5}, {8, 5}, {8, 8}, {5, 8}};
  net.curves.push_back(sq);
  CHECK(average_edge_length(net) == doctest::Approx(3.0));
}
