#include "curveseg/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_set>

#include "curveseg/errors.hpp"
#include "curveseg/geometry.hpp"

namespace curveseg {

const char* topo_kind_name(TopoKind k) {
  switch (k) {
    case TopoKind::Split: return "split";
    case TopoKind::Merge: return "merge";
    case TopoKind::TripleCreate: return "triple_create";
    case TopoKind::BoundaryHit: return "boundary_hit";
    case TopoKind::WallClose: return "wall_close";
    default: return "wall_merge";
  }
}

double average_edge_length(const CurveNetwork& net) {
  double len = 0.0;
  int edges = 0;
  for (const Curve& c : net.curves) {
    len += curve_length(c);
    edges += c.edge_count();
  }
  return edges > 0 ? len / edges : 1.0;
}

BackgroundGrid::BackgroundGrid(double width, double height, double cell_size) {
  if (cell_size <= 0.0)
    throw InvariantViolation("background grid needs a positive cell size");
  cell = cell_size;
  nx = std::max(1, static_cast<int>(std::ceil(width / cell)));
  ny = std::max(1, static_cast<int>(std::ceil(height / cell)));
}

int64_t BackgroundGrid::key(const Vec2& p) const {
  const int cx =
      std::clamp(static_cast<int>(std::floor(p.x() / cell)), 0, nx - 1);
  const int cy =
      std::clamp(static_cast<int>(std::floor(p.y() / cell)), 0, ny - 1);
  return cx + static_cast<int64_t>(cy) * nx;
}

bool BackgroundGrid::near_wall(const Vec2& p, int wall) const {
  const int cx =
      std::clamp(static_cast<int>(std::floor(p.x() / cell)), 0, nx - 1);
  const int cy =
      std::clamp(static_cast<int>(std::floor(p.y() / cell)), 0, ny - 1);
  switch (wall) {
    case WallLeft: return cx == 0;
    case WallRight: return cx == nx - 1;
    case WallBottom: return cy == 0;
    default: return cy == ny - 1;
  }
}

namespace {

using Slot = std::pair<int, int>;

int next_index(const Curve& c, int j) {
  return c.closed ? (j + 1) % c.node_count() : j + 1;
}

int prev_index(const Curve& c, int j) {
  const int n = c.node_count();
  return c.closed ? (j - 1 + n) % n : j - 1;
}

bool has_succ(const Curve& c, int j) {
  return c.closed || j + 1 < c.node_count();
}

bool has_pred(const Curve& c, int j) { return c.closed || j > 0; }

int graph_distance(const Curve& c, int u, int v) {
  int d = std::abs(u - v);
  if (c.closed) d = std::min(d, c.node_count() - d);
  return d;
}

// Junction ids reachable from node j within graph distance tol along its
// own curve (start side, end side); -1 when unbound.
std::array<int, 2> near_junctions(const Curve& c, int j, int tol) {
  std::array<int, 2> out{-1, -1};
  if (c.closed) return out;
  if (j <= tol && c.start_binding.kind == BindingKind::Junction)
    out[0] = c.start_binding.id;
  if (j >= c.node_count() - 1 - tol &&
      c.end_binding.kind == BindingKind::Junction)
    out[1] = c.end_binding.id;
  return out;
}

bool share_junction(const std::array<int, 2>& a, const std::array<int, 2>& b) {
  for (int x : a)
    if (x >= 0 && (x == b[0] || x == b[1])) return true;
  return false;
}

PixelBox box_around(const std::vector<Vec2>& pts, double pad) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const Vec2& p : pts) {
    x0 = std::min(x0, p.x());
    y0 = std::min(y0, p.y());
    x1 = std::max(x1, p.x());
    y1 = std::max(y1, p.y());
  }
  PixelBox b;
  b.x0 = static_cast<int>(std::floor(x0 - pad));
  b.y0 = static_cast<int>(std::floor(y0 - pad));
  b.x1 = static_cast<int>(std::ceil(x1 + pad)) + 1;
  b.y1 = static_cast<int>(std::ceil(y1 + pad)) + 1;
  return b;
}

double relabel_pad(double cell_size) {
  return std::max(4.0 * cell_size, 4.0);
}

// ---- reconnection walker -------------------------------------------------
//
// Curves are rewired by overriding or cutting node successors; walking the
// modified successor graph enumerates the resulting open paths and cycles.

struct WalkPiece {
  std::vector<Slot> slots;
  bool closed = false;
};

std::optional<Slot> slot_succ(const CurveNetwork& net,
                              const std::map<Slot, Slot>& over,
                              const std::set<Slot>& cut, Slot s) {
  if (auto it = over.find(s); it != over.end()) return it->second;
  if (cut.count(s)) return std::nullopt;
  const Curve& c = net.curves[s.first];
  if (s.second + 1 < c.node_count()) return Slot{s.first, s.second + 1};
  if (c.closed) return Slot{s.first, 0};
  return std::nullopt;
}

std::vector<WalkPiece> reconnect_walk(const CurveNetwork& net,
                                      const std::vector<int>& affected,
                                      const std::map<Slot, Slot>& over,
                                      const std::set<Slot>& cut) {
  std::set<Slot> has_predecessor;
  size_t total = 0;
  for (int ci : affected) {
    total += net.curves[ci].node_count();
    for (int j = 0; j < net.curves[ci].node_count(); ++j)
      if (auto t = slot_succ(net, over, cut, {ci, j}))
        has_predecessor.insert(*t);
  }
  std::vector<WalkPiece> out;
  std::set<Slot> visited;
  auto walk_from = [&](Slot start, bool closed) {
    WalkPiece p;
    p.closed = closed;
    std::optional<Slot> cur = start;
    size_t guard = 0;
    while (cur) {
      if (++guard > total + 1)
        throw InvariantViolation("reconnection walk does not terminate");
      p.slots.push_back(*cur);
      visited.insert(*cur);
      cur = slot_succ(net, over, cut, *cur);
      if (closed && cur && *cur == start) break;
    }
    out.push_back(std::move(p));
  };
  for (int ci : affected)
    for (int j = 0; j < net.curves[ci].node_count(); ++j)
      if (!has_predecessor.count({ci, j}) && !visited.count({ci, j}))
        walk_from({ci, j}, false);
  for (int ci : affected)
    for (int j = 0; j < net.curves[ci].node_count(); ++j)
      if (!visited.count({ci, j})) walk_from({ci, j}, true);
  return out;
}

Curve piece_curve(const CurveNetwork& net, const WalkPiece& p, int birth) {
  const Curve& first = net.curves[p.slots.front().first];
  Curve c;
  c.closed = p.closed;
  c.front_region = first.front_region;
  c.back_region = first.back_region;
  c.birth_step = birth;
  c.nodes.reserve(p.slots.size());
  for (const Slot& s : p.slots)
    c.nodes.push_back(net.curves[s.first].nodes[s.second]);
  if (!p.closed) {
    const Slot s0 = p.slots.front();
    const Curve& c0 = net.curves[s0.first];
    if (!c0.closed && s0.second == 0) c.start_binding = c0.start_binding;
    const Slot s1 = p.slots.back();
    const Curve& c1 = net.curves[s1.first];
    if (!c1.closed && s1.second == c1.node_count() - 1)
      c.end_binding = c1.end_binding;
  }
  return c;
}

// ---- curve replacement with reference remapping ---------------------------

struct EditResult {
  std::vector<int> old_to_new;   // -1 for removed curves
  std::vector<int> added_indices;
  std::map<Slot, Slot> slot_to_new;  // old (curve,node) -> new (curve,node)
};

EditResult apply_edit(CurveNetwork& net, std::vector<int> removed,
                      std::vector<Curve> added,
                      const std::vector<std::vector<Slot>>& added_slots) {
  std::sort(removed.begin(), removed.end());
  removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
  const int n_old = static_cast<int>(net.curves.size());
  EditResult res;
  res.old_to_new.assign(n_old, -1);
  int next = 0;
  size_t ri = 0;
  for (int i = 0; i < n_old; ++i) {
    if (ri < removed.size() && removed[ri] == i) {
      ++ri;
      continue;
    }
    res.old_to_new[i] = next++;
  }
  const int survivors = next;
  for (size_t k = 0; k < added.size(); ++k)
    res.added_indices.push_back(survivors + static_cast<int>(k));
  for (size_t k = 0; k < added_slots.size(); ++k)
    for (size_t t = 0; t < added_slots[k].size(); ++t)
      res.slot_to_new.emplace(
          added_slots[k][t],
          Slot{res.added_indices[k], static_cast<int>(t)});

  auto remap = [&](EndpointRef& r) {
    if (res.old_to_new[r.curve] >= 0) {
      r.curve = res.old_to_new[r.curve];
      return;
    }
    const Curve& oc = net.curves[r.curve];
    const Slot s{r.curve, r.at_end ? oc.node_count() - 1 : 0};
    const auto it = res.slot_to_new.find(s);
    if (it == res.slot_to_new.end())
      throw InvariantViolation("a binding lost its endpoint in a reconnection");
    const Slot ns = it->second;
    const Curve& nc = added[ns.first - survivors];
    if (nc.closed)
      throw InvariantViolation("a bound endpoint landed on a closed curve");
    if (ns.second == 0)
      r = EndpointRef{ns.first, false};
    else if (ns.second == nc.node_count() - 1)
      r = EndpointRef{ns.first, true};
    else
      throw InvariantViolation("a bound endpoint became an interior node");
  };
  for (Junction& jn : net.junctions)
    for (EndpointRef& e : jn.ends) remap(e);
  for (BoundaryPoint& bp : net.boundary_points) remap(bp.end);

  std::vector<Curve> rebuilt;
  rebuilt.reserve(survivors + added.size());
  ri = 0;
  for (int i = 0; i < n_old; ++i) {
    if (ri < removed.size() && removed[ri] == i) {
      ++ri;
      continue;
    }
    rebuilt.push_back(std::move(net.curves[i]));
  }
  for (Curve& c : added) rebuilt.push_back(std::move(c));
  net.curves = std::move(rebuilt);
  return res;
}

void set_binding(CurveNetwork& net, const EndpointRef& r, Binding b) {
  Curve& c = net.curves[r.curve];
  (r.at_end ? c.end_binding : c.start_binding) = b;
}

// Removes junction records by id, shifting the ids stored in curve
// bindings; bindings that pointed at a removed junction become Free (the
// caller rebinds or removes those curves).
void drop_junction_records(CurveNetwork& net, std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto shifted = [&](int id) {
    int s = 0;
    for (int r : ids) {
      if (r == id) return -1;
      if (r < id) ++s;
    }
    return id - s;
  };
  for (Curve& c : net.curves)
    for (Binding* b : {&c.start_binding, &c.end_binding})
      if (b->kind == BindingKind::Junction) {
        const int ni = shifted(b->id);
        if (ni < 0)
          *b = Binding{};
        else
          b->id = ni;
      }
  for (auto it = ids.rbegin(); it != ids.rend(); ++it)
    net.junctions.erase(net.junctions.begin() + *it);
}

void drop_boundary_records(CurveNetwork& net,
                           const std::vector<EndpointRef>& ends) {
  net.boundary_points.erase(
      std::remove_if(net.boundary_points.begin(), net.boundary_points.end(),
                     [&](const BoundaryPoint& bp) {
                       return std::find(ends.begin(), ends.end(), bp.end) !=
                              ends.end();
                     }),
      net.boundary_points.end());
  for (const EndpointRef& e : ends) {
    Curve& c = net.curves[e.curve];
    Binding& b = e.at_end ? c.end_binding : c.start_binding;
    if (b.kind == BindingKind::Wall) b = Binding{};
  }
}

std::string describe(const char* what, const TopoEvent& ev) {
  std::ostringstream os;
  os << what << " curves (" << ev.curve_a << "," << ev.curve_b << ") nodes ("
     << ev.node_a << "," << ev.node_b << ")";
  if (ev.wall >= 0) os << " wall " << ev.wall;
  return os.str();
}

}  // namespace

// ---- detection -------------------------------------------------------------

std::vector<TopoEvent> detect_events(const CurveNetwork& net,
                                     const TopologyParams& params,
                                     const std::vector<BlockedSite>& blocked,
                                     int step) {
  std::vector<TopoEvent> events;
  if (net.curves.empty()) return events;
  const BackgroundGrid grid(net.width, net.height, params.cell_size);
  std::unordered_set<int64_t> blocked_keys;
  for (const BlockedSite& b : blocked)
    if (b.until_step > step) blocked_keys.insert(grid.key(b.pos));

  struct Mark {
    int curve = -1;
    int node = -1;
  };
  std::unordered_map<int64_t, Mark> cells;
  cells.reserve(static_cast<size_t>(net.total_nodes()) * 2);
  for (const Curve& c : net.curves)
    for (const Vec2& p : c.nodes) cells.try_emplace(grid.key(p));

  struct WallEndpoint {
    int curve, node, wall;
  };
  std::unordered_map<int64_t, std::vector<WallEndpoint>> wall_reg;

  const int gd = params.exempt_graph_distance;
  const int scan = params.neighbor_scan;

  auto scan_window = [&](const Curve& c, int center) {
    std::vector<int> w;
    for (int d = -scan; d <= scan; ++d) {
      int u = center + d;
      if (c.closed)
        u = ((u % c.node_count()) + c.node_count()) % c.node_count();
      else if (u < 0 || u >= c.node_count())
        continue;
      if (has_succ(c, u)) w.push_back(u);
    }
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
    return w;
  };

  for (size_t ic = 0; ic < net.curves.size(); ++ic) {
    const Curve& c = net.curves[ic];
    const int n = c.node_count();
    for (int j = 0; j < n; ++j) {
      const Vec2& p = c.nodes[j];
      const int64_t k = grid.key(p);
      if (blocked_keys.count(k)) continue;

      std::vector<int> walls;
      for (int w = 0; w < 4; ++w)
        if (grid.near_wall(p, w)) walls.push_back(w);

      if (!walls.empty()) {
        const bool endpoint = c.is_endpoint(j);
        const Binding& bind = j == 0 ? c.start_binding : c.end_binding;
        if (endpoint && bind.kind == BindingKind::Wall) {
          // Reverse transitions: two wall endpoints meeting in one cell.
          for (const WallEndpoint& r : wall_reg[k]) {
            if (r.wall != bind.id) continue;
            TopoEvent ev;
            ev.wall = bind.id;
            ev.distance = (net.curves[r.curve].nodes[r.node] - p).norm();
            if (r.curve == static_cast<int>(ic)) {
              ev.kind = TopoKind::WallClose;
              ev.curve_a = ev.curve_b = static_cast<int>(ic);
              ev.node_a = std::min(r.node, j);
              ev.node_b = std::max(r.node, j);
            } else {
              ev.kind = TopoKind::WallMerge;
              ev.curve_a = r.curve;
              ev.node_a = r.node;
              ev.curve_b = static_cast<int>(ic);
              ev.node_b = j;
            }
            events.push_back(ev);
            break;
          }
          wall_reg[k].push_back({static_cast<int>(ic), j, bind.id});
          continue;
        }
        if (endpoint) continue;  // junction-bound endpoints never wall-hit
        const auto nj = near_junctions(c, j, gd);
        if (nj[0] >= 0 || nj[1] >= 0) continue;
        int best_wall = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int w : walls) {
          const bool near_start = j <= gd &&
                                  c.start_binding.kind == BindingKind::Wall &&
                                  c.start_binding.id == w;
          const bool near_end = j >= n - 1 - gd &&
                                c.end_binding.kind == BindingKind::Wall &&
                                c.end_binding.id == w;
          if (near_start || near_end) continue;
          const double d = net.wall_distance(p, w);
          if (d < best_dist) {
            best_dist = d;
            best_wall = w;
          }
        }
        if (best_wall >= 0) {
          TopoEvent ev;
          ev.kind = TopoKind::BoundaryHit;
          ev.curve_a = ev.curve_b = static_cast<int>(ic);
          ev.node_a = ev.node_b = j;
          ev.wall = best_wall;
          ev.distance = best_dist;
          events.push_back(ev);
        }
        continue;
      }

      Mark& m = cells[k];
      if (m.curve < 0) {
        m.curve = static_cast<int>(ic);
        m.node = j;
        continue;
      }
      const int ia = m.curve, ja = m.node;
      if (ia == static_cast<int>(ic) && ja == j) continue;
      const Curve& ca = net.curves[ia];
      if (ia == static_cast<int>(ic) && graph_distance(ca, ja, j) <= gd)
        continue;
      if (share_junction(near_junctions(ca, ja, gd), near_junctions(c, j, gd)))
        continue;

      // Refine to the closest valid pair in a +-scan window on both sides.
      double best = std::numeric_limits<double>::infinity();
      int bu = -1, bv = -1;
      for (int u : scan_window(ca, ja)) {
        for (int v : scan_window(c, j)) {
          if (ia == static_cast<int>(ic)) {
            if (u == v || graph_distance(ca, u, v) <= gd) continue;
          } else if (share_junction(near_junctions(ca, u, gd),
                                    near_junctions(c, v, gd))) {
            continue;
          }
          const double d = (ca.nodes[u] - c.nodes[v]).norm();
          if (d < best) {
            best = d;
            bu = u;
            bv = v;
          }
        }
      }
      if (bu < 0) continue;
      TopoEvent ev;
      ev.curve_a = ia;
      ev.node_a = bu;
      ev.curve_b = static_cast<int>(ic);
      ev.node_b = bv;
      ev.distance = best;
      if (ia == static_cast<int>(ic))
        ev.kind = TopoKind::Split;
      else if (ca.front_region == c.front_region &&
               ca.back_region == c.back_region)
        ev.kind = TopoKind::Merge;
      else
        ev.kind = TopoKind::TripleCreate;
      events.push_back(ev);
    }
  }
  return events;
}

// ---- event execution -------------------------------------------------------

TopoChange apply_split(CurveNetwork& net, const TopoEvent& ev, int step) {
  if (ev.curve_a != ev.curve_b)
    throw InvariantViolation("split event references two curves");
  const int i = ev.curve_a;
  const Curve& c = net.curves[i];
  const int ja = ev.node_a, jb = ev.node_b;
  if (ja == jb || graph_distance(c, ja, jb) <= 1)
    throw DegenerateSplit("split nodes are adjacent");
  if (!has_succ(c, ja) || !has_succ(c, jb))
    throw DegenerateSplit("split node lacks a successor");
  std::map<Slot, Slot> over;
  over[{i, ja}] = {i, next_index(c, jb)};
  over[{i, jb}] = {i, next_index(c, ja)};
  const auto pieces = reconnect_walk(net, {i}, over, {});
  for (const WalkPiece& p : pieces)
    if (static_cast<int>(p.slots.size()) < (p.closed ? 3 : 2))
      throw DegenerateSplit("split piece would have too few nodes");
  std::vector<Curve> added;
  std::vector<std::vector<Slot>> slots;
  for (const WalkPiece& p : pieces) {
    added.push_back(piece_curve(net, p, step));
    slots.push_back(p.slots);
  }
  TopoChange ch;
  ch.block_sites = {c.nodes[ja], c.nodes[jb]};
  ch.box = box_around({c.nodes[ja], c.nodes[jb]},
                      relabel_pad(average_edge_length(net)));
  ch.log = describe("split", ev);
  apply_edit(net, {i}, std::move(added), slots);
  return ch;
}

TopoChange apply_merge(CurveNetwork& net, const TopoEvent& ev, int step) {
  const int ia = ev.curve_a, ib = ev.curve_b;
  if (ia == ib) throw InvariantViolation("merge event references one curve");
  const Curve& ca = net.curves[ia];
  const Curve& cb = net.curves[ib];
  if (ca.front_region != cb.front_region ||
      ca.back_region != cb.back_region)
    throw OrientationMismatch("merging curves with different region pairs");
  const int ja = ev.node_a, jb = ev.node_b;
  if (!has_succ(ca, ja) || !has_succ(cb, jb))
    throw DegenerateSplit("merge node lacks a successor");
  std::map<Slot, Slot> over;
  over[{ia, ja}] = {ib, next_index(cb, jb)};
  over[{ib, jb}] = {ia, next_index(ca, ja)};
  const auto pieces = reconnect_walk(net, {ia, ib}, over, {});
  for (const WalkPiece& p : pieces)
    if (static_cast<int>(p.slots.size()) < (p.closed ? 3 : 2))
      throw DegenerateSplit("merge piece would have too few nodes");
  std::vector<Curve> added;
  std::vector<std::vector<Slot>> slots;
  for (const WalkPiece& p : pieces) {
    added.push_back(piece_curve(net, p, step));
    slots.push_back(p.slots);
  }
  TopoChange ch;
  ch.block_sites = {ca.nodes[ja], cb.nodes[jb]};
  ch.box = box_around({ca.nodes[ja], cb.nodes[jb]},
                      relabel_pad(average_edge_length(net)));
  ch.log = describe("merge", ev);
  apply_edit(net, {ia, ib}, std::move(added), slots);
  return ch;
}

TopoChange create_triple_junctions(CurveNetwork& net, const TopoEvent& ev,
                                   int step) {
  const int i = ev.curve_a, i1 = ev.curve_b;
  if (i == i1)
    throw InvariantViolation("junction creation needs two distinct curves");
  const Curve& ci = net.curves[i];
  const Curve& ci1 = net.curves[i1];
  const int js = ev.node_a, j1 = ev.node_b;

  const std::set<int> pa{ci.front_region, ci.back_region};
  const std::set<int> pb{ci1.front_region, ci1.back_region};
  std::vector<int> shared;
  std::set_intersection(pa.begin(), pa.end(), pb.begin(), pb.end(),
                        std::back_inserter(shared));
  if (shared.size() != 1)
    throw AmbiguousRegions("touching curves share " +
                           std::to_string(shared.size()) +
                           " regions; expected exactly one");
  const int common = shared[0];
  const int a_i = ci.front_region == common ? ci.back_region : ci.front_region;
  const int a_i1 =
      ci1.front_region == common ? ci1.back_region : ci1.front_region;

  if (!has_succ(ci, js))
    throw DegenerateSplit("cut node lacks a successor");
  const int js_next = next_index(ci, js);
  const Vec2& x_next = ci.nodes[js_next];
  double d_plus = std::numeric_limits<double>::infinity(), d_minus = d_plus;
  if (has_succ(ci1, j1))
    d_plus = (x_next - ci1.nodes[next_index(ci1, j1)]).norm();
  if (has_pred(ci1, j1))
    d_minus = (x_next - ci1.nodes[prev_index(ci1, j1)]).norm();
  if (!std::isfinite(d_plus) && !std::isfinite(d_minus))
    throw DegenerateSplit("no usable neighbor for the second cut");
  const int s = d_minus < d_plus ? -1 : 1;
  const int j1s = s > 0 ? next_index(ci1, j1) : prev_index(ci1, j1);

  const Vec2 la = 0.5 * (ci.nodes[js] + ci1.nodes[j1]);
  const Vec2 lb = 0.5 * (ci.nodes[js_next] + ci1.nodes[j1s]);
  Vec2 nu_new = perp(lb - la);
  if (nu_new.norm() < 1e-12)
    throw DegenerateSplit("junction endpoints coincide");
  nu_new.normalize();
  const Vec2 nu_i = perp(ci.nodes[js_next] - ci.nodes[js]).normalized();
  const Vec2 cut_edge_i1 = s > 0
                               ? ci1.nodes[j1s] - ci1.nodes[j1]
                               : ci1.nodes[j1] - ci1.nodes[j1s];
  const Vec2 nu_i1 = perp(cut_edge_i1).normalized();
  const double sgn_i = common == ci.back_region ? 1.0 : -1.0;
  const double sgn_i1 = common == ci1.back_region ? 1.0 : -1.0;
  const double score =
      nu_new.dot(sgn_i * nu_i) - nu_new.dot(sgn_i1 * nu_i1);
  if (score == 0.0)
    throw AmbiguousRegions("cannot orient the connecting curve");
  const int fr = score > 0 ? a_i : a_i1;
  const int bk = score > 0 ? a_i1 : a_i;

  std::set<Slot> cut{{i, js}};
  cut.insert(s > 0 ? Slot{i1, j1} : Slot{i1, prev_index(ci1, j1)});
  const auto pieces = reconnect_walk(net, {i, i1}, {}, cut);
  for (const WalkPiece& p : pieces)
    if (static_cast<int>(p.slots.size()) < 2)
      throw DegenerateSplit("cut piece would have too few nodes");

  const Slot end_a_i{i, js}, end_a_i1{i1, j1};
  const Slot end_b_i{i, js_next}, end_b_i1{i1, j1s};

  std::vector<Curve> added;
  std::vector<std::vector<Slot>> slots;
  for (const WalkPiece& p : pieces) {
    added.push_back(piece_curve(net, p, step));
    slots.push_back(p.slots);
  }
  Curve bridge;
  bridge.closed = false;
  bridge.nodes = {la, lb};
  bridge.front_region = fr;
  bridge.back_region = bk;
  bridge.birth_step = step;
  added.push_back(bridge);
  slots.push_back({});

  TopoChange ch;
  ch.block_sites = {la, lb, ci.nodes[js], ci1.nodes[j1]};
  ch.box = box_around({la, lb, ci.nodes[js], ci1.nodes[j1]},
                      relabel_pad(average_edge_length(net)));
  ch.log = describe("triple_create", ev);

  const EditResult ed = apply_edit(net, {i, i1}, std::move(added), slots);
  auto locate = [&](const Slot& s0) {
    const auto it = ed.slot_to_new.find(s0);
    if (it == ed.slot_to_new.end())
      throw InvariantViolation("cut endpoint vanished");
    const Slot ns = it->second;
    const Curve& nc = net.curves[ns.first];
    if (ns.second == 0) return EndpointRef{ns.first, false};
    if (ns.second == nc.node_count() - 1) return EndpointRef{ns.first, true};
    throw InvariantViolation("cut endpoint became interior");
  };
  const EndpointRef ra_i = locate(end_a_i), ra_i1 = locate(end_a_i1);
  const EndpointRef rb_i = locate(end_b_i), rb_i1 = locate(end_b_i1);
  const int bridge_idx = ed.added_indices.back();
  net.endpoint(ra_i) = la;
  net.endpoint(ra_i1) = la;
  net.endpoint(rb_i) = lb;
  net.endpoint(rb_i1) = lb;
  const int jn_a = static_cast<int>(net.junctions.size());
  const int jn_b = jn_a + 1;
  net.junctions.push_back({ra_i, ra_i1, EndpointRef{bridge_idx, false}});
  net.junctions.push_back({rb_i, rb_i1, EndpointRef{bridge_idx, true}});
  set_binding(net, ra_i, {BindingKind::Junction, jn_a});
  set_binding(net, ra_i1, {BindingKind::Junction, jn_a});
  set_binding(net, rb_i, {BindingKind::Junction, jn_b});
  set_binding(net, rb_i1, {BindingKind::Junction, jn_b});
  net.curves[bridge_idx].start_binding = {BindingKind::Junction, jn_a};
  net.curves[bridge_idx].end_binding = {BindingKind::Junction, jn_b};
  return ch;
}

TopoChange handle_boundary_hit(CurveNetwork& net, const TopoEvent& ev,
                               int step) {
  TopoChange ch;
  const double pad = relabel_pad(average_edge_length(net));
  if (ev.kind == TopoKind::BoundaryHit) {
    const int i = ev.curve_a, j = ev.node_a, w = ev.wall;
    const Curve c = net.curves[i];  // copy; the original is replaced below
    const Vec2 pw = net.project_to_wall(c.nodes[j], w);
    ch.block_sites = {pw, c.nodes[j]};
    ch.box = box_around({pw, c.nodes[j]}, pad);
    ch.log = describe("boundary_hit", ev);
    if (c.closed) {
      Curve oc;
      oc.closed = false;
      oc.front_region = c.front_region;
      oc.back_region = c.back_region;
      oc.birth_step = step;
      oc.start_binding = {BindingKind::Wall, w};
      oc.end_binding = {BindingKind::Wall, w};
      oc.nodes.push_back(pw);
      for (int t = 1; t < c.node_count(); ++t)
        oc.nodes.push_back(c.node_wrapped(j + t));
      oc.nodes.push_back(pw);
      const EditResult ed =
          apply_edit(net, {i}, {std::move(oc)}, {std::vector<Slot>{}});
      const int idx = ed.added_indices[0];
      net.boundary_points.push_back({EndpointRef{idx, false}, w});
      net.boundary_points.push_back({EndpointRef{idx, true}, w});
    } else {
      if (c.is_endpoint(j))
        throw InvariantViolation("wall hit on a bound endpoint");
      Curve first, second;
      first.closed = second.closed = false;
      first.front_region = second.front_region = c.front_region;
      first.back_region = second.back_region = c.back_region;
      first.birth_step = second.birth_step = step;
      first.start_binding = c.start_binding;
      first.end_binding = {BindingKind::Wall, w};
      second.start_binding = {BindingKind::Wall, w};
      second.end_binding = c.end_binding;
      std::vector<Slot> sf, ss;
      for (int t = 0; t <= j; ++t) {
        first.nodes.push_back(t == j ? pw : c.nodes[t]);
        sf.push_back({i, t});
      }
      for (int t = j; t < c.node_count(); ++t) {
        second.nodes.push_back(t == j ? pw : c.nodes[t]);
        ss.push_back({i, t});
      }
      const EditResult ed =
          apply_edit(net, {i}, {std::move(first), std::move(second)},
                     {sf, ss});
      net.boundary_points.push_back({EndpointRef{ed.added_indices[0], true}, w});
      net.boundary_points.push_back(
          {EndpointRef{ed.added_indices[1], false}, w});
    }
    return ch;
  }

  if (ev.kind == TopoKind::WallClose) {
    const int i = ev.curve_a;
    const Curve c = net.curves[i];
    if (c.node_count() - 1 < 3)
      throw DegenerateSplit("closing the curve leaves too few nodes");
    ch.block_sites = {c.nodes.front(), c.nodes.back()};
    ch.box = box_around({c.nodes.front(), c.nodes.back()}, pad);
    ch.log = describe("wall_close", ev);
    Curve cc;
    cc.closed = true;
    cc.front_region = c.front_region;
    cc.back_region = c.back_region;
    cc.birth_step = step;
    std::vector<Slot> sl;
    for (int t = 0; t + 1 < c.node_count(); ++t) {
      cc.nodes.push_back(c.nodes[t]);
      sl.push_back({i, t});
    }
    drop_boundary_records(net, {EndpointRef{i, false}, EndpointRef{i, true}});
    apply_edit(net, {i}, {std::move(cc)}, {sl});
    return ch;
  }

  if (ev.kind != TopoKind::WallMerge)
    throw InvariantViolation("unexpected event kind for a boundary handler");

  const int ia = ev.curve_a, ib = ev.curve_b;
  const Curve ca = net.curves[ia];
  const Curve cb = net.curves[ib];
  const bool a_end = ev.node_a == ca.node_count() - 1;
  const bool b_end = ev.node_b == cb.node_count() - 1;
  const bool same = ca.front_region == cb.front_region &&
                    ca.back_region == cb.back_region;
  const bool swapped = ca.front_region == cb.back_region &&
                       ca.back_region == cb.front_region;

  // Orient both curves so the joint sits between first's tail and second's
  // head; reversal flips a curve's region pair.
  int first = -1, second = -1;
  bool rev_first = false, rev_second = false;
  if (a_end && !b_end && same) {
    first = ia;
    second = ib;
  } else if (!a_end && b_end && same) {
    first = ib;
    second = ia;
  } else if (a_end && b_end && swapped) {
    first = ia;
    second = ib;
    rev_second = true;
  } else if (!a_end && !b_end && swapped) {
    first = ia;
    second = ib;
    rev_first = true;
  } else {
    throw OrientationMismatch("wall endpoints meet with incompatible regions");
  }

  const Curve& cf = net.curves[first];
  const Curve& cs = net.curves[second];
  std::vector<Slot> slots;
  auto push_slots = [&](int idx, const Curve& c, bool reversed) {
    if (!reversed)
      for (int t = 0; t < c.node_count(); ++t) slots.push_back({idx, t});
    else
      for (int t = c.node_count() - 1; t >= 0; --t) slots.push_back({idx, t});
  };
  push_slots(first, cf, rev_first);
  const size_t joint = slots.size();
  push_slots(second, cs, rev_second);
  Curve merged;
  merged.closed = false;
  merged.birth_step = step;
  merged.front_region = rev_first ? cf.back_region : cf.front_region;
  merged.back_region = rev_first ? cf.front_region : cf.back_region;
  merged.start_binding = rev_first ? cf.end_binding : cf.start_binding;
  merged.end_binding = rev_second ? cs.start_binding : cs.end_binding;
  for (const Slot& s : slots)
    merged.nodes.push_back(net.curves[s.first].nodes[s.second]);
  if ((merged.nodes[joint] - merged.nodes[joint - 1]).norm() < 1e-9) {
    merged.nodes.erase(merged.nodes.begin() + joint);
    slots.erase(slots.begin() + joint);
  }
  ch.block_sites = {ca.nodes[ev.node_a], cb.nodes[ev.node_b]};
  ch.box = box_around({ca.nodes[ev.node_a], cb.nodes[ev.node_b]}, pad);
  ch.log = describe("wall_merge", ev);
  drop_boundary_records(net, {EndpointRef{ia, a_end}, EndpointRef{ib, b_end}});
  apply_edit(net, {ia, ib}, {std::move(merged)}, {slots});
  return ch;
}

void reverse_curve(CurveNetwork& net, int curve) {
  Curve& c = net.curves[curve];
  std::reverse(c.nodes.begin(), c.nodes.end());
  std::swap(c.front_region, c.back_region);
  std::swap(c.start_binding, c.end_binding);
  for (Junction& jn : net.junctions)
    for (EndpointRef& e : jn.ends)
      if (e.curve == curve) e.at_end = !e.at_end;
  for (BoundaryPoint& bp : net.boundary_points)
    if (bp.end.curve == curve) bp.end.at_end = !bp.end.at_end;
}

// ---- short-curve deletion ---------------------------------------------------

namespace {

std::set<int> region_pair(const Curve& c) {
  return {c.front_region, c.back_region};
}

// The region filling the sector between the two surviving curves at a
// junction after the third curve is deleted; -1 when not unique.
int third_sector(const CurveNetwork& net, const EndpointRef& u,
                 const EndpointRef& v, int skip_a, int skip_b) {
  std::set<int> pu = region_pair(net.curves[u.curve]);
  std::set<int> pv = region_pair(net.curves[v.curve]);
  std::vector<int> common;
  std::set_intersection(pu.begin(), pu.end(), pv.begin(), pv.end(),
                        std::back_inserter(common));
  common.erase(std::remove(common.begin(), common.end(), skip_a),
               common.end());
  common.erase(std::remove(common.begin(), common.end(), skip_b),
               common.end());
  if (common.size() == 1) return common[0];
  return -1;
}

std::pair<EndpointRef, EndpointRef> other_ends(const Junction& jn,
                                               const EndpointRef& own) {
  std::vector<EndpointRef> rest;
  for (const EndpointRef& e : jn.ends)
    if (!(e == own)) rest.push_back(e);
  if (rest.size() != 2)
    throw InvariantViolation("junction does not reference the deleted curve");
  return {rest[0], rest[1]};
}

struct SpliceHalf {
  int curve;
  bool reversed;
};

// Orients u's curve tail-first and v's curve head-first; nullopt when the
// region pairs cannot line up.
std::optional<std::pair<SpliceHalf, SpliceHalf>> splice_orientation(
    const CurveNetwork& net, const EndpointRef& u, const EndpointRef& v) {
  const Curve& cu = net.curves[u.curve];
  const Curve& cv = net.curves[v.curve];
  const bool rev_u = !u.at_end;
  const bool rev_v = v.at_end;
  const int fu = rev_u ? cu.back_region : cu.front_region;
  const int bu = rev_u ? cu.front_region : cu.back_region;
  const int fv = rev_v ? cv.back_region : cv.front_region;
  const int bv = rev_v ? cv.front_region : cv.back_region;
  if (fu != fv || bu != bv) return std::nullopt;
  return std::make_pair(SpliceHalf{u.curve, rev_u}, SpliceHalf{v.curve, rev_v});
}

Curve build_splice(const CurveNetwork& net, const SpliceHalf& h1,
                   const SpliceHalf& h2, int birth,
                   std::vector<Slot>& slots) {
  const Curve& c1 = net.curves[h1.curve];
  const Curve& c2 = net.curves[h2.curve];
  Curve m;
  m.closed = false;
  m.birth_step = birth;
  m.front_region = h1.reversed ? c1.back_region : c1.front_region;
  m.back_region = h1.reversed ? c1.front_region : c1.back_region;
  m.start_binding = h1.reversed ? c1.end_binding : c1.start_binding;
  m.end_binding = h2.reversed ? c2.start_binding : c2.end_binding;
  auto push = [&](int idx, const Curve& c, bool reversed) {
    if (!reversed)
      for (int t = 0; t < c.node_count(); ++t) slots.push_back({idx, t});
    else
      for (int t = c.node_count() - 1; t >= 0; --t) slots.push_back({idx, t});
  };
  push(h1.curve, c1, h1.reversed);
  const size_t joint = slots.size();
  push(h2.curve, c2, h2.reversed);
  for (const Slot& s : slots)
    m.nodes.push_back(net.curves[s.first].nodes[s.second]);
  if ((m.nodes[joint] - m.nodes[joint - 1]).norm() < 1e-9) {
    m.nodes.erase(m.nodes.begin() + joint);
    slots.erase(slots.begin() + joint);
  }
  return m;
}

std::optional<TopoChange> resolve_quadruple(CurveNetwork& net, int d,
                                            int step,
                                            const TopologyParams& params) {
  const Curve& cd = net.curves[d];
  const int j1 = cd.start_binding.id, j2 = cd.end_binding.id;
  if (j1 == j2) return std::nullopt;  // degenerate loop; leave it alone
  const Vec2 pos1 = net.endpoint({d, false});
  const Vec2 pos2 = net.endpoint({d, true});
  auto [ea, eb] = other_ends(net.junctions[j1], {d, false});
  auto [ec, ed_ref] = other_ends(net.junctions[j2], {d, true});
  if (ea.curve == eb.curve || ec.curve == ed_ref.curve) return std::nullopt;
  const int lf = cd.front_region, rb = cd.back_region;
  const int top = third_sector(net, ea, eb, lf, rb);
  const int bot = third_sector(net, ec, ed_ref, lf, rb);
  const bool ambiguous = top < 0 || bot < 0;

  TopoChange ch;
  ch.block_sites = {pos1, pos2, 0.5 * (pos1 + pos2)};
  std::vector<Vec2> box_pts(cd.nodes);
  box_pts.push_back(pos1);
  box_pts.push_back(pos2);
  ch.box = box_around(box_pts, relabel_pad(params.cell_size));

  // Plans the continuation curve joining loose end u (at the first
  // junction) to v (at the second). Same curve on both sides closes it on
  // itself; otherwise the two curves are spliced end to end.
  auto plan_pair = [&](const EndpointRef& u, const EndpointRef& v,
                       std::optional<Curve>& out,
                       std::vector<Slot>& slots) -> bool {
    if (u.curve == v.curve) {
      const Curve& src = net.curves[u.curve];
      if (src.node_count() < 3 || u.at_end == v.at_end) return false;
      Curve cc;
      cc.closed = true;
      cc.front_region = src.front_region;
      cc.back_region = src.back_region;
      cc.birth_step = step;
      cc.nodes = src.nodes;
      for (int t = 0; t < src.node_count(); ++t) slots.push_back({u.curve, t});
      out = std::move(cc);
      return true;
    }
    const auto s = splice_orientation(net, u, v);
    if (!s) return false;
    out = build_splice(net, s->first, s->second, step, slots);
    return true;
  };

  // Two-curve continuation: splice the four loose ends into two curves.
  auto try_two_curve = [&]() -> bool {
    for (const auto& [c1, c2] :
         {std::pair{ec, ed_ref}, std::pair{ed_ref, ec}}) {
      std::optional<Curve> m1, m2;
      std::vector<Slot> sl1, sl2;
      if (!plan_pair(ea, c1, m1, sl1)) continue;
      if (!plan_pair(eb, c2, m2, sl2)) continue;
      drop_junction_records(net, {j1, j2});
      std::vector<Curve> added;
      added.push_back(std::move(*m1));
      added.push_back(std::move(*m2));
      apply_edit(net, {d, ea.curve, eb.curve, c1.curve, c2.curve},
                 std::move(added), {sl1, sl2});
      return true;
    }
    return false;
  };

  if (ambiguous || top == bot) {
    const bool done = try_two_curve();
    if (!done) return std::nullopt;
    ch.log = std::string("curve_delete quadruple two_curve curve ") +
             std::to_string(d) + (ambiguous ? " (ambiguous_continuation)" : "");
    return ch;
  }

  // All four sectors distinct: replace the deleted curve by a short curve
  // orthogonal to it, separating the two sectors it did not separate.
  Vec2 dir = pos2 - pos1;
  if (dir.norm() < 1e-12) dir = cd.nodes.back() - cd.nodes.front();
  if (dir.norm() < 1e-12) return std::nullopt;
  const Vec2 phat = perp(dir).normalized();
  const Vec2 mid = 0.5 * (pos1 + pos2);
  const double half = 0.5 * std::max(dir.norm(), 0.5 * params.cell_size);

  auto side_region = [&](const EndpointRef& e) {
    const std::set<int> pr = region_pair(net.curves[e.curve]);
    const bool has_l = pr.count(lf), has_r = pr.count(rb);
    if (has_l == has_r) return -1;
    return has_l ? lf : rb;
  };
  const int side_a = side_region(ea), side_b = side_region(eb);
  const int side_c = side_region(ec), side_d2 = side_region(ed_ref);
  if (side_a < 0 || side_b < 0 || side_c < 0 || side_d2 < 0 ||
      side_a == side_b || side_c == side_d2)
    return std::nullopt;
  const EndpointRef gl_top = side_a == lf ? ea : eb;
  const EndpointRef gr_top = side_a == lf ? eb : ea;
  const EndpointRef gl_bot = side_c == lf ? ec : ed_ref;
  const EndpointRef gr_bot = side_c == lf ? ed_ref : ec;

  auto adj_node = [&](const EndpointRef& e) {
    const Curve& c = net.curves[e.curve];
    return e.at_end ? c.nodes[c.node_count() - 2] : c.nodes[1];
  };
  const Vec2 gl_mean = 0.5 * (adj_node(gl_top) + adj_node(gl_bot));
  const Vec2 gr_mean = 0.5 * (adj_node(gr_top) + adj_node(gr_bot));
  const double dl = (gl_mean - mid).dot(phat);
  const double dr = (gr_mean - mid).dot(phat);
  double side_sign;
  if ((dl > 0) != (dr > 0))
    side_sign = dl > 0 ? 1.0 : -1.0;
  else
    side_sign = std::abs(dl) >= std::abs(dr) ? (dl > 0 ? 1.0 : -1.0)
                                             : (dr > 0 ? -1.0 : 1.0);
  const Vec2 q_left = mid + side_sign * half * phat;
  const Vec2 q_right = mid - side_sign * half * phat;

  Vec2 nu = perp(q_right - q_left).normalized();
  const double toward_top = nu.dot(pos1 - mid);
  if (toward_top == 0.0) return std::nullopt;
  Curve bridge;
  bridge.closed = false;
  bridge.nodes = {q_left, q_right};
  bridge.front_region = toward_top > 0 ? top : bot;
  bridge.back_region = toward_top > 0 ? bot : top;
  bridge.birth_step = step;

  drop_junction_records(net, {j1, j2});
  const EditResult edres =
      apply_edit(net, {d}, {std::move(bridge)}, {std::vector<Slot>{}});
  auto remap = [&](EndpointRef e) {
    e.curve = edres.old_to_new[e.curve];
    return e;
  };
  const EndpointRef rl_top = remap(gl_top), rl_bot = remap(gl_bot);
  const EndpointRef rr_top = remap(gr_top), rr_bot = remap(gr_bot);
  const int bridge_idx = edres.added_indices[0];
  net.endpoint(rl_top) = q_left;
  net.endpoint(rl_bot) = q_left;
  net.endpoint(rr_top) = q_right;
  net.endpoint(rr_bot) = q_right;
  const int jn_l = static_cast<int>(net.junctions.size());
  const int jn_r = jn_l + 1;
  net.junctions.push_back({rl_top, rl_bot, EndpointRef{bridge_idx, false}});
  net.junctions.push_back({rr_top, rr_bot, EndpointRef{bridge_idx, true}});
  set_binding(net, rl_top, {BindingKind::Junction, jn_l});
  set_binding(net, rl_bot, {BindingKind::Junction, jn_l});
  set_binding(net, rr_top, {BindingKind::Junction, jn_r});
  set_binding(net, rr_bot, {BindingKind::Junction, jn_r});
  net.curves[bridge_idx].start_binding = {BindingKind::Junction, jn_l};
  net.curves[bridge_idx].end_binding = {BindingKind::Junction, jn_r};
  ch.block_sites.push_back(q_left);
  ch.block_sites.push_back(q_right);
  ch.log = std::string("curve_delete quadruple swap curve ") +
           std::to_string(d);
  return ch;
}

std::optional<TopoChange> delete_one(CurveNetwork& net, int i, int step,
                                     const TopologyParams& params) {
  const Curve& c = net.curves[i];
  TopoChange ch;
  std::vector<Vec2> pts(c.nodes);
  ch.box = box_around(pts, relabel_pad(params.cell_size));
  for (const Vec2& p : c.nodes) ch.block_sites.push_back(p);

  if (c.closed) {
    ch.log = "curve_delete closed curve " + std::to_string(i);
    apply_edit(net, {i}, {}, {});
    return ch;
  }
  const BindingKind ks = c.start_binding.kind;
  const BindingKind ke = c.end_binding.kind;
  if (ks == BindingKind::Wall && ke == BindingKind::Wall) {
    ch.log = "curve_delete wall_wall curve " + std::to_string(i);
    drop_boundary_records(net, {EndpointRef{i, false}, EndpointRef{i, true}});
    apply_edit(net, {i}, {}, {});
    return ch;
  }
  if (ks == BindingKind::Junction && ke == BindingKind::Junction)
    return resolve_quadruple(net, i, step, params);

  // Junction-wall: delete the curve and the junction; the two curves that
  // shared the junction now end on the wall.
  const bool junction_at_start = ks == BindingKind::Junction;
  const int jn = junction_at_start ? c.start_binding.id : c.end_binding.id;
  const int wall = junction_at_start ? c.end_binding.id : c.start_binding.id;
  auto [e1, e2] =
      other_ends(net.junctions[jn], EndpointRef{i, !junction_at_start});
  if (e1.curve == i || e2.curve == i) return std::nullopt;
  ch.log = "curve_delete junction_wall curve " + std::to_string(i);
  drop_boundary_records(net, {EndpointRef{i, junction_at_start}});
  drop_junction_records(net, {jn});
  net.endpoint(e1) = net.project_to_wall(net.endpoint(e1), wall);
  net.endpoint(e2) = net.project_to_wall(net.endpoint(e2), wall);
  set_binding(net, e1, {BindingKind::Wall, wall});
  set_binding(net, e2, {BindingKind::Wall, wall});
  const EditResult ed = apply_edit(net, {i}, {}, {});
  auto remap = [&](EndpointRef e) {
    e.curve = ed.old_to_new[e.curve];
    return e;
  };
  net.boundary_points.push_back({remap(e1), wall});
  net.boundary_points.push_back({remap(e2), wall});
  return ch;
}

}  // namespace

DeletionOutcome delete_short_curves(CurveNetwork& net,
                                    const TopologyParams& params, int step) {
  DeletionOutcome out;
  const double l_del = params.l_del_factor * params.cell_size;
  // Newborn curves are shielded from the length rule so fresh bridges do
  // not flap, but the shield must not keep degenerate geometry alive: a
  // tiny loop pinched off a crumpling curve collapses onto a single point
  // within a step or two, and a zero-length edge is fatal downstream. Any
  // curve far below the deletion length goes at once; both bridge
  // constructions are born at half a cell or longer, so they keep the
  // shield.
  const double l_collapse = 0.25 * l_del;
  int guard = static_cast<int>(net.curves.size()) + 8;
  bool progress = true;
  while (progress && guard-- > 0) {
    progress = false;
    for (int i = 0; i < static_cast<int>(net.curves.size()); ++i) {
      const Curve& c = net.curves[i];
      const double len = curve_length(c);
      if (len >= l_collapse && step - c.birth_step < params.block_duration)
        continue;
      if (len >= l_del) continue;
      std::optional<TopoChange> ch = delete_one(net, i, step, params);
      if (ch) {
        out.changes.push_back(std::move(*ch));
        progress = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace curveseg
