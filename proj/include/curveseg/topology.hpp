#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "curveseg/curve.hpp"
#include "curveseg/regions.hpp"
#include "curveseg/vec.hpp"

namespace curveseg {

struct TopologyParams {
  double cell_size = 1.0;        // background grid spacing
  int neighbor_scan = 5;         // nodes scanned on each side of a collision
  int block_duration = 10;       // steps a cell stays blocked after an event
  double l_del_factor = 2.0;     // delete curves shorter than factor * cell
  int exempt_graph_distance = 2; // same-curve / same-junction neighborhood
};

// A cell blocked for new topological events, stored by position so it
// survives grid rebuilds with a different cell size.
struct BlockedSite {
  Vec2 pos = Vec2::Zero();
  int until_step = 0;
};

enum class TopoKind { Split, Merge, TripleCreate, BoundaryHit, WallClose,
                      WallMerge };

const char* topo_kind_name(TopoKind k);

struct TopoEvent {
  TopoKind kind = TopoKind::Split;
  int curve_a = -1, node_a = -1;
  int curve_b = -1, node_b = -1;  // unused for BoundaryHit
  int wall = -1;                  // wall kinds only
  double distance = 0.0;
};

// Uniform cell partition of the image rectangle used for O(N) collision
// detection between curve nodes.
struct BackgroundGrid {
  double cell = 1.0;
  int nx = 1, ny = 1;

  BackgroundGrid(double width, double height, double cell_size);

  int64_t key(const Vec2& p) const;
  bool near_wall(const Vec2& p, int wall) const;  // cell touches that wall
};

// Result of executing one topological event: where labels must be rebuilt
// and which sites to block against immediate re-detection.
struct TopoChange {
  PixelBox box{0, 0, 0, 0};
  std::vector<Vec2> block_sites;
  std::string log;
};

std::vector<TopoEvent> detect_events(const CurveNetwork& net,
                                     const TopologyParams& params,
                                     const std::vector<BlockedSite>& blocked,
                                     int step);

TopoChange apply_split(CurveNetwork& net, const TopoEvent& ev, int step);
TopoChange apply_merge(CurveNetwork& net, const TopoEvent& ev, int step);
TopoChange create_triple_junctions(CurveNetwork& net, const TopoEvent& ev,
                                   int step);
// Handles BoundaryHit (project + duplicate) as well as the two reverse
// transitions WallClose and WallMerge.
TopoChange handle_boundary_hit(CurveNetwork& net, const TopoEvent& ev,
                               int step);

struct DeletionOutcome {
  std::vector<TopoChange> changes;
  bool any() const { return !changes.empty(); }
};

// Removes every curve shorter than l_del (skipping curves younger than the
// block duration), resolving junction-junction deletions through the
// quadruple-junction continuations.
DeletionOutcome delete_short_curves(CurveNetwork& net,
                                    const TopologyParams& params, int step);

// Flips a curve's node order, swapping front/back regions and endpoint
// bindings, and updates junction and boundary references accordingly.
void reverse_curve(CurveNetwork& net, int curve);

// Average edge length over the network (the default grid cell size).
double average_edge_length(const CurveNetwork& net);

}  // namespace curveseg
