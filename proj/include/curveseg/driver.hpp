#pragma once

#include <string>
#include <utility>
#include <vector>

#include "curveseg/assembly.hpp"
#include "curveseg/curve.hpp"
#include "curveseg/forcing.hpp"
#include "curveseg/image.hpp"
#include "curveseg/regions.hpp"
#include "curveseg/topology.hpp"

namespace curveseg {

// Piecewise-constant lower bound for the length weight, keyed by the step
// at which each value takes effect.
struct SigmaSchedule {
  std::vector<std::pair<int, double>> entries{{0, 0.05}};

  double at(int step) const;
};

struct DriverParams {
  ImageModel model;
  double sigma_factor = 0.25;  // sigma = factor * E_ext / |Gamma|
  SigmaSchedule sigma_min;
  double tau = 0.1;
  int steps = 100;
  double band = 2.0;          // label update band; also the move limit
  int sigma_cadence = 10;     // steps between sigma updates
  int substeps = 4;           // replayed sub-moves when an event fires
  int max_tau_halvings = 8;
  double refine_factor = 2.0;   // refine a curve whose mean edge > f * a
  double coarsen_factor = 0.5;  // coarsen below f * a
  double denoise_lambda = 0.0;  // final smoothing; skipped when <= 0
  double solve_tol = 1e-10;
  TopologyParams topo;  // cell_size is recomputed every step
};

struct TraceRow {
  int step = 0;
  double total = 0.0;
  double length = 0.0;
  double external = 0.0;
  double sigma = 0.0;
  int nodes = 0;
  int events = 0;           // topological events executed this step
  bool sigma_changed = false;
};

// Runs the curve evolution: per step the labels are refreshed, the length
// weight adapted on its cadence, the semi-implicit move solved (halving
// tau until the displacement stays inside the label band), topological
// events detected and executed on a rewound, sub-stepped replay, short
// curves deleted, and the curves re-meshed against the average edge
// length.
struct Driver {
  Image img;
  CurveNetwork net;
  DriverParams params;

  LabelMap labels;
  RegionStats stats;
  std::vector<RegionCoefficients> coeffs;
  double sigma = 0.0;
  double cell = 1.0;  // average edge length, the grid cell size
  int step_count = 0;
  std::vector<BlockedSite> blocked;
  std::vector<TraceRow> trace;
  std::vector<std::string> event_log;

  Driver(Image image, CurveNetwork network, DriverParams p);

  void step();
  void run();  // params.steps steps

  // Band-limited label refresh plus coefficient update.
  void sync_labels();
  EnergyBreakdown energy() const;

  // Writes labels, reconstruction, overlay, contours, trace, event log and
  // (when configured) the denoised image into the directory.
  void save_outputs(const std::string& dir);

 private:
  StepResult try_move(double tau_eff) const;
  void adapt_sigma();
  bool execute_first(const std::vector<TopoEvent>& events, TraceRow& row);
  void absorb_change(const TopoChange& ch);
  void remesh();
};

// Piecewise-constant image built from the region descriptors.
Image reconstruction_image(const Image& img, const LabelMap& labels,
                           const std::vector<RegionCoefficients>& coeffs,
                           ColorModel model);

// RGB copy of the image with the curves drawn in red.
Image overlay_image(const Image& img, const CurveNetwork& net);

void write_contours_json(const std::string& path, const CurveNetwork& net);
void write_trace_csv(const std::string& path,
                     const std::vector<TraceRow>& rows);

}  // namespace curveseg
