#include "curveseg/driver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "curveseg/denoise.hpp"
#include "curveseg/errors.hpp"
#include "curveseg/geometry.hpp"

namespace curveseg {

double SigmaSchedule::at(int step) const {
  if (entries.empty())
    throw InvariantViolation("the sigma floor schedule is empty");
  double v = entries.front().second;
  for (const auto& [from, value] : entries)
    if (from <= step) v = value;
  return v;
}

namespace {

int region_count_of(const CurveNetwork& net, const LabelMap& labels) {
  int32_t top = 1;
  for (const Curve& c : net.curves)
    top = std::max({top, c.front_region, c.back_region});
  for (int32_t v : labels.labels) top = std::max(top, v);
  return top;
}

}  // namespace

Driver::Driver(Image image, CurveNetwork network, DriverParams p)
    : img(std::move(image)), net(std::move(network)), params(std::move(p)) {
  net.width = img.width;
  net.height = img.height;
  net.validate();
  const DiscreteGeometry geom = build_geometry(net);
  labels = initialize_labels(net, geom, img.width, img.height);
  stats = build_stats(labels, img, params.model.model,
                      region_count_of(net, labels));
  coeffs = region_coefficients(stats);
  cell = average_edge_length(net);
  sigma = params.sigma_min.at(0);
}

void Driver::sync_labels() {
  const DiscreteGeometry geom = build_geometry(net);
  const UpdateReport rep = update_labels_near_curves(net, geom, labels, stats,
                                                     img, params.band);
  coeffs = region_coefficients(stats);
  for (int r : rep.empty_regions)
    event_log.push_back(std::to_string(step_count) + " empty_region " +
                        std::to_string(r));
}

EnergyBreakdown Driver::energy() const {
  return compute_energy(net, labels, coeffs, img, params.model, sigma);
}

void Driver::adapt_sigma() {
  const EnergyBreakdown e =
      compute_energy(net, labels, coeffs, img, params.model, 0.0);
  const double len = net.total_length();
  double value = params.sigma_min.at(step_count);
  if (len > 0.0)
    value = std::max(params.sigma_factor * e.external / len, value);
  sigma = value;
}

StepResult Driver::try_move(double tau_eff) const {
  const DiscreteGeometry geom = build_geometry(net);
  std::vector<std::vector<double>> forces(net.curves.size());
  auto valid = [&](int r) {
    return r >= 1 && r < static_cast<int>(coeffs.size()) && coeffs[r].valid;
  };
  for (size_t i = 0; i < net.curves.size(); ++i) {
    const Curve& c = net.curves[i];
    forces[i].resize(c.node_count(), 0.0);
    // A curve whose region just emptied keeps zero forcing; it shrinks by
    // curvature until the deletion pass removes it.
    if (!valid(c.front_region) || !valid(c.back_region)) continue;
    for (int j = 0; j < c.node_count(); ++j) {
      const Feature f = sample_at(img, params.model, c.nodes[j]);
      forces[i][j] = forcing_at(params.model, f, coeffs[c.front_region],
                                coeffs[c.back_region]);
    }
  }
  const StepSystem sys = assemble(net, geom, forces, sigma, tau_eff);
  return solve_step(sys, net, params.solve_tol);
}

bool Driver::execute_first(const std::vector<TopoEvent>& events,
                           TraceRow& row) {
  for (const TopoEvent& ev : events) {
    try {
      TopoChange ch;
      switch (ev.kind) {
        case TopoKind::Split:
          ch = apply_split(net, ev, step_count);
          break;
        case TopoKind::Merge:
          ch = apply_merge(net, ev, step_count);
          break;
        case TopoKind::TripleCreate:
          ch = create_triple_junctions(net, ev, step_count);
          break;
        default:
          ch = handle_boundary_hit(net, ev, step_count);
          break;
      }
      absorb_change(ch);
      ++row.events;
      return true;
    } catch (const DegenerateSplit&) {
    } catch (const AmbiguousRegions&) {
    } catch (const OrientationMismatch&) {
    }
  }
  return false;
}

void Driver::absorb_change(const TopoChange& ch) {
  for (const Vec2& p : ch.block_sites)
    blocked.push_back({p, step_count + params.topo.block_duration});
  const DiscreteGeometry geom = build_geometry(net);
  relabel_box(net, geom, labels, stats, img, ch.box);
  coeffs = region_coefficients(stats);
  event_log.push_back(std::to_string(step_count) + " " + ch.log);
}

void Driver::remesh() {
  for (Curve& c : net.curves) {
    const double mean = curve_length(c) / std::max(1, c.edge_count());
    if (mean > params.refine_factor * cell) {
      c = refine_global(c);
    } else if (mean < params.coarsen_factor * cell) {
      try {
        c = coarsen_global(c);
      } catch (const TooFewNodes&) {
      }
    }
  }
  cell = average_edge_length(net);
}

void Driver::step() {
  sync_labels();

  bool sigma_changed = false;
  if (step_count % params.sigma_cadence == 0) {
    const double before = sigma;
    adapt_sigma();
    sigma_changed = sigma != before;
  }

  const EnergyBreakdown e = energy();
  TraceRow row;
  row.step = step_count;
  row.total = e.total;
  row.length = e.length;
  row.external = e.external;
  row.sigma = sigma;
  row.nodes = net.total_nodes();
  row.sigma_changed = sigma_changed;

  auto move_with_halving = [&](double tau0) {
    double t = tau0;
    StepResult sr = try_move(t);
    for (int h = 0; sr.max_displacement >= params.band &&
                    h < params.max_tau_halvings;
         ++h) {
      t *= 0.5;
      std::ostringstream os;
      os << step_count << " tau_halved " << t;
      event_log.push_back(os.str());
      sr = try_move(t);
    }
    if (sr.max_displacement >= params.band)
      throw SolveFailure("node displacement " +
                         std::to_string(sr.max_displacement) +
                         " still exceeds the label band after halving tau");
    return std::make_pair(sr, t);
  };

  const CurveNetwork snapshot = net;
  const auto [sr, tau_eff] = move_with_halving(params.tau);
  apply_step(net, sr.delta);

  TopologyParams topo = params.topo;
  topo.cell_size = cell;
  std::vector<TopoEvent> events =
      detect_events(net, topo, blocked, step_count);
  if (!events.empty()) {
    // Replay the move in substeps so each event is executed close to the
    // configuration that produced it.
    net = snapshot;
    for (int s = 0; s < params.substeps; ++s) {
      const auto [sub, sub_tau] =
          move_with_halving(tau_eff / params.substeps);
      apply_step(net, sub.delta);
      sync_labels();
      std::vector<TopoEvent> evs =
          detect_events(net, topo, blocked, step_count);
      for (int guard = 0; !evs.empty() && guard < 64; ++guard) {
        if (!execute_first(evs, row)) break;
        evs = detect_events(net, topo, blocked, step_count);
      }
      // A loop pinched off above may collapse onto a point in the very
      // next substep; purge such curves before geometry is rebuilt.
      const DeletionOutcome sub_del =
          delete_short_curves(net, topo, step_count);
      for (const TopoChange& ch : sub_del.changes) {
        absorb_change(ch);
        ++row.events;
      }
    }
  }

  const DeletionOutcome del = delete_short_curves(net, topo, step_count);
  for (const TopoChange& ch : del.changes) {
    absorb_change(ch);
    ++row.events;
  }

  remesh();
  std::erase_if(blocked, [&](const BlockedSite& b) {
    return b.until_step <= step_count;
  });
  net.validate();
  trace.push_back(row);
  ++step_count;
}

void Driver::run() {
  for (int s = 0; s < params.steps; ++s) step();
}

Image reconstruction_image(const Image& img, const LabelMap& labels,
                           const std::vector<RegionCoefficients>& coeffs,
                           ColorModel model) {
  const int channels = model == ColorModel::Scalar ? 1 : 3;
  Image out(img.width, img.height, channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const int32_t r = labels.at(x, y);
      if (r < 1 || r >= static_cast<int32_t>(coeffs.size()) ||
          !coeffs[r].valid)
        continue;
      const Feature& c = coeffs[r].c;
      switch (model) {
        case ColorModel::Scalar:
          out.value(x, y) = c[0];
          break;
        case ColorModel::Rgb:
          for (int t = 0; t < 3; ++t) out.value(x, y, t) = c[t];
          break;
        case ColorModel::ChromaBright:
          for (int t = 0; t < 3; ++t) out.value(x, y, t) = c[t] * c[3];
          break;
        case ColorModel::Hsv: {
          const Vec3 rgb = hsv_to_rgb(Vec2(c[0], c[1]).normalized(), c[2],
                                      c[3]);
          for (int t = 0; t < 3; ++t) out.value(x, y, t) = rgb[t];
          break;
        }
      }
    }
  out.quantize8();
  return out;
}

Image overlay_image(const Image& img, const CurveNetwork& net) {
  Image out(img.width, img.height, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const Vec3 rgb = img.rgb(x, y);
      for (int t = 0; t < 3; ++t) out.value(x, y, t) = rgb[t];
    }
  auto paint = [&](const Vec2& p) {
    const int x = std::clamp(static_cast<int>(std::floor(p.x())), 0,
                             img.width - 1);
    const int y = std::clamp(static_cast<int>(std::floor(p.y())), 0,
                             img.height - 1);
    out.value(x, y, 0) = 1.0;
    out.value(x, y, 1) = 0.0;
    out.value(x, y, 2) = 0.0;
  };
  for (const Curve& c : net.curves)
    for (int e = 0; e < c.edge_count(); ++e) {
      const Vec2& a = c.nodes[e];
      const Vec2& b = c.node_wrapped(e + 1);
      const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() /
                                                           0.25)));
      for (int t = 0; t <= n; ++t)
        paint(a + (static_cast<double>(t) / n) * (b - a));
    }
  out.quantize8();
  return out;
}

void write_contours_json(const std::string& path, const CurveNetwork& net) {
  nlohmann::json doc;
  doc["curves"] = nlohmann::json::array();
  for (const Curve& c : net.curves) {
    nlohmann::json jc;
    jc["closed"] = c.closed;
    jc["kplus"] = c.front_region;
    jc["kminus"] = c.back_region;
    nlohmann::json nodes = nlohmann::json::array();
    for (const Vec2& p : c.nodes)
      nodes.push_back(nlohmann::json::array({p.x(), p.y()}));
    jc["nodes"] = std::move(nodes);
    doc["curves"].push_back(std::move(jc));
  }
  doc["junctions"] = nlohmann::json::array();
  for (const Junction& jn : net.junctions) {
    nlohmann::json ends = nlohmann::json::array();
    for (const EndpointRef& e : jn.ends)
      ends.push_back(nlohmann::json::array({e.curve, e.at_end ? 1 : 0}));
    doc["junctions"].push_back(std::move(ends));
  }
  doc["boundary_points"] = nlohmann::json::array();
  for (const BoundaryPoint& bp : net.boundary_points)
    doc["boundary_points"].push_back(nlohmann::json::array(
        {bp.end.curve, bp.end.at_end ? 1 : 0, bp.wall}));
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(2) << "\n";
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "step,total,length,external,sigma,nodes,events\n";
  out << std::setprecision(15);
  for (const TraceRow& r : rows)
    out << r.step << ',' << r.total << ',' << r.length << ',' << r.external
        << ',' << r.sigma << ',' << r.nodes << ',' << r.events << '\n';
}

void Driver::save_outputs(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  sync_labels();
  save_labels_pgm(dir + "/labels.pgm", labels);
  const Image rec =
      reconstruction_image(img, labels, coeffs, params.model.model);
  save_pnm(dir + (rec.channels == 1 ? "/reconstruction.pgm"
                                    : "/reconstruction.ppm"),
           rec);
  save_pnm(dir + "/overlay.ppm", overlay_image(img, net));
  write_contours_json(dir + "/contours.json", net);
  write_trace_csv(dir + "/trace.csv", trace);
  {
    std::ofstream out(dir + "/events.log");
    if (!out) throw IoError("cannot write " + dir + "/events.log");
    for (const std::string& line : event_log) out << line << '\n';
  }
  if (params.denoise_lambda > 0.0) {
    const Image den = denoise_regions(img, labels, params.denoise_lambda);
    save_pnm(dir + (den.channels == 1 ? "/denoised.pgm" : "/denoised.ppm"),
             den);
  }
}

}  // namespace curveseg
