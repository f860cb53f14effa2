#include "curveseg/regions.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include "curveseg/errors.hpp"

namespace curveseg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NearestHit {
  double d2 = kInf;        // squared Euclidean distance to the best segment
  double cheb = kInf;      // best Chebyshev distance over all segments
  int curve = -1;
  int edge = -1;
  Vec2 foot = Vec2::Zero();
};

// Closest point on segment [a,b].
Vec2 segment_foot(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 <= 0.0) return a;
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return a + t * d;
}

// Exact Chebyshev (max-norm) distance from p to segment [a,b]. The
// objective max(|u(t)|,|v(t)|) with linear u,v attains its minimum at an
// interval endpoint or where |u| and |v| intersect.
double segment_cheb(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double ux = p.x() - a.x(), dx = b.x() - a.x();
  const double uy = p.y() - a.y(), dy = b.y() - a.y();
  auto value = [&](double t) {
    return std::max(std::abs(ux - t * dx), std::abs(uy - t * dy));
  };
  double best = std::min(value(0.0), value(1.0));
  auto consider = [&](double num, double den) {
    if (den == 0.0) return;
    const double t = num / den;
    if (t > 0.0 && t < 1.0) best = std::min(best, value(t));
  };
  consider(ux, dx);            // u = 0
  consider(uy, dy);            // v = 0
  consider(ux - uy, dx - dy);  // u = v
  consider(ux + uy, dx + dy);  // u = -v
  return best;
}

// Side of a hit: front when (p - foot) . nu >= 0, where nu is the edge
// normal, or the average of the two adjacent edge normals when the foot
// sits on a shared vertex.
bool hit_is_front(const Vec2& p, const Curve& c, const CurveGeometry& g,
                  int edge, const Vec2& foot) {
  Vec2 nu = g.edge_normal[edge];
  const double vertex_tol = 1e-9;
  const int ne = c.edge_count();
  const Vec2& a = c.nodes[edge];
  const Vec2& b = c.node_wrapped(edge + 1);
  if ((foot - a).squaredNorm() <= vertex_tol * vertex_tol) {
    const int prev = c.closed ? (edge - 1 + ne) % ne : edge - 1;
    if (prev >= 0) nu = (g.edge_normal[prev] + g.edge_normal[edge]).eval();
  } else if ((foot - b).squaredNorm() <= vertex_tol * vertex_tol) {
    const int next = c.closed ? (edge + 1) % ne : edge + 1;
    if (next < ne) nu = (g.edge_normal[edge] + g.edge_normal[next]).eval();
  }
  return (p - foot).dot(nu) >= 0.0;
}

int hit_label(const Vec2& p, const CurveNetwork& net,
              const DiscreteGeometry& geom, const NearestHit& h) {
  const Curve& c = net.curves[h.curve];
  return hit_is_front(p, c, geom.per_curve[h.curve], h.edge, h.foot)
             ? c.front_region
             : c.back_region;
}

// Visits every pixel in the dilated bounding box of each edge and records
// the best Euclidean and Chebyshev hits per pixel. `radius` must be at
// least sqrt(2) times the Chebyshev band of interest so that the true
// Euclidean winner is always among the edges that scanned a pixel.
template <class Sink>
void scan_edges(const CurveNetwork& net, double radius, int width, int height,
                Sink&& sink) {
  for (size_t i = 0; i < net.curves.size(); ++i) {
    const Curve& c = net.curves[i];
    const int ne = c.edge_count();
    for (int e = 0; e < ne; ++e) {
      const Vec2& a = c.nodes[e];
      const Vec2& b = c.node_wrapped(e + 1);
      const int x0 = std::max(0, static_cast<int>(std::floor(
                                     std::min(a.x(), b.x()) - radius - 0.5)));
      const int x1 = std::min(width - 1,
                              static_cast<int>(std::ceil(
                                  std::max(a.x(), b.x()) + radius - 0.5)));
      const int y0 = std::max(0, static_cast<int>(std::floor(
                                     std::min(a.y(), b.y()) - radius - 0.5)));
      const int y1 = std::min(height - 1,
                              static_cast<int>(std::ceil(
                                  std::max(a.y(), b.y()) + radius - 0.5)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
          sink(x, y, static_cast<int>(i), e, a, b);
    }
  }
}

void update_hit(NearestHit& h, const Vec2& p, int curve, int edge,
                const Vec2& a, const Vec2& b) {
  const Vec2 foot = segment_foot(p, a, b);
  const double d2 = (p - foot).squaredNorm();
  if (d2 < h.d2) {
    h.d2 = d2;
    h.curve = curve;
    h.edge = edge;
    h.foot = foot;
  }
  h.cheb = std::min(h.cheb, segment_cheb(p, a, b));
}

}  // namespace

void RegionStats::add_pixel(const Image& img, int x, int y, int k) {
  RegionAccum& a = acc[k];
  a.n += 1;
  if (integer_mode) {
    for (int c = 0; c < img.channels; ++c) a.isum[c] += img.raw_value(x, y, c);
  } else {
    const Feature f = pixel_feature(img, model, x, y);
    for (int c = 0; c < feature_arity(model); ++c) a.dsum[c] += f[c];
  }
}

void RegionStats::remove_pixel(const Image& img, int x, int y, int k) {
  RegionAccum& a = acc[k];
  a.n -= 1;
  if (integer_mode) {
    for (int c = 0; c < img.channels; ++c) a.isum[c] -= img.raw_value(x, y, c);
  } else {
    const Feature f = pixel_feature(img, model, x, y);
    for (int c = 0; c < feature_arity(model); ++c) a.dsum[c] -= f[c];
  }
}

RegionStats build_stats(const LabelMap& labels, const Image& img,
                        ColorModel model, int region_count) {
  RegionStats st;
  st.model = model;
  st.integer_mode =
      img.has_raw() &&
      (model == ColorModel::Scalar || model == ColorModel::Rgb);
  st.region_count = region_count;
  st.acc.assign(region_count + 1, RegionAccum{});
  for (int y = 0; y < labels.height; ++y)
    for (int x = 0; x < labels.width; ++x) st.add_pixel(img, x, y, labels.at(x, y));
  return st;
}

std::vector<RegionCoefficients> region_coefficients(const RegionStats& st) {
  std::vector<RegionCoefficients> out(st.region_count + 1);
  for (int k = 1; k <= st.region_count; ++k) {
    const RegionAccum& a = st.acc[k];
    if (a.n <= 0) continue;
    RegionCoefficients& rc = out[k];
    const double n = static_cast<double>(a.n);
    switch (st.model) {
      case ColorModel::Scalar:
        rc.c[0] = st.integer_mode ? a.isum[0] / (255.0 * n) : a.dsum[0] / n;
        break;
      case ColorModel::Rgb:
        for (int c = 0; c < 3; ++c)
          rc.c[c] = st.integer_mode ? a.isum[c] / (255.0 * n) : a.dsum[c] / n;
        break;
      case ColorModel::ChromaBright: {
        const Vec3 v =
            constrained_mean(Vec3(a.dsum[0], a.dsum[1], a.dsum[2]));
        rc.c = {v[0], v[1], v[2], a.dsum[3] / n};
        break;
      }
      case ColorModel::Hsv: {
        const Vec2 h = constrained_mean(Vec2(a.dsum[0], a.dsum[1]));
        rc.c = {h[0], h[1], a.dsum[2] / n, a.dsum[3] / n};
        break;
      }
    }
    rc.valid = true;
  }
  return out;
}

SideResult side_of_curve(const Vec2& p, const Curve& c,
                         const CurveGeometry& g) {
  NearestHit h;
  const int ne = c.edge_count();
  for (int e = 0; e < ne; ++e)
    update_hit(h, p, 0, e, c.nodes[e], c.node_wrapped(e + 1));
  SideResult r;
  r.distance = std::sqrt(h.d2);
  r.edge = h.edge;
  r.front = hit_is_front(p, c, g, h.edge, h.foot);
  return r;
}

namespace {

// Majority probe on both sides of every curve; a curve whose declared
// regions disagree with the labels it produced indicates inconsistent
// curve orientations in the input network.
void check_orientation(const CurveNetwork& net, const DiscreteGeometry& geom,
                       const LabelMap& labels) {
  for (size_t i = 0; i < net.curves.size(); ++i) {
    const Curve& c = net.curves[i];
    const CurveGeometry& g = geom.per_curve[i];
    const int ne = c.edge_count();
    if (ne < 4) continue;
    // Skip edges near junction endpoints: a third region legitimately
    // crowds the probes there.
    int e_lo = 0, e_hi = ne;
    if (!c.closed) {
      if (c.start_binding.kind == BindingKind::Junction) e_lo = 2;
      if (c.end_binding.kind == BindingKind::Junction) e_hi = ne - 2;
    }
    int front_ok = 0, front_total = 0, back_ok = 0, back_total = 0;
    for (int e = e_lo; e < e_hi; ++e) {
      const Vec2 mid = 0.5 * (c.nodes[e] + c.node_wrapped(e + 1));
      const Vec2 nu = g.edge_normal[e];
      for (int s : {+1, -1}) {
        const Vec2 probe = mid + 0.75 * s * nu;
        const int x = static_cast<int>(std::floor(probe.x()));
        const int y = static_cast<int>(std::floor(probe.y()));
        if (x < 0 || y < 0 || x >= labels.width || y >= labels.height)
          continue;
        const int lbl = labels.at(x, y);
        if (s > 0) {
          front_total++;
          if (lbl == c.front_region) front_ok++;
        } else {
          back_total++;
          if (lbl == c.back_region) back_ok++;
        }
      }
    }
    if ((front_total >= 4 && front_ok * 2 < front_total) ||
        (back_total >= 4 && back_ok * 2 < back_total))
      throw InconsistentOrientation(
          "curve " + std::to_string(i) +
          " labels disagree with its declared regions");
  }
}

}  // namespace

LabelMap initialize_labels(const CurveNetwork& net,
                           const DiscreteGeometry& geom, int width,
                           int height) {
  LabelMap lm(width, height, 0);
  if (net.curves.empty()) {
    std::fill(lm.labels.begin(), lm.labels.end(), 1);
    return lm;
  }

  const double band = 2.0;
  std::vector<NearestHit> hits(static_cast<size_t>(width) * height);
  scan_edges(net, band * std::sqrt(2.0), width, height,
             [&](int x, int y, int curve, int edge, const Vec2& a,
                 const Vec2& b) {
               const Vec2 p(x + 0.5, y + 0.5);
               update_hit(hits[static_cast<size_t>(y) * width + x], p, curve,
                          edge, a, b);
             });

  // Exact classification inside the band, breadth-first spill outside it.
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const NearestHit& h = hits[static_cast<size_t>(y) * width + x];
      if (h.cheb <= band) {
        lm.at(x, y) = hit_label(Vec2(x + 0.5, y + 0.5), net, geom, h);
        queue.emplace_back(x, y);
      }
    }
  }
  if (queue.empty()) {
    // Curves exist but are far outside the raster; classify by nearest.
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const NearestHit& h = hits[static_cast<size_t>(y) * width + x];
        if (h.curve >= 0) {
          lm.at(x, y) = hit_label(Vec2(x + 0.5, y + 0.5), net, geom, h);
        }
      }
  }
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    const int32_t lbl = lm.at(x, y);
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || ny[k] < 0 || nx[k] >= width || ny[k] >= height)
        continue;
      if (lm.at(nx[k], ny[k]) != 0) continue;
      lm.at(nx[k], ny[k]) = lbl;
      queue.emplace_back(nx[k], ny[k]);
    }
  }
  // Pixels never reached (possible only when the band itself was empty and
  // some pixel saw no edge box at all): classify by brute force.
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      if (lm.at(x, y) != 0) continue;
      NearestHit h;
      const Vec2 p(x + 0.5, y + 0.5);
      for (size_t i = 0; i < net.curves.size(); ++i) {
        const Curve& c = net.curves[i];
        for (int e = 0; e < c.edge_count(); ++e)
          update_hit(h, p, static_cast<int>(i), e, c.nodes[e],
                     c.node_wrapped(e + 1));
      }
      lm.at(x, y) = hit_label(p, net, geom, h);
    }

  check_orientation(net, geom, lm);
  return lm;
}

UpdateReport update_labels_near_curves(const CurveNetwork& net,
                                       const DiscreteGeometry& geom,
                                       LabelMap& labels, RegionStats& stats,
                                       const Image& img, double band) {
  UpdateReport rep;
  if (net.curves.empty()) return rep;

  std::unordered_map<int64_t, NearestHit> hits;
  hits.reserve(1024);
  const int width = labels.width, height = labels.height;
  scan_edges(net, band * std::sqrt(2.0), width, height,
             [&](int x, int y, int curve, int edge, const Vec2& a,
                 const Vec2& b) {
               const Vec2 p(x + 0.5, y + 0.5);
               update_hit(hits[static_cast<int64_t>(y) * width + x], p, curve,
                          edge, a, b);
             });

  std::vector<int64_t> keys;
  keys.reserve(hits.size());
  for (const auto& [key, h] : hits)
    if (h.cheb <= band) keys.push_back(key);
  std::sort(keys.begin(), keys.end());  // row-major application order

  std::vector<int> se_zero;
  for (const int64_t key : keys) {
    const int x = static_cast<int>(key % width);
    const int y = static_cast<int>(key / width);
    const NearestHit& h = hits[key];
    const int32_t old_label = labels.at(x, y);
    const int32_t new_label =
        hit_label(Vec2(x + 0.5, y + 0.5), net, geom, h);
    if (new_label == old_label) continue;
    stats.add_pixel(img, x, y, new_label);
    stats.remove_pixel(img, x, y, old_label);
    labels.at(x, y) = new_label;
    rep.changed++;
    if (stats.acc[old_label].n == 0) se_zero.push_back(old_label);
  }
  for (int k : se_zero)
    if (stats.acc[k].n == 0) rep.empty_regions.push_back(k);
  std::sort(rep.empty_regions.begin(), rep.empty_regions.end());
  rep.empty_regions.erase(
      std::unique(rep.empty_regions.begin(), rep.empty_regions.end()),
      rep.empty_regions.end());
  return rep;
}

UpdateReport relabel_box(const CurveNetwork& net, const DiscreteGeometry& geom,
                         LabelMap& labels, RegionStats& stats,
                         const Image& img, PixelBox box) {
  UpdateReport rep;
  if (net.curves.empty()) return rep;
  box.x0 = std::max(box.x0, 0);
  box.y0 = std::max(box.y0, 0);
  box.x1 = std::min(box.x1, labels.width);
  box.y1 = std::min(box.y1, labels.height);

  std::vector<int> se_zero;
  for (int y = box.y0; y < box.y1; ++y) {
    for (int x = box.x0; x < box.x1; ++x) {
      NearestHit h;
      const Vec2 p(x + 0.5, y + 0.5);
      for (size_t i = 0; i < net.curves.size(); ++i) {
        const Curve& c = net.curves[i];
        for (int e = 0; e < c.edge_count(); ++e)
          update_hit(h, p, static_cast<int>(i), e, c.nodes[e],
                     c.node_wrapped(e + 1));
      }
      const int32_t old_label = labels.at(x, y);
      const int32_t new_label = hit_label(p, net, geom, h);
      if (new_label == old_label) continue;
      stats.add_pixel(img, x, y, new_label);
      stats.remove_pixel(img, x, y, old_label);
      labels.at(x, y) = new_label;
      rep.changed++;
      if (stats.acc[old_label].n == 0) se_zero.push_back(old_label);
    }
  }
  for (int k : se_zero)
    if (stats.acc[k].n == 0) rep.empty_regions.push_back(k);
  return rep;
}

EnergyBreakdown compute_energy(const CurveNetwork& net, const LabelMap& labels,
                               const std::vector<RegionCoefficients>& coeffs,
                               const Image& img, const ImageModel& model,
                               double sigma) {
  EnergyBreakdown e;
  e.length = sigma * net.total_length();
  for (int y = 0; y < labels.height; ++y) {
    for (int x = 0; x < labels.width; ++x) {
      const int k = labels.at(x, y);
      if (k <= 0 || k >= static_cast<int>(coeffs.size()) || !coeffs[k].valid)
        throw MissingRegion("pixel labeled " + std::to_string(k) +
                            " has no region coefficients");
      e.external +=
          model_residual(model, pixel_feature(img, model.model, x, y),
                         coeffs[k]);
    }
  }
  e.total = e.length + e.external;
  return e;
}

void save_labels_pgm(const std::string& path, const LabelMap& labels) {
  Image img(labels.width, labels.height, 1);
  img.raw.resize(img.data.size());
  for (int y = 0; y < labels.height; ++y)
    for (int x = 0; x < labels.width; ++x) {
      const int32_t id = labels.at(x, y);
      if (id < 0 || id > 255)
        throw IoError("region id " + std::to_string(id) +
                      " does not fit an 8-bit label image");
      img.raw[img.index(x, y)] = static_cast<uint8_t>(id);
      img.data[img.index(x, y)] = id / 255.0;
    }
  save_pnm(path, img);
}

LabelMap load_labels_pgm(const std::string& path) {
  const Image img = load_pnm(path);
  if (img.channels != 1) throw IoError("label image must be grayscale");
  if (!img.has_raw()) throw IoError("label image must be 8-bit");
  LabelMap lm(img.width, img.height, 0);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      lm.at(x, y) = img.raw_value(x, y);
  return lm;
}

}  // namespace curveseg
