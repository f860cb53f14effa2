#include "curveseg/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "curveseg/errors.hpp"

namespace curveseg {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& tok, const std::string& where) {
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("expected a number in " + where + ", got '" + tok +
                      "'");
  }
}

int to_int(const std::string& tok, const std::string& where) {
  int v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw ConfigError("expected an integer in " + where + ", got '" + tok +
                      "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool parse_end(const std::string& tok, const std::string& where) {
  if (tok == "start") return false;
  if (tok == "end") return true;
  throw ConfigError("expected start|end in " + where + ", got '" + tok + "'");
}

int parse_wall(const std::string& tok, const std::string& where) {
  if (tok == "left") return WallLeft;
  if (tok == "right") return WallRight;
  if (tok == "bottom") return WallBottom;
  if (tok == "top") return WallTop;
  throw ConfigError("expected left|right|bottom|top in " + where + ", got '" +
                    tok + "'");
}

ColorModel parse_model(const std::string& tok) {
  if (tok == "scalar") return ColorModel::Scalar;
  if (tok == "rgb") return ColorModel::Rgb;
  if (tok == "cb") return ColorModel::ChromaBright;
  if (tok == "hsv") return ColorModel::Hsv;
  throw ConfigError("unknown model '" + tok + "' (scalar|rgb|cb|hsv)");
}

struct SeedParser {
  int next_auto = 2;

  Curve parse(const std::string& value) {
    const std::vector<std::string> tok = split_ws(value);
    if (tok.empty()) throw ConfigError("empty seed line");
    const std::string& kind = tok[0];
    if (kind == "circle") return circle(tok);
    if (kind == "rect") return rect(tok);
    if (kind == "polyline") return polyline(tok);
    throw ConfigError("unknown seed kind '" + kind +
                      "' (circle|rect|polyline)");
  }

  void regions(Curve& c, const std::vector<std::string>& tok, size_t base,
               const char* what) {
    if (tok.size() == base) {
      c.front_region = next_auto++;
      c.back_region = 1;
    } else if (tok.size() == base + 2) {
      c.front_region = to_int(tok[base], what);
      c.back_region = to_int(tok[base + 1], what);
    } else {
      throw ConfigError(std::string(what) + ": wrong number of fields");
    }
    if (c.front_region < 1 || c.back_region < 1 ||
        c.front_region == c.back_region)
      throw ConfigError(std::string(what) + ": bad region pair");
  }

  Curve circle(const std::vector<std::string>& tok) {
    if (tok.size() < 5) throw ConfigError("circle: need cx cy r n");
    const double cx = to_double(tok[1], "circle");
    const double cy = to_double(tok[2], "circle");
    const double r = to_double(tok[3], "circle");
    const int n = to_int(tok[4], "circle");
    if (r <= 0.0 || n < 3) throw ConfigError("circle: need r > 0 and n >= 3");
    Curve c;
    c.closed = true;
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * M_PI * k / n;
      c.nodes.emplace_back(cx + r * std::cos(t), cy + r * std::sin(t));
    }
    regions(c, tok, 5, "circle");
    return c;
  }

  Curve rect(const std::vector<std::string>& tok) {
    if (tok.size() < 6) throw ConfigError("rect: need x0 y0 x1 y1 per_side");
    const double x0 = to_double(tok[1], "rect");
    const double y0 = to_double(tok[2], "rect");
    const double x1 = to_double(tok[3], "rect");
    const double y1 = to_double(tok[4], "rect");
    const int per_side = to_int(tok[5], "rect");
    if (x1 <= x0 || y1 <= y0 || per_side < 1)
      throw ConfigError("rect: need x1 > x0, y1 > y0, per_side >= 1");
    Curve c;
    c.closed = true;
    const Vec2 corner[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    for (int s = 0; s < 4; ++s)
      for (int k = 0; k < per_side; ++k) {
        const double t = static_cast<double>(k) / per_side;
        c.nodes.push_back(corner[s] + t * (corner[(s + 1) % 4] - corner[s]));
      }
    regions(c, tok, 6, "rect");
    return c;
  }

  Curve polyline(const std::vector<std::string>& tok) {
    if (tok.size() < 7 || (tok.size() - 3) % 2 != 0)
      throw ConfigError("polyline: need front back x0 y0 x1 y1 ...");
    Curve c;
    c.closed = false;
    c.front_region = to_int(tok[1], "polyline");
    c.back_region = to_int(tok[2], "polyline");
    if (c.front_region < 1 || c.back_region < 1 ||
        c.front_region == c.back_region)
      throw ConfigError("polyline: bad region pair");
    for (size_t t = 3; t + 1 < tok.size(); t += 2)
      c.nodes.emplace_back(to_double(tok[t], "polyline"),
                           to_double(tok[t + 1], "polyline"));
    return c;
  }
};

}  // namespace

SigmaSchedule parse_sigma_schedule(const std::string& text) {
  SigmaSchedule sched;
  sched.entries.clear();
  std::istringstream is(text);
  std::string part;
  while (std::getline(is, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const size_t colon = part.find(':');
    int from = 0;
    double value = 0.0;
    if (colon == std::string::npos) {
      value = to_double(part, "sigma_min");
    } else {
      from = to_int(part.substr(0, colon), "sigma_min");
      value = to_double(part.substr(colon + 1), "sigma_min");
    }
    if (value <= 0.0) throw ConfigError("sigma_min values must be positive");
    if (!sched.entries.empty() && from <= sched.entries.back().first)
      throw ConfigError("sigma_min steps must increase");
    sched.entries.emplace_back(from, value);
  }
  if (sched.entries.empty()) throw ConfigError("sigma_min: empty schedule");
  if (sched.entries.front().first != 0)
    sched.entries.insert(sched.entries.begin(),
                         {0, sched.entries.front().second});
  return sched;
}

SegmentationSetup load_segmentation(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw IoError("cannot read " + config_path);
  const std::filesystem::path base =
      std::filesystem::path(config_path).parent_path();

  SegmentationSetup setup;
  SeedParser seeds;
  std::string image_path;
  double lambda = 1.0;
  std::array<double, 3> weights{1.0, 1.0, 1.0};
  struct JunctionLine {
    std::array<std::pair<int, bool>, 3> ends;
  };
  std::vector<JunctionLine> junction_lines;
  std::vector<std::tuple<int, bool, int>> wall_lines;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(config_path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string where = key + " (line " + std::to_string(lineno) + ")";

    if (key == "image") {
      image_path = (base / value).string();
    } else if (key == "output") {
      setup.output_dir = (base / value).string();
    } else if (key == "model") {
      setup.params.model.model = parse_model(value);
    } else if (key == "lambda") {
      lambda = to_double(value, where);
      if (lambda <= 0.0) throw ConfigError("lambda must be positive");
    } else if (key == "weights") {
      const auto tok = split_ws(value);
      if (tok.empty() || tok.size() > 3)
        throw ConfigError("weights: one to three numbers");
      for (size_t t = 0; t < tok.size(); ++t)
        weights[t] = to_double(tok[t], where);
    } else if (key == "bilinear") {
      setup.params.model.bilinear = to_int(value, where) != 0;
    } else if (key == "sigma_factor") {
      setup.params.sigma_factor = to_double(value, where);
      if (setup.params.sigma_factor < 0.0)
        throw ConfigError("sigma_factor must be >= 0");
    } else if (key == "sigma_min") {
      setup.params.sigma_min = parse_sigma_schedule(value);
    } else if (key == "tau") {
      setup.params.tau = to_double(value, where);
      if (setup.params.tau <= 0.0) throw ConfigError("tau must be positive");
    } else if (key == "steps") {
      setup.params.steps = to_int(value, where);
      if (setup.params.steps < 0) throw ConfigError("steps must be >= 0");
    } else if (key == "band") {
      setup.params.band = to_double(value, where);
      if (setup.params.band <= 0.0) throw ConfigError("band must be positive");
    } else if (key == "sigma_cadence") {
      setup.params.sigma_cadence = to_int(value, where);
      if (setup.params.sigma_cadence < 1)
        throw ConfigError("sigma_cadence must be >= 1");
    } else if (key == "substeps") {
      setup.params.substeps = to_int(value, where);
      if (setup.params.substeps < 1)
        throw ConfigError("substeps must be >= 1");
    } else if (key == "denoise") {
      setup.params.denoise_lambda = to_double(value, where);
    } else if (key == "solve_tol") {
      setup.params.solve_tol = to_double(value, where);
    } else if (key == "refine_factor") {
      setup.params.refine_factor = to_double(value, where);
    } else if (key == "coarsen_factor") {
      setup.params.coarsen_factor = to_double(value, where);
    } else if (key == "block_duration") {
      setup.params.topo.block_duration = to_int(value, where);
    } else if (key == "delete_factor") {
      setup.params.topo.l_del_factor = to_double(value, where);
    } else if (key == "seed") {
      setup.net.curves.push_back(seeds.parse(value));
    } else if (key == "junction") {
      const auto tok = split_ws(value);
      if (tok.size() != 6)
        throw ConfigError("junction: need c0 start|end c1 start|end c2 "
                          "start|end");
      JunctionLine jl;
      for (int t = 0; t < 3; ++t)
        jl.ends[t] = {to_int(tok[2 * t], where),
                      parse_end(tok[2 * t + 1], where)};
      junction_lines.push_back(jl);
    } else if (key == "wallpoint") {
      const auto tok = split_ws(value);
      if (tok.size() != 3)
        throw ConfigError("wallpoint: need curve start|end wall");
      wall_lines.emplace_back(to_int(tok[0], where), parse_end(tok[1], where),
                              parse_wall(tok[2], where));
    } else {
      throw ConfigError(config_path + ":" + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
  }

  if (image_path.empty()) throw ConfigError("config needs an image");
  if (setup.output_dir.empty()) throw ConfigError("config needs an output");
  if (setup.net.curves.empty()) throw ConfigError("config needs seed curves");
  for (int t = 0; t < 3; ++t)
    setup.params.model.weights[t] = lambda * weights[t];

  setup.image = load_pnm(image_path);
  setup.net.width = setup.image.width;
  setup.net.height = setup.image.height;

  const int n_curves = static_cast<int>(setup.net.curves.size());
  auto check_ref = [&](int c, const char* what) {
    if (c < 0 || c >= n_curves)
      throw ConfigError(std::string(what) + ": curve index " +
                        std::to_string(c) + " out of range");
    if (setup.net.curves[c].closed)
      throw ConfigError(std::string(what) + ": curve " + std::to_string(c) +
                        " is closed");
  };
  for (const JunctionLine& jl : junction_lines) {
    const int id = static_cast<int>(setup.net.junctions.size());
    Junction jn;
    Vec2 mean = Vec2::Zero();
    for (int t = 0; t < 3; ++t) {
      const auto [c, at_end] = jl.ends[t];
      check_ref(c, "junction");
      jn.ends[t] = EndpointRef{c, at_end};
      mean += setup.net.endpoint(jn.ends[t]);
    }
    mean /= 3.0;
    for (int t = 0; t < 3; ++t) {
      setup.net.endpoint(jn.ends[t]) = mean;
      Curve& c = setup.net.curves[jn.ends[t].curve];
      Binding& b = jn.ends[t].at_end ? c.end_binding : c.start_binding;
      if (b.kind != BindingKind::Free)
        throw ConfigError("junction: endpoint bound twice");
      b = Binding{BindingKind::Junction, id};
    }
    setup.net.junctions.push_back(jn);
  }
  for (const auto& [c, at_end, wall] : wall_lines) {
    check_ref(c, "wallpoint");
    const EndpointRef ref{c, at_end};
    Binding& b = at_end ? setup.net.curves[c].end_binding
                        : setup.net.curves[c].start_binding;
    if (b.kind != BindingKind::Free)
      throw ConfigError("wallpoint: endpoint bound twice");
    b = Binding{BindingKind::Wall, wall};
    setup.net.endpoint(ref) =
        setup.net.project_to_wall(setup.net.endpoint(ref), wall);
    setup.net.boundary_points.push_back({ref, wall});
  }

  try {
    setup.net.validate();
  } catch (const Error& err) {
    throw ConfigError(std::string("seed network invalid: ") + err.what());
  }
  return setup;
}

}  // namespace curveseg
