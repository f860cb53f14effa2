#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "curveseg/driver.hpp"
#include "curveseg/errors.hpp"

using namespace curveseg;

namespace {

Image disk_image(int size, double cx, double cy, double r, int inside,
                 int outside) {
  Image img(size, size, 1);
  img.raw.resize(img.data.size());
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      const int v = dx * dx + dy * dy < r * r ? inside : outside;
      img.raw[img.index(x, y)] = static_cast<uint8_t>(v);
      img.data[img.index(x, y)] = v / 255.0;
    }
  return img;
}

CurveNetwork circle_seed(int size, double r, int n) {
  CurveNetwork net;
  net.width = size;
  net.height = size;
  Curve c;
  c.closed = true;
  c.front_region = 2;
  c.back_region = 1;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * M_PI * k / n;
    c.nodes.emplace_back(size / 2.0 + r * std::cos(t),
                         size / 2.0 + r * std::sin(t));
  }
  net.curves.push_back(c);
  return net;
}

DriverParams disk_params(double weight, int steps) {
  DriverParams p;
  p.model.model = ColorModel::Scalar;
  p.model.weights = {weight, 1.0, 1.0};
  p.sigma_factor = 0.25;
  p.sigma_min.entries = {{0, 0.05}};
  p.tau = 0.1;
  p.steps = steps;
  return p;
}

}  // namespace

TEST_CASE("the evolution settles a seed onto a disk and loses energy") {
  Driver drv(disk_image(48, 24, 24, 10, 217, 38), circle_seed(48, 14, 48),
             disk_params(8.0, 60));
  drv.run();

  CHECK(drv.step_count == 60);
  REQUIRE(drv.trace.size() == 60);
  CHECK(drv.trace.back().total < drv.trace.front().total);
  REQUIRE(drv.net.curves.size() == 1);
  CHECK(drv.net.curves[0].closed);

  double mean_r = 0.0;
  for (const Vec2& p : drv.net.curves[0].nodes)
    mean_r += (p - Vec2(24, 24)).norm();
  mean_r /= drv.net.curves[0].node_count();
  CHECK(mean_r > 9.3);
  CHECK(mean_r < 10.8);

  // The incremental accumulators match a recount of the final labels.
  const RegionStats recount =
      build_stats(drv.labels, drv.img, ColorModel::Scalar, drv.stats.region_count);
  for (int k = 1; k < static_cast<int>(recount.acc.size()); ++k) {
    CHECK(drv.stats.acc[k].n == recount.acc[k].n);
    CHECK(drv.stats.acc[k].isum[0] == recount.acc[k].isum[0]);
  }
}

TEST_CASE("two identical runs agree bit for bit") {
  auto make = [] {
    return Driver(disk_image(48, 24, 24, 10, 217, 38), circle_seed(48, 14, 48),
                  disk_params(8.0, 30));
  };
  Driver a = make(), b = make();
  a.run();
  b.run();

  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].total == b.trace[i].total);
    CHECK(a.trace[i].length == b.trace[i].length);
    CHECK(a.trace[i].external == b.trace[i].external);
    CHECK(a.trace[i].sigma == b.trace[i].sigma);
    CHECK(a.trace[i].nodes == b.trace[i].nodes);
    CHECK(a.trace[i].events == b.trace[i].events);
  }
  REQUIRE(a.net.curves.size() == b.net.curves.size());
  for (size_t i = 0; i < a.net.curves.size(); ++i) {
    REQUIRE(a.net.curves[i].node_count() == b.net.curves[i].node_count());
    for (int j = 0; j < a.net.curves[i].node_count(); ++j)
      CHECK((a.net.curves[i].nodes[j] - b.net.curves[i].nodes[j]).norm() ==
            0.0);
  }
  CHECK(a.event_log == b.event_log);
}

TEST_CASE("oversized moves are tamed by halving the time step") {
  DriverParams p = disk_params(500.0, 3);
  Driver drv(disk_image(48, 24, 24, 10, 217, 38), circle_seed(48, 14, 48), p);
  drv.run();
  bool halved = false;
  for (const std::string& line : drv.event_log)
    if (line.find("tau_halved") != std::string::npos) halved = true;
  CHECK(halved);
  CHECK(drv.step_count == 3);
}

TEST_CASE("the trace file round-trips its header and rows") {
  std::vector<TraceRow> rows(2);
  rows[0].step = 0;
  rows[0].total = 12.5;
  rows[1].step = 1;
  rows[1].sigma_changed = true;
  const std::string path = "trace_test.csv";
  write_trace_csv(path, rows);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "step,total,length,external,sigma,nodes,events");
  int count = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++count;
  CHECK(count == 2);
  std::filesystem::remove(path);
}

TEST_CASE("saved outputs land in the directory with the right shapes") {
  Driver drv(disk_image(32, 16, 16, 7, 217, 38), circle_seed(32, 10, 32),
             disk_params(8.0, 10));
  drv.params.denoise_lambda = 3.0;
  drv.run();
  const std::string dir = "drvout";
  std::filesystem::remove_all(dir);
  drv.save_outputs(dir);

  for (const char* name :
       {"labels.pgm", "reconstruction.pgm", "overlay.ppm", "contours.json",
        "trace.csv", "events.log", "denoised.pgm"})
    CHECK(std::filesystem::exists(std::filesystem::path(dir) / name));

  const LabelMap labels =
      load_labels_pgm((std::filesystem::path(dir) / "labels.pgm").string());
  CHECK(labels.width == 32);
  CHECK(labels.height == 32);

  const Image overlay =
      load_pnm((std::filesystem::path(dir) / "overlay.ppm").string());
  CHECK(overlay.channels == 3);

  std::ifstream jin(std::filesystem::path(dir) / "contours.json");
  const nlohmann::json doc = nlohmann::json::parse(jin);
  REQUIRE(doc.contains("curves"));
  REQUIRE(doc["curves"].is_array());
  REQUIRE(doc["curves"].size() == drv.net.curves.size());
  const auto& c0 = doc["curves"][0];
  CHECK(c0.contains("closed"));
  CHECK(c0.contains("kplus"));
  CHECK(c0.contains("kminus"));
  REQUIRE(c0.contains("nodes"));
  CHECK(c0["nodes"].size() == static_cast<size_t>(drv.net.curves[0].node_count()));
  CHECK(c0["nodes"][0].size() == 2);
  CHECK(doc.contains("junctions"));
  CHECK(doc.contains("boundary_points"));
}
