#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "curveseg/config.hpp"
#include "curveseg/denoise.hpp"
#include "curveseg/driver.hpp"
#include "curveseg/errors.hpp"

namespace {

int run_segment(const std::string& config_path) {
  curveseg::SegmentationSetup setup =
      curveseg::load_segmentation(config_path);
  curveseg::Driver driver(std::move(setup.image), std::move(setup.net),
                          std::move(setup.params));
  driver.run();
  driver.save_outputs(setup.output_dir);
  std::printf("done: %d steps, %d curves, %d nodes -> %s\n",
              driver.step_count, static_cast<int>(driver.net.curves.size()),
              driver.net.total_nodes(), setup.output_dir.c_str());
  return 0;
}

int run_denoise(const std::string& image_path, const std::string& labels_path,
                double lambda, const std::string& output_path) {
  const curveseg::Image img = curveseg::load_pnm(image_path);
  const curveseg::LabelMap labels = curveseg::load_labels_pgm(labels_path);
  const curveseg::Image out = curveseg::denoise_regions(img, labels, lambda);
  std::string path = output_path;
  if (path.empty())
    path = out.channels == 1 ? "denoised.pgm" : "denoised.ppm";
  curveseg::save_pnm(path, out);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecewise-constant segmentation by evolving curve networks"};
  app.require_subcommand(1);

  auto* segment = app.add_subcommand("segment", "run a segmentation config");
  std::string config_path;
  segment->add_option("config", config_path, "key=value config file")
      ->required();

  auto* denoise =
      app.add_subcommand("denoise", "smooth an image inside fixed regions");
  std::string image_path, labels_path, output_path;
  double lambda = 1.0;
  denoise->add_option("image", image_path, "pgm/ppm input")->required();
  denoise->add_option("labels", labels_path, "label map (pgm)")->required();
  denoise->add_option("lambda", lambda, "fidelity weight")->required();
  denoise->add_option("-o,--output", output_path, "output image path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (segment->parsed()) return run_segment(config_path);
    return run_denoise(image_path, labels_path, lambda, output_path);
  } catch (const curveseg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const curveseg::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 1;
  } catch (const curveseg::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
