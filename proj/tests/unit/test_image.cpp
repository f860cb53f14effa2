#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "curveseg/errors.hpp"
#include "curveseg/image.hpp"

using namespace curveseg;

namespace {

std::string tmp_path(const char* name) {
  return std::string("img_") + name;
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("pgm roundtrip keeps bytes and flips rows") {
  // 2x2, file rows top-down: (10 20) then (30 40).
  const std::string path = tmp_path("roundtrip.pgm");
  write_bytes(path, std::string("P5\n2 2\n255\n") +
                        std::string({char(10), char(20), char(30), char(40)}));
  const Image img = load_pnm(path);
  CHECK(img.width == 2);
  CHECK(img.height == 2);
  CHECK(img.channels == 1);
  CHECK(img.has_raw());
  // Row y=0 is the bottom row, i.e. the last file row.
  CHECK(img.raw_value(0, 0) == 30);
  CHECK(img.raw_value(1, 0) == 40);
  CHECK(img.raw_value(0, 1) == 10);
  CHECK(img.raw_value(1, 1) == 20);
  CHECK(img.value(0, 1) == doctest::Approx(10.0 / 255.0).epsilon(1e-12));

  const std::string out = tmp_path("roundtrip_out.pgm");
  save_pnm(out, img);
  std::ifstream a(path, std::ios::binary), b(out, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)),
                       std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(b)),
                       std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  std::remove(path.c_str());
  std::remove(out.c_str());
}

TEST_CASE("ppm roundtrip") {
  const std::string path = tmp_path("rt.ppm");
  std::string pix;
  for (int t = 0; t < 2 * 2 * 3; ++t) pix.push_back(char(t * 10));
  write_bytes(path, "P6\n2 2\n255\n" + pix);
  const Image img = load_pnm(path);
  CHECK(img.channels == 3);
  CHECK(img.raw_value(0, 1, 0) == 0);   // first file row is the top row
  CHECK(img.raw_value(1, 0, 2) == 110);
  const std::string out = tmp_path("rt_out.ppm");
  save_pnm(out, img);
  std::ifstream a(path, std::ios::binary), b(out, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)),
                       std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(b)),
                       std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  std::remove(path.c_str());
  std::remove(out.c_str());
}

TEST_CASE("pnm errors") {
  const std::string path = tmp_path("bad.pgm");
  write_bytes(path, "P4\n2 2\n255\n0000");
  CHECK_THROWS_AS(load_pnm(path), IoError);
  write_bytes(path, "P5\n2 2\n65535\n" + std::string(8, '\0'));
  CHECK_THROWS_AS(load_pnm(path), IoError);
  write_bytes(path, "P5\n2 2\n255\nab");  // truncated samples
  CHECK_THROWS_AS(load_pnm(path), IoError);
  CHECK_THROWS_AS(load_pnm("does_not_exist.pgm"), IoError);
  std::remove(path.c_str());
}

TEST_CASE("maxval below 255 rescales and drops raw") {
  const std::string path = tmp_path("scaled.pgm");
  write_bytes(path, std::string("P5\n1 1\n100\n") + std::string(1, char(50)));
  const Image img = load_pnm(path);
  CHECK(img.value(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(!img.has_raw());
  std::remove(path.c_str());
}

TEST_CASE("quantize8 makes data and raw agree") {
  Image img(2, 1, 1);
  img.value(0, 0) = 0.5;
  img.value(1, 0) = 1.25;  // clamps
  img.quantize8();
  CHECK(img.has_raw());
  CHECK(img.raw_value(0, 0) == 128);  // round(0.5 * 255)
  CHECK(img.raw_value(1, 0) == 255);
  CHECK(img.value(0, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
}
