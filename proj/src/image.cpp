#include "curveseg/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "curveseg/errors.hpp"

namespace curveseg {

void Image::quantize8() {
  raw.resize(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    const double v = std::clamp(data[i], 0.0, 1.0);
    raw[i] = static_cast<uint8_t>(std::lround(v * 255.0));
    data[i] = raw[i] / 255.0;
  }
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {}
      continue;
    }
    if (std::isspace(ch)) continue;
    tok.push_back(static_cast<char>(ch));
    while ((ch = in.peek()) != EOF && !std::isspace(ch) && ch != '#')
      tok.push_back(static_cast<char>(in.get()));
    return tok;
  }
  return tok;
}

int parse_int(const std::string& tok, const std::string& what) {
  try {
    size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad " + what + " in PNM header: '" + tok + "'");
  }
}

}  // namespace

Image load_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file: " + path);

  const std::string magic = next_token(in);
  int channels;
  if (magic == "P5") channels = 1;
  else if (magic == "P6") channels = 3;
  else throw IoError("unsupported PNM magic '" + magic + "' in " + path);

  const int w = parse_int(next_token(in), "width");
  const int h = parse_int(next_token(in), "height");
  const int maxval = parse_int(next_token(in), "maxval");
  if (w <= 0 || h <= 0) throw IoError("bad dimensions in " + path);
  if (maxval <= 0 || maxval > 255)
    throw IoError("unsupported maxval " + std::to_string(maxval) + " in " +
                  path);
  // Single whitespace byte separates header and pixel data.
  in.get();

  Image img(w, h, channels);
  // Raw bytes are only kept for maxval 255 files; anything else would
  // silently rescale on the next save.
  const bool keep_raw = (maxval == 255);
  if (keep_raw) img.raw.resize(img.data.size());
  std::vector<uint8_t> rowbuf(static_cast<size_t>(w) * channels);
  for (int file_row = 0; file_row < h; ++file_row) {
    in.read(reinterpret_cast<char*>(rowbuf.data()),
            static_cast<std::streamsize>(rowbuf.size()));
    if (in.gcount() != static_cast<std::streamsize>(rowbuf.size()))
      throw IoError("truncated pixel data in " + path);
    const int y = h - 1 - file_row;  // file is top-down, we store bottom-up
    for (size_t i = 0; i < rowbuf.size(); ++i) {
      const size_t idx = static_cast<size_t>(y) * w * channels + i;
      if (keep_raw) img.raw[idx] = rowbuf[i];
      img.data[idx] = static_cast<double>(rowbuf[i]) / maxval;
    }
  }
  return img;
}

void save_pnm(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw IoError("image must have 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image file: " + path);

  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n255\n";

  std::vector<uint8_t> rowbuf(static_cast<size_t>(img.width) * img.channels);
  for (int file_row = 0; file_row < img.height; ++file_row) {
    const int y = img.height - 1 - file_row;
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        const size_t idx = img.index(x, y, c);
        rowbuf[static_cast<size_t>(x) * img.channels + c] =
            img.has_raw()
                ? img.raw[idx]
                : static_cast<uint8_t>(
                      std::lround(std::clamp(img.data[idx], 0.0, 1.0) * 255.0));
      }
    }
    out.write(reinterpret_cast<const char*>(rowbuf.data()),
              static_cast<std::streamsize>(rowbuf.size()));
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace curveseg
