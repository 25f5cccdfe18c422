#include "dctfhe/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "dctfhe/errors.hpp"

namespace dctfhe {

namespace {

float clamp255(float v) { return std::min(255.0f, std::max(0.0f, v)); }

// PPM token reader: skips whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(in.get()));
      }
      return tok;
    }
  }
  throw FormatError("ppm: unexpected end of header");
}

int parse_positive(const std::string& tok, const char* what) {
  size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &pos);
  } catch (const std::exception&) {
    throw FormatError(std::string("ppm: bad ") + what);
  }
  if (pos != tok.size() || v <= 0) throw FormatError(std::string("ppm: bad ") + what);
  return v;
}

}  // namespace

std::array<PlaneF, 3> rgb_to_ycbcr(const RgbImage& img) {
  std::array<PlaneF, 3> planes;
  for (auto& p : planes) p.resize(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const float r = img.at(y, x, 0), g = img.at(y, x, 1), b = img.at(y, x, 2);
      planes[0](y, x) = clamp255(0.299f * r + 0.587f * g + 0.114f * b);
      planes[1](y, x) = clamp255(128.0f - 0.168736f * r - 0.331264f * g + 0.5f * b);
      planes[2](y, x) = clamp255(128.0f + 0.5f * r - 0.418688f * g - 0.081312f * b);
    }
  }
  return planes;
}

RgbImage resize_bilinear(const RgbImage& img, int target_w, int target_h) {
  if (target_w < 1 || target_h < 1) {
    throw std::invalid_argument("resize_bilinear: target dims must be positive");
  }
  RgbImage out;
  out.width = target_w;
  out.height = target_h;
  out.pixels.resize(static_cast<size_t>(target_w) * target_h * 3);
  const float sx = static_cast<float>(img.width) / target_w;
  const float sy = static_cast<float>(img.height) / target_h;
  for (int y = 0; y < target_h; ++y) {
    const float fy = std::max(0.0f, (y + 0.5f) * sy - 0.5f);
    const int y0 = std::min(static_cast<int>(fy), img.height - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const float wy = fy - y0;
    for (int x = 0; x < target_w; ++x) {
      const float fx = std::max(0.0f, (x + 0.5f) * sx - 0.5f);
      const int x0 = std::min(static_cast<int>(fx), img.width - 1);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const float wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const float top = img.at(y0, x0, c) * (1 - wx) + img.at(y0, x1, c) * wx;
        const float bot = img.at(y1, x0, c) * (1 - wx) + img.at(y1, x1, c) * wx;
        out.at(y, x, c) = static_cast<uint8_t>(std::lround(clamp255(top * (1 - wy) + bot * wy)));
      }
    }
  }
  return out;
}

RgbImage read_ppm(std::istream& in) {
  if (next_token(in) != "P6") throw FormatError("ppm: expected P6 magic");
  RgbImage img;
  img.width = parse_positive(next_token(in), "width");
  img.height = parse_positive(next_token(in), "height");
  const int maxval = parse_positive(next_token(in), "maxval");
  if (maxval != 255) throw FormatError("ppm: only maxval 255 is supported");
  in.get();  // exactly one whitespace byte separates the header from pixel data
  img.pixels.resize(static_cast<size_t>(img.width) * img.height * 3);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw FormatError("ppm: truncated pixel data");
  }
  return img;
}

RgbImage read_ppm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return read_ppm(in);
}

void write_ppm(std::ostream& out, const RgbImage& img) {
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
}

void write_ppm_file(const std::string& path, const RgbImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  write_ppm(out, img);
}

}  // namespace dctfhe
