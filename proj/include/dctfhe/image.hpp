#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dctfhe/tensor.hpp"

namespace dctfhe {

// 8-bit RGB image, interleaved row-major (R,G,B per pixel).
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // height*width*3

  uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  uint8_t& at(int y, int x, int c) {
    return pixels[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
};

// Full-range BT.601 (JPEG) conversion. Y in [0,255], Cb/Cr centered at 128,
// all planes clamped to [0,255]. Returns {Y, Cb, Cr}.
std::array<PlaneF, 3> rgb_to_ycbcr(const RgbImage& img);

// Bilinear resize to target_w × target_h (half-pixel centers).
RgbImage resize_bilinear(const RgbImage& img, int target_w, int target_h);

// Binary PPM (P6, maxval 255).
RgbImage read_ppm(std::istream& in);
RgbImage read_ppm_file(const std::string& path);
void write_ppm(std::ostream& out, const RgbImage& img);
void write_ppm_file(const std::string& path, const RgbImage& img);

}  // namespace dctfhe
