#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "dctfhe/dct.hpp"
#include "dctfhe/errors.hpp"
#include "dctfhe/frequency.hpp"
#include "dctfhe/image.hpp"
#include "helpers.hpp"

using namespace dctfhe;

namespace {

RgbImage solid(int w, int h, uint8_t r, uint8_t g, uint8_t b) {
  RgbImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<size_t>(w) * h * 3);
  for (int i = 0; i < w * h; ++i) {
    img.pixels[3 * i] = r;
    img.pixels[3 * i + 1] = g;
    img.pixels[3 * i + 2] = b;
  }
  return img;
}

// Reconstruction error (in YCbCr space) after keeping only the tensor's
// channels; used for the lossiness property.
double reconstruction_error(const RgbImage& img, const DctConfig& cfg) {
  const auto planes = rgb_to_ycbcr(img);
  const auto map = build_channel_map(cfg);
  const FrequencyTensor ft = preprocess(img, cfg);
  const int n = cfg.filter_size;
  double err = 0.0;
  for (int comp = 0; comp < 3; ++comp) {
    Tensor3f coeffs(n * n, img.height / n, img.width / n);
    const auto order = zigzag_indices(n);
    for (size_t c = 0; c < map.size(); ++c) {
      if (static_cast<int>(map[c].component) != comp) continue;
      const auto [u, v] = order[static_cast<size_t>(map[c].zigzag_index)];
      coeffs[u * n + v] = ft.data[static_cast<int>(c)];
    }
    const PlaneF back = inverse_block_dct(coeffs, n);
    err += static_cast<double>((back - planes[static_cast<size_t>(comp)]).array().square().sum());
  }
  return err;
}

}  // namespace

TEST_CASE("bt601 full-range color conversion") {
  SUBCASE("black") {
    const auto p = rgb_to_ycbcr(solid(8, 8, 0, 0, 0));
    CHECK(p[0](0, 0) == doctest::Approx(0.0));
    CHECK(p[1](0, 0) == doctest::Approx(128.0));
    CHECK(p[2](0, 0) == doctest::Approx(128.0));
  }
  SUBCASE("white has neutral chroma") {
    const auto p = rgb_to_ycbcr(solid(8, 8, 255, 255, 255));
    CHECK(p[0](0, 0) == doctest::Approx(255.0));
    CHECK(p[1](0, 0) == doctest::Approx(128.0));
    CHECK(p[2](0, 0) == doctest::Approx(128.0));
  }
  SUBCASE("pure red clamps Cr") {
    const auto p = rgb_to_ycbcr(solid(8, 8, 255, 0, 0));
    CHECK(p[0](0, 0) == doctest::Approx(76.245).epsilon(1e-4));
    CHECK(p[1](0, 0) == doctest::Approx(84.973).epsilon(1e-4));
    CHECK(p[2](0, 0) == doctest::Approx(255.0));  // 255.5 clamped
  }
}

TEST_CASE("channel allocation follows the 2:1:1 rule") {
  const auto check = [](int k, int n, int y, int cb, int cr) {
    const ChannelAllocation a = allocate_channels(k, n);
    CHECK(a.y == y);
    CHECK(a.cb == cb);
    CHECK(a.cr == cr);
    CHECK(a.y + a.cb + a.cr == k);
  };
  check(24, 8, 12, 6, 6);
  check(64, 8, 32, 16, 16);
  check(6, 8, 4, 1, 1);
  check(192, 8, 64, 64, 64);  // luma caps at N^2, overflow goes to chroma
  check(129, 8, 64, 33, 32);  // odd overflow: Cb takes the extra channel
  check(191, 8, 64, 64, 63);
  check(48, 4, 16, 16, 16);
  check(1, 8, 1, 0, 0);
  CHECK_THROWS_AS(allocate_channels(0, 8), std::invalid_argument);
  CHECK_THROWS_AS(allocate_channels(193, 8), std::invalid_argument);
}

TEST_CASE("channel map is zigzag-prefixed per component, Y then Cb then Cr") {
  DctConfig cfg;
  cfg.filter_size = 8;
  cfg.channels_kept = 27;
  const auto map = build_channel_map(cfg);
  REQUIRE(map.size() == 27);
  int counts[3] = {0, 0, 0};
  int last_comp = 0;
  for (const ChannelKey& k : map) {
    const int comp = static_cast<int>(k.component);
    CHECK(comp >= last_comp);  // component blocks in order
    last_comp = comp;
    CHECK(k.zigzag_index == counts[comp]);  // prefix property
    ++counts[comp];
  }
  CHECK(counts[0] == 15);  // 27 - 2*floor(27/4)
  CHECK(counts[1] == 6);
  CHECK(counts[2] == 6);
}

TEST_CASE("preprocess shapes match the advertised dimensions") {
  SUBCASE("448x448, N=8, k=64 -> 64x56x56") {
    const RgbImage img = testutil::random_image(448, 448, 3);
    DctConfig cfg;
    cfg.filter_size = 8;
    cfg.channels_kept = 64;
    const FrequencyTensor t = preprocess(img, cfg);
    CHECK(t.data.channels() == 64);
    CHECK(t.data.rows() == 56);
    CHECK(t.data.cols() == 56);
    CHECK(t.channel_map.size() == 64);
  }
  SUBCASE("64x64, N=4, k=24 -> 24x16x16") {
    const RgbImage img = testutil::random_image(64, 64, 4);
    DctConfig cfg;
    cfg.filter_size = 4;
    cfg.channels_kept = 24;
    const FrequencyTensor t = preprocess(img, cfg);
    CHECK(t.data.channels() == 24);
    CHECK(t.data.rows() == 16);
    CHECK(t.data.cols() == 16);
  }
  SUBCASE("non-divisible dims are rejected") {
    const RgbImage img = testutil::random_image(30, 30, 5);
    DctConfig cfg;
    cfg.filter_size = 8;
    cfg.channels_kept = 12;
    CHECK_THROWS_AS(preprocess(img, cfg), std::invalid_argument);
  }
}

TEST_CASE("constant gray image lights up only the three DC channels") {
  const RgbImage img = solid(32, 32, 200, 200, 200);
  DctConfig cfg;
  cfg.filter_size = 8;
  cfg.channels_kept = 192;
  const FrequencyTensor t = preprocess(img, cfg);
  for (size_t c = 0; c < t.channel_map.size(); ++c) {
    const float mag = t.data[static_cast<int>(c)].cwiseAbs().maxCoeff();
    if (t.channel_map[c].zigzag_index == 0) {
      CHECK(mag > 1.0f);
    } else {
      CHECK(mag <= 1e-3f);
    }
  }
}

TEST_CASE("reconstruction error is non-increasing along nested selections") {
  // selections are nested for k in multiples of 4 (the 2:1:1 split is not
  // nested between arbitrary consecutive k)
  const RgbImage img = testutil::random_image(32, 32, 11);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 4; k <= 192; k += 4) {
    DctConfig cfg;
    cfg.filter_size = 8;
    cfg.channels_kept = k;
    const double err = reconstruction_error(img, cfg);
    CHECK(err <= prev + 1e-6);
    prev = err;
  }
  CHECK(prev <= 1e-3);  // full set is lossless up to float32 rounding
}

TEST_CASE("normalization uses recorded stats") {
  const RgbImage img = testutil::random_image(32, 32, 13);
  DctConfig cfg;
  cfg.filter_size = 8;
  cfg.channels_kept = 12;
  cfg.normalize = true;
  const FrequencyTensor t = preprocess(img, cfg);
  REQUIRE(t.normalization.has_value());
  // per-channel mean ~0, std ~1 when stats come from the same image
  for (int c = 0; c < t.data.channels(); ++c) {
    CHECK(std::abs(t.data[c].mean()) <= 1e-3);
  }
}

TEST_CASE("ppm round trip and error paths") {
  const RgbImage img = testutil::random_image(17, 9, 21);
  std::stringstream ss;
  write_ppm(ss, img);
  const RgbImage back = read_ppm(ss);
  CHECK(back.width == img.width);
  CHECK(back.height == img.height);
  CHECK(back.pixels == img.pixels);

  std::stringstream bad("P5\n4 4\n255\n");
  CHECK_THROWS_AS(read_ppm(bad), FormatError);
  std::stringstream truncated("P6\n4 4\n255\nxx");
  CHECK_THROWS_AS(read_ppm(truncated), FormatError);
  std::stringstream comment("P6 # comment\n# another\n2 1\n255\nabcdef");
  const RgbImage tiny = read_ppm(comment);
  CHECK(tiny.width == 2);
  CHECK(tiny.height == 1);
}

TEST_CASE("bilinear resize") {
  const RgbImage img = testutil::random_image(64, 64, 31);
  const RgbImage half = resize_bilinear(img, 32, 32);
  CHECK(half.width == 32);
  CHECK(half.height == 32);
  // identity resize is exact
  const RgbImage same = resize_bilinear(img, 64, 64);
  CHECK(same.pixels == img.pixels);
  // constant image stays constant under any resize
  const RgbImage flat = solid(16, 16, 77, 50, 200);
  const RgbImage up = resize_bilinear(flat, 40, 24);
  for (int y = 0; y < up.height; ++y)
    for (int x = 0; x < up.width; ++x) {
      CHECK(up.at(y, x, 0) == 77);
      CHECK(up.at(y, x, 1) == 50);
      CHECK(up.at(y, x, 2) == 200);
    }
}
