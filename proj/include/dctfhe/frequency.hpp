#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dctfhe/image.hpp"
#include "dctfhe/tensor.hpp"

namespace dctfhe {

enum class ColorComponent : uint8_t { Y = 0, Cb = 1, Cr = 2 };

const char* to_string(ColorComponent c);
ColorComponent color_component_from_string(const std::string& s);

struct DctConfig {
  int filter_size = 8;   // N in {4, 8}
  int channels_kept = 64;  // k in [1, 3*N*N]
  bool normalize = false;

  void validate() const;
};

struct ChannelKey {
  ColorComponent component;
  int zigzag_index;

  bool operator==(const ChannelKey&) const = default;
};

// Per-channel normalization statistics, recorded so runs are reproducible.
struct ChannelStats {
  std::vector<float> mean;
  std::vector<float> stddev;
};

// Selected low-frequency DCT coefficients: C planes of (H/N)×(W/N), plus the
// provenance of each channel (which color component, which zigzag position).
struct FrequencyTensor {
  Tensor3f data;
  std::vector<ChannelKey> channel_map;
  DctConfig source_config;
  std::optional<ChannelStats> normalization;
};

// 2:1:1 split of k_total across (Y, Cb, Cr): chroma get floor(k/4) each and
// luma the rest, with luma overflow past N*N handed back to chroma (Cb takes
// any odd remainder).
struct ChannelAllocation {
  int y = 0;
  int cb = 0;
  int cr = 0;
};
ChannelAllocation allocate_channels(int k_total, int filter_size);

// Zigzag-ordered channel list: all Y channels first, then Cb, then Cr.
std::vector<ChannelKey> build_channel_map(const DctConfig& cfg);

// RGB -> YCbCr -> blockwise DCT -> low-frequency selection. Image dims must be
// divisible by the filter size. When cfg.normalize is set, stats come from
// `stats` if provided, otherwise from the image itself.
FrequencyTensor preprocess(const RgbImage& img, const DctConfig& cfg,
                           const std::optional<ChannelStats>& stats = std::nullopt);

// Per-channel mean/std over a calibration set, for DctConfig::normalize.
ChannelStats compute_channel_stats(const std::vector<RgbImage>& calibration,
                                   const DctConfig& cfg);

}  // namespace dctfhe
