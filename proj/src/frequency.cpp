#include "dctfhe/frequency.hpp"

#include <cmath>
#include <stdexcept>

#include "dctfhe/dct.hpp"

namespace dctfhe {

const char* to_string(ColorComponent c) {
  switch (c) {
    case ColorComponent::Y: return "Y";
    case ColorComponent::Cb: return "Cb";
    case ColorComponent::Cr: return "Cr";
  }
  return "?";
}

ColorComponent color_component_from_string(const std::string& s) {
  if (s == "Y") return ColorComponent::Y;
  if (s == "Cb") return ColorComponent::Cb;
  if (s == "Cr") return ColorComponent::Cr;
  throw std::invalid_argument("unknown color component: " + s);
}

void DctConfig::validate() const {
  if (filter_size != 4 && filter_size != 8) {
    throw std::invalid_argument("DctConfig: filter size must be 4 or 8");
  }
  const int full = 3 * filter_size * filter_size;
  if (channels_kept < 1 || channels_kept > full) {
    throw std::invalid_argument("DctConfig: channels_kept out of [1, " + std::to_string(full) + "]");
  }
}

ChannelAllocation allocate_channels(int k_total, int filter_size) {
  const int per_component = filter_size * filter_size;
  if (k_total < 1 || k_total > 3 * per_component) {
    throw std::invalid_argument("allocate_channels: k_total out of range");
  }
  ChannelAllocation a;
  a.cb = a.cr = k_total / 4;
  a.y = k_total - 2 * a.cb;
  if (a.y > per_component) {
    const int overflow = a.y - per_component;
    a.y = per_component;
    a.cb += (overflow + 1) / 2;  // Cb takes the odd remainder
    a.cr += overflow / 2;
  }
  return a;
}

std::vector<ChannelKey> build_channel_map(const DctConfig& cfg) {
  cfg.validate();
  const ChannelAllocation alloc = allocate_channels(cfg.channels_kept, cfg.filter_size);
  std::vector<ChannelKey> map;
  map.reserve(cfg.channels_kept);
  const int counts[3] = {alloc.y, alloc.cb, alloc.cr};
  for (int comp = 0; comp < 3; ++comp) {
    for (int z = 0; z < counts[comp]; ++z) {
      map.push_back({static_cast<ColorComponent>(comp), z});
    }
  }
  return map;
}

namespace {

// Lowest `count` zigzag coefficients of one component plane.
void select_component(const PlaneF& plane, const DctConfig& cfg, int count,
                      Tensor3f& out, int& next_channel) {
  if (count == 0) return;
  const Tensor3f coeffs = forward_block_dct(plane, cfg.filter_size);
  const auto order = zigzag_indices(cfg.filter_size);
  for (int z = 0; z < count; ++z) {
    const auto [u, v] = order[z];
    out[next_channel++] = coeffs[u * cfg.filter_size + v];
  }
}

Tensor3f select_all(const RgbImage& img, const DctConfig& cfg) {
  if (img.width % cfg.filter_size != 0 || img.height % cfg.filter_size != 0) {
    throw std::invalid_argument("preprocess: image dims must be divisible by the DCT filter size");
  }
  const auto planes = rgb_to_ycbcr(img);
  const ChannelAllocation alloc = allocate_channels(cfg.channels_kept, cfg.filter_size);
  Tensor3f data(cfg.channels_kept, img.height / cfg.filter_size, img.width / cfg.filter_size);
  int next = 0;
  select_component(planes[0], cfg, alloc.y, data, next);
  select_component(planes[1], cfg, alloc.cb, data, next);
  select_component(planes[2], cfg, alloc.cr, data, next);
  return data;
}

}  // namespace

FrequencyTensor preprocess(const RgbImage& img, const DctConfig& cfg,
                           const std::optional<ChannelStats>& stats) {
  cfg.validate();
  FrequencyTensor t;
  t.data = select_all(img, cfg);
  t.channel_map = build_channel_map(cfg);
  t.source_config = cfg;
  if (cfg.normalize) {
    ChannelStats s = stats ? *stats : compute_channel_stats({img}, cfg);
    if (static_cast<int>(s.mean.size()) != cfg.channels_kept) {
      throw std::invalid_argument("preprocess: normalization stats have wrong channel count");
    }
    for (int c = 0; c < t.data.channels(); ++c) {
      t.data[c] = (t.data[c].array() - s.mean[c]) / s.stddev[c];
    }
    t.normalization = std::move(s);
  }
  return t;
}

ChannelStats compute_channel_stats(const std::vector<RgbImage>& calibration,
                                   const DctConfig& cfg) {
  if (calibration.empty()) {
    throw std::invalid_argument("compute_channel_stats: empty calibration set");
  }
  ChannelStats s;
  s.mean.assign(cfg.channels_kept, 0.0f);
  s.stddev.assign(cfg.channels_kept, 0.0f);
  std::vector<double> sum(cfg.channels_kept, 0.0), sumsq(cfg.channels_kept, 0.0);
  int64_t count = 0;
  for (const auto& img : calibration) {
    const Tensor3f data = select_all(img, cfg);
    count += int64_t{data.rows()} * data.cols();
    for (int c = 0; c < cfg.channels_kept; ++c) {
      sum[c] += data[c].cast<double>().sum();
      sumsq[c] += data[c].cast<double>().array().square().sum();
    }
  }
  for (int c = 0; c < cfg.channels_kept; ++c) {
    const double mean = sum[c] / static_cast<double>(count);
    const double var = std::max(0.0, sumsq[c] / static_cast<double>(count) - mean * mean);
    s.mean[c] = static_cast<float>(mean);
    s.stddev[c] = static_cast<float>(std::sqrt(var) > 1e-6 ? std::sqrt(var) : 1.0);
  }
  return s;
}

}  // namespace dctfhe
