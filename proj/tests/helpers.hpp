#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cstdint>

#include "dctfhe/graph.hpp"
#include "dctfhe/image.hpp"
#include "dctfhe/rng.hpp"
#include "dctfhe/tensor.hpp"

namespace testutil {

inline dctfhe::Tensor3f random_tensor(int c, int h, int w, uint64_t seed, float lo = -1.0f,
                                      float hi = 1.0f) {
  dctfhe::Tensor3f t(c, h, w);
  const dctfhe::CounterRng rng(seed, 0x7e57);
  uint64_t ctr = 0;
  for (auto& plane : t.planes) {
    for (int r = 0; r < plane.rows(); ++r) {
      for (int cc = 0; cc < plane.cols(); ++cc) {
        plane(r, cc) = lo + static_cast<float>(rng.uniform(ctr++)) * (hi - lo);
      }
    }
  }
  return t;
}

inline dctfhe::PlaneD random_plane(int h, int w, uint64_t seed, double lo = 0.0,
                                   double hi = 255.0) {
  dctfhe::PlaneD p(h, w);
  const dctfhe::CounterRng rng(seed, 0x91a);
  uint64_t ctr = 0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) p(r, c) = lo + rng.uniform(ctr++) * (hi - lo);
  return p;
}

inline dctfhe::RgbImage random_image(int w, int h, uint64_t seed) {
  dctfhe::RgbImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<size_t>(w) * h * 3);
  const dctfhe::CounterRng rng(seed, 0x1347);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = static_cast<uint8_t>(rng.below(256, i));
  }
  return img;
}

// Two 3x3 conv layers with BN and ReLU, global pooling, small classifier.
inline dctfhe::NetworkGraph toy_cnn(int in_ch = 3, int size = 8, int classes = 4) {
  using namespace dctfhe;
  NetworkGraph g;
  LayerSpec in;
  in.kind = LayerKind::Input;
  in.name = "input";
  in.input_dims = {in_ch, size, size};
  NodeId x = g.add_node(std::move(in), {});
  const auto conv = [&](const std::string& name, NodeId src, int ic, int oc) {
    LayerSpec s;
    s.kind = LayerKind::Conv2D;
    s.name = name;
    s.in_channels = ic;
    s.out_channels = oc;
    s.kernel = 3;
    s.stride = 1;
    s.pad = 1;
    return g.add_node(std::move(s), {src});
  };
  const auto bn = [&](const std::string& name, NodeId src, int ch) {
    LayerSpec s;
    s.kind = LayerKind::BatchNorm;
    s.name = name;
    s.in_channels = s.out_channels = ch;
    return g.add_node(std::move(s), {src});
  };
  const auto relu = [&](const std::string& name, NodeId src) {
    LayerSpec s;
    s.kind = LayerKind::ReLU;
    s.name = name;
    return g.add_node(std::move(s), {src});
  };
  x = relu("relu1", bn("bn1", conv("conv1", x, in_ch, 8), 8));
  x = relu("relu2", bn("bn2", conv("conv2", x, 8, 8), 8));
  LayerSpec gap;
  gap.kind = LayerKind::GlobalAvgPool;
  gap.name = "avgpool";
  x = g.add_node(std::move(gap), {x});
  LayerSpec fc;
  fc.kind = LayerKind::FullyConnected;
  fc.name = "fc";
  fc.in_channels = 8;
  fc.out_channels = classes;
  fc.has_bias = true;
  g.add_node(std::move(fc), {x});
  g.validate();
  return g;
}

// Small residual classifier (two basic blocks, one with a downsample skip);
// exercises every quantized op kind including Add junction requantization.
inline dctfhe::NetworkGraph toy_residual_cnn(int in_ch = 3, int size = 8, int classes = 10) {
  using namespace dctfhe;
  NetworkGraph g;
  LayerSpec in;
  in.kind = LayerKind::Input;
  in.name = "input";
  in.input_dims = {in_ch, size, size};
  NodeId x = g.add_node(std::move(in), {});
  const auto conv = [&](const std::string& name, NodeId src, int ic, int oc, int k, int stride,
                        int pad) {
    LayerSpec s;
    s.kind = LayerKind::Conv2D;
    s.name = name;
    s.in_channels = ic;
    s.out_channels = oc;
    s.kernel = k;
    s.stride = stride;
    s.pad = pad;
    return g.add_node(std::move(s), {src});
  };
  const auto bn = [&](const std::string& name, NodeId src, int ch) {
    LayerSpec s;
    s.kind = LayerKind::BatchNorm;
    s.name = name;
    s.in_channels = s.out_channels = ch;
    return g.add_node(std::move(s), {src});
  };
  const auto relu = [&](const std::string& name, NodeId src) {
    LayerSpec s;
    s.kind = LayerKind::ReLU;
    s.name = name;
    return g.add_node(std::move(s), {src});
  };
  const auto add = [&](const std::string& name, NodeId a, NodeId b) {
    LayerSpec s;
    s.kind = LayerKind::Add;
    s.name = name;
    return g.add_node(std::move(s), {a, b});
  };

  x = relu("relu0", bn("bn0", conv("conv0", x, in_ch, 8, 3, 1, 1), 8));
  // identity-skip block
  NodeId skip = x;
  x = relu("b1.relu1", bn("b1.bn1", conv("b1.conv1", x, 8, 8, 3, 1, 1), 8));
  x = bn("b1.bn2", conv("b1.conv2", x, 8, 8, 3, 1, 1), 8);
  x = relu("b1.relu2", add("b1.add", x, skip));
  // downsample block 8 -> 12 channels, stride 2
  skip = bn("b2.ds_bn", conv("b2.ds", x, 8, 12, 1, 2, 0), 12);
  NodeId y = relu("b2.relu1", bn("b2.bn1", conv("b2.conv1", x, 8, 12, 3, 2, 1), 12));
  y = bn("b2.bn2", conv("b2.conv2", y, 12, 12, 3, 1, 1), 12);
  x = relu("b2.relu2", add("b2.add", y, skip));

  LayerSpec gap;
  gap.kind = LayerKind::GlobalAvgPool;
  gap.name = "avgpool";
  x = g.add_node(std::move(gap), {x});
  LayerSpec fc;
  fc.kind = LayerKind::FullyConnected;
  fc.name = "fc";
  fc.in_channels = 12;
  fc.out_channels = classes;
  fc.has_bias = true;
  g.add_node(std::move(fc), {x});
  g.validate();
  return g;
}

}  // namespace testutil
