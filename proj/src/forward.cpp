#include "dctfhe/forward.hpp"

#include <cmath>
#include <stdexcept>

namespace dctfhe {

PlaneF im2col(const Tensor3f& input, int kernel, int stride, int pad) {
  const int in_r = input.rows(), in_c = input.cols(), ch = input.channels();
  const int out_r = (in_r + 2 * pad - kernel) / stride + 1;
  const int out_c = (in_c + 2 * pad - kernel) / stride + 1;
  PlaneF patches(ch * kernel * kernel, out_r * out_c);
  for (int c = 0; c < ch; ++c) {
    const PlaneF& plane = input[c];
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const int row = (c * kernel + ky) * kernel + kx;
        for (int oy = 0; oy < out_r; ++oy) {
          const int iy = oy * stride - pad + ky;
          for (int ox = 0; ox < out_c; ++ox) {
            const int ix = ox * stride - pad + kx;
            const bool inside = iy >= 0 && iy < in_r && ix >= 0 && ix < in_c;
            patches(row, oy * out_c + ox) = inside ? plane(iy, ix) : 0.0f;
          }
        }
      }
    }
  }
  return patches;
}

namespace {

Tensor3f conv_forward(const Tensor3f& input, const NodeWeights& w, const LayerSpec& spec) {
  const int out_r = (input.rows() + 2 * spec.pad - spec.kernel) / spec.stride + 1;
  const int out_c = (input.cols() + 2 * spec.pad - spec.kernel) / spec.stride + 1;
  const PlaneF patches = im2col(input, spec.kernel, spec.stride, spec.pad);
  PlaneF result = w.weight * patches;  // (out_ch × taps) * (taps × pixels)
  if (w.bias.size() > 0) result.colwise() += w.bias;
  Tensor3f out(spec.out_channels, out_r, out_c);
  for (int c = 0; c < spec.out_channels; ++c) {
    out[c] = Eigen::Map<const PlaneF>(result.row(c).data(), out_r, out_c);
  }
  return out;
}

Tensor3f batchnorm_forward(const Tensor3f& input, const NodeWeights& w, float eps) {
  Tensor3f out = input;
  for (int c = 0; c < input.channels(); ++c) {
    const float inv = 1.0f / std::sqrt(w.running_var(c) + eps);
    out[c] = (input[c].array() - w.running_mean(c)) * (w.gamma(c) * inv) + w.beta(c);
  }
  return out;
}

Tensor3f maxpool_forward(const Tensor3f& input, const LayerSpec& spec) {
  const int out_r = (input.rows() + 2 * spec.pad - spec.kernel) / spec.stride + 1;
  const int out_c = (input.cols() + 2 * spec.pad - spec.kernel) / spec.stride + 1;
  Tensor3f out(input.channels(), out_r, out_c);
  for (int c = 0; c < input.channels(); ++c) {
    for (int oy = 0; oy < out_r; ++oy) {
      for (int ox = 0; ox < out_c; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        for (int ky = 0; ky < spec.kernel; ++ky) {
          for (int kx = 0; kx < spec.kernel; ++kx) {
            const int iy = oy * spec.stride - spec.pad + ky;
            const int ix = ox * spec.stride - spec.pad + kx;
            if (iy >= 0 && iy < input.rows() && ix >= 0 && ix < input.cols()) {
              best = std::max(best, input[c](iy, ix));
            }
          }
        }
        out[c](oy, ox) = best;
      }
    }
  }
  return out;
}

}  // namespace

ForwardResult forward_float(const NetworkGraph& graph, const WeightSet& weights,
                            const Tensor3f& input, ActivationTap* tap) {
  check_weights(graph, weights);
  std::vector<Tensor3f> values(graph.nodes.size());
  for (NodeId id = 0; id < static_cast<NodeId>(graph.nodes.size()); ++id) {
    const LayerSpec& n = graph.nodes[id];
    const auto& in = [&]() -> const Tensor3f& { return values[graph.preds[id][0]]; };
    switch (n.kind) {
      case LayerKind::Input:
        if (input.channels() != n.input_dims.channels || input.rows() != n.input_dims.rows ||
            input.cols() != n.input_dims.cols) {
          throw std::invalid_argument("forward_float: input dims mismatch");
        }
        values[id] = input;
        break;
      case LayerKind::Conv2D:
        values[id] = conv_forward(in(), weights.at(n.name), n);
        break;
      case LayerKind::BatchNorm:
        values[id] = batchnorm_forward(in(), weights.at(n.name), n.epsilon);
        break;
      case LayerKind::ReLU: {
        Tensor3f out = in();
        for (auto& p : out.planes) p = p.cwiseMax(0.0f);
        values[id] = std::move(out);
        break;
      }
      case LayerKind::MaxPool:
        values[id] = maxpool_forward(in(), n);
        break;
      case LayerKind::GlobalAvgPool: {
        const Tensor3f& x = in();
        Tensor3f out(x.channels(), 1, 1);
        for (int c = 0; c < x.channels(); ++c) out[c](0, 0) = x[c].mean();
        values[id] = std::move(out);
        break;
      }
      case LayerKind::Add: {
        const Tensor3f& a = values[graph.preds[id][0]];
        const Tensor3f& b = values[graph.preds[id][1]];
        Tensor3f out = a;
        for (int c = 0; c < out.channels(); ++c) out[c] += b[c];
        values[id] = std::move(out);
        break;
      }
      case LayerKind::FullyConnected: {
        const Tensor3f& x = in();
        Eigen::VectorXf flat(x.size());
        int64_t k = 0;
        for (int c = 0; c < x.channels(); ++c)
          for (int r = 0; r < x.rows(); ++r)
            for (int cc = 0; cc < x.cols(); ++cc) flat(k++) = x[c](r, cc);
        const NodeWeights& w = weights.at(n.name);
        Eigen::VectorXf logits = w.weight * flat;
        if (w.bias.size() > 0) logits += w.bias;
        Tensor3f out(n.out_channels, 1, 1);
        for (int c = 0; c < n.out_channels; ++c) out[c](0, 0) = logits(c);
        values[id] = std::move(out);
        break;
      }
    }
    if (tap) (*tap)[id] = values[id];
  }
  const Tensor3f& last = values[graph.output];
  ForwardResult res;
  res.logits.resize(last.channels());
  for (int c = 0; c < last.channels(); ++c) res.logits(c) = last[c](0, 0);
  return res;
}

}  // namespace dctfhe
