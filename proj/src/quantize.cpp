#include "dctfhe/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dctfhe/errors.hpp"
#include "dctfhe/simulate.hpp"

namespace dctfhe {

QuantParams make_qparams(double alpha, double beta, int bits, bool symmetric) {
  if (bits < 2 || bits > 8) throw std::invalid_argument("make_qparams: bits must be in [2,8]");
  if (!(alpha < beta)) throw std::invalid_argument("make_qparams: degenerate range");
  QuantParams qp;
  qp.bits = bits;
  qp.symmetric = symmetric;
  if (symmetric) {
    const double m = std::max(std::abs(alpha), std::abs(beta));
    if (m == 0.0) throw std::invalid_argument("make_qparams: degenerate symmetric range");
    qp.scale = m / static_cast<double>((int64_t{1} << (bits - 1)) - 1);
    qp.zero_point = 0;
  } else {
    qp.scale = (beta - alpha) / static_cast<double>((int64_t{1} << bits) - 1);
    const int64_t z = std::llround(-alpha / qp.scale);
    qp.zero_point = std::clamp<int64_t>(z, 0, (int64_t{1} << bits) - 1);
  }
  return qp;
}

int64_t quantize(double r, const QuantParams& qp) {
  const int64_t q =
      static_cast<int64_t>(std::floor(r / qp.scale + static_cast<double>(qp.zero_point)));
  return std::clamp(q, qp.qmin(), qp.qmax());
}

double dequantize(int64_t q, const QuantParams& qp) {
  return qp.scale * static_cast<double>(q - qp.zero_point);
}

void CryptoParams::validate() const {
  if (retained_precision < 1) {
    throw std::invalid_argument("crypto: retained precision must be >= 1");
  }
  if (retained_precision > kMaxLutDomainBits) {
    throw std::invalid_argument("crypto: retained precision above " +
                                std::to_string(kMaxLutDomainBits) + " is not materializable");
  }
  if (p_err < 0.0 || p_err > 1.0) throw std::invalid_argument("crypto: p_err out of [0,1]");
  if (p_err > 0.0) {
    if (k_distribution.empty()) {
      throw std::invalid_argument("crypto: p_err > 0 requires a k distribution");
    }
    double total = 0.0;
    for (const KOffset& k : k_distribution) {
      if (k.offset == 0) throw std::invalid_argument("crypto: k offsets must be nonzero");
      if (k.probability < 0.0) throw std::invalid_argument("crypto: negative k probability");
      total += k.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("crypto: k probabilities must sum to 1");
    }
  }
}

const char* to_string(LutKind k) { return k == LutKind::Relu ? "relu" : "requant"; }

LutKind lut_kind_from_string(const std::string& s) {
  if (s == "relu") return LutKind::Relu;
  if (s == "requant") return LutKind::Requant;
  throw std::invalid_argument("unknown lut kind: " + s);
}

int64_t IntQuant::quantize_clamped(double r) const {
  const double v = r / scale + static_cast<double>(zero);
  // keep the floor inside int64 territory before clamping
  if (v >= static_cast<double>(qmax)) return qmax;
  if (v <= static_cast<double>(qmin)) return qmin;
  return std::clamp(static_cast<int64_t>(std::floor(v)), qmin, qmax);
}

int64_t IntQuant::centered_maxabs() const {
  return std::max(std::abs(qmin - zero), std::abs(qmax - zero));
}

LutSpec build_lut(LutKind kind, double in_scale, const IntQuant& out, int retained_precision) {
  if (retained_precision < 1 || retained_precision > kMaxLutDomainBits) {
    throw std::invalid_argument("build_lut: retained precision out of range");
  }
  LutSpec lut;
  lut.kind = kind;
  lut.domain_bits = retained_precision;
  lut.in_scale = in_scale;
  lut.out = out;
  const int64_t half = int64_t{1} << (retained_precision - 1);
  lut.table.resize(static_cast<size_t>(2 * half));
  for (int64_t i = 0; i < 2 * half; ++i) {
    double r = in_scale * static_cast<double>(i - half);
    if (kind == LutKind::Relu) r = std::max(0.0, r);
    lut.table[static_cast<size_t>(i)] = static_cast<int32_t>(out.quantize_clamped(r));
  }
  return lut;
}

int accumulator_bits(int64_t bound) {
  if (bound < 0) throw std::invalid_argument("accumulator_bits: negative bound");
  int bits = 0;
  while ((int64_t{1} << bits) < bound + 1) ++bits;
  return bits + 1;  // sign
}

// ---- batchnorm folding -------------------------------------------------------

void fold_batchnorm(NetworkGraph& graph, WeightSet& weights) {
  graph.validate();
  std::vector<int> consumers(graph.nodes.size(), 0);
  for (const auto& ps : graph.preds)
    for (NodeId p : ps) ++consumers[p];

  std::vector<int> remap(graph.nodes.size(), -1);
  NetworkGraph folded;
  for (NodeId id = 0; id < static_cast<NodeId>(graph.nodes.size()); ++id) {
    const LayerSpec& n = graph.nodes[id];
    if (n.kind == LayerKind::BatchNorm) {
      const NodeId prev = graph.preds[id][0];
      if (graph.nodes[prev].kind != LayerKind::Conv2D) {
        throw std::invalid_argument("fold_batchnorm: " + n.name + " does not follow a conv");
      }
      if (consumers[prev] != 1) {
        throw std::invalid_argument("fold_batchnorm: conv " + graph.nodes[prev].name +
                                    " output branches before " + n.name);
      }
      const NodeWeights& bnw = weights.at(n.name);
      NodeWeights& convw = weights.at(graph.nodes[prev].name);
      if (convw.bias.size() == 0) convw.bias = Eigen::VectorXf::Zero(convw.weight.rows());
      for (int c = 0; c < convw.weight.rows(); ++c) {
        const float inv = 1.0f / std::sqrt(bnw.running_var(c) + n.epsilon);
        const float s = bnw.gamma(c) * inv;
        convw.weight.row(c) *= s;
        convw.bias(c) = bnw.beta(c) + s * (convw.bias(c) - bnw.running_mean(c));
      }
      weights.by_name.erase(n.name);
      remap[id] = remap[prev];  // consumers of the BN now read the conv
      continue;
    }
    LayerSpec spec = n;
    if (spec.kind == LayerKind::Conv2D) spec.has_bias = true;
    std::vector<NodeId> inputs;
    inputs.reserve(graph.preds[id].size());
    for (NodeId p : graph.preds[id]) inputs.push_back(remap[p]);
    remap[id] = folded.add_node(std::move(spec), std::move(inputs));
  }
  folded.output = remap[graph.output];
  folded.validate();
  graph = std::move(folded);
}

// ---- calibration ----------------------------------------------------------------

std::map<NodeId, TensorRange> calibrate(const NetworkGraph& graph, const WeightSet& weights,
                                        const std::vector<Tensor3f>& sample_batch,
                                        std::vector<std::string>* warnings) {
  if (sample_batch.empty()) throw std::invalid_argument("calibrate: empty batch");
  std::map<NodeId, TensorRange> ranges;
  bool first = true;
  for (const Tensor3f& sample : sample_batch) {
    ActivationTap tap;
    forward_float(graph, weights, sample, &tap);
    for (const auto& [id, tensor] : tap) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& plane : tensor.planes) {
        lo = std::min(lo, static_cast<double>(plane.minCoeff()));
        hi = std::max(hi, static_cast<double>(plane.maxCoeff()));
      }
      if (first) {
        ranges[id] = {lo, hi};
      } else {
        ranges[id].alpha = std::min(ranges[id].alpha, lo);
        ranges[id].beta = std::max(ranges[id].beta, hi);
      }
    }
    first = false;
  }
  for (auto& [id, r] : ranges) {
    if (r.alpha == r.beta) {
      r.alpha -= 1e-6;
      r.beta += 1e-6;
      if (warnings) {
        warnings->push_back("calibrate: degenerate range at " + graph.nodes[id].name +
                            " widened to +/-1e-6");
      }
    }
  }
  return ranges;
}

// ---- integer format propagation ---------------------------------------------------

namespace {

TensorFormat format_from_qparams(const QuantParams& qp) {
  TensorFormat f;
  f.scale = qp.scale;
  f.lo = qp.qmin() - qp.zero_point;
  f.hi = qp.qmax() - qp.zero_point;
  f.bits = accumulator_bits(f.maxabs());
  return f;
}

// Worst-case |accumulator| over output channels: per-channel sum of |w| taps
// times the input magnitude bound, plus that channel's bias.
int64_t conv_accumulator_bound(const ConvQuant& cq, int64_t in_maxabs) {
  int64_t bound = 0;
  for (int c = 0; c < cq.weight.rows(); ++c) {
    int64_t taps = 0;
    for (int k = 0; k < cq.weight.cols(); ++k) taps += std::abs(int64_t{cq.weight(c, k)});
    const int64_t bias = c < static_cast<int>(cq.bias.size()) ? std::abs(cq.bias[c]) : 0;
    bound = std::max(bound, taps * in_maxabs + bias);
  }
  return bound;
}

TensorFormat rounded_accumulator_format(double raw_scale, int64_t bound, int width_bits,
                                        int retained) {
  TensorFormat f;
  if (width_bits <= retained) {
    f.scale = raw_scale;
    f.lo = -bound;
    f.hi = bound;
    f.bits = width_bits;
    return f;
  }
  const int shift = width_bits - retained;
  const int64_t rounded = round_accumulator(bound, width_bits, retained);
  f.scale = raw_scale * static_cast<double>(int64_t{1} << shift);
  f.lo = -rounded;
  f.hi = rounded;
  f.bits = accumulator_bits(rounded);
  return f;
}

// One format transition; the single source of truth shared by model
// construction and by propagate_formats (hence by the simulator).
TensorFormat node_format(const QuantizedModel& model, NodeId id,
                         const std::map<NodeId, TensorFormat>& fmt,
                         const std::map<NodeId, Shape3>& shapes) {
  const NetworkGraph& g = model.graph;
  const LayerSpec& n = g.nodes[id];
  const int t = model.crypto.retained_precision;
  switch (n.kind) {
    case LayerKind::Input:
      return format_from_qparams(model.input_qp);
    case LayerKind::Conv2D:
    case LayerKind::FullyConnected: {
      const TensorFormat& in = fmt.at(g.preds[id][0]);
      const ConvQuant& cq = model.conv.at(id);
      const int64_t bound = conv_accumulator_bound(cq, in.maxabs());
      return rounded_accumulator_format(in.scale * cq.weight_scale, bound,
                                        accumulator_bits(bound), t);
    }
    case LayerKind::ReLU:
      return format_from_qparams(model.activation.at(id));
    case LayerKind::MaxPool:
      return fmt.at(g.preds[id][0]);
    case LayerKind::GlobalAvgPool: {
      const TensorFormat& in = fmt.at(g.preds[id][0]);
      const Shape3& in_shape = shapes.at(g.preds[id][0]);
      const int64_t window = int64_t{in_shape.rows} * in_shape.cols;
      TensorFormat f;
      f.scale = in.scale / static_cast<double>(window);
      f.lo = in.lo * window;
      f.hi = in.hi * window;
      f.bits = accumulator_bits(f.maxabs());
      return f;
    }
    case LayerKind::Add: {
      // main operand is requantized into the skip operand's format before the
      // integer addition, so the sum stays in the skip scale with doubled range
      const TensorFormat& skip = fmt.at(g.preds[id][1]);
      TensorFormat f;
      f.scale = skip.scale;
      f.lo = 2 * skip.lo;
      f.hi = 2 * skip.hi;
      f.bits = accumulator_bits(f.maxabs());
      return f;
    }
    case LayerKind::BatchNorm:
      throw std::invalid_argument("node_format: model still contains batchnorm");
  }
  throw std::logic_error("node_format: unreachable");
}

}  // namespace

std::map<NodeId, TensorFormat> propagate_formats(const QuantizedModel& model) {
  const NetworkGraph& g = model.graph;
  const auto shapes = infer_shapes(g, g.nodes[0].input_dims);
  std::map<NodeId, TensorFormat> fmt;
  for (NodeId id = 0; id < static_cast<NodeId>(g.nodes.size()); ++id) {
    fmt[id] = node_format(model, id, fmt, shapes);
  }
  return fmt;
}

int circuit_bitwidth(const QuantizedModel& model) {
  int bits = 1;
  for (const auto& [id, cq] : model.conv) bits = std::max(bits, cq.acc_bits);
  return bits;
}

// ---- full pipeline -------------------------------------------------------------------

QuantizedModel quantize_model(const NetworkGraph& graph, const WeightSet& weights,
                              const std::vector<Tensor3f>& calibration_batch, int bits,
                              CryptoParams crypto) {
  crypto.validate();
  QuantizedModel model;
  model.graph = graph;
  model.bits = bits;
  model.crypto = crypto;
  WeightSet folded_weights = weights;
  fold_batchnorm(model.graph, folded_weights);
  check_weights(model.graph, folded_weights);

  const auto ranges = calibrate(model.graph, folded_weights, calibration_batch, &model.warnings);
  const NetworkGraph& g = model.graph;
  const int t = crypto.retained_precision;

  // weights: per-tensor symmetric
  for (NodeId id = 0; id < static_cast<NodeId>(g.nodes.size()); ++id) {
    const LayerSpec& n = g.nodes[id];
    if (n.kind != LayerKind::Conv2D && n.kind != LayerKind::FullyConnected) continue;
    const NodeWeights& w = folded_weights.at(n.name);
    double m = static_cast<double>(w.weight.cwiseAbs().maxCoeff());
    if (m == 0.0) {
      m = 1e-6;
      model.warnings.push_back("quantize_model: all-zero weights at " + n.name);
    }
    const QuantParams wq = make_qparams(-m, m, bits, true);
    ConvQuant cq;
    cq.weight_scale = wq.scale;
    cq.weight.resize(w.weight.rows(), w.weight.cols());
    for (int r = 0; r < w.weight.rows(); ++r) {
      for (int c = 0; c < w.weight.cols(); ++c) {
        // round-to-nearest for weights: floor would shift every tap by -S/2,
        // which does not cancel against the nonnegative post-ReLU activations
        const int64_t q =
            std::clamp<int64_t>(std::llround(w.weight(r, c) / wq.scale), wq.qmin(), wq.qmax());
        cq.weight(r, c) = static_cast<int32_t>(q);
      }
    }
    model.conv.emplace(id, std::move(cq));
  }

  // activations: asymmetric, from calibrated ranges
  model.input_qp = make_qparams(ranges.at(0).alpha, ranges.at(0).beta, bits, false);
  for (NodeId id = 0; id < static_cast<NodeId>(g.nodes.size()); ++id) {
    if (g.nodes[id].kind == LayerKind::ReLU) {
      model.activation[id] = make_qparams(ranges.at(id).alpha, ranges.at(id).beta, bits, false);
    }
  }

  // bias quantization and accumulator bounds walk the graph in order, since a
  // layer's bias scale is its input scale times its weight scale
  const auto shapes = infer_shapes(g, g.nodes[0].input_dims);
  std::map<NodeId, TensorFormat> fmt;
  for (NodeId id = 0; id < static_cast<NodeId>(g.nodes.size()); ++id) {
    const LayerSpec& n = g.nodes[id];
    if (n.kind == LayerKind::Conv2D || n.kind == LayerKind::FullyConnected) {
      const TensorFormat& in = fmt.at(g.preds[id][0]);
      ConvQuant& cq = model.conv.at(id);
      const double raw_scale = in.scale * cq.weight_scale;
      const NodeWeights& w = folded_weights.at(n.name);
      cq.bias.assign(static_cast<size_t>(n.out_channels), 0);
      if (w.bias.size() > 0) {
        for (int c = 0; c < n.out_channels; ++c) {
          cq.bias[static_cast<size_t>(c)] = std::llround(w.bias(c) / raw_scale);
        }
      }
      cq.acc_bits = accumulator_bits(conv_accumulator_bound(cq, in.maxabs()));
    }
    fmt[id] = node_format(model, id, fmt, shapes);
  }

  // LUTs: one per ReLU (activation) and one per Add (main-path requantization)
  for (NodeId id = 0; id < static_cast<NodeId>(g.nodes.size()); ++id) {
    const LayerSpec& n = g.nodes[id];
    if (n.kind == LayerKind::ReLU) {
      const NodeId producer = g.preds[id][0];
      const TensorFormat& in = fmt.at(producer);
      const double in_scale =
          in.scale * static_cast<double>(int64_t{1} << std::max(0, in.bits - t));
      const QuantParams& qp = model.activation.at(id);
      const IntQuant out{qp.scale, qp.zero_point, qp.qmin(), qp.qmax()};
      model.luts.emplace(id, build_lut(LutKind::Relu, in_scale, out, t));
      if (g.nodes[producer].kind == LayerKind::Conv2D && t > model.conv.at(producer).acc_bits) {
        model.warnings.push_back("lut at " + n.name + ": retained precision exceeds the " +
                                 std::to_string(model.conv.at(producer).acc_bits) +
                                 "-bit accumulator; part of the domain is unreachable");
      }
    } else if (n.kind == LayerKind::Add) {
      const TensorFormat& main = fmt.at(g.preds[id][0]);
      const TensorFormat& skip = fmt.at(g.preds[id][1]);
      const double in_scale =
          main.scale * static_cast<double>(int64_t{1} << std::max(0, main.bits - t));
      const IntQuant out{skip.scale, 0, skip.lo, skip.hi};  // centered skip domain
      model.luts.emplace(id, build_lut(LutKind::Requant, in_scale, out, t));
    }
  }

  model.crypto.circuit_bitwidth = circuit_bitwidth(model);
  return model;
}

}  // namespace dctfhe
