#include "dctfhe/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dctfhe/errors.hpp"

namespace dctfhe {

int64_t CostTrace::relu_lut_evals() const {
  int64_t total = 0;
  for (const NodeTraceRow& row : per_node) {
    if (row.kind == LayerKind::ReLU) total += row.lut_evals;
  }
  return total;
}

int64_t CostTrace::requant_lut_evals() const {
  int64_t total = 0;
  for (const NodeTraceRow& row : per_node) {
    if (row.kind == LayerKind::Add) total += row.lut_evals;
  }
  return total;
}

int64_t round_accumulator(int64_t a, int width_bits, int retained_bits) {
  if (retained_bits < 1) throw std::invalid_argument("round_accumulator: retained bits < 1");
  if (retained_bits >= width_bits) return a;
  const int shift = width_bits - retained_bits;
  const int64_t half = int64_t{1} << (shift - 1);
  const int64_t mag = (std::abs(a) + half) >> shift;  // round half away from zero
  return a < 0 ? -mag : mag;
}

int32_t lut_eval(const LutSpec& lut, int64_t x, const CryptoParams& crypto,
                 const NoiseChannel& noise, NodeId node, int64_t element) {
  x = std::clamp(x, lut.domain_min(), lut.domain_max());
  if (crypto.p_err > 0.0 && noise.uniform(node, element, 0) < crypto.p_err) {
    const double u = noise.uniform(node, element, 1);
    double cumulative = 0.0;
    int offset = crypto.k_distribution.back().offset;
    for (const KOffset& k : crypto.k_distribution) {
      cumulative += k.probability;
      if (u < cumulative) {
        offset = k.offset;
        break;
      }
    }
    x = std::clamp(x + offset, lut.domain_min(), lut.domain_max());
  }
  return lut.at(x);
}

int argmax_label(const Eigen::VectorXf& logits) {
  int best = 0;
  for (int i = 1; i < logits.size(); ++i) {
    if (logits(i) > logits(best)) best = i;  // ties keep the lowest index
  }
  return best;
}

namespace {

struct Engine {
  const QuantizedModel& model;
  const PbsModel& pbs_model;
  CryptoParams crypto;  // p_err forced to 0 for exact runs
  NoiseChannel noise;
  std::map<NodeId, TensorFormat> fmt;
  std::map<NodeId, Shape3> shapes;
  CostTrace trace;

  Engine(const QuantizedModel& m, const PbsModel& pm, double p_err, uint64_t seed)
      : model(m), pbs_model(pm), crypto(m.crypto), noise{seed} {
    crypto.p_err = p_err;
    fmt = propagate_formats(m);
    shapes = infer_shapes(m.graph, m.graph.nodes[0].input_dims);
  }

  int64_t accumulator_cap() const {
    return (int64_t{1} << (model.crypto.circuit_bitwidth - 1)) - 1;
  }

  void note_accumulator(int64_t acc, const std::string& name) {
    const int64_t mag = std::abs(acc);
    trace.max_abs_accumulator = std::max(trace.max_abs_accumulator, mag);
    if (mag > accumulator_cap()) {
      throw InvariantError("accumulator at " + name + " exceeded the " +
                           std::to_string(model.crypto.circuit_bitwidth) +
                           "-bit circuit bound");
    }
  }

  Tensor3i64 conv_like(NodeId id, const Tensor3i64& input) {
    const LayerSpec& n = model.graph.nodes[id];
    const ConvQuant& cq = model.conv.at(id);
    const Shape3 out_shape = shapes.at(id);
    const bool fc = n.kind == LayerKind::FullyConnected;
    const int out_r = fc ? 1 : out_shape.rows;
    const int out_c = fc ? 1 : out_shape.cols;
    const int taps = static_cast<int>(cq.weight.cols());

    // gather patches (zero padding), then a plain integer GEMM
    PlaneI64 patches(taps, out_r * out_c);
    if (fc) {
      int64_t k = 0;
      for (int c = 0; c < input.channels(); ++c)
        for (int r = 0; r < input.rows(); ++r)
          for (int cc = 0; cc < input.cols(); ++cc) patches(k++, 0) = input[c](r, cc);
    } else {
      for (int c = 0; c < n.in_channels; ++c) {
        for (int ky = 0; ky < n.kernel; ++ky) {
          for (int kx = 0; kx < n.kernel; ++kx) {
            const int row = (c * n.kernel + ky) * n.kernel + kx;
            for (int oy = 0; oy < out_r; ++oy) {
              const int iy = oy * n.stride - n.pad + ky;
              for (int ox = 0; ox < out_c; ++ox) {
                const int ix = ox * n.stride - n.pad + kx;
                const bool inside =
                    iy >= 0 && iy < input.rows() && ix >= 0 && ix < input.cols();
                patches(row, oy * out_c + ox) = inside ? input[c](iy, ix) : 0;
              }
            }
          }
        }
      }
    }
    PlaneI64 weight = cq.weight.cast<int64_t>();
    PlaneI64 acc = weight * patches;
    for (int c = 0; c < acc.rows(); ++c) acc.row(c).array() += cq.bias[static_cast<size_t>(c)];

    const int t = model.crypto.retained_precision;
    Tensor3i64 out(out_shape.channels, out_r, out_c);
    for (int c = 0; c < out_shape.channels; ++c) {
      for (int oy = 0; oy < out_r; ++oy) {
        for (int ox = 0; ox < out_c; ++ox) {
          const int64_t a = acc(c, oy * out_c + ox);
          note_accumulator(a, n.name);
          out[c](oy, ox) = round_accumulator(a, cq.acc_bits, t);
        }
      }
    }
    const int64_t macs = int64_t{taps} * out_r * out_c * out_shape.channels;
    trace.per_node.push_back({id, n.kind, macs, 0, 0, 0});
    trace.macs += macs;
    return out;
  }

  // shared by ReLU nodes and Add-junction requantization
  Tensor3i64 apply_lut(NodeId id, const Tensor3i64& input, const TensorFormat& in_fmt,
                       int64_t pbs_per_element) {
    const LutSpec& lut = model.luts.at(id);
    const int t = model.crypto.retained_precision;
    Tensor3i64 out(input.channels(), input.rows(), input.cols());
    int64_t element = 0;
    for (int c = 0; c < input.channels(); ++c) {
      for (int r = 0; r < input.rows(); ++r) {
        for (int cc = 0; cc < input.cols(); ++cc) {
          const int64_t v = round_accumulator(input[c](r, cc), in_fmt.bits, t);
          const int32_t raw = lut_eval(lut, v, crypto, noise, id, element);
          out[c](r, cc) = int64_t{raw} - lut.out.zero;  // centered
          ++element;
        }
      }
    }
    const int64_t evals = input.size();
    trace.lut_evals += evals;
    trace.pbs_invocations += evals * pbs_per_element;
    trace.per_node.push_back({id, model.graph.nodes[id].kind, 0, evals,
                              evals * pbs_per_element, 0});
    return out;
  }

  struct Output {
    Eigen::VectorXf dequantized;
    int output_node = -1;
  };

  // Runs through the graph; when stop_at_gap is set, returns the dequantized
  // global-average-pool features instead of the logits.
  Output run(const Tensor3f& input, bool stop_at_gap) {
    const NetworkGraph& g = model.graph;
    const Shape3 in_dims = g.nodes[0].input_dims;
    if (input.channels() != in_dims.channels || input.rows() != in_dims.rows ||
        input.cols() != in_dims.cols) {
      throw std::invalid_argument("run: input dims mismatch");
    }

    std::vector<Tensor3i64> values(g.nodes.size());
    for (NodeId id = 0; id < static_cast<NodeId>(g.nodes.size()); ++id) {
      const LayerSpec& n = g.nodes[id];
      switch (n.kind) {
        case LayerKind::Input: {
          Tensor3i64 q(input.channels(), input.rows(), input.cols());
          for (int c = 0; c < input.channels(); ++c)
            for (int r = 0; r < input.rows(); ++r)
              for (int cc = 0; cc < input.cols(); ++cc)
                q[c](r, cc) = quantize(input[c](r, cc), model.input_qp) -
                              model.input_qp.zero_point;
          values[id] = std::move(q);
          break;
        }
        case LayerKind::Conv2D:
        case LayerKind::FullyConnected:
          values[id] = conv_like(id, values[g.preds[id][0]]);
          break;
        case LayerKind::ReLU:
          values[id] = apply_lut(id, values[g.preds[id][0]], fmt.at(g.preds[id][0]),
                                 pbs_model.pbs_per_relu_element);
          break;
        case LayerKind::MaxPool: {
          const Tensor3i64& in = values[g.preds[id][0]];
          const Shape3 out_shape = shapes.at(id);
          Tensor3i64 out(out_shape.channels, out_shape.rows, out_shape.cols);
          for (int c = 0; c < out_shape.channels; ++c) {
            for (int oy = 0; oy < out_shape.rows; ++oy) {
              for (int ox = 0; ox < out_shape.cols; ++ox) {
                int64_t best = std::numeric_limits<int64_t>::min();
                for (int ky = 0; ky < n.kernel; ++ky) {
                  for (int kx = 0; kx < n.kernel; ++kx) {
                    const int iy = oy * n.stride - n.pad + ky;
                    const int ix = ox * n.stride - n.pad + kx;
                    if (iy >= 0 && iy < in.rows() && ix >= 0 && ix < in.cols()) {
                      best = std::max(best, in[c](iy, ix));
                    }
                  }
                }
                out[c](oy, ox) = best;
              }
            }
          }
          const int64_t comparators =
              out_shape.elements() * (int64_t{n.kernel} * n.kernel - 1);
          const int64_t pbs = comparators * pbs_model.pbs_per_maxpool_comparator;
          trace.pbs_invocations += pbs;
          trace.per_node.push_back({id, n.kind, 0, 0, pbs, 0});
          values[id] = std::move(out);
          break;
        }
        case LayerKind::GlobalAvgPool: {
          const Tensor3i64& in = values[g.preds[id][0]];
          Tensor3i64 out(in.channels(), 1, 1);
          for (int c = 0; c < in.channels(); ++c) out[c](0, 0) = in[c].sum();
          const int64_t additions =
              int64_t{in.channels()} * (int64_t{in.rows()} * in.cols() - 1);
          trace.additions += additions;
          trace.per_node.push_back({id, n.kind, 0, 0, 0, additions});
          values[id] = std::move(out);
          if (stop_at_gap) {
            const Tensor3i64& features = values[id];
            Output res;
            res.output_node = id;
            res.dequantized.resize(features.channels());
            const double s = fmt.at(id).scale;
            for (int c = 0; c < features.channels(); ++c) {
              res.dequantized(c) = static_cast<float>(s * static_cast<double>(features[c](0, 0)));
            }
            return res;
          }
          break;
        }
        case LayerKind::Add: {
          const Tensor3i64& skip = values[g.preds[id][1]];
          const Tensor3i64 main =
              apply_lut(id, values[g.preds[id][0]], fmt.at(g.preds[id][0]),
                        pbs_model.pbs_per_requant_element);
          Tensor3i64 out = main;
          for (int c = 0; c < out.channels(); ++c) out[c] += skip[c];
          trace.additions += out.size();
          trace.per_node.back().additions += out.size();
          values[id] = std::move(out);
          break;
        }
        case LayerKind::BatchNorm:
          throw std::invalid_argument("run: model still contains batchnorm");
      }
    }

    const Tensor3i64& last = values[g.output];
    Output res;
    res.output_node = g.output;
    res.dequantized.resize(last.channels());
    const double s = fmt.at(g.output).scale;
    for (int c = 0; c < last.channels(); ++c)
      res.dequantized(c) = static_cast<float>(s * static_cast<double>(last[c](0, 0)));
    return res;
  }
};

RunResult run_impl(const QuantizedModel& model, const Tensor3f& input, double p_err,
                   uint64_t seed, const PbsModel& pbs_model) {
  Engine engine(model, pbs_model, p_err, seed);
  Engine::Output out = engine.run(input, false);
  RunResult res;
  res.logits = std::move(out.dequantized);
  res.label = argmax_label(res.logits);
  res.trace = std::move(engine.trace);
  return res;
}

}  // namespace

RunResult run_exact(const QuantizedModel& model, const Tensor3f& input,
                    const PbsModel& pbs_model) {
  return run_impl(model, input, 0.0, 0, pbs_model);
}

RunResult run_noisy(const QuantizedModel& model, const Tensor3f& input, uint64_t seed,
                    const PbsModel& pbs_model) {
  return run_impl(model, input, model.crypto.p_err, seed, pbs_model);
}

SplitResult run_split(const QuantizedModel& model, const Tensor3f& input, uint64_t seed,
                      const NodeWeights& client_fc) {
  Engine engine(model, PbsModel{}, model.crypto.p_err, seed);
  Engine::Output out = engine.run(input, true);
  if (out.output_node < 0 ||
      model.graph.nodes[out.output_node].kind != LayerKind::GlobalAvgPool) {
    throw std::invalid_argument("run_split: model has no global average pool");
  }
  if (client_fc.weight.cols() != out.dequantized.size()) {
    throw std::invalid_argument("run_split: client fc width " +
                                std::to_string(client_fc.weight.cols()) +
                                " does not match feature length " +
                                std::to_string(out.dequantized.size()));
  }
  SplitResult res;
  res.features = std::move(out.dequantized);
  res.logits = client_fc.weight * res.features;
  if (client_fc.bias.size() > 0) res.logits += client_fc.bias;
  res.label = argmax_label(res.logits);
  return res;
}

}  // namespace dctfhe
