#include "dctfhe/graph.hpp"

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "dctfhe/rng.hpp"

namespace dctfhe {

const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Input: return "input";
    case LayerKind::Conv2D: return "conv";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::ReLU: return "relu";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::GlobalAvgPool: return "gap";
    case LayerKind::Add: return "add";
    case LayerKind::FullyConnected: return "fc";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "input") return LayerKind::Input;
  if (s == "conv") return LayerKind::Conv2D;
  if (s == "batchnorm") return LayerKind::BatchNorm;
  if (s == "relu") return LayerKind::ReLU;
  if (s == "maxpool") return LayerKind::MaxPool;
  if (s == "gap") return LayerKind::GlobalAvgPool;
  if (s == "add") return LayerKind::Add;
  if (s == "fc") return LayerKind::FullyConnected;
  throw std::invalid_argument("unknown layer kind: " + s);
}

const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::ResNet18Rgb: return "resnet18-rgb";
    case Architecture::ResNet18Dct: return "resnet18-dct";
    case Architecture::ResNet20Rgb: return "resnet20-rgb";
    case Architecture::ResNet20Dct: return "resnet20-dct";
  }
  return "?";
}

Architecture architecture_from_string(const std::string& s) {
  if (s == "resnet18-rgb" || s == "resnet18_rgb") return Architecture::ResNet18Rgb;
  if (s == "resnet18-dct" || s == "resnet18_dct") return Architecture::ResNet18Dct;
  if (s == "resnet20-rgb" || s == "resnet20_rgb") return Architecture::ResNet20Rgb;
  if (s == "resnet20-dct" || s == "resnet20_dct") return Architecture::ResNet20Dct;
  throw std::invalid_argument("unknown architecture: " + s);
}

NodeId NetworkGraph::add_node(LayerSpec spec, std::vector<NodeId> inputs) {
  for (NodeId in : inputs) {
    if (in < 0 || in >= static_cast<NodeId>(nodes.size())) {
      throw std::invalid_argument("add_node: predecessor out of range for " + spec.name);
    }
  }
  nodes.push_back(std::move(spec));
  preds.push_back(std::move(inputs));
  output = static_cast<NodeId>(nodes.size()) - 1;
  return output;
}

NodeId NetworkGraph::find(const std::string& name) const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].name == name) return static_cast<NodeId>(i);
  }
  return -1;
}

void NetworkGraph::validate() const {
  if (nodes.empty()) throw std::invalid_argument("graph: empty");
  if (nodes.size() != preds.size()) throw std::invalid_argument("graph: nodes/preds mismatch");
  int inputs = 0;
  std::set<std::string> names;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (!names.insert(nodes[i].name).second) {
      throw std::invalid_argument("graph: duplicate node name " + nodes[i].name);
    }
    if (nodes[i].kind == LayerKind::Input) {
      ++inputs;
      if (!preds[i].empty()) throw std::invalid_argument("graph: input node has predecessors");
    } else if (preds[i].empty()) {
      throw std::invalid_argument("graph: node " + nodes[i].name + " has no inputs");
    }
    for (NodeId p : preds[i]) {
      // stored topological order: predecessors precede consumers, so acyclic
      if (p >= static_cast<NodeId>(i)) {
        throw std::invalid_argument("graph: node " + nodes[i].name + " not in topological order");
      }
    }
    if (nodes[i].kind == LayerKind::Add && preds[i].size() != 2) {
      throw std::invalid_argument("graph: add node " + nodes[i].name + " needs two inputs");
    }
  }
  if (inputs != 1) throw std::invalid_argument("graph: exactly one input node required");
  if (output < 0 || output >= static_cast<NodeId>(nodes.size())) {
    throw std::invalid_argument("graph: bad output node");
  }
}

namespace {

struct Builder {
  NetworkGraph g;

  NodeId conv(const std::string& name, NodeId in, int in_ch, int out_ch, int kernel,
              int stride, int pad) {
    LayerSpec s;
    s.kind = LayerKind::Conv2D;
    s.name = name;
    s.in_channels = in_ch;
    s.out_channels = out_ch;
    s.kernel = kernel;
    s.stride = stride;
    s.pad = pad;
    s.has_bias = false;  // BN absorbs conv biases
    return g.add_node(std::move(s), {in});
  }

  NodeId bn(const std::string& name, NodeId in, int ch) {
    LayerSpec s;
    s.kind = LayerKind::BatchNorm;
    s.name = name;
    s.in_channels = s.out_channels = ch;
    return g.add_node(std::move(s), {in});
  }

  NodeId relu(const std::string& name, NodeId in) {
    LayerSpec s;
    s.kind = LayerKind::ReLU;
    s.name = name;
    return g.add_node(std::move(s), {in});
  }

  NodeId add(const std::string& name, NodeId main, NodeId skip) {
    LayerSpec s;
    s.kind = LayerKind::Add;
    s.name = name;
    return g.add_node(std::move(s), {main, skip});
  }

  // Basic residual block: conv-bn-relu-conv-bn + skip, relu after the add.
  // The skip path gains a 1x1 conv + BN when stride or channel count changes.
  NodeId basic_block(const std::string& prefix, NodeId in, int in_ch, int out_ch, int stride) {
    NodeId x = conv(prefix + ".conv1", in, in_ch, out_ch, 3, stride, 1);
    x = bn(prefix + ".bn1", x, out_ch);
    x = relu(prefix + ".relu1", x);
    x = conv(prefix + ".conv2", x, out_ch, out_ch, 3, 1, 1);
    x = bn(prefix + ".bn2", x, out_ch);
    NodeId skip = in;
    if (stride != 1 || in_ch != out_ch) {
      skip = conv(prefix + ".downsample", in, in_ch, out_ch, 1, stride, 0);
      skip = bn(prefix + ".downsample_bn", skip, out_ch);
    }
    x = add(prefix + ".add", x, skip);
    return relu(prefix + ".relu2", x);
  }
};

NetworkGraph build_resnet(bool is18, bool dct, const Shape3& input_dims, int num_classes) {
  Builder b;
  LayerSpec in;
  in.kind = LayerKind::Input;
  in.name = "input";
  in.input_dims = input_dims;
  NodeId x = b.g.add_node(std::move(in), {});

  std::vector<int> stage_channels;
  std::vector<int> stage_strides;
  int blocks_per_stage = 0;
  int head_out = 0;

  if (is18) {
    stage_channels = {64, 128, 256, 512};
    stage_strides = {1, 2, 2, 2};
    blocks_per_stage = 2;
    head_out = 64;
  } else if (dct) {
    // small-image frequency variant: widened stages, first downsample removed
    stage_channels = {48, 56, 64};
    stage_strides = {1, 1, 2};
    blocks_per_stage = 3;
    head_out = 48;
  } else {
    stage_channels = {16, 32, 64};
    stage_strides = {1, 2, 2};
    blocks_per_stage = 3;
    head_out = 16;
  }

  if (dct) {
    // frequency-domain head: 1x1 stride-1 conv + BN, ReLU pruned, no pooling
    x = b.conv("conv1", x, input_dims.channels, head_out, 1, 1, 0);
    x = b.bn("bn1", x, head_out);
  } else if (is18) {
    x = b.conv("conv1", x, input_dims.channels, head_out, 7, 2, 3);
    x = b.bn("bn1", x, head_out);
    x = b.relu("relu1", x);
    LayerSpec mp;
    mp.kind = LayerKind::MaxPool;
    mp.name = "maxpool";
    mp.kernel = 3;
    mp.stride = 2;
    mp.pad = 1;
    x = b.g.add_node(std::move(mp), {x});
  } else {
    x = b.conv("conv1", x, input_dims.channels, head_out, 3, 1, 1);
    x = b.bn("bn1", x, head_out);
    x = b.relu("relu1", x);
  }

  int cur = head_out;
  for (size_t s = 0; s < stage_channels.size(); ++s) {
    for (int blk = 0; blk < blocks_per_stage; ++blk) {
      const int stride = blk == 0 ? stage_strides[s] : 1;
      const std::string prefix = "layer" + std::to_string(s + 1) + "." + std::to_string(blk);
      x = b.basic_block(prefix, x, cur, stage_channels[s], stride);
      cur = stage_channels[s];
    }
  }

  LayerSpec gap;
  gap.kind = LayerKind::GlobalAvgPool;
  gap.name = "avgpool";
  x = b.g.add_node(std::move(gap), {x});

  LayerSpec fc;
  fc.kind = LayerKind::FullyConnected;
  fc.name = "fc";
  fc.in_channels = cur;
  fc.out_channels = num_classes;
  fc.has_bias = true;
  b.g.add_node(std::move(fc), {x});

  b.g.validate();
  return b.g;
}

}  // namespace

NetworkGraph build_network(Architecture arch, const Shape3& input_dims,
                           const BuildOptions& options) {
  const bool is18 = arch == Architecture::ResNet18Rgb || arch == Architecture::ResNet18Dct;
  const bool dct = arch == Architecture::ResNet18Dct || arch == Architecture::ResNet20Dct;
  const int num_classes = options.num_classes > 0 ? options.num_classes : (is18 ? 1000 : 10);

  if (input_dims.channels < 1 || input_dims.rows < 1 || input_dims.cols < 1) {
    throw std::invalid_argument("build_network: bad input dims");
  }
  if (!dct && input_dims.channels != 3) {
    throw std::invalid_argument("build_network: RGB variants expect 3 input channels");
  }
  if (arch == Architecture::ResNet20Dct && input_dims.channels != 48) {
    throw std::invalid_argument("build_network: resnet20-dct expects 48 frequency channels");
  }
  NetworkGraph g = build_resnet(is18, dct, input_dims, num_classes);
  infer_shapes(g, input_dims);  // reject dims the topology cannot carry
  return g;
}

namespace {

int conv_out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

}  // namespace

std::map<NodeId, Shape3> infer_shapes(const NetworkGraph& graph, const Shape3& input_dims) {
  graph.validate();
  std::map<NodeId, Shape3> shapes;
  for (NodeId id = 0; id < static_cast<NodeId>(graph.nodes.size()); ++id) {
    const LayerSpec& n = graph.nodes[id];
    const auto in_shape = [&](int operand) { return shapes.at(graph.preds[id][operand]); };
    Shape3 out;
    switch (n.kind) {
      case LayerKind::Input:
        out = input_dims;
        break;
      case LayerKind::Conv2D: {
        const Shape3 in = in_shape(0);
        if (in.channels != n.in_channels) {
          throw std::invalid_argument("infer_shapes: channel mismatch at " + n.name);
        }
        out.channels = n.out_channels;
        out.rows = conv_out_dim(in.rows, n.kernel, n.stride, n.pad);
        out.cols = conv_out_dim(in.cols, n.kernel, n.stride, n.pad);
        if (out.rows < 1 || out.cols < 1) {
          throw std::invalid_argument("infer_shapes: spatial dims vanish at " + n.name);
        }
        break;
      }
      case LayerKind::BatchNorm:
      case LayerKind::ReLU:
        out = in_shape(0);
        break;
      case LayerKind::MaxPool: {
        const Shape3 in = in_shape(0);
        out.channels = in.channels;
        out.rows = conv_out_dim(in.rows, n.kernel, n.stride, n.pad);
        out.cols = conv_out_dim(in.cols, n.kernel, n.stride, n.pad);
        if (out.rows < 1 || out.cols < 1) {
          throw std::invalid_argument("infer_shapes: spatial dims vanish at " + n.name);
        }
        break;
      }
      case LayerKind::GlobalAvgPool: {
        const Shape3 in = in_shape(0);
        out = {in.channels, 1, 1};
        break;
      }
      case LayerKind::Add: {
        const Shape3 a = in_shape(0), b = in_shape(1);
        if (!(a == b)) {
          throw std::invalid_argument("infer_shapes: add operands differ at " + n.name);
        }
        out = a;
        break;
      }
      case LayerKind::FullyConnected: {
        const Shape3 in = in_shape(0);
        if (in.elements() != n.in_channels) {
          throw std::invalid_argument("infer_shapes: fc input width mismatch at " + n.name);
        }
        out = {n.out_channels, 1, 1};
        break;
      }
    }
    shapes[id] = out;
  }
  return shapes;
}

int64_t count_params(const NetworkGraph& graph) {
  int64_t total = 0;
  for (const LayerSpec& n : graph.nodes) {
    switch (n.kind) {
      case LayerKind::Conv2D:
        total += int64_t{n.out_channels} * n.in_channels * n.kernel * n.kernel;
        if (n.has_bias) total += n.out_channels;
        break;
      case LayerKind::BatchNorm:
        total += 2 * int64_t{n.out_channels};  // gamma, beta
        break;
      case LayerKind::FullyConnected:
        total += int64_t{n.out_channels} * n.in_channels;
        if (n.has_bias) total += n.out_channels;
        break;
      default:
        break;
    }
  }
  return total;
}

WeightSet random_weights(const NetworkGraph& graph, uint64_t seed) {
  WeightSet ws;
  const CounterRng rng(seed);
  uint64_t counter = 0;
  // Box-Muller on counter-based uniforms keeps init reproducible everywhere.
  const auto normal = [&](double sigma) {
    const double u1 = std::max(rng.uniform(counter++), 1e-12);
    const double u2 = rng.uniform(counter++);
    return static_cast<float>(sigma * std::sqrt(-2.0 * std::log(u1)) *
                              std::cos(2.0 * EIGEN_PI * u2));
  };
  for (const LayerSpec& n : graph.nodes) {
    if (n.kind == LayerKind::Conv2D || n.kind == LayerKind::FullyConnected) {
      const int fan_in = n.kind == LayerKind::Conv2D ? n.in_channels * n.kernel * n.kernel
                                                     : n.in_channels;
      const double sigma = std::sqrt(2.0 / fan_in);
      NodeWeights w;
      w.weight.resize(n.out_channels, fan_in);
      for (int r = 0; r < w.weight.rows(); ++r)
        for (int c = 0; c < w.weight.cols(); ++c) w.weight(r, c) = normal(sigma);
      w.bias = Eigen::VectorXf::Zero(n.out_channels);
      if (n.has_bias) {
        for (int r = 0; r < n.out_channels; ++r) w.bias(r) = normal(0.01);
      }
      ws.by_name[n.name] = std::move(w);
    } else if (n.kind == LayerKind::BatchNorm) {
      NodeWeights w;
      const int ch = n.out_channels;
      w.gamma.resize(ch);
      w.beta.resize(ch);
      w.running_mean.resize(ch);
      w.running_var.resize(ch);
      for (int c = 0; c < ch; ++c) {
        w.gamma(c) = 1.0f + normal(0.1);
        w.beta(c) = normal(0.1);
        w.running_mean(c) = normal(0.2);
        w.running_var(c) = 1.0f + std::abs(normal(0.2));
      }
      ws.by_name[n.name] = std::move(w);
    }
  }
  return ws;
}

void check_weights(const NetworkGraph& graph, const WeightSet& weights) {
  for (const LayerSpec& n : graph.nodes) {
    if (n.kind == LayerKind::Conv2D || n.kind == LayerKind::FullyConnected) {
      if (!weights.has(n.name)) {
        throw std::invalid_argument("missing weights for " + n.name);
      }
      const NodeWeights& w = weights.at(n.name);
      const int fan_in = n.kind == LayerKind::Conv2D ? n.in_channels * n.kernel * n.kernel
                                                     : n.in_channels;
      if (w.weight.rows() != n.out_channels || w.weight.cols() != fan_in) {
        throw std::invalid_argument("weight shape mismatch for " + n.name);
      }
      if (w.bias.size() != 0 && w.bias.size() != n.out_channels) {
        throw std::invalid_argument("bias shape mismatch for " + n.name);
      }
    } else if (n.kind == LayerKind::BatchNorm) {
      if (!weights.has(n.name)) {
        throw std::invalid_argument("missing batchnorm stats for " + n.name);
      }
      const NodeWeights& w = weights.at(n.name);
      if (w.gamma.size() != n.out_channels || w.beta.size() != n.out_channels ||
          w.running_mean.size() != n.out_channels || w.running_var.size() != n.out_channels) {
        throw std::invalid_argument("batchnorm stats mismatch for " + n.name);
      }
    }
  }
}

}  // namespace dctfhe
