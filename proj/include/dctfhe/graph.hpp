#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dctfhe/tensor.hpp"

namespace dctfhe {

enum class LayerKind : uint8_t {
  Input,
  Conv2D,
  BatchNorm,
  ReLU,
  MaxPool,
  GlobalAvgPool,
  Add,
  FullyConnected,
};

const char* to_string(LayerKind k);
LayerKind layer_kind_from_string(const std::string& s);

struct Shape3 {
  int channels = 0;
  int rows = 0;
  int cols = 0;

  int64_t elements() const { return int64_t{channels} * rows * cols; }
  bool operator==(const Shape3&) const = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::Input;
  std::string name;

  // Conv2D / FullyConnected
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  bool has_bias = false;

  // BatchNorm
  float epsilon = 1e-5f;

  // Input
  Shape3 input_dims;
};

using NodeId = int;

// Directed acyclic layer graph. Nodes are stored in a valid topological order
// (predecessors always precede consumers); `preds[i]` lists the inputs of
// node i in operand order. For Add, operand 0 is the main (residual) path and
// operand 1 the skip path.
struct NetworkGraph {
  std::vector<LayerSpec> nodes;
  std::vector<std::vector<NodeId>> preds;
  NodeId output = -1;

  NodeId add_node(LayerSpec spec, std::vector<NodeId> inputs);
  const LayerSpec& node(NodeId id) const { return nodes.at(id); }
  NodeId find(const std::string& name) const;  // -1 if absent
  void validate() const;
};

enum class Architecture : uint8_t {
  ResNet18Rgb,
  ResNet18Dct,
  ResNet20Rgb,
  ResNet20Dct,
};

const char* to_string(Architecture a);
Architecture architecture_from_string(const std::string& s);

struct BuildOptions {
  int num_classes = 0;  // 0 = architecture default (1000 for ResNet-18, 10 for ResNet-20)
};

// The four supported topologies.
//
// resnet18_rgb: 7x7/s2 conv + BN + ReLU + 3x3/s2 maxpool head, stages
//   [64,128,256,512] x 2 basic blocks, global average pool, FC.
// resnet18_dct: head replaced by a 1x1/s1 conv (C_in -> 64) + BN with no ReLU
//   and no pooling; stages unchanged.
// resnet20_rgb: CIFAR ResNet-20, stages [16,32,64] x 3 blocks.
// resnet20_dct: 1x1/s1 head (48 -> 48), stage channels [48,56,64], first
//   inter-stage downsample removed (resolutions H, H, H/2).
NetworkGraph build_network(Architecture arch, const Shape3& input_dims,
                           const BuildOptions& options = {});

// Output shape of every node. Throws std::invalid_argument naming the node on
// any inconsistency (Add operands differing, channel mismatches, non-positive
// spatial dims).
std::map<NodeId, Shape3> infer_shapes(const NetworkGraph& graph, const Shape3& input_dims);

// Learnable parameter elements: conv kernels (+bias when enabled), BN gamma
// and beta, FC weight and bias. Running statistics are not parameters.
int64_t count_params(const NetworkGraph& graph);

// ---- weights -------------------------------------------------------------

// Conv kernels are stored as (out_channels) × (in_channels*kernel*kernel)
// row-major matrices, matching the im2col layout used by the forward pass.
struct NodeWeights {
  PlaneF weight;        // conv/FC
  Eigen::VectorXf bias;  // conv (after BN folding) / FC
  // BatchNorm
  Eigen::VectorXf gamma, beta, running_mean, running_var;
};

struct WeightSet {
  std::map<std::string, NodeWeights> by_name;

  bool has(const std::string& name) const { return by_name.count(name) > 0; }
  NodeWeights& at(const std::string& name) { return by_name.at(name); }
  const NodeWeights& at(const std::string& name) const { return by_name.at(name); }
};

// He-normal conv/FC weights, identity-with-jitter BN stats. Deterministic in
// the seed; used by the CLI's --init random and throughout the test suites.
WeightSet random_weights(const NetworkGraph& graph, uint64_t seed);

// Throws std::invalid_argument if any node lacks weights or a tensor has the
// wrong dimensions for its LayerSpec.
void check_weights(const NetworkGraph& graph, const WeightSet& weights);

}  // namespace dctfhe
