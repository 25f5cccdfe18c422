#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dctfhe/analyze.hpp"
#include "dctfhe/quantize.hpp"
#include "dctfhe/rng.hpp"
#include "dctfhe/tensor.hpp"

namespace dctfhe {

struct NodeTraceRow {
  NodeId node = -1;
  LayerKind kind = LayerKind::Input;
  int64_t macs = 0;
  int64_t lut_evals = 0;
  int64_t pbs = 0;
  int64_t additions = 0;
};

// Dynamic operation counts observed during one inference.
struct CostTrace {
  int64_t macs = 0;
  int64_t lut_evals = 0;
  int64_t pbs_invocations = 0;
  int64_t additions = 0;
  int64_t max_abs_accumulator = 0;
  std::vector<NodeTraceRow> per_node;

  int64_t relu_lut_evals() const;
  int64_t requant_lut_evals() const;
};

// Deterministic noise source for PBS error injection. Each draw is addressed
// by (node, element, draw) so results are independent of evaluation order.
struct NoiseChannel {
  uint64_t base_seed = 0;

  double uniform(NodeId node, int64_t element, uint32_t draw) const {
    CounterRng rng(base_seed, static_cast<uint64_t>(node));
    return rng.uniform(static_cast<uint64_t>(element) * 4 + draw);
  }
};

// Drops the L = W - t least significant bits by round-half-away-from-zero;
// identity when t >= W.
int64_t round_accumulator(int64_t a, int width_bits, int retained_bits);

// Table lookup with TFHE-style error injection: returns T[x] with probability
// 1 - p_err, otherwise T[clamp(x + k)] with k drawn from the configured offset
// distribution. x outside the domain clamps to the nearest edge first.
int32_t lut_eval(const LutSpec& lut, int64_t x, const CryptoParams& crypto,
                 const NoiseChannel& noise, NodeId node, int64_t element);

struct RunResult {
  Eigen::VectorXf logits;
  int label = 0;  // argmax, lowest index on ties
  CostTrace trace;
};

// Integer-exact evaluation of the quantized model (p_err forced to 0).
// Accumulators exceeding the static circuit bit-width raise InvariantError.
RunResult run_exact(const QuantizedModel& model, const Tensor3f& input,
                    const PbsModel& pbs_model = {});

// Same path with the model's PBS error probability active; deterministic in
// (seed, input).
RunResult run_noisy(const QuantizedModel& model, const Tensor3f& input, uint64_t seed,
                    const PbsModel& pbs_model = {});

struct SplitResult {
  int label = 0;
  Eigen::VectorXf features;  // dequantized penultimate activations
  Eigen::VectorXf logits;    // client-side float logits
};

// MLaaS split flow: the encrypted path stops after global average pooling, the
// feature vector is dequantized, and `client_fc` (a float FullyConnected
// weight/bias pair) produces the label locally.
SplitResult run_split(const QuantizedModel& model, const Tensor3f& input, uint64_t seed,
                      const NodeWeights& client_fc);

int argmax_label(const Eigen::VectorXf& logits);

}  // namespace dctfhe
