#pragma once

#include <map>

#include "dctfhe/graph.hpp"
#include "dctfhe/tensor.hpp"

namespace dctfhe {

// im2col patch matrix: (in_channels*kernel*kernel) × (out_rows*out_cols).
// Row index is (c*kernel + ky)*kernel + kx, matching NodeWeights::weight.
PlaneF im2col(const Tensor3f& input, int kernel, int stride, int pad);

// Float reference evaluation in topological order. Returns the logits of the
// output node. Intermediate activations can be captured via `tap` (used by
// range calibration).
struct ForwardResult {
  Eigen::VectorXf logits;
};

using ActivationTap = std::map<NodeId, Tensor3f>;

ForwardResult forward_float(const NetworkGraph& graph, const WeightSet& weights,
                            const Tensor3f& input, ActivationTap* tap = nullptr);

}  // namespace dctfhe
