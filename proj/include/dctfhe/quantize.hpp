#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dctfhe/forward.hpp"
#include "dctfhe/graph.hpp"
#include "dctfhe/tensor.hpp"

namespace dctfhe {

// Uniform affine quantization q = floor(r/S + Z), r = S*(q - Z).
struct QuantParams {
  int bits = 8;
  double scale = 1.0;
  int64_t zero_point = 0;
  bool symmetric = false;

  int64_t qmin() const { return symmetric ? -(int64_t{1} << (bits - 1)) + 1 : 0; }
  int64_t qmax() const {
    return symmetric ? (int64_t{1} << (bits - 1)) - 1 : (int64_t{1} << bits) - 1;
  }
};

// Range [alpha, beta] -> b-bit params. Asymmetric: S = (beta-alpha)/(2^b-1),
// Z = round(-alpha/S) clamped into range. Symmetric: S = m/(2^(b-1)-1) with
// m = max(|alpha|,|beta|), Z = 0. Degenerate ranges (alpha == beta) throw.
QuantParams make_qparams(double alpha, double beta, int bits, bool symmetric);

int64_t quantize(double r, const QuantParams& qp);
double dequantize(int64_t q, const QuantParams& qp);

// ---- crypto parameters -----------------------------------------------------

struct KOffset {
  int offset = 0;  // table displacement, never 0
  double probability = 0.0;
};

struct CryptoParams {
  int circuit_bitwidth = 0;   // filled in by quantize_model
  int retained_precision = 6;  // MSBs kept at each accumulator (t)
  double p_err = 0.0;
  std::vector<KOffset> k_distribution = {{+1, 0.5}, {-1, 0.5}};

  void validate() const;
};

// Largest materializable LUT domain; retained_precision above this is refused.
inline constexpr int kMaxLutDomainBits = 20;

// ---- lookup tables ----------------------------------------------------------

enum class LutKind : uint8_t {
  Relu,    // max(0, x) then requantize
  Requant, // pure rescaling (Add junctions)
};

const char* to_string(LutKind k);
LutKind lut_kind_from_string(const std::string& s);

// Generalized integer output format. Activations use [0, 2^b-1] with a zero
// point; accumulator-domain targets use a signed t-bit range with zero 0.
struct IntQuant {
  double scale = 1.0;
  int64_t zero = 0;
  int64_t qmin = 0;
  int64_t qmax = 0;

  int64_t quantize_clamped(double r) const;
  int64_t centered_maxabs() const;  // max |q - zero| over the range
};

// 2^t-entry table over the signed t-bit domain [-2^(t-1), 2^(t-1)-1].
// Entry i holds the output integer for input value x = i - 2^(t-1); inputs are
// rounded accumulators, so x carries the effective scale `in_scale`.
struct LutSpec {
  LutKind kind = LutKind::Relu;
  int domain_bits = 6;  // t
  double in_scale = 1.0;
  IntQuant out;
  std::vector<int32_t> table;

  int64_t domain_min() const { return -(int64_t{1} << (domain_bits - 1)); }
  int64_t domain_max() const { return (int64_t{1} << (domain_bits - 1)) - 1; }
  int32_t at(int64_t x) const {
    return table[static_cast<size_t>(x - domain_min())];
  }
};

// Builds the table: T[x] = out.quantize_clamped(f(in_scale * x)) with
// f = relu or identity. Callers warn (not error) when t exceeds the producing
// accumulator's bit-width, since part of the domain is then unreachable.
LutSpec build_lut(LutKind kind, double in_scale, const IntQuant& out, int retained_precision);

// ---- quantized model --------------------------------------------------------

struct ConvQuant {
  PlaneMatrix<int32_t> weight;  // same (out × in*k*k) layout as NodeWeights
  std::vector<int64_t> bias;    // accumulator-scale integers
  double weight_scale = 1.0;
  int acc_bits = 1;  // W: static bit-width of this layer's accumulator
};

struct QuantizedModel {
  NetworkGraph graph;  // BatchNorm folded away
  int bits = 8;        // b, weight/activation width
  CryptoParams crypto;
  QuantParams input_qp;
  std::map<NodeId, ConvQuant> conv;          // Conv2D and FullyConnected nodes
  std::map<NodeId, QuantParams> activation;  // ReLU outputs
  std::map<NodeId, LutSpec> luts;            // ReLU nodes and Add junctions
  std::vector<std::string> warnings;
};

// Static integer format of each node's output inside the simulator. Values
// are zero-centered (zero points are subtracted at production), lie in
// [lo, hi], and fit in `bits` signed bits.
struct TensorFormat {
  double scale = 1.0;
  int64_t lo = 0;
  int64_t hi = 0;
  int bits = 1;

  int64_t maxabs() const { return std::max(std::abs(lo), std::abs(hi)); }
};

std::map<NodeId, TensorFormat> propagate_formats(const QuantizedModel& model);

// Signed bits needed for |a| <= bound: ceil(log2(bound+1)) plus a sign bit.
int accumulator_bits(int64_t bound);

// ---- model construction ------------------------------------------------------

// Scales conv weights by gamma/sqrt(var+eps) and sets bias to
// beta - gamma*mean/sqrt(var+eps); BN nodes are removed from the graph.
// Every BatchNorm must directly follow a Conv2D.
void fold_batchnorm(NetworkGraph& graph, WeightSet& weights);

struct TensorRange {
  double alpha = 0.0;
  double beta = 0.0;
};

// Per-node output min/max of the float forward pass over a calibration batch.
// Degenerate ranges are widened by 1e-6 (and flagged via `warnings`).
std::map<NodeId, TensorRange> calibrate(const NetworkGraph& graph, const WeightSet& weights,
                                        const std::vector<Tensor3f>& sample_batch,
                                        std::vector<std::string>* warnings = nullptr);

// Max over layers of the worst-case accumulator bit-width.
int circuit_bitwidth(const QuantizedModel& model);

// Full pipeline: fold BN, quantize weights (symmetric) and activations
// (asymmetric) at `bits`, compute accumulator bounds, build every LUT, and
// attach crypto parameters (circuit_bitwidth filled in).
QuantizedModel quantize_model(const NetworkGraph& graph, const WeightSet& weights,
                              const std::vector<Tensor3f>& calibration_batch, int bits,
                              CryptoParams crypto);

}  // namespace dctfhe
