#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dctfhe/analyze.hpp"
#include "dctfhe/frequency.hpp"
#include "dctfhe/graph.hpp"
#include "dctfhe/quantize.hpp"
#include "dctfhe/stats.hpp"

// On-disk formats. Binary containers share one layout: a single compact JSON
// header line (terminated by '\n') followed by a little-endian raw blob. Every
// header carries "format" and "version"; readers reject unknown formats and
// major versions with FormatError.
//
//   tensor  — float32 planes + channel provenance (preprocess output)
//   weights — float32 tensors keyed by node name
//   model   — quantized model manifest + int32 weight blob
//   graph/report/bootstrap — plain JSON documents

namespace dctfhe {

inline constexpr int kFormatVersion = 1;

// ---- tensor container -------------------------------------------------------

struct TensorFile {
  Tensor3f data;
  std::optional<std::vector<ChannelKey>> channel_map;  // absent for raw RGB tensors
  std::optional<DctConfig> config;
  std::optional<ChannelStats> normalization;
};

TensorFile tensor_file_from(const FrequencyTensor& t);

void write_tensor(std::ostream& out, const TensorFile& t);
TensorFile read_tensor(std::istream& in);
void write_tensor_file(const std::string& path, const TensorFile& t);
TensorFile read_tensor_file(const std::string& path);

// ---- network graph ------------------------------------------------------------

nlohmann::json graph_to_json(const NetworkGraph& graph);
NetworkGraph graph_from_json(const nlohmann::json& j);
void write_graph_file(const std::string& path, const NetworkGraph& graph);
NetworkGraph read_graph_file(const std::string& path);

// ---- float weights -------------------------------------------------------------

void write_weights(std::ostream& out, const WeightSet& weights);
WeightSet read_weights(std::istream& in);
void write_weights_file(const std::string& path, const WeightSet& weights);
WeightSet read_weights_file(const std::string& path);

// ---- quantized model ------------------------------------------------------------

void write_model(std::ostream& out, const QuantizedModel& model);
QuantizedModel read_model(std::istream& in);
void write_model_file(const std::string& path, const QuantizedModel& model);
QuantizedModel read_model_file(const std::string& path);

// ---- cost reports ----------------------------------------------------------------

nlohmann::json report_to_json(const CostReport& report);
CostReport report_from_json(const nlohmann::json& j);

// ---- statistics ------------------------------------------------------------------

// CSV of "image_id,correct" rows (header optional, correct in {0,1}).
CorrectnessVector read_correctness_csv(std::istream& in);
CorrectnessVector read_correctness_csv_file(const std::string& path);

nlohmann::json bootstrap_result_to_json(const BootstrapResult& r);

}  // namespace dctfhe
