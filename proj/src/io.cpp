#include "dctfhe/io.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dctfhe/errors.hpp"

// Raw blobs are written in native byte order; the formats are specified as
// little-endian, which every supported target is.
static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian");

namespace dctfhe {

using nlohmann::json;

namespace {

void write_header(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

json read_header(std::istream& in, const std::string& expect_format) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header line");
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad header json: ") + e.what());
  }
  if (!j.contains("format") || j["format"] != expect_format) {
    throw FormatError("expected a '" + expect_format + "' file");
  }
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kFormatVersion) {
    throw FormatError("unsupported " + expect_format + " version");
  }
  return j;
}

json parse_document(std::istream& in, const std::string& expect_format) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad json: ") + e.what());
  }
  if (!j.contains("format") || j["format"] != expect_format) {
    throw FormatError("expected a '" + expect_format + "' document");
  }
  if (!j.contains("version") || j["version"].get<int>() != kFormatVersion) {
    throw FormatError("unsupported " + expect_format + " version");
  }
  return j;
}

template <typename T>
void write_blob(std::ostream& out, const T* data, size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
void read_blob(std::istream& in, T* data, size_t count, const char* what) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(T))) {
    throw FormatError(std::string("truncated ") + what + " blob");
  }
}

template <typename Fn>
auto with_input_file(const std::string& path, Fn fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return fn(in);
}

template <typename Fn>
void with_output_file(const std::string& path, Fn fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  fn(out);
  if (!out) throw FormatError("write failed for " + path);
}

json qparams_to_json(const QuantParams& qp) {
  return json{{"bits", qp.bits},
              {"scale", qp.scale},
              {"zero_point", qp.zero_point},
              {"symmetric", qp.symmetric}};
}

QuantParams qparams_from_json(const json& j) {
  QuantParams qp;
  qp.bits = j.at("bits").get<int>();
  qp.scale = j.at("scale").get<double>();
  qp.zero_point = j.at("zero_point").get<int64_t>();
  qp.symmetric = j.at("symmetric").get<bool>();
  return qp;
}

}  // namespace

// ---- tensor container ---------------------------------------------------------

TensorFile tensor_file_from(const FrequencyTensor& t) {
  TensorFile f;
  f.data = t.data;
  f.channel_map = t.channel_map;
  f.config = t.source_config;
  f.normalization = t.normalization;
  return f;
}

void write_tensor(std::ostream& out, const TensorFile& t) {
  json h;
  h["format"] = "tensor";
  h["version"] = kFormatVersion;
  h["dims"] = {t.data.channels(), t.data.rows(), t.data.cols()};
  h["dtype"] = "f32";
  if (t.channel_map) {
    json map = json::array();
    for (const ChannelKey& k : *t.channel_map) {
      map.push_back({to_string(k.component), k.zigzag_index});
    }
    h["channel_map"] = std::move(map);
  }
  if (t.config) {
    h["config"] = {{"filter_size", t.config->filter_size},
                   {"channels_kept", t.config->channels_kept},
                   {"normalize", t.config->normalize}};
  }
  if (t.normalization) {
    h["normalization"] = {{"mean", t.normalization->mean}, {"stddev", t.normalization->stddev}};
  }
  write_header(out, h);
  for (const auto& plane : t.data.planes) {
    write_blob(out, plane.data(), static_cast<size_t>(plane.size()));
  }
}

TensorFile read_tensor(std::istream& in) {
  const json h = read_header(in, "tensor");
  TensorFile t;
  const auto dims = h.at("dims");
  if (!dims.is_array() || dims.size() != 3) throw FormatError("tensor: bad dims");
  if (h.at("dtype") != "f32") throw FormatError("tensor: unsupported dtype");
  const int c = dims[0].get<int>(), r = dims[1].get<int>(), w = dims[2].get<int>();
  if (c < 1 || r < 1 || w < 1) throw FormatError("tensor: non-positive dims");
  t.data = Tensor3f(c, r, w);
  if (h.contains("channel_map")) {
    std::vector<ChannelKey> map;
    for (const auto& e : h["channel_map"]) {
      map.push_back({color_component_from_string(e.at(0).get<std::string>()), e.at(1).get<int>()});
    }
    if (static_cast<int>(map.size()) != c) throw FormatError("tensor: channel_map length");
    t.channel_map = std::move(map);
  }
  if (h.contains("config")) {
    DctConfig cfg;
    cfg.filter_size = h["config"].at("filter_size").get<int>();
    cfg.channels_kept = h["config"].at("channels_kept").get<int>();
    cfg.normalize = h["config"].at("normalize").get<bool>();
    t.config = cfg;
  }
  if (h.contains("normalization")) {
    ChannelStats s;
    s.mean = h["normalization"].at("mean").get<std::vector<float>>();
    s.stddev = h["normalization"].at("stddev").get<std::vector<float>>();
    t.normalization = std::move(s);
  }
  for (auto& plane : t.data.planes) {
    read_blob(in, plane.data(), static_cast<size_t>(plane.size()), "tensor");
  }
  return t;
}

void write_tensor_file(const std::string& path, const TensorFile& t) {
  with_output_file(path, [&](std::ostream& out) { write_tensor(out, t); });
}

TensorFile read_tensor_file(const std::string& path) {
  return with_input_file(path, [](std::istream& in) { return read_tensor(in); });
}

// ---- network graph ----------------------------------------------------------------

json graph_to_json(const NetworkGraph& graph) {
  json nodes = json::array();
  for (NodeId id = 0; id < static_cast<NodeId>(graph.nodes.size()); ++id) {
    const LayerSpec& n = graph.nodes[id];
    json e;
    e["name"] = n.name;
    e["kind"] = to_string(n.kind);
    e["inputs"] = graph.preds[id];
    switch (n.kind) {
      case LayerKind::Input:
        e["dims"] = {n.input_dims.channels, n.input_dims.rows, n.input_dims.cols};
        break;
      case LayerKind::Conv2D:
        e["in_channels"] = n.in_channels;
        e["out_channels"] = n.out_channels;
        e["kernel"] = n.kernel;
        e["stride"] = n.stride;
        e["pad"] = n.pad;
        e["bias"] = n.has_bias;
        break;
      case LayerKind::BatchNorm:
        e["channels"] = n.out_channels;
        e["epsilon"] = n.epsilon;
        break;
      case LayerKind::MaxPool:
        e["kernel"] = n.kernel;
        e["stride"] = n.stride;
        e["pad"] = n.pad;
        break;
      case LayerKind::FullyConnected:
        e["in_features"] = n.in_channels;
        e["out_features"] = n.out_channels;
        e["bias"] = n.has_bias;
        break;
      default:
        break;
    }
    nodes.push_back(std::move(e));
  }
  json j;
  j["format"] = "graph";
  j["version"] = kFormatVersion;
  j["nodes"] = std::move(nodes);
  j["output"] = graph.output;
  return j;
}

NetworkGraph graph_from_json(const json& j) {
  if (!j.contains("format") || j["format"] != "graph") throw FormatError("expected a graph document");
  if (j.at("version").get<int>() != kFormatVersion) throw FormatError("unsupported graph version");
  NetworkGraph g;
  try {
    for (const auto& e : j.at("nodes")) {
      LayerSpec n;
      n.name = e.at("name").get<std::string>();
      n.kind = layer_kind_from_string(e.at("kind").get<std::string>());
      switch (n.kind) {
        case LayerKind::Input: {
          const auto d = e.at("dims");
          n.input_dims = {d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
          break;
        }
        case LayerKind::Conv2D:
          n.in_channels = e.at("in_channels").get<int>();
          n.out_channels = e.at("out_channels").get<int>();
          n.kernel = e.at("kernel").get<int>();
          n.stride = e.at("stride").get<int>();
          n.pad = e.at("pad").get<int>();
          n.has_bias = e.at("bias").get<bool>();
          break;
        case LayerKind::BatchNorm:
          n.in_channels = n.out_channels = e.at("channels").get<int>();
          n.epsilon = e.at("epsilon").get<float>();
          break;
        case LayerKind::MaxPool:
          n.kernel = e.at("kernel").get<int>();
          n.stride = e.at("stride").get<int>();
          n.pad = e.at("pad").get<int>();
          break;
        case LayerKind::FullyConnected:
          n.in_channels = e.at("in_features").get<int>();
          n.out_channels = e.at("out_features").get<int>();
          n.has_bias = e.at("bias").get<bool>();
          break;
        default:
          break;
      }
      g.add_node(std::move(n), e.at("inputs").get<std::vector<NodeId>>());
    }
    g.output = j.at("output").get<NodeId>();
    g.validate();
  } catch (const json::exception& ex) {
    throw FormatError(std::string("graph: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw FormatError(std::string("graph: ") + ex.what());
  }
  return g;
}

void write_graph_file(const std::string& path, const NetworkGraph& graph) {
  with_output_file(path,
                   [&](std::ostream& out) { out << graph_to_json(graph).dump(2) << "\n"; });
}

NetworkGraph read_graph_file(const std::string& path) {
  return with_input_file(path,
                         [](std::istream& in) { return graph_from_json(parse_document(in, "graph")); });
}

// ---- float weights ------------------------------------------------------------------

namespace {

struct TensorEntry {
  std::string node;
  std::string param;
  const float* data;
  int64_t rows;
  int64_t cols;
};

std::vector<TensorEntry> enumerate_weights(const WeightSet& weights) {
  std::vector<TensorEntry> entries;
  for (const auto& [name, w] : weights.by_name) {
    if (w.weight.size() > 0) entries.push_back({name, "weight", w.weight.data(), w.weight.rows(), w.weight.cols()});
    if (w.bias.size() > 0) entries.push_back({name, "bias", w.bias.data(), w.bias.size(), 1});
    if (w.gamma.size() > 0) entries.push_back({name, "gamma", w.gamma.data(), w.gamma.size(), 1});
    if (w.beta.size() > 0) entries.push_back({name, "beta", w.beta.data(), w.beta.size(), 1});
    if (w.running_mean.size() > 0)
      entries.push_back({name, "running_mean", w.running_mean.data(), w.running_mean.size(), 1});
    if (w.running_var.size() > 0)
      entries.push_back({name, "running_var", w.running_var.data(), w.running_var.size(), 1});
  }
  return entries;
}

}  // namespace

void write_weights(std::ostream& out, const WeightSet& weights) {
  const auto entries = enumerate_weights(weights);
  json manifest = json::array();
  int64_t offset = 0;
  for (const TensorEntry& e : entries) {
    manifest.push_back({{"node", e.node},
                        {"param", e.param},
                        {"rows", e.rows},
                        {"cols", e.cols},
                        {"offset", offset}});
    offset += e.rows * e.cols * static_cast<int64_t>(sizeof(float));
  }
  json h;
  h["format"] = "weights";
  h["version"] = kFormatVersion;
  h["dtype"] = "f32";
  h["tensors"] = std::move(manifest);
  h["blob_bytes"] = offset;
  write_header(out, h);
  for (const TensorEntry& e : entries) {
    write_blob(out, e.data, static_cast<size_t>(e.rows * e.cols));
  }
}

WeightSet read_weights(std::istream& in) {
  const json h = read_header(in, "weights");
  if (h.at("dtype") != "f32") throw FormatError("weights: unsupported dtype");
  WeightSet ws;
  for (const auto& e : h.at("tensors")) {
    const std::string node = e.at("node").get<std::string>();
    const std::string param = e.at("param").get<std::string>();
    const int64_t rows = e.at("rows").get<int64_t>();
    const int64_t cols = e.at("cols").get<int64_t>();
    if (rows < 0 || cols < 0) throw FormatError("weights: bad tensor shape");
    NodeWeights& w = ws.by_name[node];
    float* dst = nullptr;
    if (param == "weight") {
      w.weight.resize(rows, cols);
      dst = w.weight.data();
    } else {
      Eigen::VectorXf* vec = nullptr;
      if (param == "bias") vec = &w.bias;
      else if (param == "gamma") vec = &w.gamma;
      else if (param == "beta") vec = &w.beta;
      else if (param == "running_mean") vec = &w.running_mean;
      else if (param == "running_var") vec = &w.running_var;
      else throw FormatError("weights: unknown param " + param);
      if (cols != 1) throw FormatError("weights: vector param with cols != 1");
      vec->resize(rows);
      dst = vec->data();
    }
    read_blob(in, dst, static_cast<size_t>(rows * cols), "weights");
  }
  return ws;
}

void write_weights_file(const std::string& path, const WeightSet& weights) {
  with_output_file(path, [&](std::ostream& out) { write_weights(out, weights); });
}

WeightSet read_weights_file(const std::string& path) {
  return with_input_file(path, [](std::istream& in) { return read_weights(in); });
}

// ---- quantized model -----------------------------------------------------------------

void write_model(std::ostream& out, const QuantizedModel& model) {
  json h;
  h["format"] = "model";
  h["version"] = kFormatVersion;
  h["bits"] = model.bits;
  json kdist = json::array();
  for (const KOffset& k : model.crypto.k_distribution) {
    kdist.push_back({k.offset, k.probability});
  }
  h["crypto"] = {{"circuit_bitwidth", model.crypto.circuit_bitwidth},
                 {"retained_precision", model.crypto.retained_precision},
                 {"p_err", model.crypto.p_err},
                 {"k_distribution", std::move(kdist)}};
  h["input_qparams"] = qparams_to_json(model.input_qp);
  h["graph"] = graph_to_json(model.graph);

  json convs = json::array();
  int64_t offset = 0;
  for (const auto& [id, cq] : model.conv) {
    convs.push_back({{"node", model.graph.nodes[id].name},
                     {"weight_scale", cq.weight_scale},
                     {"acc_bits", cq.acc_bits},
                     {"rows", cq.weight.rows()},
                     {"cols", cq.weight.cols()},
                     {"offset", offset},
                     {"bias", cq.bias}});
    offset += cq.weight.size() * static_cast<int64_t>(sizeof(int32_t));
  }
  h["conv"] = std::move(convs);
  h["blob_bytes"] = offset;

  json acts = json::array();
  for (const auto& [id, qp] : model.activation) {
    acts.push_back({{"node", model.graph.nodes[id].name}, {"qparams", qparams_to_json(qp)}});
  }
  h["activations"] = std::move(acts);

  json luts = json::array();
  for (const auto& [id, lut] : model.luts) {
    luts.push_back({{"node", model.graph.nodes[id].name},
                    {"kind", to_string(lut.kind)},
                    {"domain_bits", lut.domain_bits},
                    {"in_scale", lut.in_scale},
                    {"out",
                     {{"scale", lut.out.scale},
                      {"zero", lut.out.zero},
                      {"qmin", lut.out.qmin},
                      {"qmax", lut.out.qmax}}},
                    {"table", lut.table}});
  }
  h["luts"] = std::move(luts);
  h["warnings"] = model.warnings;

  write_header(out, h);
  for (const auto& [id, cq] : model.conv) {
    write_blob(out, cq.weight.data(), static_cast<size_t>(cq.weight.size()));
  }
}

QuantizedModel read_model(std::istream& in) {
  const json h = read_header(in, "model");
  QuantizedModel model;
  try {
    model.bits = h.at("bits").get<int>();
    const json& c = h.at("crypto");
    model.crypto.circuit_bitwidth = c.at("circuit_bitwidth").get<int>();
    model.crypto.retained_precision = c.at("retained_precision").get<int>();
    model.crypto.p_err = c.at("p_err").get<double>();
    model.crypto.k_distribution.clear();
    for (const auto& e : c.at("k_distribution")) {
      model.crypto.k_distribution.push_back({e.at(0).get<int>(), e.at(1).get<double>()});
    }
    model.crypto.validate();
    model.input_qp = qparams_from_json(h.at("input_qparams"));
    model.graph = graph_from_json(h.at("graph"));
    model.warnings = h.value("warnings", std::vector<std::string>{});

    for (const auto& e : h.at("activations")) {
      const NodeId id = model.graph.find(e.at("node").get<std::string>());
      if (id < 0) throw FormatError("model: unknown activation node");
      model.activation[id] = qparams_from_json(e.at("qparams"));
    }
    for (const auto& e : h.at("luts")) {
      const NodeId id = model.graph.find(e.at("node").get<std::string>());
      if (id < 0) throw FormatError("model: unknown lut node");
      LutSpec lut;
      lut.kind = lut_kind_from_string(e.at("kind").get<std::string>());
      lut.domain_bits = e.at("domain_bits").get<int>();
      lut.in_scale = e.at("in_scale").get<double>();
      lut.out.scale = e.at("out").at("scale").get<double>();
      lut.out.zero = e.at("out").at("zero").get<int64_t>();
      lut.out.qmin = e.at("out").at("qmin").get<int64_t>();
      lut.out.qmax = e.at("out").at("qmax").get<int64_t>();
      lut.table = e.at("table").get<std::vector<int32_t>>();
      if (lut.table.size() != (size_t{1} << lut.domain_bits)) {
        throw FormatError("model: lut table length mismatch");
      }
      model.luts.emplace(id, std::move(lut));
    }
    // conv entries appear in blob order
    for (const auto& e : h.at("conv")) {
      const NodeId id = model.graph.find(e.at("node").get<std::string>());
      if (id < 0) throw FormatError("model: unknown conv node");
      ConvQuant cq;
      cq.weight_scale = e.at("weight_scale").get<double>();
      cq.acc_bits = e.at("acc_bits").get<int>();
      cq.bias = e.at("bias").get<std::vector<int64_t>>();
      const int64_t rows = e.at("rows").get<int64_t>();
      const int64_t cols = e.at("cols").get<int64_t>();
      cq.weight.resize(rows, cols);
      read_blob(in, cq.weight.data(), static_cast<size_t>(rows * cols), "model");
      model.conv.emplace(id, std::move(cq));
    }
  } catch (const json::exception& ex) {
    throw FormatError(std::string("model: ") + ex.what());
  }
  return model;
}

void write_model_file(const std::string& path, const QuantizedModel& model) {
  with_output_file(path, [&](std::ostream& out) { write_model(out, model); });
}

QuantizedModel read_model_file(const std::string& path) {
  return with_input_file(path, [](std::istream& in) { return read_model(in); });
}

// ---- cost reports -----------------------------------------------------------------------

json report_to_json(const CostReport& report) {
  const auto metric = [](const std::optional<int64_t>& v) {
    return v ? json(*v) : json();
  };
  json layers = json::array();
  for (const LayerCost& l : report.per_layer) {
    layers.push_back({{"name", l.name},
                      {"kind", to_string(l.kind)},
                      {"out", {l.out_shape.channels, l.out_shape.rows, l.out_shape.cols}},
                      {"macs", l.macs},
                      {"relus", l.relus},
                      {"pbs", l.pbs},
                      {"hops", l.hops}});
  }
  json j;
  j["format"] = "report";
  j["version"] = kFormatVersion;
  j["dimension"] = report.dimension;
  j["convention"] = report.convention;
  j["macs"] = metric(report.macs);
  j["relus"] = metric(report.relus);
  j["pbs"] = metric(report.pbs);
  j["hops"] = metric(report.hops);
  j["per_layer"] = std::move(layers);
  return j;
}

CostReport report_from_json(const json& j) {
  if (!j.contains("format") || j["format"] != "report") {
    throw FormatError("expected a report document");
  }
  if (j.at("version").get<int>() != kFormatVersion) throw FormatError("unsupported report version");
  CostReport r;
  try {
    r.dimension = j.at("dimension").get<std::string>();
    r.convention = j.at("convention").get<std::string>();
    const auto metric = [&](const char* key) -> std::optional<int64_t> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<int64_t>();
    };
    r.macs = metric("macs");
    r.relus = metric("relus");
    r.pbs = metric("pbs");
    r.hops = metric("hops");
    for (const auto& e : j.value("per_layer", json::array())) {
      LayerCost l;
      l.name = e.at("name").get<std::string>();
      l.kind = layer_kind_from_string(e.at("kind").get<std::string>());
      l.out_shape = {e.at("out").at(0).get<int>(), e.at("out").at(1).get<int>(),
                     e.at("out").at(2).get<int>()};
      l.macs = e.at("macs").get<int64_t>();
      l.relus = e.at("relus").get<int64_t>();
      l.pbs = e.at("pbs").get<int64_t>();
      l.hops = e.at("hops").get<int64_t>();
      r.per_layer.push_back(std::move(l));
    }
  } catch (const json::exception& ex) {
    throw FormatError(std::string("report: ") + ex.what());
  }
  return r;
}

// ---- statistics -----------------------------------------------------------------------------

CorrectnessVector read_correctness_csv(std::istream& in) {
  CorrectnessVector v;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw FormatError("correctness csv: line " + std::to_string(lineno) + " lacks a comma");
    }
    std::string value = line.substr(comma + 1);
    while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
    size_t start = 0;
    while (start < value.size() && value[start] == ' ') ++start;
    value = value.substr(start);
    if (lineno == 1 && value != "0" && value != "1") continue;  // header row
    if (value == "0") {
      v.correct.push_back(0);
    } else if (value == "1") {
      v.correct.push_back(1);
    } else {
      throw FormatError("correctness csv: line " + std::to_string(lineno) +
                        " has correctness '" + value + "' (want 0 or 1)");
    }
  }
  if (v.correct.empty()) throw FormatError("correctness csv: no rows");
  return v;
}

CorrectnessVector read_correctness_csv_file(const std::string& path) {
  return with_input_file(path, [](std::istream& in) { return read_correctness_csv(in); });
}

json bootstrap_result_to_json(const BootstrapResult& r) {
  json j;
  j["format"] = "bootstrap";
  j["version"] = kFormatVersion;
  j["estimate_pct"] = r.estimate;
  j["ci_low_pct"] = r.ci_low;
  j["ci_high_pct"] = r.ci_high;
  j["resamples"] = r.resamples;
  j["level"] = r.level;
  j["n_subsets"] = r.n_subsets;
  return j;
}

}  // namespace dctfhe
