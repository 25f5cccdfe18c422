// dctfhe: frequency-domain CNN pipeline with TFHE-style integer simulation.
//
// Subcommands: preprocess, build, quantize, analyze, infer, sweep, bootstrap.
// Exit codes: 0 success, 2 usage error, 3 file/format error, 4 invariant breach.

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "dctfhe/analyze.hpp"
#include "dctfhe/errors.hpp"
#include "dctfhe/forward.hpp"
#include "dctfhe/frequency.hpp"
#include "dctfhe/graph.hpp"
#include "dctfhe/image.hpp"
#include "dctfhe/io.hpp"
#include "dctfhe/quantize.hpp"
#include "dctfhe/simulate.hpp"
#include "dctfhe/stats.hpp"

using nlohmann::json;
using namespace dctfhe;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitInvariant = 4;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Shape3 parse_dims(const std::string& s) {
  const auto parts = split_list([&] {
    std::string t = s;
    for (char& c : t)
      if (c == 'x' || c == 'X') c = ',';
    return t;
  }());
  if (parts.size() != 3) {
    throw std::invalid_argument("dims must look like CxHxW, got '" + s + "'");
  }
  return {std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2])};
}

std::vector<KOffset> parse_k_distribution(const std::string& s) {
  std::vector<KOffset> dist;
  for (const std::string& pair : split_list(s)) {
    const size_t colon = pair.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("k distribution entries look like offset:prob");
    }
    dist.push_back({std::stoi(pair.substr(0, colon)), std::stod(pair.substr(colon + 1))});
  }
  return dist;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << text;
}

void emit(const std::string& text, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(output_path, text);
  }
}

int thread_budget(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("DCTFHE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// ---- experiment configuration -------------------------------------------------

// JSON config consumed by build/quantize/infer/sweep; explicit CLI flags win.
// Presets: "default" (b=4, t=6, p_err=0.01) and "imagenet" (b=5, t=7).
struct ExperimentConfig {
  std::optional<std::string> architecture;
  std::optional<Shape3> input_dims;
  std::optional<int> num_classes;
  std::optional<int> filter_size;
  std::optional<int> channels;
  std::optional<bool> normalize;
  int bits = 4;
  CryptoParams crypto;
  uint64_t seed = 0;
  std::map<std::string, std::string> paths;
};

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.crypto.retained_precision = 6;
  cfg.crypto.p_err = 0.01;
  if (j.value("preset", std::string("default")) == "imagenet") {
    cfg.bits = 5;
    cfg.crypto.retained_precision = 7;
  }
  if (j.contains("architecture")) cfg.architecture = j["architecture"].get<std::string>();
  if (j.contains("input_dims")) {
    const auto& d = j["input_dims"];
    cfg.input_dims = Shape3{d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
  }
  if (j.contains("num_classes")) cfg.num_classes = j["num_classes"].get<int>();
  if (j.contains("dct")) {
    const auto& d = j["dct"];
    if (d.contains("filter_size")) cfg.filter_size = d["filter_size"].get<int>();
    if (d.contains("channels")) cfg.channels = d["channels"].get<int>();
    if (d.contains("normalize")) cfg.normalize = d["normalize"].get<bool>();
  }
  if (j.contains("bits")) cfg.bits = j["bits"].get<int>();
  if (j.contains("crypto")) {
    const auto& c = j["crypto"];
    if (c.contains("retained_precision")) {
      cfg.crypto.retained_precision = c["retained_precision"].get<int>();
    }
    if (c.contains("p_err")) cfg.crypto.p_err = c["p_err"].get<double>();
    if (c.contains("k_distribution")) {
      cfg.crypto.k_distribution.clear();
      for (const auto& e : c["k_distribution"]) {
        cfg.crypto.k_distribution.push_back({e.at(0).get<int>(), e.at(1).get<double>()});
      }
    }
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("paths")) {
    for (const auto& [key, value] : j["paths"].items()) {
      cfg.paths[key] = value.get<std::string>();
    }
  }
  // cross-field consistency: the dims must be buildable for the architecture
  if (cfg.architecture && cfg.input_dims) {
    build_network(architecture_from_string(*cfg.architecture), *cfg.input_dims,
                  {cfg.num_classes.value_or(0)});
  }
  return cfg;
}

// ---- subcommands ---------------------------------------------------------------

struct PreprocessArgs {
  std::string input, output;
  int filter_size = 8;
  int channels = 64;
  bool normalize = false;
  bool raw_rgb = false;
  int resize = 0;
  std::string calib;
};

int run_preprocess(const PreprocessArgs& a) {
  RgbImage img = read_ppm_file(a.input);
  if (a.resize > 0) img = resize_bilinear(img, a.resize, a.resize);

  TensorFile out;
  if (a.raw_rgb) {
    out.data = Tensor3f(3, img.height, img.width);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int c = 0; c < 3; ++c) out.data[c](y, x) = static_cast<float>(img.at(y, x, c));
  } else {
    DctConfig cfg;
    cfg.filter_size = a.filter_size;
    cfg.channels_kept = a.channels;
    cfg.normalize = a.normalize;
    std::optional<ChannelStats> stats;
    if (a.normalize && !a.calib.empty()) {
      std::vector<RgbImage> calib_images;
      for (const std::string& path : split_list(a.calib)) {
        RgbImage ci = read_ppm_file(path);
        if (a.resize > 0) ci = resize_bilinear(ci, a.resize, a.resize);
        calib_images.push_back(std::move(ci));
      }
      stats = compute_channel_stats(calib_images, cfg);
    }
    out = tensor_file_from(preprocess(img, cfg, stats));
  }
  write_tensor_file(a.output, out);
  return 0;
}

struct BuildArgs {
  std::string config;
  std::string arch;
  std::string dims;
  int classes = 0;
  std::string output;
  std::string emit_weights;
  uint64_t seed = 0;
  bool seed_set = false;
};

int run_build(const BuildArgs& a) {
  std::string arch = a.arch;
  std::string dims = a.dims;
  int classes = a.classes;
  uint64_t seed = a.seed;
  if (!a.config.empty()) {
    const ExperimentConfig cfg = load_config(a.config);
    if (arch.empty() && cfg.architecture) arch = *cfg.architecture;
    if (dims.empty() && cfg.input_dims) {
      dims = std::to_string(cfg.input_dims->channels) + "x" +
             std::to_string(cfg.input_dims->rows) + "x" + std::to_string(cfg.input_dims->cols);
    }
    if (classes == 0 && cfg.num_classes) classes = *cfg.num_classes;
    if (!a.seed_set) seed = cfg.seed;
  }
  if (arch.empty() || dims.empty()) {
    throw std::invalid_argument("build needs --arch and --dims (or a config providing them)");
  }
  const Shape3 input_dims = parse_dims(dims);
  const NetworkGraph g = build_network(architecture_from_string(arch), input_dims, {classes});
  write_graph_file(a.output, g);
  if (!a.emit_weights.empty()) {
    write_weights_file(a.emit_weights, random_weights(g, seed));
  }
  return 0;
}

struct QuantizeArgs {
  std::string config;
  std::string graph, weights, calib, output;
  int bits = 0;
  int rounding = 0;
  double perr = -1.0;
  std::string k_dist;
};

int run_quantize(const QuantizeArgs& a) {
  int bits = a.bits;
  CryptoParams crypto;
  crypto.retained_precision = a.rounding;
  crypto.p_err = a.perr;
  if (!a.config.empty()) {
    const ExperimentConfig cfg = load_config(a.config);
    if (bits == 0) bits = cfg.bits;
    if (crypto.retained_precision == 0) crypto.retained_precision = cfg.crypto.retained_precision;
    if (crypto.p_err < 0) crypto.p_err = cfg.crypto.p_err;
    if (a.k_dist.empty()) crypto.k_distribution = cfg.crypto.k_distribution;
  }
  if (bits == 0) bits = 4;
  if (crypto.retained_precision == 0) crypto.retained_precision = 6;
  if (crypto.p_err < 0) crypto.p_err = 0.01;
  if (!a.k_dist.empty()) crypto.k_distribution = parse_k_distribution(a.k_dist);

  const NetworkGraph g = read_graph_file(a.graph);
  const WeightSet ws = read_weights_file(a.weights);
  std::vector<Tensor3f> calib;
  for (const std::string& path : split_list(a.calib)) {
    calib.push_back(read_tensor_file(path).data);
  }
  const QuantizedModel model = quantize_model(g, ws, calib, bits, crypto);
  for (const std::string& w : model.warnings) std::cerr << "warning: " << w << "\n";
  write_model_file(a.output, model);
  return 0;
}

struct AnalyzeArgs {
  std::string arch;
  std::string graph;
  std::string dims;
  std::string channels;
  std::string format = "markdown";
  std::string output;
  int pbs_relu = 1;
  int pbs_requant = 1;
  int pbs_maxpool = 0;
  bool no_delta = false;
};

int run_analyze(const AnalyzeArgs& a) {
  PbsModel pbs;
  pbs.pbs_per_relu_element = a.pbs_relu;
  pbs.pbs_per_requant_element = a.pbs_requant;
  pbs.pbs_per_maxpool_comparator = a.pbs_maxpool;

  std::vector<CostReport> reports;
  if (!a.graph.empty()) {
    const NetworkGraph g = read_graph_file(a.graph);
    const Shape3 dims = a.dims.empty() ? g.nodes[0].input_dims : parse_dims(a.dims);
    reports.push_back(count_ops(g, dims, pbs));
  } else if (!a.arch.empty()) {
    const Architecture arch = architecture_from_string(a.arch);
    if (!a.channels.empty()) {
      if (a.dims.empty()) throw std::invalid_argument("--channels needs --dims <spatial>");
      const int spatial = std::stoi(a.dims);
      // paired RGB baseline: the DCT head stands in for a 4x (ResNet-18) or
      // 2x (ResNet-20) spatial reduction, so the comparable RGB input is larger
      const bool is18 = arch == Architecture::ResNet18Dct;
      if (!is18 && arch != Architecture::ResNet20Dct) {
        throw std::invalid_argument("--channels only applies to the DCT variants");
      }
      const Architecture rgb_arch = is18 ? Architecture::ResNet18Rgb : Architecture::ResNet20Rgb;
      const int rgb_spatial = spatial * (is18 ? 4 : 2);
      const Shape3 rgb_dims{3, rgb_spatial, rgb_spatial};
      reports.push_back(count_ops(build_network(rgb_arch, rgb_dims), rgb_dims, pbs));
      for (const std::string& cs : split_list(a.channels)) {
        const Shape3 dims{std::stoi(cs), spatial, spatial};
        reports.push_back(count_ops(build_network(arch, dims), dims, pbs));
      }
    } else {
      const Shape3 dims = parse_dims(a.dims);
      reports.push_back(count_ops(build_network(arch, dims), dims, pbs));
    }
  } else {
    throw std::invalid_argument("analyze needs --graph or --arch");
  }
  emit(emit_table(reports, table_format_from_string(a.format), !a.no_delta && reports.size() > 1),
       a.output);
  return 0;
}

json trace_to_json(const CostTrace& trace, const NetworkGraph& graph) {
  json rows = json::array();
  for (const NodeTraceRow& row : trace.per_node) {
    rows.push_back({{"node", graph.nodes[row.node].name},
                    {"kind", to_string(row.kind)},
                    {"macs", row.macs},
                    {"lut_evals", row.lut_evals},
                    {"pbs", row.pbs},
                    {"additions", row.additions}});
  }
  return json{{"macs", trace.macs},
              {"lut_evals", trace.lut_evals},
              {"pbs", trace.pbs_invocations},
              {"additions", trace.additions},
              {"max_abs_accumulator", trace.max_abs_accumulator},
              {"per_node", std::move(rows)}};
}

struct InferArgs {
  std::string model, input, output;
  bool exact = false;
  uint64_t seed = 0;
  std::string split_fc;
};

int run_infer(const InferArgs& a) {
  const QuantizedModel model = read_model_file(a.model);
  const TensorFile tensor = read_tensor_file(a.input);

  json out;
  out["format"] = "inference";
  out["version"] = kFormatVersion;
  out["model_bits"] = model.bits;
  out["circuit_bitwidth"] = model.crypto.circuit_bitwidth;

  if (!a.split_fc.empty()) {
    const WeightSet client = read_weights_file(a.split_fc);
    const NodeWeights* fc = nullptr;
    for (const auto& [name, w] : client.by_name) {
      if (w.weight.size() > 0) {
        if (fc) throw FormatError("split fc file must contain exactly one weight matrix");
        fc = &w;
      }
    }
    if (!fc) throw FormatError("split fc file contains no weight matrix");
    const SplitResult r = run_split(model, tensor.data, a.seed, *fc);
    out["mode"] = "split";
    out["seed"] = a.seed;
    out["label"] = r.label;
    out["features"] =
        std::vector<float>(r.features.data(), r.features.data() + r.features.size());
    out["logits"] = std::vector<float>(r.logits.data(), r.logits.data() + r.logits.size());
  } else {
    const RunResult r =
        a.exact ? run_exact(model, tensor.data) : run_noisy(model, tensor.data, a.seed);
    out["mode"] = a.exact ? "exact" : "noisy";
    out["seed"] = a.seed;
    out["label"] = r.label;
    out["logits"] = std::vector<float>(r.logits.data(), r.logits.data() + r.logits.size());
    out["trace"] = trace_to_json(r.trace, model.graph);
  }
  emit(out.dump(2) + "\n", a.output);
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string graph, weights, calib, inputs, output;
  std::string bits = "4";
  std::string rounding = "6,7,8";
  std::string perr = "0.05,0.01,0.005";
  int seeds = 3;
  int baseline_rounding = 7;
  double baseline_perr = 0.01;
  std::string format = "markdown";
  int threads = 0;
};

struct SweepCell {
  int bits;
  int rounding;
  double perr;
  double agreement_pct;
};

int run_sweep(const SweepArgs& a) {
  const NetworkGraph g = read_graph_file(a.graph);
  const WeightSet ws = read_weights_file(a.weights);
  std::vector<Tensor3f> inputs;
  for (const std::string& path : split_list(a.inputs)) {
    inputs.push_back(read_tensor_file(path).data);
  }
  if (inputs.empty()) throw std::invalid_argument("sweep needs --inputs");
  std::vector<Tensor3f> calib = inputs;
  if (!a.calib.empty()) {
    calib.clear();
    for (const std::string& path : split_list(a.calib)) {
      calib.push_back(read_tensor_file(path).data);
    }
  }

  std::vector<int> bits_list, rounding_list;
  std::vector<double> perr_list;
  for (const auto& s : split_list(a.bits)) bits_list.push_back(std::stoi(s));
  for (const auto& s : split_list(a.rounding)) rounding_list.push_back(std::stoi(s));
  for (const auto& s : split_list(a.perr)) perr_list.push_back(std::stod(s));

  struct Task {
    int bits;
    int rounding;
    double perr;
  };
  std::vector<Task> tasks;
  for (int b : bits_list)
    for (int t : rounding_list)
      for (double p : perr_list) tasks.push_back({b, t, p});

  const auto evaluate = [&](const Task& task) -> SweepCell {
    CryptoParams crypto;
    crypto.retained_precision = task.rounding;
    crypto.p_err = task.perr;
    const QuantizedModel model = quantize_model(g, ws, calib, task.bits, crypto);
    int64_t agree = 0, total = 0;
    for (size_t i = 0; i < inputs.size(); ++i) {
      const int exact = run_exact(model, inputs[i]).label;
      for (int s = 0; s < a.seeds; ++s) {
        const uint64_t seed = static_cast<uint64_t>(s) * 7919 + i;
        agree += run_noisy(model, inputs[i], seed).label == exact;
        ++total;
      }
    }
    return {task.bits, task.rounding, task.perr,
            100.0 * static_cast<double>(agree) / static_cast<double>(total)};
  };

  // fan out across grid cells; results land in task order whatever the schedule
  const int budget = thread_budget(a.threads);
  std::vector<SweepCell> cells(tasks.size());
  for (size_t begin = 0; begin < tasks.size(); begin += static_cast<size_t>(budget)) {
    const size_t end = std::min(tasks.size(), begin + static_cast<size_t>(budget));
    std::vector<std::future<SweepCell>> batch;
    for (size_t i = begin; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, evaluate, tasks[i]));
    }
    for (size_t i = begin; i < end; ++i) cells[i] = batch[i - begin].get();
  }

  const auto find_cell = [&](int b, int t, double p) -> const SweepCell* {
    for (const SweepCell& c : cells) {
      if (c.bits == b && c.rounding == t && c.perr == p) return &c;
    }
    return nullptr;
  };

  std::ostringstream md;
  json jout;
  jout["format"] = "sweep";
  jout["version"] = kFormatVersion;
  jout["seeds"] = a.seeds;
  jout["inputs"] = inputs.size();
  json jcells = json::array();
  for (int b : bits_list) {
    const SweepCell* base = find_cell(b, a.baseline_rounding, a.baseline_perr);
    md << "## " << b << "-bit quantization\n\n";
    md << "| PBS Err. |";
    for (int t : rounding_list) md << " Rounding=" << t << " | Δ |";
    md << "\n|---|";
    for (size_t i = 0; i < rounding_list.size(); ++i) md << "---|---|";
    md << "\n";
    for (double p : perr_list) {
      md << "| " << std::defaultfloat << std::setprecision(6) << p << " |";
      for (int t : rounding_list) {
        const SweepCell* c = find_cell(b, t, p);
        md << " " << std::fixed << std::setprecision(2) << c->agreement_pct << "% |";
        if (base) {
          md << " " << std::showpos << std::fixed << std::setprecision(2)
             << c->agreement_pct - base->agreement_pct << std::noshowpos << "pp |";
        } else {
          md << " ~ |";
        }
        json jc;
        jc["bits"] = c->bits;
        jc["rounding"] = c->rounding;
        jc["p_err"] = c->perr;
        jc["agreement_pct"] = c->agreement_pct;
        if (base) jc["delta_pp"] = c->agreement_pct - base->agreement_pct;
        jcells.push_back(std::move(jc));
      }
      md << "\n";
    }
    md << "\n";
  }
  jout["cells"] = std::move(jcells);
  jout["baseline"] = {{"rounding", a.baseline_rounding}, {"p_err", a.baseline_perr}};

  const TableFormat fmt = table_format_from_string(a.format);
  emit(fmt == TableFormat::Json ? jout.dump(2) + "\n" : md.str(), a.output);
  return 0;
}

struct BootstrapArgs {
  std::string input, output;
  int subsets = 20;
  int subset_size = 200;
  int resamples = 10000;
  double level = 0.95;
  uint64_t seed = 0;
};

int run_bootstrap(const BootstrapArgs& a) {
  const CorrectnessVector v = read_correctness_csv_file(a.input);
  const SubsetAccuracies accs = subset_accuracies(v, a.subsets, a.subset_size, a.seed);
  if (accs.with_replacement) {
    std::cerr
        << "warning: correctness vector smaller than subsets*size, sampling with replacement\n";
  }
  const BootstrapResult r = bootstrap_ci(accs.accuracies, a.resamples, a.level, a.seed);
  json j = bootstrap_result_to_json(r);
  j["subset_size"] = a.subset_size;
  j["with_replacement"] = accs.with_replacement;
  emit(j.dump(2) + "\n", a.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frequency-domain CNN inference with TFHE-style cost and noise simulation"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  CLI::App* cmd_pre = app.add_subcommand("preprocess", "PPM image to frequency tensor");
  cmd_pre->add_option("--input", pre.input, "input .ppm (P6)")->required();
  cmd_pre->add_option("--output", pre.output, "output tensor file")->required();
  cmd_pre->add_option("--filter-size", pre.filter_size, "DCT block size (4 or 8)");
  cmd_pre->add_option("--channels", pre.channels, "low-frequency channels to keep");
  cmd_pre->add_flag("--normalize", pre.normalize, "per-channel mean/std normalization");
  cmd_pre->add_option("--calib", pre.calib, "comma-separated PPMs for normalization stats");
  cmd_pre->add_option("--resize", pre.resize, "bilinear resize to SxS before the DCT");
  cmd_pre->add_flag("--rgb", pre.raw_rgb, "emit a raw RGB tensor (no DCT)");

  BuildArgs bld;
  CLI::App* cmd_bld = app.add_subcommand("build", "construct a network graph");
  cmd_bld->add_option("--config", bld.config, "experiment config JSON");
  cmd_bld->add_option("--arch", bld.arch,
                      "resnet18-rgb | resnet18-dct | resnet20-rgb | resnet20-dct");
  cmd_bld->add_option("--dims", bld.dims, "input dims CxHxW");
  cmd_bld->add_option("--classes", bld.classes, "output classes (default per architecture)");
  cmd_bld->add_option("--output", bld.output, "output graph JSON")->required();
  cmd_bld->add_option("--emit-weights", bld.emit_weights, "also write random-init weights");
  cmd_bld->add_option("--seed", bld.seed, "weight init seed")
      ->each([&bld](const std::string&) { bld.seed_set = true; });

  QuantizeArgs qnt;
  CLI::App* cmd_qnt = app.add_subcommand("quantize", "graph + weights + calibration to model");
  cmd_qnt->add_option("--config", qnt.config, "experiment config JSON");
  cmd_qnt->add_option("--graph", qnt.graph, "graph JSON")->required();
  cmd_qnt->add_option("--weights", qnt.weights, "weights file")->required();
  cmd_qnt->add_option("--calib", qnt.calib, "comma-separated calibration tensor files")
      ->required();
  cmd_qnt->add_option("--output", qnt.output, "output model file")->required();
  cmd_qnt->add_option("--bits", qnt.bits, "quantization bits (default 4)");
  cmd_qnt->add_option("--rounding", qnt.rounding, "retained accumulator precision (default 6)");
  cmd_qnt->add_option("--perr", qnt.perr, "PBS error probability (default 0.01)");
  cmd_qnt->add_option("--k-dist", qnt.k_dist, "offset distribution, e.g. 1:0.5,-1:0.5");

  AnalyzeArgs ana;
  CLI::App* cmd_ana = app.add_subcommand("analyze", "static MAC/ReLU/PBS/HOP counts");
  cmd_ana->add_option("--arch", ana.arch, "architecture to analyze");
  cmd_ana->add_option("--graph", ana.graph, "or: existing graph JSON");
  cmd_ana->add_option("--dims", ana.dims,
                      "input dims CxHxW, or bare spatial size with --channels");
  cmd_ana->add_option("--channels", ana.channels,
                      "channel sweep (adds the paired RGB baseline row)");
  cmd_ana->add_option("--format", ana.format, "markdown | csv | json");
  cmd_ana->add_option("--output", ana.output, "write table here instead of stdout");
  cmd_ana->add_option("--pbs-relu", ana.pbs_relu, "PBS per ReLU element");
  cmd_ana->add_option("--pbs-requant", ana.pbs_requant, "PBS per requantization element");
  cmd_ana->add_option("--pbs-maxpool", ana.pbs_maxpool, "PBS per pooling comparator");
  cmd_ana->add_flag("--no-delta", ana.no_delta, "omit the max-delta row");

  InferArgs inf;
  CLI::App* cmd_inf = app.add_subcommand("infer", "run a quantized model on a tensor");
  cmd_inf->add_option("--model", inf.model, "model file")->required();
  cmd_inf->add_option("--input", inf.input, "tensor file")->required();
  cmd_inf->add_option("--output", inf.output, "output JSON (stdout if omitted)");
  cmd_inf->add_flag("--exact", inf.exact, "noise-free integer path");
  cmd_inf->add_option("--seed", inf.seed, "noise seed for the noisy path");
  cmd_inf->add_option("--split-penultimate", inf.split_fc,
                      "client-side FC weights file: split inference");

  SweepArgs swp;
  CLI::App* cmd_swp = app.add_subcommand("sweep", "bits x rounding x p_err ablation grid");
  cmd_swp->add_option("--config", swp.config, "experiment config JSON");
  cmd_swp->add_option("--graph", swp.graph, "graph JSON")->required();
  cmd_swp->add_option("--weights", swp.weights, "weights file")->required();
  cmd_swp->add_option("--calib", swp.calib, "calibration tensors (default: the inputs)");
  cmd_swp->add_option("--inputs", swp.inputs, "evaluation tensor files")->required();
  cmd_swp->add_option("--bits", swp.bits, "comma list (default 4)");
  cmd_swp->add_option("--rounding", swp.rounding, "comma list (default 6,7,8)");
  cmd_swp->add_option("--perr", swp.perr, "comma list (default 0.05,0.01,0.005)");
  cmd_swp->add_option("--seeds", swp.seeds, "noise seeds per input");
  cmd_swp->add_option("--baseline-rounding", swp.baseline_rounding, "delta baseline rounding");
  cmd_swp->add_option("--baseline-perr", swp.baseline_perr, "delta baseline p_err");
  cmd_swp->add_option("--format", swp.format, "markdown | json");
  cmd_swp->add_option("--threads", swp.threads, "grid fan-out (env DCTFHE_THREADS)");
  cmd_swp->add_option("--output", swp.output, "write report here instead of stdout");

  BootstrapArgs bst;
  CLI::App* cmd_bst = app.add_subcommand("bootstrap", "accuracy confidence interval");
  cmd_bst->add_option("--input", bst.input, "correctness CSV (image_id,correct)")->required();
  cmd_bst->add_option("--output", bst.output, "output JSON (stdout if omitted)");
  cmd_bst->add_option("--subsets", bst.subsets, "number of subsets");
  cmd_bst->add_option("--subset-size", bst.subset_size, "images per subset");
  cmd_bst->add_option("--resamples", bst.resamples, "bootstrap resamples");
  cmd_bst->add_option("--level", bst.level, "confidence level");
  cmd_bst->add_option("--seed", bst.seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cmd_pre->parsed()) return run_preprocess(pre);
    if (cmd_bld->parsed()) return run_build(bld);
    if (cmd_qnt->parsed()) return run_quantize(qnt);
    if (cmd_ana->parsed()) return run_analyze(ana);
    if (cmd_inf->parsed()) return run_infer(inf);
    if (cmd_swp->parsed()) return run_sweep(swp);
    if (cmd_bst->parsed()) return run_bootstrap(bst);
  } catch (const InvariantError& e) {
    std::cerr << "invariant breach: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
