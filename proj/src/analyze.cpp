#include "dctfhe/analyze.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dctfhe/io.hpp"

namespace dctfhe {

std::string PbsModel::tag() const {
  std::ostringstream os;
  os << "hops=macs+pbs;relu=" << pbs_per_relu_element << ";requant=" << pbs_per_requant_element
     << ";maxpool=" << pbs_per_maxpool_comparator;
  return os.str();
}

CostReport count_ops(const NetworkGraph& graph, const Shape3& input_dims,
                     const PbsModel& pbs_model) {
  const auto shapes = infer_shapes(graph, input_dims);
  CostReport report;
  report.convention = pbs_model.tag();
  {
    std::ostringstream os;
    os << input_dims.channels << "x" << input_dims.rows;
    if (input_dims.rows == input_dims.cols) {
      os << "^2";
    } else {
      os << "x" << input_dims.cols;
    }
    report.dimension = os.str();
  }
  int64_t macs = 0, relus = 0, pbs = 0;
  for (NodeId id = 0; id < static_cast<NodeId>(graph.nodes.size()); ++id) {
    const LayerSpec& n = graph.nodes[id];
    const Shape3 out = shapes.at(id);
    LayerCost row;
    row.name = n.name;
    row.kind = n.kind;
    row.out_shape = out;
    switch (n.kind) {
      case LayerKind::Conv2D:
        row.macs = int64_t{n.kernel} * n.kernel * n.in_channels * out.elements();
        break;
      case LayerKind::FullyConnected:
        row.macs = int64_t{n.in_channels} * n.out_channels;
        break;
      case LayerKind::ReLU:
        row.relus = out.elements();
        row.pbs = out.elements() * pbs_model.pbs_per_relu_element;
        break;
      case LayerKind::Add:
        row.pbs = out.elements() * pbs_model.pbs_per_requant_element;
        break;
      case LayerKind::MaxPool:
        row.pbs = out.elements() * (int64_t{n.kernel} * n.kernel - 1) *
                  pbs_model.pbs_per_maxpool_comparator;
        break;
      default:
        break;
    }
    row.hops = row.macs + row.pbs;
    macs += row.macs;
    relus += row.relus;
    pbs += row.pbs;
    report.per_layer.push_back(std::move(row));
  }
  report.macs = macs;
  report.relus = relus;
  report.pbs = pbs;
  report.hops = macs + pbs;
  return report;
}

namespace {

std::optional<double> delta_pct(const std::optional<int64_t>& a, const std::optional<int64_t>& b) {
  if (!a || !b) return std::nullopt;
  if (*a == 0) return *b == 0 ? std::optional<double>(0.0) : std::nullopt;
  return 100.0 * static_cast<double>(*b - *a) / static_cast<double>(*a);
}

}  // namespace

MetricDeltas compare_reports(const CostReport& a, const CostReport& b) {
  if (a.convention != b.convention) {
    throw std::invalid_argument("compare_reports: convention mismatch ('" + a.convention +
                                "' vs '" + b.convention + "')");
  }
  MetricDeltas d;
  d.macs_pct = delta_pct(a.macs, b.macs);
  d.relus_pct = delta_pct(a.relus, b.relus);
  d.pbs_pct = delta_pct(a.pbs, b.pbs);
  d.hops_pct = delta_pct(a.hops, b.hops);
  return d;
}

int64_t normalize_latency(double reported_seconds, int reported_threads, int target_threads) {
  if (reported_seconds <= 0.0) {
    throw std::invalid_argument("normalize_latency: seconds must be positive");
  }
  if (reported_threads <= 0 || target_threads <= 0) {
    throw std::invalid_argument("normalize_latency: thread counts must be positive");
  }
  return std::llround(reported_seconds * reported_threads / target_threads);
}

TableFormat table_format_from_string(const std::string& s) {
  if (s == "json") return TableFormat::Json;
  if (s == "csv") return TableFormat::Csv;
  if (s == "markdown" || s == "md") return TableFormat::Markdown;
  throw std::invalid_argument("unknown table format: " + s);
}

std::string format_magnitude(int64_t value) {
  const bool neg = value < 0;
  const double mag = std::abs(static_cast<double>(value));
  double scaled = mag;
  const char* suffix = "";
  if (mag >= 1e9) {
    scaled = mag / 1e9;
    suffix = "G";
  } else if (mag >= 1e6) {
    scaled = mag / 1e6;
    suffix = "M";
  } else if (mag >= 1e3) {
    scaled = mag / 1e3;
    suffix = "K";
  } else {
    std::ostringstream os;
    os << value;
    return os.str();
  }
  const int decimals = scaled >= 100 ? 0 : scaled >= 10 ? 1 : 2;
  std::ostringstream os;
  if (neg) os << "-";
  os << std::fixed << std::setprecision(decimals) << scaled << suffix;
  return os.str();
}

namespace {

std::string cell(const std::optional<int64_t>& v, bool pretty) {
  if (!v) return "~";
  return pretty ? format_magnitude(*v) : std::to_string(*v);
}

std::string pct_cell(const std::optional<double>& v) {
  if (!v) return "~";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << *v << "%";
  return os.str();
}

// per-metric delta with the largest magnitude across reports[1..] vs reports[0]
MetricDeltas max_delta_row(const std::vector<CostReport>& reports) {
  MetricDeltas best;
  const auto keep_extreme = [](std::optional<double>& acc, const std::optional<double>& d) {
    if (!d) return;
    if (!acc || std::abs(*d) > std::abs(*acc)) acc = d;
  };
  for (size_t i = 1; i < reports.size(); ++i) {
    const MetricDeltas d = compare_reports(reports[0], reports[i]);
    keep_extreme(best.macs_pct, d.macs_pct);
    keep_extreme(best.relus_pct, d.relus_pct);
    keep_extreme(best.pbs_pct, d.pbs_pct);
    keep_extreme(best.hops_pct, d.hops_pct);
  }
  return best;
}

}  // namespace

std::string emit_table(const std::vector<CostReport>& reports, TableFormat format,
                       bool delta_row) {
  if (reports.empty()) throw std::invalid_argument("emit_table: no reports");
  std::ostringstream os;
  switch (format) {
    case TableFormat::Json: {
      nlohmann::json arr = nlohmann::json::array();
      for (const CostReport& r : reports) arr.push_back(report_to_json(r));
      nlohmann::json doc;
      doc["reports"] = std::move(arr);
      if (delta_row && reports.size() > 1) {
        const MetricDeltas d = max_delta_row(reports);
        nlohmann::json j;
        j["macs_pct"] = d.macs_pct ? nlohmann::json(*d.macs_pct) : nlohmann::json();
        j["relus_pct"] = d.relus_pct ? nlohmann::json(*d.relus_pct) : nlohmann::json();
        j["pbs_pct"] = d.pbs_pct ? nlohmann::json(*d.pbs_pct) : nlohmann::json();
        j["hops_pct"] = d.hops_pct ? nlohmann::json(*d.hops_pct) : nlohmann::json();
        doc["max_delta"] = std::move(j);
      }
      os << doc.dump(2) << "\n";
      break;
    }
    case TableFormat::Csv: {
      os << "Dimension,MACs,ReLUs,PBS,HOPs\n";
      for (const CostReport& r : reports) {
        os << r.dimension << "," << cell(r.macs, false) << "," << cell(r.relus, false) << ","
           << cell(r.pbs, false) << "," << cell(r.hops, false) << "\n";
      }
      if (delta_row && reports.size() > 1) {
        const MetricDeltas d = max_delta_row(reports);
        os << "Max Delta," << pct_cell(d.macs_pct) << "," << pct_cell(d.relus_pct) << ","
           << pct_cell(d.pbs_pct) << "," << pct_cell(d.hops_pct) << "\n";
      }
      break;
    }
    case TableFormat::Markdown: {
      os << "| Dimension | #MACs | #ReLUs | #PBS | #HOPs |\n";
      os << "|---|---|---|---|---|\n";
      for (const CostReport& r : reports) {
        os << "| " << r.dimension << " | " << cell(r.macs, true) << " | " << cell(r.relus, true)
           << " | " << cell(r.pbs, true) << " | " << cell(r.hops, true) << " |\n";
      }
      if (delta_row && reports.size() > 1) {
        const MetricDeltas d = max_delta_row(reports);
        os << "| Max Δ | " << pct_cell(d.macs_pct) << " | " << pct_cell(d.relus_pct) << " | "
           << pct_cell(d.pbs_pct) << " | " << pct_cell(d.hops_pct) << " |\n";
      }
      break;
    }
  }
  return os.str();
}

}  // namespace dctfhe
