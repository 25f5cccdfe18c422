#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dctfhe/graph.hpp"

namespace dctfhe {

// How LUT evaluations translate into programmable bootstraps. The defaults
// (one PBS per LUT element, none for pooling comparators) define this
// project's counting convention; the convention tag travels with every report
// so mismatched models are never compared silently.
struct PbsModel {
  int64_t pbs_per_relu_element = 1;
  int64_t pbs_per_requant_element = 1;
  int64_t pbs_per_maxpool_comparator = 0;

  std::string tag() const;
};

struct LayerCost {
  std::string name;
  LayerKind kind = LayerKind::Input;
  Shape3 out_shape;
  int64_t macs = 0;
  int64_t relus = 0;
  int64_t pbs = 0;
  int64_t hops = 0;
};

// Static operation counts. Totals are optional so externally sourced reports
// can leave columns blank (rendered as "~").
struct CostReport {
  std::string dimension;   // e.g. "64x56^2"
  std::string convention;  // PbsModel tag
  std::optional<int64_t> macs;
  std::optional<int64_t> relus;
  std::optional<int64_t> pbs;
  std::optional<int64_t> hops;
  std::vector<LayerCost> per_layer;
};

// MACs: conv k^2*Cin*Cout*Hout*Wout, FC in*out. ReLUs: element counts of ReLU
// nodes. PBS: LUT sites (ReLU nodes, Add junction requantization) times the
// PbsModel multipliers. HOPs = MACs + PBS.
CostReport count_ops(const NetworkGraph& graph, const Shape3& input_dims,
                     const PbsModel& pbs_model = {});

struct MetricDeltas {
  std::optional<double> macs_pct;
  std::optional<double> relus_pct;
  std::optional<double> pbs_pct;
  std::optional<double> hops_pct;
};

// Signed percentage change (b - a) / a per metric. Throws if the reports were
// produced under different counting conventions.
MetricDeltas compare_reports(const CostReport& a, const CostReport& b);

// Linear-in-threads rescaling of reported wall-clock numbers, rounded to the
// nearest integer second for display.
int64_t normalize_latency(double reported_seconds, int reported_threads, int target_threads);

enum class TableFormat : uint8_t { Json, Csv, Markdown };
TableFormat table_format_from_string(const std::string& s);

// "1.82G" style magnitudes, three significant figures.
std::string format_magnitude(int64_t value);

// Renders reports (plus an optional delta row versus the first report) in the
// column order Dimension, #MACs, #ReLUs, #PBS, #HOPs. Markdown and CSV are for
// humans and diffs; JSON preserves exact integers and per-layer rows.
std::string emit_table(const std::vector<CostReport>& reports, TableFormat format,
                       bool delta_row = false);

}  // namespace dctfhe
