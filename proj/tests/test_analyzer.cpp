#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <nlohmann/json.hpp>

#include "dctfhe/analyze.hpp"
#include "dctfhe/io.hpp"

using namespace dctfhe;

TEST_CASE("reference relu counts are exact") {
  const NetworkGraph rgb = build_network(Architecture::ResNet18Rgb, {3, 224, 224});
  const CostReport r = count_ops(rgb, {3, 224, 224});
  CHECK(r.relus.value() == 2308096);

  for (const int c : {6, 24, 48, 64, 192}) {
    const NetworkGraph dct = build_network(Architecture::ResNet18Dct, {c, 56, 56});
    const CostReport d = count_ops(dct, {c, 56, 56});
    CHECK(d.relus.value() == 1505280);
  }
}

TEST_CASE("reference mac counts are within one percent") {
  const auto check_close = [](int64_t got, double expect_g) {
    CHECK(std::abs(static_cast<double>(got) - expect_g * 1e9) <= 0.01 * expect_g * 1e9);
  };
  const NetworkGraph rgb = build_network(Architecture::ResNet18Rgb, {3, 224, 224});
  check_close(count_ops(rgb, {3, 224, 224}).macs.value(), 1.82);

  const double expect[] = {1.70, 1.71, 1.71, 1.72, 1.74};
  const int channels[] = {6, 24, 48, 64, 192};
  for (int i = 0; i < 5; ++i) {
    const NetworkGraph dct = build_network(Architecture::ResNet18Dct, {channels[i], 56, 56});
    check_close(count_ops(dct, {channels[i], 56, 56}).macs.value(), expect[i]);
  }
  const NetworkGraph rgb448 = build_network(Architecture::ResNet18Rgb, {3, 448, 448});
  check_close(count_ops(rgb448, {3, 448, 448}).macs.value(), 7.29);
}

TEST_CASE("rgb to dct deltas reproduce the headline numbers") {
  const CostReport rgb =
      count_ops(build_network(Architecture::ResNet18Rgb, {3, 224, 224}), {3, 224, 224});
  const CostReport dct64 =
      count_ops(build_network(Architecture::ResNet18Dct, {64, 56, 56}), {64, 56, 56});
  const MetricDeltas d = compare_reports(rgb, dct64);
  CHECK(d.relus_pct.value() == doctest::Approx(-34.8).epsilon(0.002));

  // max MAC reduction happens at the smallest channel count
  const CostReport dct6 =
      count_ops(build_network(Architecture::ResNet18Dct, {6, 56, 56}), {6, 56, 56});
  const MetricDeltas d6 = compare_reports(rgb, dct6);
  CHECK(std::abs(d6.macs_pct.value() - (-6.54)) <= 0.3);
}

TEST_CASE("identical reports have zero deltas") {
  const CostReport r =
      count_ops(build_network(Architecture::ResNet20Rgb, {3, 32, 32}), {3, 32, 32});
  const MetricDeltas d = compare_reports(r, r);
  CHECK(d.macs_pct.value() == 0.0);
  CHECK(d.relus_pct.value() == 0.0);
  CHECK(d.pbs_pct.value() == 0.0);
  CHECK(d.hops_pct.value() == 0.0);
}

TEST_CASE("convention mismatch is refused") {
  const NetworkGraph g = build_network(Architecture::ResNet20Rgb, {3, 32, 32});
  const CostReport a = count_ops(g, {3, 32, 32}, PbsModel{1, 1, 0});
  const CostReport b = count_ops(g, {3, 32, 32}, PbsModel{2, 1, 0});
  CHECK_THROWS_AS(compare_reports(a, b), std::invalid_argument);
}

TEST_CASE("relu count is invariant across dct channel configs") {
  std::optional<int64_t> first;
  for (const int c : {6, 24, 48, 64, 192}) {
    const CostReport r =
        count_ops(build_network(Architecture::ResNet18Dct, {c, 56, 56}), {c, 56, 56});
    if (!first) first = r.relus;
    CHECK(r.relus == first);
    CHECK(r.pbs == count_ops(build_network(Architecture::ResNet18Dct, {6, 56, 56}),
                             {6, 56, 56})
                       .pbs);  // pbs too: spatial sites only
  }
}

TEST_CASE("relus and macs scale 4x when resolution doubles") {
  const CostReport a =
      count_ops(build_network(Architecture::ResNet18Rgb, {3, 224, 224}), {3, 224, 224});
  const CostReport b =
      count_ops(build_network(Architecture::ResNet18Rgb, {3, 448, 448}), {3, 448, 448});
  CHECK(b.relus.value() == 4 * a.relus.value());
  // macs scale 4x except the fc layer
  const int64_t fc = 512 * 1000;
  CHECK(b.macs.value() - fc == 4 * (a.macs.value() - fc));

  const CostReport c =
      count_ops(build_network(Architecture::ResNet18Dct, {64, 56, 56}), {64, 56, 56});
  const CostReport d =
      count_ops(build_network(Architecture::ResNet18Dct, {64, 112, 112}), {64, 112, 112});
  CHECK(d.relus.value() == 4 * c.relus.value());
}

TEST_CASE("head relu pruning strictly lowers relus and pbs, never raises hops") {
  // dct head with vs without the first-layer relu: emulate the unpruned
  // variant by counting a hypothetical extra relu at the head conv output
  const NetworkGraph dct = build_network(Architecture::ResNet18Dct, {64, 56, 56});
  const CostReport pruned = count_ops(dct, {64, 56, 56});
  const auto shapes = infer_shapes(dct, {64, 56, 56});
  const int64_t head_elems = shapes.at(dct.find("conv1")).elements();
  CostReport unpruned = pruned;
  unpruned.relus = *unpruned.relus + head_elems;
  unpruned.pbs = *unpruned.pbs + head_elems;
  unpruned.hops = *unpruned.hops + head_elems;
  CHECK(*pruned.relus < *unpruned.relus);
  CHECK(*pruned.pbs < *unpruned.pbs);
  CHECK(*pruned.hops <= *unpruned.hops);
}

TEST_CASE("hops follow the documented convention") {
  const NetworkGraph g = build_network(Architecture::ResNet20Rgb, {3, 32, 32});
  const CostReport r = count_ops(g, {3, 32, 32});
  CHECK(r.hops.value() == r.macs.value() + r.pbs.value());
  // per-layer rows sum to totals
  int64_t macs = 0, relus = 0, pbs = 0;
  for (const LayerCost& l : r.per_layer) {
    macs += l.macs;
    relus += l.relus;
    pbs += l.pbs;
  }
  CHECK(macs == r.macs.value());
  CHECK(relus == r.relus.value());
  CHECK(pbs == r.pbs.value());
}

TEST_CASE("maxpool comparators are opt-in") {
  const NetworkGraph g = build_network(Architecture::ResNet18Rgb, {3, 224, 224});
  const CostReport off = count_ops(g, {3, 224, 224}, PbsModel{1, 1, 0});
  const CostReport on = count_ops(g, {3, 224, 224}, PbsModel{1, 1, 1});
  const int64_t pool_elems = 64 * 56 * 56;
  CHECK(on.pbs.value() - off.pbs.value() == pool_elems * 8);  // 3x3 window: 8 comparators
}

TEST_CASE("latency normalization reference values") {
  CHECK(normalize_latency(216000, 20, 96) == 45000);
  CHECK(normalize_latency(12041, 20, 96) == 2509);
  CHECK(normalize_latency(2258, 20, 96) == 470);
  CHECK(normalize_latency(18000, 16, 96) == 3000);
  CHECK(normalize_latency(570, 8, 96) == 48);
  CHECK_THROWS_AS(normalize_latency(100, 0, 96), std::invalid_argument);
  CHECK_THROWS_AS(normalize_latency(100, 20, -1), std::invalid_argument);
  CHECK_THROWS_AS(normalize_latency(0, 20, 96), std::invalid_argument);
}

TEST_CASE("magnitude formatting uses three significant figures") {
  CHECK(format_magnitude(1814073344) == "1.81G");
  CHECK(format_magnitude(2308096) == "2.31M");
  CHECK(format_magnitude(22400000) == "22.4M");
  CHECK(format_magnitude(752640) == "753K");
  CHECK(format_magnitude(512) == "512");
  CHECK(format_magnitude(0) == "0");
}

TEST_CASE("emit_table") {
  std::vector<CostReport> reports;
  reports.push_back(count_ops(build_network(Architecture::ResNet18Rgb, {3, 224, 224}),
                              {3, 224, 224}));
  for (const int c : {6, 24, 48, 64, 192}) {
    reports.push_back(
        count_ops(build_network(Architecture::ResNet18Dct, {c, 56, 56}), {c, 56, 56}));
  }

  SUBCASE("markdown mirrors the six-row layout") {
    const std::string md = emit_table(reports, TableFormat::Markdown, true);
    CHECK(md.find("| Dimension | #MACs | #ReLUs | #PBS | #HOPs |") != std::string::npos);
    CHECK(md.find("| 3x224^2 |") != std::string::npos);
    CHECK(md.find("| 64x56^2 |") != std::string::npos);
    CHECK(md.find("1.51M") != std::string::npos);
    CHECK(md.find("Max Δ") != std::string::npos);
    // 1 header + 1 rule + 6 rows + 1 delta row
    CHECK(std::count(md.begin(), md.end(), '\n') == 9);
  }
  SUBCASE("csv uses raw integers") {
    const std::string csv = emit_table(reports, TableFormat::Csv, false);
    CHECK(csv.find("2308096") != std::string::npos);
    CHECK(csv.find("1505280") != std::string::npos);
  }
  SUBCASE("json round-trips to identical reports") {
    const std::string js = emit_table(reports, TableFormat::Json, false);
    const nlohmann::json doc = nlohmann::json::parse(js);
    REQUIRE(doc.at("reports").size() == reports.size());
    for (size_t i = 0; i < reports.size(); ++i) {
      const CostReport back = report_from_json(doc.at("reports")[i]);
      CHECK(back.dimension == reports[i].dimension);
      CHECK(back.convention == reports[i].convention);
      CHECK(back.macs == reports[i].macs);
      CHECK(back.relus == reports[i].relus);
      CHECK(back.pbs == reports[i].pbs);
      CHECK(back.hops == reports[i].hops);
      REQUIRE(back.per_layer.size() == reports[i].per_layer.size());
      for (size_t l = 0; l < back.per_layer.size(); ++l) {
        CHECK(back.per_layer[l].macs == reports[i].per_layer[l].macs);
        CHECK(back.per_layer[l].out_shape == reports[i].per_layer[l].out_shape);
      }
    }
  }
  SUBCASE("missing metrics render as tilde") {
    CostReport partial;
    partial.dimension = "3x32^2";
    partial.convention = reports[0].convention;
    partial.macs = 1000;
    const std::string md = emit_table({partial}, TableFormat::Markdown, false);
    CHECK(md.find("| ~ |") != std::string::npos);
  }
}
