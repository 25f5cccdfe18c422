#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// End-to-end checks against the installed binary. The path arrives via the
// DCTFHE_BIN environment variable (set by CMake); a scratch directory is
// created per run.

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "dctfhe/image.hpp"
#include "dctfhe/io.hpp"
#include "helpers.hpp"

namespace {

std::string binary() {
  const char* env = std::getenv("DCTFHE_BIN");
  REQUIRE_MESSAGE(env != nullptr, "DCTFHE_BIN not set");
  return env;
}

std::string scratch_dir() {
  static std::string dir = [] {
    char tmpl[] = "/tmp/dctfhe_cli_XXXXXX";
    const char* d = mkdtemp(tmpl);
    REQUIRE(d != nullptr);
    return std::string(d);
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("full pipeline through the binary") {
  const std::string d = scratch_dir();
  dctfhe::write_ppm_file(d + "/img.ppm", testutil::random_image(32, 32, 7));
  dctfhe::write_ppm_file(d + "/img2.ppm", testutil::random_image(32, 32, 8));

  CHECK(run("preprocess --input " + d + "/img.ppm --output " + d +
            "/t.tns --filter-size 4 --channels 48") == 0);
  CHECK(run("preprocess --input " + d + "/img2.ppm --output " + d +
            "/t2.tns --filter-size 4 --channels 48") == 0);
  CHECK(run("build --arch resnet20-dct --dims 48x8x8 --output " + d + "/g.json --emit-weights " +
            d + "/w.wts --seed 3") == 0);
  CHECK(run("quantize --graph " + d + "/g.json --weights " + d + "/w.wts --calib " + d +
            "/t.tns," + d + "/t2.tns --output " + d + "/m.qmod --bits 4 --rounding 6") == 0);

  SUBCASE("infer twice is byte-identical") {
    CHECK(run("infer --model " + d + "/m.qmod --input " + d + "/t.tns --exact --seed 7 --output " +
              d + "/o1.json") == 0);
    CHECK(run("infer --model " + d + "/m.qmod --input " + d + "/t.tns --exact --seed 7 --output " +
              d + "/o2.json") == 0);
    CHECK(slurp(d + "/o1.json") == slurp(d + "/o2.json"));
  }
  SUBCASE("noisy infer is deterministic per seed") {
    CHECK(run("infer --model " + d + "/m.qmod --input " + d + "/t.tns --seed 9 --output " + d +
              "/n1.json") == 0);
    CHECK(run("infer --model " + d + "/m.qmod --input " + d + "/t.tns --seed 9 --output " + d +
              "/n2.json") == 0);
    CHECK(slurp(d + "/n1.json") == slurp(d + "/n2.json"));
  }
  SUBCASE("analyze emits the channel sweep table") {
    CHECK(run("analyze --arch resnet18-dct --channels 6,24,48,64,192 --dims 56 --format csv "
              "--output " +
              d + "/table.csv") == 0);
    const std::string csv = slurp(d + "/table.csv");
    CHECK(csv.find("2308096") != std::string::npos);
    CHECK(csv.find("1505280") != std::string::npos);
  }
  SUBCASE("sweep emits a grid") {
    CHECK(run("sweep --graph " + d + "/g.json --weights " + d + "/w.wts --inputs " + d +
              "/t.tns," + d + "/t2.tns --rounding 6,7 --perr 0.05,0.005 --seeds 2 --threads 2 "
              "--format json --output " +
              d + "/sweep.json") == 0);
    CHECK(slurp(d + "/sweep.json").find("agreement_pct") != std::string::npos);
  }
  SUBCASE("split inference against an exported classifier") {
    // client fc = any single weight matrix file; reuse a fresh random one
    const dctfhe::NetworkGraph g = dctfhe::read_graph_file(d + "/g.json");
    dctfhe::WeightSet fc_only;
    fc_only.by_name["fc"] = dctfhe::random_weights(g, 3).at("fc");
    dctfhe::write_weights_file(d + "/fc.wts", fc_only);
    CHECK(run("infer --model " + d + "/m.qmod --input " + d + "/t.tns --seed 4 "
              "--split-penultimate " +
              d + "/fc.wts --output " + d + "/split.json") == 0);
    CHECK(slurp(d + "/split.json").find("\"mode\": \"split\"") != std::string::npos);
  }
}

TEST_CASE("bootstrap command") {
  const std::string d = scratch_dir();
  {
    std::ofstream csv(d + "/corr.csv");
    csv << "image_id,correct\n";
    const dctfhe::CounterRng rng(11, 0);
    for (int i = 0; i < 4200; ++i) {
      csv << "img" << i << "," << (rng.uniform(i) < 0.9 ? 1 : 0) << "\n";
    }
  }
  CHECK(run("bootstrap --input " + d + "/corr.csv --seed 5 --output " + d + "/ci.json") == 0);
  const std::string out = slurp(d + "/ci.json");
  CHECK(out.find("ci_low_pct") != std::string::npos);
  CHECK(out.find("ci_high_pct") != std::string::npos);
}

TEST_CASE("exit codes") {
  const std::string d = scratch_dir();
  SUBCASE("usage errors return 2") {
    CHECK(run("build --arch bogus --dims 3x8x8 --output " + d + "/x.json") == 2);
    CHECK(run("nonsense-subcommand") == 2);
    CHECK(run("build --output " + d + "/x.json") == 2);  // missing arch/dims
  }
  SUBCASE("missing and malformed files return 3") {
    CHECK(run("infer --model " + d + "/missing.qmod --input " + d + "/missing.tns") == 3);
    std::ofstream bad(d + "/bad.tns");
    bad << "this is not a tensor\n";
    bad.close();
    CHECK(run("infer --model " + d + "/missing.qmod --input " + d + "/bad.tns") == 3);
  }
  SUBCASE("future format versions are rejected with 3") {
    dctfhe::TensorFile t;
    t.data = testutil::random_tensor(3, 8, 8, 3);
    dctfhe::write_tensor_file(d + "/v.tns", t);
    std::string blob = slurp(d + "/v.tns");
    const size_t pos = blob.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    blob.replace(pos, 11, "\"version\":9");
    std::ofstream out(d + "/v9.tns", std::ios::binary);
    out << blob;
    out.close();

    const dctfhe::NetworkGraph g = testutil::toy_cnn();
    dctfhe::write_graph_file(d + "/toy.json", g);
    dctfhe::write_weights_file(d + "/toy.wts", dctfhe::random_weights(g, 2));
    CHECK(run("quantize --graph " + d + "/toy.json --weights " + d + "/toy.wts --calib " + d +
              "/v9.tns --output " + d + "/toy.qmod") == 3);
  }
}
