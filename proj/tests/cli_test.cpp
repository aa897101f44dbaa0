#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "seisint/cli.hpp"
#include "seisint/render.hpp"
#include "test_support.hpp"

namespace seisint {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Full 64 x 64 grid with a shrunken model so a run takes seconds.
constexpr const char* kQuickConfig = R"({
  "features": {"k": 5, "regressor_orders": [["magnitude", 1], ["magnitude", 2], ["depth", 1]]},
  "model": {"conv_filters": 1, "conv_kernel": 9},
  "training": {"epochs": 1, "batch_size": 8},
  "data": {"train_fraction": 0.75}
})";

TEST(Cli, PrintConfigIsCanonicalDefaults) {
  const auto r = run({"--print-config"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("hybrid").at("alpha"), 0.30);
  EXPECT_EQ(r.out, j.dump(2) + "\n");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"synth", "--out", "x"}).code, 1);
  TempDir dir("cli_usage");
  const auto r = run({"synth", "--events", "0", "--out", (dir / "s").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--events"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, SynthIsDeterministic) {
  TempDir dir("cli_synth");
  ASSERT_EQ(run({"synth", "--events", "10", "--seed", "4", "--out", (dir / "a").string()}).code, 0);
  ASSERT_EQ(run({"synth", "--events", "10", "--seed", "4", "--out", (dir / "b").string()}).code, 0);
  EXPECT_EQ(read_file(dir / "a/events.csv"), read_file(dir / "b/events.csv"));
  EXPECT_EQ(read_file(dir / "a/observations.csv"), read_file(dir / "b/observations.csv"));
  const auto dry = run({"train", "--data", (dir / "a").string(), "--dry-run", "--config",
                        (write_file(dir / "c.json", kQuickConfig), (dir / "c.json").string())});
  EXPECT_EQ(dry.code, 0) << dry.err;
  EXPECT_NE(dry.out.find("dry run"), std::string::npos);
}

TEST(Cli, MissingObservationsNamesFile) {
  TempDir dir("cli_missing");
  ASSERT_EQ(run({"synth", "--events", "5", "--out", dir.path().string()}).code, 0);
  std::filesystem::remove(dir / "observations.csv");
  const auto r = run({"train", "--data", dir.path().string(), "--dry-run"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("observations.csv"), std::string::npos);
}

TEST(Cli, MalformedConfigIsDataError) {
  TempDir dir("cli_badcfg");
  ASSERT_EQ(run({"synth", "--events", "5", "--out", dir.path().string()}).code, 0);
  write_file(dir / "c.json", R"({"model": {"conv_kernel": 4}})");
  EXPECT_EQ(run({"train", "--data", dir.path().string(), "--config", (dir / "c.json").string(),
                 "--dry-run"})
                .code,
            2);
}

TEST(Cli, EndToEndPipeline) {
  TempDir dir("cli_e2e");
  const std::string data = (dir / "data").string(), cfg = (dir / "c.json").string();
  write_file(cfg, kQuickConfig);
  ASSERT_EQ(run({"synth", "--events", "40", "--seed", "3", "--out", data}).code, 0);
  const auto events_before = read_file(dir / "data/events.csv");

  const auto train = run({"train", "--config", cfg, "--data", data, "--out", (dir / "a.ckpt").string()});
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find("classifier epoch 1 loss"), std::string::npos);
  EXPECT_NE(train.out.find("regressor epoch 1 loss"), std::string::npos);
  ASSERT_EQ(run({"train", "--config", cfg, "--data", data, "--out", (dir / "b.ckpt").string(),
                 "--threads", "2"})
                .code,
            0);
  EXPECT_EQ(read_file(dir / "a.ckpt"), read_file(dir / "b.ckpt"));
  EXPECT_EQ(read_file(dir / "data/events.csv"), events_before);

  const auto ckpt = (dir / "a.ckpt").string();
  const auto e1 = run({"eval", "--ckpt", ckpt, "--data", data, "--json-out", (dir / "e1.json").string()});
  const auto e2 = run({"eval", "--ckpt", ckpt, "--data", data, "--json-out", (dir / "e2.json").string()});
  ASSERT_EQ(e1.code, 0) << e1.err;
  EXPECT_EQ(read_file(dir / "e1.json"), read_file(dir / "e2.json"));
  EXPECT_NE(e1.out.find("Regression + Classification"), std::string::npos);
  const auto report = nlohmann::json::parse(read_file(dir / "e1.json"));
  for (const char* row : {"regression", "classification", "hybrid"}) {
    ASSERT_TRUE(report.contains(row)) << row;
    EXPECT_TRUE(report[row].contains("f_score"));
  }
  EXPECT_TRUE(report["classification"].contains("caveat"));

  // Deep event at the northern edge of the grid.
  const auto g1 = (dir / "g1.csv").string(), g2 = (dir / "g2.csv").string();
  ASSERT_EQ(run({"predict", "--ckpt", ckpt, "--lat", "46", "--lon", "144", "--depth", "387", "--mag", "5.5",
                 "--out", g1})
                .code,
            0);
  ASSERT_EQ(run({"predict", "--ckpt", ckpt, "--lat", "46", "--lon", "144", "--depth", "387", "--mag", "5.5",
                 "--out", g2})
                .code,
            0);
  EXPECT_EQ(read_file(g1), read_file(g2));
  std::istringstream gin(read_file(g1));
  const auto grid = grid_from_csv(gin);
  EXPECT_EQ(grid.n_cells, 64u);
  for (double v : grid.values) EXPECT_TRUE(std::isfinite(v));

  const auto outside = run({"predict", "--ckpt", ckpt, "--lat", "50", "--lon", "144", "--depth", "10",
                            "--mag", "6", "--out", (dir / "g3.csv").string()});
  EXPECT_EQ(outside.code, 2);
  EXPECT_NE(outside.err.find("outside"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(dir / "g3.csv"));

  const auto pgm = (dir / "m.pgm").string();
  ASSERT_EQ(run({"render", "--grid", g1, "--out", pgm}).code, 0);
  EXPECT_EQ(read_file(pgm).size(), std::string("P5\n64 64\n255\n").size() + 4096);
  ASSERT_EQ(run({"render", "--grid", g1, "--out", pgm, "--classes"}).code, 0);

  auto bytes = read_file(dir / "a.ckpt");
  bytes[4] = 9;
  write_file(dir / "v9.ckpt", bytes);
  const auto bad = run({"eval", "--ckpt", (dir / "v9.ckpt").string(), "--data", data});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("version"), std::string::npos);
}

TEST(Cli, RenderRejectsMalformedGrid) {
  TempDir dir("cli_render");
  write_file(dir / "g.csv", "1,2\n3\n");
  EXPECT_EQ(run({"render", "--grid", (dir / "g.csv").string(), "--out", (dir / "m.pgm").string()}).code, 2);
  write_file(dir / "zero.csv", "0,0\n0,0\n");
  ASSERT_EQ(run({"render", "--grid", (dir / "zero.csv").string(), "--out", (dir / "z.pgm").string()}).code, 0);
  EXPECT_EQ(read_file(dir / "z.pgm"), std::string("P5\n2 2\n255\n") + std::string(4, '\0'));
}

}  // namespace
}  // namespace seisint
