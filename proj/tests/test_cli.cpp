#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "slipkf/cli.hpp"

using namespace slipkf;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("slipkf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(CliTest, SimulateWritesOneFilePerPageWithFullLabelRange) {
  SimConfig sim;
  sim.n_lines = 4;
  sim.seconds_per_line = 2.0;
  ASSERT_EQ(cli::cmd_simulate(sim, ScreenGeometry{}, 3, (dir_ / "corpus").string(), err_), 0) << err_.str();
  for (int p = 1; p <= 3; ++p) {
    const auto path = dir_ / "corpus" / ("page_00" + std::to_string(p) + ".csv");
    ASSERT_TRUE(fs::exists(path));
    const auto parsed = parse_gaze_csv(path.string(), ScreenGeometry{});
    EXPECT_EQ(parsed.trace.labels->front(), 1);
    EXPECT_EQ(parsed.trace.labels->back(), 4);
  }
  // Pages get distinct seeds.
  EXPECT_NE(slurp(dir_ / "corpus" / "page_001.csv"), slurp(dir_ / "corpus" / "page_002.csv"));
}

TEST_F(CliTest, SimulateIsByteDeterministic) {
  SimConfig sim;
  sim.n_lines = 1;
  sim.seconds_per_line = 3.0;
  sim.seed = 99;
  ASSERT_EQ(cli::cmd_simulate(sim, ScreenGeometry{}, 2, (dir_ / "a").string(), err_), 0);
  ASSERT_EQ(cli::cmd_simulate(sim, ScreenGeometry{}, 2, (dir_ / "b").string(), err_), 0);
  for (const char* name : {"page_001.csv", "page_002.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "b" / name));
  }
  const auto parsed = parse_gaze_csv((dir_ / "a" / "page_001.csv").string(), ScreenGeometry{});
  EXPECT_EQ(*std::max_element(parsed.trace.labels->begin(), parsed.trace.labels->end()), 1);
}

TEST_F(CliTest, TrackCsvHasOneRowPerSampleAndSummary) {
  SimConfig sim;
  sim.n_lines = 3;
  sim.seconds_per_line = 4.0;
  ASSERT_EQ(cli::cmd_simulate(sim, ScreenGeometry{}, 1, dir_.string(), err_), 0);
  const auto input = dir_ / "page_001.csv";
  const std::size_t n_samples = count_lines(slurp(input)) - 1;

  cli::RunConfig run;
  run.input = input.string();
  run.output = (dir_ / "track.csv").string();
  ASSERT_EQ(cli::cmd_track(run, out_, err_), 0) << err_.str();
  const std::string csv = slurp(dir_ / "track.csv");
  EXPECT_EQ(count_lines(csv), n_samples + 1);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "t,z_x,z_y,x_hat,x_dot_hat,y_hat,y_dot_hat,nis,reset,predicted_line,truth_line");

  const auto summary = nlohmann::json::parse(slurp(dir_ / "track.summary.json"));
  EXPECT_EQ(summary["page_id"], "page_001");
  EXPECT_EQ(summary["n_resets"], 2);
  EXPECT_GE(summary["accuracy"].get<double>(), 0.95);
  EXPECT_EQ(summary["line_stats"].size(), 3u);
  EXPECT_TRUE(summary["line_stats"][0].contains("dwell_seconds"));
}

TEST_F(CliTest, TrackJsonRegularModeHasNoResets) {
  SimConfig sim;
  sim.n_lines = 3;
  sim.seconds_per_line = 4.0;
  ASSERT_EQ(cli::cmd_simulate(sim, ScreenGeometry{}, 1, dir_.string(), err_), 0);
  cli::RunConfig run;
  run.input = (dir_ / "page_001.csv").string();
  run.filter = FilterKind::kRegular;
  run.format = cli::OutputFormat::kJson;
  ASSERT_EQ(cli::cmd_track(run, out_, err_), 0) << err_.str();
  const auto doc = nlohmann::json::parse(out_.str());
  EXPECT_EQ(doc["summary"]["n_resets"], 0);
  double lowest = 0.0;
  for (const auto& row : doc["samples"]) {
    EXPECT_FALSE(row["reset"].get<bool>());
    lowest = std::min(lowest, row["x_dot_hat"].get<double>());
  }
  EXPECT_LT(lowest, -0.5);
}

TEST_F(CliTest, TrackEmptyInputFails) {
  std::ofstream(dir_ / "empty.csv") << "t,x,y\n";
  cli::RunConfig run;
  run.input = (dir_ / "empty.csv").string();
  EXPECT_NE(cli::cmd_track(run, out_, err_), 0);
  EXPECT_NE(err_.str().find("trace too short"), std::string::npos) << err_.str();
}

TEST_F(CliTest, EvaluateSkipsCorruptPages) {
  SimConfig sim;
  sim.n_lines = 3;
  sim.seconds_per_line = 3.0;
  ASSERT_EQ(cli::cmd_simulate(sim, ScreenGeometry{}, 4, (dir_ / "corpus").string(), err_), 0);
  std::ofstream(dir_ / "corpus" / "page_000_broken.csv") << "t,x\n0,1\n";

  cli::RunConfig run;
  run.input = (dir_ / "corpus").string();
  run.output = (dir_ / "report").string();
  ASSERT_EQ(cli::cmd_evaluate(run, out_, err_), 0) << err_.str();
  EXPECT_NE(err_.str().find("page_000_broken.csv"), std::string::npos);

  const std::string table = slurp(dir_ / "report" / "evaluation.csv");
  EXPECT_EQ(count_lines(table), 1u + 4u + 1u);  // header, pages, mean
  EXPECT_NE(table.find("page_001,"), std::string::npos);
  EXPECT_NE(table.find("\nmean,,,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "report" / "page_004_series.csv"));

  run.format = cli::OutputFormat::kJson;
  ASSERT_EQ(cli::cmd_evaluate(run, out_, err_), 0);
  const auto doc = nlohmann::json::parse(slurp(dir_ / "report" / "evaluation.json"));
  EXPECT_EQ(doc["pages"].size(), 4u);
  EXPECT_EQ(doc["pages"][0]["page_id"], "page_001");
  EXPECT_GE(doc["mean_accuracy"].get<double>(), 0.9);
}

TEST_F(CliTest, EvaluateFailsWhenNothingParses) {
  fs::create_directories(dir_ / "bad");
  std::ofstream(dir_ / "bad" / "a.csv") << "garbage\n";
  cli::RunConfig run;
  run.input = (dir_ / "bad").string();
  run.output = (dir_ / "report").string();
  EXPECT_NE(cli::cmd_evaluate(run, out_, err_), 0);
}

TEST(CliConfig, FlatJsonOverridesDefaults) {
  cli::RunConfig run;
  SimConfig sim;
  const auto doc = nlohmann::json::parse(R"({
    "delta_t": 0.02, "slip_threshold": -0.8, "refractory_samples": 4,
    "text_left": 10, "text_width": 1000, "filter": "regular", "format": "json",
    "n_lines": 7, "seed": 123, "input": "in.csv"
  })");
  cli::apply_config_json(doc, run, sim);
  EXPECT_EQ(run.model.delta_t, 0.02);
  EXPECT_EQ(run.model.slip_threshold, -0.8);
  EXPECT_EQ(run.model.refractory_samples, 4u);
  EXPECT_EQ(run.screen.text.left, 10.0);
  EXPECT_EQ(run.screen.text.width, 1000.0);
  EXPECT_EQ(run.filter, FilterKind::kRegular);
  EXPECT_EQ(run.format, cli::OutputFormat::kJson);
  EXPECT_EQ(run.input, "in.csv");
  EXPECT_EQ(sim.n_lines, 7);
  EXPECT_EQ(sim.seed, 123u);
  EXPECT_EQ(sim.delta_t, 0.02);
  EXPECT_EQ(run.model.gamma, 1.0);

  EXPECT_THROW(cli::apply_config_json(nlohmann::json::parse(R"({"filter": "fancy"})"), run, sim), Error);
  EXPECT_THROW(cli::apply_config_json(nlohmann::json::parse(R"({"gamma": "big"})"), run, sim), Error);
}
