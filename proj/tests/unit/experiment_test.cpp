#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "emot/config.hpp"
#include "emot/experiment.hpp"

using namespace emot;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Csv {
  std::string schema;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::out_of_range("no column " + name);
  }
  [[nodiscard]] double num(std::size_t r, const std::string& name) const { return std::stod(rows[r][col(name)]); }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Csv read_csv(const fs::path& p) {
  std::ifstream in(p);
  Csv c;
  std::string line;
  std::getline(in, c.schema);
  std::getline(in, line);
  c.header = split(line);
  while (std::getline(in, line)) c.rows.push_back(split(line));
  return c;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

config::ExperimentConfig tiny() {
  auto cfg = config::load(fs::path(EMOT_CONFIG_DIR) / "desk.json");
  cfg.run.env.n_gds = 3;
  cfg.run.env.horizon = 15;
  cfg.run.net.hidden = {6};
  cfg.run.ppo.epochs = 1;
  cfg.run.ppo.minibatch = 15;
  cfg.run.ppo.steps_per_iter = 30;
  cfg.run.evo.n_tasks = 3;
  cfg.run.evo.warmup_iters = 1;
  cfg.run.evo.generations = 2;
  cfg.run.evo.eval_episodes = 2;
  cfg.run.evo.kmeans_k = 2;
  return cfg;
}

class ExperimentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "emot_experiment_test";
    fs::remove_all(root_);
    cfg_ = tiny();
    result_ = experiment::cmd_train(cfg_, root_ / "run");
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static inline fs::path root_;
  static inline config::ExperimentConfig cfg_;
  static inline evo::RunResult result_;
};

}  // namespace

TEST_F(ExperimentTest, TrainWritesEveryFileWithSchema) {
  const fs::path run = root_ / "run";
  for (const char* f : {"config.json", "metrics.csv", "training.csv", "archive_history.csv", "archive.json",
                        "manifest.json"}) {
    EXPECT_TRUE(fs::exists(run / f)) << f;
  }
  EXPECT_EQ(read_csv(run / "metrics.csv").schema, std::string("# schema=") + experiment::kMetricsSchema);
  EXPECT_EQ(read_csv(run / "training.csv").schema, std::string("# schema=") + experiment::kTrainingSchema);
  EXPECT_EQ(read_csv(run / "archive_history.csv").schema,
            std::string("# schema=") + experiment::kArchiveHistorySchema);
  EXPECT_EQ(config::canonical_dump(config::load(run / "config.json")), config::canonical_dump(cfg_));
}

TEST_F(ExperimentTest, ManifestListsFilesWithSizes) {
  const fs::path run = root_ / "run";
  const json m = read_json(run / "manifest.json");
  EXPECT_EQ(m.at("schema"), experiment::kManifestSchema);
  std::size_t checkpoints = 0;
  for (const json& f : m.at("files")) {
    const std::string p = f.at("path");
    ASSERT_TRUE(fs::exists(run / p)) << p;
    EXPECT_EQ(f.at("bytes").get<std::uint64_t>(), fs::file_size(run / p));
    checkpoints += p.rfind("checkpoints/", 0) == 0;
  }
  EXPECT_EQ(checkpoints, result_.archive.size());
}

TEST_F(ExperimentTest, MetricsMatchTheRun) {
  const fs::path run = root_ / "run";
  const Csv metrics = read_csv(run / "metrics.csv");
  EXPECT_EQ(metrics.header.front(), "generation");
  ASSERT_EQ(metrics.rows.size(), 3u * 3u);
  for (std::size_t r = 0; r < metrics.rows.size(); ++r) {
    const auto& g = result_.generations[r / 3];
    EXPECT_EQ(metrics.num(r, "generation"), g.generation);
    EXPECT_EQ(metrics.num(r, "f1_s"), g.tasks[r % 3].objectives.f1);
    EXPECT_EQ(metrics.num(r, "hypervolume_sJ"), g.hypervolume);
    EXPECT_EQ(metrics.num(r, "archive_size"), static_cast<double>(g.archive_points.size()));
  }
  const Csv training = read_csv(run / "training.csv");
  EXPECT_EQ(training.rows.size(), result_.iterations.size());

  const json archive = read_json(run / "archive.json");
  EXPECT_EQ(archive.at("schema"), experiment::kArchiveSchema);
  ASSERT_EQ(archive.at("points").size(), result_.archive.size());
  for (const json& p : archive.at("points")) {
    const auto ck = nn::load_checkpoint(run / p.at("checkpoint").get<std::string>());
    EXPECT_EQ(ck.policy.action_dim(), 3u);
  }
}

TEST_F(ExperimentTest, EvaluationTrajectoriesRecomputeObjectives) {
  const fs::path run = root_ / "run";
  const json archive = read_json(run / "archive.json");
  experiment::EvalRequest req;
  req.checkpoint = run / archive.at("points")[0].at("checkpoint").get<std::string>();
  const auto rows = experiment::cmd_evaluate(cfg_, req, root_ / "eval");
  ASSERT_EQ(rows.size(), 2u);
  // Mean-action evaluation over the run's seeds reproduces the archived point.
  EXPECT_NEAR(0.5 * (rows[0].f1 + rows[1].f1), archive.at("points")[0].at("f1_s").get<double>(), 1e-9);

  const Csv summary = read_csv(root_ / "eval" / "summary.csv");
  ASSERT_EQ(summary.rows.size(), 2u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Csv traj = read_csv(root_ / "eval" / ("trajectory_" + std::to_string(rows[i].seed) + ".csv"));
    ASSERT_EQ(traj.rows.size(), static_cast<std::size_t>(cfg_.run.env.horizon) + 1);
    double f1 = 0.0, f2 = 0.0;
    for (std::size_t r = 0; r < traj.rows.size(); ++r) {
      f1 += traj.num(r, "upload_delay_s") + traj.num(r, "wait_delay_s") + traj.num(r, "queue_delay_s");
      f2 += traj.num(r, "slot_energy_J") + traj.num(r, "flight_energy_J");
    }
    EXPECT_NEAR(f1, summary.num(i, "f1_s"), 1e-6);
    EXPECT_NEAR(f2, summary.num(i, "f2_J"), 1e-6);
    EXPECT_EQ(traj.num(0, "clock"), 0.0);
  }
}

TEST_F(ExperimentTest, BaselineEvaluation) {
  experiment::EvalRequest req;
  req.baseline = baselines::BaselineKind::Spiral;
  req.seeds = {11, 12, 13};
  const auto rows = experiment::cmd_evaluate(cfg_, req, root_ / "baseline");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].policy, "spiral");
  EXPECT_TRUE(fs::exists(root_ / "baseline" / "trajectory_12.csv"));

  const Csv devices = read_csv(root_ / "baseline" / "devices.csv");
  EXPECT_EQ(devices.schema, std::string("# schema=") + experiment::kDevicesSchema);
  const momdp::Environment env(cfg_.run.env);
  ASSERT_EQ(devices.rows.size(), env.devices().size());
  for (std::size_t i = 0; i < devices.rows.size(); ++i) {
    EXPECT_NEAR(devices.num(i, "x_m"), env.devices()[i].position.x, 1e-9);
    EXPECT_NEAR(devices.num(i, "y_m"), env.devices()[i].position.y, 1e-9);
    EXPECT_NEAR(devices.num(i, "coverage_radius_m"),
                cfg_.run.env.limits.altitude_m * std::tan(cfg_.run.env.limits.theta_max), 1e-9);
  }
}

TEST_F(ExperimentTest, MismatchedCheckpointIsRejected) {
  const json archive = read_json(root_ / "run" / "archive.json");
  auto other = cfg_;
  other.run.env.n_gds = 4;
  experiment::EvalRequest req;
  req.checkpoint = root_ / "run" / archive.at("points")[0].at("checkpoint").get<std::string>();
  EXPECT_THROW(experiment::cmd_evaluate(other, req, root_ / "bad"), std::runtime_error);
}

TEST_F(ExperimentTest, ParetoSummaryRecomputesHypervolume) {
  const fs::path run = root_ / "run";
  experiment::cmd_pareto(run);
  const json archive = read_json(run / "archive.json");
  const json summary = read_json(run / "pareto_summary.json");
  const json front = read_json(run / "front.json");
  EXPECT_EQ(summary.at("schema"), experiment::kParetoSummarySchema);
  EXPECT_EQ(front.at("schema"), experiment::kFrontSchema);

  const double rx = -archive.at("hv_reference").at("f1_s").get<double>();
  const double ry = -archive.at("hv_reference").at("f2_J").get<double>();
  std::vector<pareto::MaxPoint> pts;
  for (const json& p : archive.at("points")) pts.push_back({-p.at("f1_s").get<double>(), -p.at("f2_J").get<double>()});
  // Independent sweep: sort by x descending, accumulate strips above ry.
  std::sort(pts.begin(), pts.end(), [](auto a, auto b) { return a.x > b.x; });
  double hv = 0.0, best_y = ry;
  for (const auto& p : pts) {
    if (p.x <= rx || p.y <= ry) continue;
    if (p.y > best_y) {
      hv += (p.x - rx) * (p.y - best_y);
      best_y = p.y;
    }
  }
  EXPECT_NEAR(summary.at("hypervolume_sJ").get<double>(), hv, 1e-9 * std::max(1.0, hv));
  EXPECT_EQ(summary.at("n_points").get<std::size_t>(), archive.at("points").size());

  std::size_t members = 0;
  for (const json& c : front.at("clusters")) members += c.at("members").size();
  EXPECT_EQ(members, archive.at("points").size());
  const json manifest = read_json(run / "manifest.json");
  bool listed = false;
  for (const json& f : manifest.at("files")) listed |= f.at("path").get<std::string>() == "front.json";
  EXPECT_TRUE(listed);
}

TEST(Experiment, TrainIsByteDeterministic) {
  const fs::path root = fs::temp_directory_path() / "emot_determinism_test";
  fs::remove_all(root);
  auto cfg = tiny();
  cfg.run.evo.generations = 1;
  experiment::cmd_train(cfg, root / "a");
  cfg.run.evo.workers = 2;
  experiment::cmd_train(cfg, root / "b");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  };
  EXPECT_EQ(slurp(root / "a" / "metrics.csv"), slurp(root / "b" / "metrics.csv"));
  EXPECT_EQ(slurp(root / "a" / "archive.json"), slurp(root / "b" / "archive.json"));
  fs::remove_all(root);
}
