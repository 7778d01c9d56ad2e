#include <gtest/gtest.h>

#include <set>

#include "silab/trainer.h"
#include "test_support.h"

namespace silab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig Small(std::uint64_t seed = 0) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.rollout_length = 256;
  cfg.total_steps = 1024;
  cfg.bc_batch_size = 32;
  cfg.bc_updates = 2;
  cfg.buffer_capacity = 2000;
  cfg.ppo.minibatch_size = 64;
  cfg.ppo.epochs = 2;
  return cfg;
}

std::vector<std::string> RunRows(const RunConfig& cfg) {
  Trainer t(cfg);
  std::vector<std::string> rows;
  while (!t.finished()) rows.push_back(FormatMetricsRow(t.run_iteration()));
  return rows;
}

TEST(Config, JsonRoundTrip) {
  RunConfig cfg = Small(9);
  cfg.task = TaskSpec::ObstructedMazeLite();
  cfg.level_seeds = {1, 2, 3};
  cfg.buffer_quota = 2;
  cfg.bc_lr = 1e-3;
  cfg.filter = ReplayFilter::kUniqueStates;
  cfg.priority.proxy = PriorityProxy::kNovelty;
  cfg.normalization = NormalizationMode::kNormalizedFlex;
  cfg.intrinsic = true;
  const json doc = ConfigToJson(cfg);
  EXPECT_EQ(ConfigToJson(ConfigFromJson(doc)), doc);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(ConfigFromJson(json{{"total_step", 10}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson(json{{"ppo", {{"learning_rate", 0.1}}}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson(json{{"ppo", {{"lr", "fast"}}}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson(json{{"task", "multiroom:1:4"}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson(json{{"imitation", {{"batch_size", 0}}}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson(json{{"replay", {{"quota", 0}}}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson(json{{"sampling", {{"proxy", "rank"}}}}), std::invalid_argument);
}

TEST(Config, Overrides) {
  json doc = json::object();
  ApplyOverride(doc, "ppo.lr=0.001");
  ApplyOverride(doc, "task=multiroom:3:5");
  ApplyOverride(doc, "replay.quota=4");
  ApplyOverride(doc, "intrinsic.enabled=true");
  const RunConfig cfg = ConfigFromJson(doc);
  EXPECT_EQ(cfg.ppo.lr, 0.001);
  EXPECT_EQ(cfg.task, TaskSpec::MultiRoom(3, 5));
  EXPECT_EQ(cfg.buffer_quota, 4);
  EXPECT_TRUE(cfg.intrinsic);
  EXPECT_THROW(ApplyOverride(doc, "novalue"), std::invalid_argument);
  EXPECT_THROW(ApplyOverride(doc, "ppo.lr.x=1"), std::invalid_argument);
  // Imitation lr follows the PPO lr unless set.
  EXPECT_EQ(cfg.effective_bc_lr(), 0.001);
}

TEST(Metrics, FormattingAndHeader) {
  EXPECT_EQ(MetricsHeader().substr(0, 30), "iteration,env_steps,episodes,r");
  MetricsRow row;
  row.return_mean = -1e-9;
  row.bc_loss = 0.1234567;
  const std::string text = FormatMetricsRow(row);
  EXPECT_EQ(text.find("-0.000000"), std::string::npos);
  EXPECT_NE(text.find("0.123457"), std::string::npos);
  std::size_t commas = 0;
  for (char c : text) commas += c == ',';
  EXPECT_EQ(commas + 1, MetricsColumns().size());
}

TEST(Trainer, DeterministicForEqualSeeds) {
  EXPECT_EQ(RunRows(Small(3)), RunRows(Small(3)));
}

TEST(Trainer, SeedsSeparateStreams) {
  Trainer a(Small(0)), b(Small(1));
  a.run_iteration();
  b.run_iteration();
  EXPECT_NE(a.level_sequence(), b.level_sequence());
  EXPECT_NE(a.params().flat(), b.params().flat());
}

TEST(Trainer, FixedLevelRegimeDrawsFromSeeds) {
  RunConfig cfg = Small(2);
  cfg.level_seeds = {4, 8, 15};
  Trainer t(cfg);
  while (!t.finished()) t.run_iteration();
  const std::set<std::int64_t> used(t.level_sequence().begin(), t.level_sequence().end());
  for (auto id : used) EXPECT_TRUE(id == 4 || id == 8 || id == 15);
  EXPECT_EQ(used.size(), 3u);
}

TEST(Trainer, ZeroImitationUpdates) {
  RunConfig cfg = Small(4);
  cfg.bc_updates = 0;
  Trainer t(cfg);
  const MetricsRow row = t.run_iteration();
  EXPECT_EQ(row.bc_steps, 0);
  EXPECT_EQ(row.bc_loss, 0.0);
  EXPECT_GT(row.buffer_episodes, 0u);
}

TEST(Trainer, PositiveAdvantageOnFreshBuffer) {
  RunConfig cfg = Small(5);
  cfg.filter = ReplayFilter::kPositiveAdvantage;
  Trainer t(cfg);
  const MetricsRow row = t.run_iteration();
  EXPECT_LE(row.bc_steps, cfg.bc_updates);
  EXPECT_GE(row.filter_pass_rate, 0.0);
  EXPECT_LE(row.filter_pass_rate, 1.0);
}

TEST(Trainer, StepAccountingAndRecords) {
  RunConfig cfg = Small(6);
  cfg.total_steps = 600;  // last rollout is truncated
  Trainer t(cfg);
  std::int64_t episodes = 0;
  std::int64_t last_end = 0;
  while (!t.finished()) {
    const MetricsRow row = t.run_iteration();
    for (const EpisodeRecord& r : t.take_episode_records()) {
      EXPECT_GT(r.env_steps, last_end);
      EXPECT_LE(r.env_steps, row.env_steps);
      EXPECT_GE(r.length, 1);
      last_end = r.env_steps;
      ++episodes;
    }
    EXPECT_EQ(row.episodes, episodes);
  }
  EXPECT_EQ(t.env_steps(), 600);
}

TEST(Trainer, BufferScoresUseExtrinsicRewardOnly) {
  RunConfig cfg = Small(7);
  cfg.intrinsic = true;
  cfg.intrinsic_beta = 0.5;
  Trainer t(cfg);
  const MetricsRow row = t.run_iteration();
  EXPECT_GT(row.intrinsic_mean, 0.0);
  for (const Episode* ep : t.buffer().episodes()) {
    for (const Transition& tr : ep->transitions) {
      if (!tr.done) EXPECT_EQ(tr.reward, 0.0);
    }
    EXPECT_NEAR(ep->score.s_ext, ep->undiscounted_return(), 1e-12);
  }
}

TEST(Trainer, StopsAtThresholdOnlyWithFullWindow) {
  RunConfig cfg = Small(8);
  cfg.stop_at_threshold = true;
  cfg.success_threshold = 0.0;  // any full window qualifies
  cfg.return_window = 5;
  cfg.total_steps = 100000;
  Trainer t(cfg);
  EXPECT_FALSE(t.threshold_reached());
  int iterations = 0;
  while (!t.finished()) {
    t.run_iteration();
    ++iterations;
  }
  EXPECT_TRUE(t.threshold_reached());
  EXPECT_GE(t.episodes(), 5);
  EXPECT_LT(iterations, 10);
}

TEST(Train, WritesRunDirectory) {
  const fs::path dir = testing::TempDir("train_outputs");
  RunConfig cfg = Small(1);
  cfg.name = "unit";
  const TrainResult r = Train(cfg, dir / "run");
  EXPECT_EQ(r.env_steps, 1024);
  EXPECT_EQ(r.iterations, 4);
  for (const char* f : {"config.json", "metrics.csv", "episodes.csv", "checkpoint.json", "buffer.json"}) {
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  }
  EXPECT_FALSE(fs::exists(dir / "run" / "error.txt"));
  const std::string metrics = testing::Slurp(dir / "run" / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), MetricsHeader());
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 5);
  const RunConfig echoed = ConfigFromJson(json::parse(testing::Slurp(dir / "run" / "config.json")));
  EXPECT_EQ(ConfigToJson(echoed), ConfigToJson(cfg));
  const PolicyParams p = LoadCheckpoint(testing::Slurp(dir / "run" / "checkpoint.json"));
  EXPECT_EQ(p.shape().hidden, 64);
}

TEST(Train, RecordsGenerationFailure) {
  // Fixed-regime level that cannot be generated: every draw fails.
  const fs::path dir = testing::TempDir("train_error");
  RunConfig cfg = Small(1);
  cfg.task = TaskSpec::MultiRoom(12, 4);
  bool any_failure = false;
  for (std::int64_t id = 0; id < 50 && !any_failure; ++id) {
    try {
      GenerateLevel(cfg.task, id);
    } catch (const GenerationError&) {
      cfg.level_seeds = {id};
      any_failure = true;
    }
  }
  ASSERT_TRUE(any_failure);
  EXPECT_THROW(Train(cfg, dir / "run"), GenerationError);
  EXPECT_TRUE(fs::exists(dir / "run" / "error.txt"));
  EXPECT_TRUE(fs::exists(dir / "run" / "metrics.csv"));
}

}  // namespace
}  // namespace silab
