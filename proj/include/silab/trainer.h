#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "silab/intrinsic.h"
#include "silab/policy.h"
#include "silab/replay.h"
#include "silab/sampling.h"
#include "silab/scoring.h"

namespace silab {

struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  TaskSpec task = TaskSpec::MultiRoom(2, 4);
  // Empty: a fresh procedurally generated level every episode. Otherwise each
  // episode draws uniformly from these level ids.
  std::vector<std::int64_t> level_seeds;
  std::int64_t total_steps = 100000;
  int rollout_length = 2048;
  int return_window = 100;
  double success_threshold = 0.6;
  bool stop_at_threshold = false;

  int hidden = 64;
  PpoConfig ppo;

  ScoreWeights weights;
  NormalizationMode normalization = NormalizationMode::kDefault;
  double ranking_gamma = 1.0;

  std::size_t buffer_capacity = 10000;
  std::optional<int> buffer_quota;

  PriorityConfig priority;
  ReplayFilter filter = ReplayFilter::kNone;

  int bc_batch_size = 256;
  int bc_updates = 5;
  std::optional<double> bc_lr;  // defaults to ppo.lr
  double bc_value_coef = 0.0;

  bool intrinsic = false;
  double intrinsic_beta = 0.005;

  double effective_bc_lr() const { return bc_lr.value_or(ppo.lr); }
  void validate() const;
};

nlohmann::json ConfigToJson(const RunConfig& cfg);
// Missing keys keep their defaults; unknown keys are errors.
RunConfig ConfigFromJson(const nlohmann::json& doc);
// Sets a dotted path ("ppo.lr") in a config document. The value text is
// parsed as JSON when possible and taken as a string otherwise.
void ApplyOverride(nlohmann::json& doc, const std::string& assignment);

struct MetricsRow {
  int iteration = 0;
  std::int64_t env_steps = 0;
  std::int64_t episodes = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
  double bc_loss = 0.0;
  int bc_steps = 0;
  PpoStats ppo;
  std::size_t buffer_episodes = 0;
  std::size_t buffer_transitions = 0;
  double buffer_score_min = 0.0;
  double buffer_score_median = 0.0;
  double buffer_score_max = 0.0;
  std::size_t buffer_levels = 0;
  double sample_entropy = 0.0;
  double filter_pass_rate = 0.0;
  std::size_t distinct_states = 0;
  std::uint32_t max_count = 0;
  double intrinsic_mean = 0.0;
};

const std::vector<std::string>& MetricsColumns();
std::string MetricsHeader();
std::string FormatMetricsRow(const MetricsRow& row);

struct EpisodeRecord {
  std::int64_t episode_id = 0;
  std::int64_t env_steps = 0;  // counter value when the episode ended
  std::int64_t level_id = 0;
  int length = 0;
  double ret = 0.0;
  double score = 0.0;
  bool stored = false;
};

const std::vector<std::string>& EpisodeColumns();
std::string EpisodeHeader();
std::string FormatEpisodeRow(const EpisodeRecord& record);

class Trainer {
 public:
  explicit Trainer(RunConfig cfg);

  // Rollout, PPO update, scoring and insertion, then the imitation steps.
  MetricsRow run_iteration();
  bool finished() const;

  const RunConfig& config() const { return cfg_; }
  const PolicyParams& params() const { return params_; }
  const RankedBuffer& buffer() const { return buffer_; }
  const CountTable& counts() const { return counts_; }
  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t episodes() const { return episodes_; }
  bool threshold_reached() const;
  // Episodes finished since the last call.
  std::vector<EpisodeRecord> take_episode_records();
  // Level id of every episode started so far, in order.
  const std::vector<std::int64_t>& level_sequence() const { return level_sequence_; }

 private:
  void start_episode();
  std::shared_ptr<const Level> level_for(std::int64_t level_id);
  std::int64_t draw_level_id();

  RunConfig cfg_;
  Rng env_rng_;
  Rng action_rng_;
  Rng ppo_rng_;
  Rng sampler_rng_;
  PolicyParams params_;
  Adam ppo_optimizer_;
  Adam bc_optimizer_;
  RankedBuffer buffer_;
  CountTable counts_;

  std::map<std::int64_t, std::shared_ptr<const Level>> level_cache_;
  std::shared_ptr<const Level> level_;
  std::optional<GridEnv> env_;
  Observation obs_;
  Episode current_;

  std::deque<double> recent_returns_;
  std::vector<EpisodeRecord> records_;
  std::vector<std::int64_t> level_sequence_;
  std::int64_t env_steps_ = 0;
  std::int64_t episodes_ = 0;
  int iteration_ = 0;
};

struct TrainResult {
  int iterations = 0;
  std::int64_t env_steps = 0;
  double final_return_mean = 0.0;
  std::optional<std::int64_t> steps_to_threshold;
};

// Runs to total_steps writing config.json, metrics.csv, episodes.csv,
// checkpoint.json and buffer.json under out_dir. Metrics are flushed every
// iteration; on failure error.txt records the diagnostic and the error is
// rethrown.
TrainResult Train(const RunConfig& cfg, const std::filesystem::path& out_dir,
                  std::ostream* progress = nullptr);

}  // namespace silab
