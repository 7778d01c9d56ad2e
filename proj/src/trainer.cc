#include "silab/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace silab {

namespace {

// Sub-stream tags of the run seed.
enum StreamTag : std::uint64_t {
  kEnvStream = 1,
  kInitStream = 2,
  kActionStream = 3,
  kPpoStream = 4,
  kSamplerStream = 5,
};

constexpr std::int64_t kMaxLevelId = (std::int64_t{1} << 31) - 1;
constexpr int kMaxLevelDraws = 1000;

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

Trainer::Trainer(RunConfig cfg)
    : cfg_(std::move(cfg)),
      env_rng_(Rng::Derive(cfg_.seed, kEnvStream)),
      action_rng_(Rng::Derive(cfg_.seed, kActionStream)),
      ppo_rng_(Rng::Derive(cfg_.seed, kPpoStream)),
      sampler_rng_(Rng::Derive(cfg_.seed, kSamplerStream)),
      buffer_(cfg_.buffer_capacity, cfg_.buffer_quota) {
  cfg_.validate();
  cfg_.priority.gamma = cfg_.ppo.gamma;
  Rng init_rng = Rng::Derive(cfg_.seed, kInitStream);
  params_ = PolicyParams::Init({kObsSize, cfg_.hidden, kNumActions}, init_rng);
}

std::int64_t Trainer::draw_level_id() {
  if (cfg_.level_seeds.empty()) return env_rng_.uniform_int(0, kMaxLevelId);
  const auto k = env_rng_.uniform_int(0, static_cast<std::int64_t>(cfg_.level_seeds.size()) - 1);
  return cfg_.level_seeds[static_cast<std::size_t>(k)];
}

std::shared_ptr<const Level> Trainer::level_for(std::int64_t level_id) {
  if (!cfg_.level_seeds.empty()) {
    auto it = level_cache_.find(level_id);
    if (it != level_cache_.end()) return it->second;
  }
  auto level = std::make_shared<const Level>(GenerateLevel(cfg_.task, level_id));
  if (!cfg_.level_seeds.empty()) level_cache_.emplace(level_id, level);
  return level;
}

void Trainer::start_episode() {
  for (int draw = 0; draw < kMaxLevelDraws; ++draw) {
    const std::int64_t id = draw_level_id();
    try {
      level_ = level_for(id);
    } catch (const GenerationError&) {
      continue;
    }
    env_.emplace(level_);
    obs_ = env_->observe();
    counts_.begin_episode();
    counts_.record(obs_);
    current_ = Episode{};
    current_.level_id = id;
    current_.episode_id = episodes_;
    level_sequence_.push_back(id);
    return;
  }
  throw GenerationError("no valid level after " + std::to_string(kMaxLevelDraws) + " draws");
}

bool Trainer::finished() const {
  if (env_steps_ >= cfg_.total_steps) return true;
  return cfg_.stop_at_threshold && threshold_reached();
}

bool Trainer::threshold_reached() const {
  if (static_cast<int>(recent_returns_.size()) < cfg_.return_window) return false;
  double sum = 0.0;
  for (double r : recent_returns_) sum += r;
  return sum / static_cast<double>(recent_returns_.size()) >= cfg_.success_threshold;
}

std::vector<EpisodeRecord> Trainer::take_episode_records() {
  std::vector<EpisodeRecord> out;
  out.swap(records_);
  return out;
}

MetricsRow Trainer::run_iteration() {
  MetricsRow row;
  row.iteration = ++iteration_;

  // (a) rollout collection.
  Rollout rollout;
  std::vector<Episode> completed;
  std::vector<std::int64_t> completed_at;  // env_steps when each episode ended
  std::vector<std::shared_ptr<const Level>> completed_levels;
  double intrinsic_total = 0.0;
  const std::int64_t budget =
      std::min<std::int64_t>(cfg_.rollout_length, cfg_.total_steps - env_steps_);
  for (std::int64_t k = 0; k < budget; ++k) {
    if (!env_) start_episode();
    const ActionChoice choice = SampleAction(params_, obs_, action_rng_);
    const StepResult res = env_->step(choice.action);
    ++env_steps_;
    counts_.record(res.obs);
    double bonus = 0.0;
    if (cfg_.intrinsic) bonus = BeboldReward(counts_, obs_, res.obs, cfg_.intrinsic_beta);
    intrinsic_total += bonus;

    rollout.obs.push_back(obs_);
    rollout.actions.push_back(choice.action);
    rollout.log_probs.push_back(choice.log_prob);
    rollout.rewards.push_back(res.reward + bonus);
    rollout.values.push_back(choice.value);
    rollout.dones.push_back(res.done);

    Transition t;
    t.obs = obs_;
    t.action = choice.action;
    t.log_prob_behavior = choice.log_prob;
    t.reward = res.reward;
    t.next_obs = res.obs;
    t.done = res.done;
    t.episode_id = current_.episode_id;
    t.level_id = current_.level_id;
    t.step_index = static_cast<int>(current_.transitions.size());
    current_.transitions.push_back(t);
    obs_ = res.obs;

    if (res.done) {
      ComputeReturns(current_.transitions, cfg_.ppo.gamma);
      completed.push_back(std::move(current_));
      completed_at.push_back(env_steps_);
      completed_levels.push_back(level_);
      ++episodes_;
      env_.reset();
    }
  }
  if (!rollout.dones.empty() && !rollout.dones.back()) {
    rollout.bootstrap_value = Forward(params_, ObservationFeatures(obs_)).values[0];
  }
  row.intrinsic_mean = budget > 0 ? intrinsic_total / static_cast<double>(budget) : 0.0;

  // (b) on-policy update.
  if (rollout.size() > 0) row.ppo = PpoUpdate(params_, ppo_optimizer_, rollout, cfg_.ppo, ppo_rng_);

  // (c) score completed episodes on extrinsic reward only and store them.
  for (std::size_t i = 0; i < completed.size(); ++i) {
    Episode& episode = completed[i];
    const Level& level = *completed_levels[i];
    episode.score = ScoreEpisode(episode, cfg_.weights, counts_, cfg_.ranking_gamma,
                                 cfg_.normalization, level);
    EpisodeRecord record;
    record.episode_id = episode.episode_id;
    record.env_steps = completed_at[i];
    record.level_id = episode.level_id;
    record.length = static_cast<int>(episode.size());
    record.ret = episode.undiscounted_return();
    record.score = episode.score.total;
    recent_returns_.push_back(record.ret);
    while (static_cast<int>(recent_returns_.size()) > cfg_.return_window) {
      recent_returns_.pop_front();
    }
    records_.push_back(record);
    const InsertResult inserted = buffer_.insert(std::move(episode));
    records_.back().stored = inserted.stored();
  }
  // (d) imitation updates.
  std::vector<const Observation*> obs;
  std::vector<int> actions;
  std::vector<double> returns;
  double sample_entropy = 0.0;
  double pass_rate = 0.0;
  for (int m = 0; m < cfg_.bc_updates; ++m) {
    const TransitionView view = buffer_.all_transitions();
    const TransitionView filtered = ApplyFilter(view, cfg_.filter, params_);
    if (!view.empty()) {
      pass_rate += static_cast<double>(filtered.size()) / static_cast<double>(view.size());
    }
    if (filtered.empty()) continue;
    const SampledBatch batch = Sample(filtered, static_cast<std::size_t>(cfg_.bc_batch_size),
                                      cfg_.priority, params_, counts_, sampler_rng_);
    obs.clear();
    actions.clear();
    returns.clear();
    for (std::size_t idx : batch.indices) {
      const Transition& t = filtered[idx];
      obs.push_back(&t.obs);
      actions.push_back(t.action);
      returns.push_back(t.mc_return);
    }
    const BcStats stats = BcUpdate(params_, bc_optimizer_, obs, actions, batch.weights, returns,
                                   {cfg_.effective_bc_lr(), cfg_.bc_value_coef});
    row.bc_loss += stats.loss;
    sample_entropy += batch.stats.entropy;
    ++row.bc_steps;
  }
  if (row.bc_steps > 0) {
    row.bc_loss /= row.bc_steps;
    row.sample_entropy = sample_entropy / row.bc_steps;
  }
  if (cfg_.bc_updates > 0) row.filter_pass_rate = pass_rate / cfg_.bc_updates;

  row.env_steps = env_steps_;
  row.episodes = episodes_;
  if (!recent_returns_.empty()) {
    double sum = 0.0;
    for (double r : recent_returns_) sum += r;
    row.return_mean = sum / static_cast<double>(recent_returns_.size());
    double sq = 0.0;
    for (double r : recent_returns_) sq += (r - row.return_mean) * (r - row.return_mean);
    row.return_std = std::sqrt(sq / static_cast<double>(recent_returns_.size()));
  }
  row.buffer_episodes = buffer_.num_episodes();
  row.buffer_transitions = buffer_.total_transitions();
  row.buffer_levels = buffer_.distinct_levels();
  if (buffer_.num_episodes() > 0) {
    const auto eps = buffer_.episodes();  // best first
    row.buffer_score_max = eps.front()->score.total;
    row.buffer_score_min = eps.back()->score.total;
    const std::size_t n = eps.size();
    row.buffer_score_median = n % 2 == 1
                                  ? eps[n / 2]->score.total
                                  : 0.5 * (eps[n / 2 - 1]->score.total + eps[n / 2]->score.total);
  }
  row.distinct_states = counts_.distinct_states();
  row.max_count = counts_.max_count();
  return row;
}

TrainResult Train(const RunConfig& cfg, const std::filesystem::path& out_dir,
                  std::ostream* progress) {
  std::filesystem::create_directories(out_dir);
  WriteFile(out_dir / "config.json", ConfigToJson(cfg).dump(2) + "\n");
  std::ofstream metrics(out_dir / "metrics.csv");
  std::ofstream episodes(out_dir / "episodes.csv");
  if (!metrics || !episodes) throw std::runtime_error("cannot open outputs in " + out_dir.string());
  metrics << MetricsHeader() << '\n' << std::flush;
  episodes << EpisodeHeader() << '\n' << std::flush;

  TrainResult result;
  try {
    Trainer trainer(cfg);
    WriteFile(out_dir / "checkpoint.json", SaveCheckpoint(trainer.params()));
    while (!trainer.finished()) {
      const MetricsRow row = trainer.run_iteration();
      metrics << FormatMetricsRow(row) << '\n' << std::flush;
      for (const EpisodeRecord& record : trainer.take_episode_records()) {
        episodes << FormatEpisodeRow(record) << '\n';
      }
      episodes << std::flush;
      ++result.iterations;
      result.final_return_mean = row.return_mean;
      if (!result.steps_to_threshold && trainer.threshold_reached()) {
        result.steps_to_threshold = row.env_steps;
      }
      if (progress) {
        *progress << cfg.name << " it=" << row.iteration << " steps=" << row.env_steps
                  << " return=" << row.return_mean << " bc_loss=" << row.bc_loss << '\n';
      }
    }
    result.env_steps = trainer.env_steps();
    WriteFile(out_dir / "checkpoint.json", SaveCheckpoint(trainer.params()));
    WriteFile(out_dir / "buffer.json", trainer.buffer().snapshot_json() + "\n");
  } catch (const std::exception& e) {
    WriteFile(out_dir / "error.txt", std::string(e.what()) + "\n");
    throw;
  }
  return result;
}

}  // namespace silab
