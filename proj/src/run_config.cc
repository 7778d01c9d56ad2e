#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "silab/trainer.h"

namespace silab {

using nlohmann::json;

namespace {

// Reads known keys of one section and rejects anything else.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw std::invalid_argument(where("") + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    known_.push_back(key);
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument("config key '" + where(key) + "': " + e.what());
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& out) {
    known_.push_back(key);
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    T value{};
    read(key, value);
    out = value;
  }

  Section sub(const char* key) {
    known_.push_back(key);
    auto it = doc_.find(key);
    static const json kEmpty = json::object();
    return Section(it == doc_.end() ? kEmpty : *it, where(key));
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (std::find(known_.begin(), known_.end(), it.key()) == known_.end()) {
        throw std::invalid_argument("unknown config key '" + where(it.key()) + "'");
      }
    }
  }

 private:
  std::string where(const std::string& key) const {
    if (path_.empty()) return key;
    return key.empty() ? path_ : path_ + "." + key;
  }

  const json& doc_;
  std::string path_;
  std::vector<std::string> known_;
};

std::string Fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  // Avoid "-0.000000" so that equal runs format identically.
  if (std::string(buf) == "-0.000000") return "0.000000";
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  if (name.empty()) throw std::invalid_argument("name must not be empty");
  task.validate();
  for (std::int64_t id : level_seeds) {
    if (id < 0) throw std::invalid_argument("level_seeds must be >= 0");
  }
  if (total_steps < 0) throw std::invalid_argument("total_steps must be >= 0");
  if (rollout_length < 1) throw std::invalid_argument("rollout_length must be >= 1");
  if (return_window < 1) throw std::invalid_argument("return_window must be >= 1");
  if (hidden < 1) throw std::invalid_argument("network.hidden must be >= 1");
  ppo.validate();
  weights.validate();
  if (!(ranking_gamma > 0.0 && ranking_gamma <= 1.0)) {
    throw std::invalid_argument("scoring.gamma must be in (0,1]");
  }
  if (buffer_capacity < 1) throw std::invalid_argument("replay.capacity must be >= 1");
  if (buffer_quota && *buffer_quota < 1) throw std::invalid_argument("replay.quota must be >= 1");
  priority.validate();
  if (bc_batch_size < 1) throw std::invalid_argument("imitation.batch_size must be >= 1");
  if (bc_updates < 0) throw std::invalid_argument("imitation.updates must be >= 0");
  if (bc_lr && !(*bc_lr > 0.0)) throw std::invalid_argument("imitation.lr must be positive");
  if (bc_value_coef < 0.0) throw std::invalid_argument("imitation.value_coef must be >= 0");
  if (intrinsic_beta < 0.0) throw std::invalid_argument("intrinsic.beta must be >= 0");
}

json ConfigToJson(const RunConfig& cfg) {
  return {
      {"name", cfg.name},
      {"seed", cfg.seed},
      {"task", cfg.task.name()},
      {"level_seeds", cfg.level_seeds},
      {"total_steps", cfg.total_steps},
      {"rollout_length", cfg.rollout_length},
      {"return_window", cfg.return_window},
      {"success_threshold", cfg.success_threshold},
      {"stop_at_threshold", cfg.stop_at_threshold},
      {"network", {{"hidden", cfg.hidden}}},
      {"ppo",
       {{"clip", cfg.ppo.clip},
        {"value_coef", cfg.ppo.value_coef},
        {"entropy_coef", cfg.ppo.entropy_coef},
        {"lr", cfg.ppo.lr},
        {"epochs", cfg.ppo.epochs},
        {"minibatch_size", cfg.ppo.minibatch_size},
        {"gamma", cfg.ppo.gamma},
        {"gae_lambda", cfg.ppo.gae_lambda},
        {"max_grad_norm", cfg.ppo.max_grad_norm},
        {"normalize_advantages", cfg.ppo.normalize_advantages}}},
      {"scoring",
       {{"w0", cfg.weights.w0},
        {"w1", cfg.weights.w1},
        {"w2", cfg.weights.w2},
        {"normalization", NormalizationName(cfg.normalization)},
        {"gamma", cfg.ranking_gamma}}},
      {"replay",
       {{"capacity", cfg.buffer_capacity},
        {"quota", cfg.buffer_quota ? json(*cfg.buffer_quota) : json(nullptr)}}},
      {"sampling",
       {{"proxy", ProxyName(cfg.priority.proxy)},
        {"alpha", cfg.priority.alpha},
        {"td_epsilon", cfg.priority.td_epsilon},
        {"importance_weights", cfg.priority.importance_weights},
        {"filter", FilterName(cfg.filter)}}},
      {"imitation",
       {{"batch_size", cfg.bc_batch_size},
        {"updates", cfg.bc_updates},
        {"lr", cfg.bc_lr ? json(*cfg.bc_lr) : json(nullptr)},
        {"value_coef", cfg.bc_value_coef}}},
      {"intrinsic", {{"enabled", cfg.intrinsic}, {"beta", cfg.intrinsic_beta}}},
  };
}

RunConfig ConfigFromJson(const json& doc) {
  RunConfig cfg;
  Section top(doc, "");
  top.read("name", cfg.name);
  top.read("seed", cfg.seed);
  std::string task = cfg.task.name();
  top.read("task", task);
  cfg.task = ParseTaskSpec(task);
  top.read("level_seeds", cfg.level_seeds);
  top.read("total_steps", cfg.total_steps);
  top.read("rollout_length", cfg.rollout_length);
  top.read("return_window", cfg.return_window);
  top.read("success_threshold", cfg.success_threshold);
  top.read("stop_at_threshold", cfg.stop_at_threshold);

  Section network = top.sub("network");
  network.read("hidden", cfg.hidden);
  network.finish();

  Section ppo = top.sub("ppo");
  ppo.read("clip", cfg.ppo.clip);
  ppo.read("value_coef", cfg.ppo.value_coef);
  ppo.read("entropy_coef", cfg.ppo.entropy_coef);
  ppo.read("lr", cfg.ppo.lr);
  ppo.read("epochs", cfg.ppo.epochs);
  ppo.read("minibatch_size", cfg.ppo.minibatch_size);
  ppo.read("gamma", cfg.ppo.gamma);
  ppo.read("gae_lambda", cfg.ppo.gae_lambda);
  ppo.read("max_grad_norm", cfg.ppo.max_grad_norm);
  ppo.read("normalize_advantages", cfg.ppo.normalize_advantages);
  ppo.finish();

  Section scoring = top.sub("scoring");
  scoring.read("w0", cfg.weights.w0);
  scoring.read("w1", cfg.weights.w1);
  scoring.read("w2", cfg.weights.w2);
  std::string normalization = NormalizationName(cfg.normalization);
  scoring.read("normalization", normalization);
  cfg.normalization = ParseNormalization(normalization);
  scoring.read("gamma", cfg.ranking_gamma);
  scoring.finish();

  Section replay = top.sub("replay");
  replay.read("capacity", cfg.buffer_capacity);
  replay.read_optional("quota", cfg.buffer_quota);
  replay.finish();

  Section sampling = top.sub("sampling");
  std::string proxy = ProxyName(cfg.priority.proxy);
  sampling.read("proxy", proxy);
  cfg.priority.proxy = ParseProxy(proxy);
  sampling.read("alpha", cfg.priority.alpha);
  sampling.read("td_epsilon", cfg.priority.td_epsilon);
  sampling.read("importance_weights", cfg.priority.importance_weights);
  std::string filter = FilterName(cfg.filter);
  sampling.read("filter", filter);
  cfg.filter = ParseFilter(filter);
  sampling.finish();

  Section imitation = top.sub("imitation");
  imitation.read("batch_size", cfg.bc_batch_size);
  imitation.read("updates", cfg.bc_updates);
  imitation.read_optional("lr", cfg.bc_lr);
  imitation.read("value_coef", cfg.bc_value_coef);
  imitation.finish();

  Section intrinsic = top.sub("intrinsic");
  intrinsic.read("enabled", cfg.intrinsic);
  intrinsic.read("beta", cfg.intrinsic_beta);
  intrinsic.finish();

  top.finish();
  cfg.priority.gamma = cfg.ppo.gamma;
  cfg.validate();
  return cfg;
}

void ApplyOverride(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override must look like key.path=value, got '" +
                                assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::stringstream ss(path);
  std::vector<std::string> keys;
  for (std::string key; std::getline(ss, key, '.');) keys.push_back(key);
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    json& child = (*node)[keys[i]];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) {
      throw std::invalid_argument("override path '" + path + "' crosses a non-object");
    }
    node = &child;
  }
  (*node)[keys.back()] = value;
}

const std::vector<std::string>& MetricsColumns() {
  static const std::vector<std::string> kColumns = {
      "iteration",         "env_steps",          "episodes",
      "return_mean",       "return_std",         "bc_loss",
      "bc_steps",          "ppo_policy_loss",    "ppo_value_loss",
      "ppo_entropy",       "ppo_clip_fraction",  "ppo_mean_ratio",
      "ppo_approx_kl",     "buffer_episodes",    "buffer_transitions",
      "buffer_score_min",  "buffer_score_median", "buffer_score_max",
      "buffer_levels",     "sample_entropy",     "filter_pass_rate",
      "distinct_states",   "max_count",          "intrinsic_mean"};
  return kColumns;
}

std::string MetricsHeader() {
  std::string out;
  for (const auto& c : MetricsColumns()) out += (out.empty() ? "" : ",") + c;
  return out;
}

std::string FormatMetricsRow(const MetricsRow& r) {
  std::ostringstream os;
  os << r.iteration << ',' << r.env_steps << ',' << r.episodes << ',' << Fixed(r.return_mean)
     << ',' << Fixed(r.return_std) << ',' << Fixed(r.bc_loss) << ',' << r.bc_steps << ','
     << Fixed(r.ppo.policy_loss) << ',' << Fixed(r.ppo.value_loss) << ','
     << Fixed(r.ppo.entropy) << ',' << Fixed(r.ppo.clip_fraction) << ','
     << Fixed(r.ppo.mean_ratio) << ',' << Fixed(r.ppo.approx_kl) << ',' << r.buffer_episodes
     << ',' << r.buffer_transitions << ',' << Fixed(r.buffer_score_min) << ','
     << Fixed(r.buffer_score_median) << ',' << Fixed(r.buffer_score_max) << ','
     << r.buffer_levels << ',' << Fixed(r.sample_entropy) << ',' << Fixed(r.filter_pass_rate)
     << ',' << r.distinct_states << ',' << r.max_count << ',' << Fixed(r.intrinsic_mean);
  return os.str();
}

const std::vector<std::string>& EpisodeColumns() {
  static const std::vector<std::string> kColumns = {
      "episode", "env_steps", "level_id", "length", "return", "score", "stored"};
  return kColumns;
}

std::string EpisodeHeader() {
  std::string out;
  for (const auto& c : EpisodeColumns()) out += (out.empty() ? "" : ",") + c;
  return out;
}

std::string FormatEpisodeRow(const EpisodeRecord& e) {
  std::ostringstream os;
  os << e.episode_id << ',' << e.env_steps << ',' << e.level_id << ',' << e.length << ','
     << Fixed(e.ret) << ',' << Fixed(e.score) << ',' << (e.stored ? 1 : 0);
  return os.str();
}

}  // namespace silab
