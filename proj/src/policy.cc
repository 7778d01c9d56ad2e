#include "silab/policy.h"

#include <cmath>

#include "json.hpp"

namespace silab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Layer = PolicyParams::Layer;

constexpr int kCheckpointVersion = 1;

// Layers of one MLP start at base (actor 0, critic 6).
constexpr int kActorBase = PolicyParams::kActorW1;
constexpr int kCriticBase = PolicyParams::kCriticW1;

Layer L(int base, int k) { return static_cast<Layer>(base + k); }

struct MlpCache {
  MatrixXd h1;
  MatrixXd h2;
  MatrixXd out;
};

MlpCache MlpForward(const PolicyParams& p, int base, const MatrixXd& x) {
  MlpCache c;
  c.h1 = ((p.mat(L(base, 0)) * x).colwise() + p.vec(L(base, 1))).array().tanh();
  c.h2 = ((p.mat(L(base, 2)) * c.h1).colwise() + p.vec(L(base, 3))).array().tanh();
  c.out = (p.mat(L(base, 4)) * c.h2).colwise() + p.vec(L(base, 5));
  return c;
}

// Accumulates d loss / d params for one MLP given d loss / d output.
void MlpBackward(const PolicyParams& p, int base, const MatrixXd& x, const MlpCache& c,
                 const MatrixXd& d_out, VectorXd& grad) {
  auto slice = [&](int k) {
    const Layer layer = L(base, k);
    return Eigen::Map<MatrixXd>(grad.data() + p.offset(layer), p.rows(layer), p.cols(layer));
  };
  slice(4).noalias() += d_out * c.h2.transpose();
  slice(5) += d_out.rowwise().sum();
  MatrixXd d_z2 = (p.mat(L(base, 4)).transpose() * d_out).array() *
                  (1.0 - c.h2.array().square());
  slice(2).noalias() += d_z2 * c.h1.transpose();
  slice(3) += d_z2.rowwise().sum();
  MatrixXd d_z1 = (p.mat(L(base, 2)).transpose() * d_z2).array() *
                  (1.0 - c.h1.array().square());
  slice(0).noalias() += d_z1 * x.transpose();
  slice(1) += d_z1.rowwise().sum();
}

void CheckFinite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw DivergenceError(std::string("non-finite ") + what);
  }
}

}  // namespace

PolicyParams::PolicyParams(const NetworkShape& shape) : shape_(shape) {
  if (shape.inputs < 1 || shape.hidden < 1 || shape.actions < 1) {
    throw std::invalid_argument("network dimensions must be positive");
  }
  const int in = shape.inputs, h = shape.hidden, a = shape.actions;
  for (int base : {kActorBase, kCriticBase}) {
    const int out = base == kActorBase ? a : 1;
    dims_[base + 0] = {h, in};
    dims_[base + 1] = {h, 1};
    dims_[base + 2] = {h, h};
    dims_[base + 3] = {h, 1};
    dims_[base + 4] = {out, h};
    dims_[base + 5] = {out, 1};
  }
  Eigen::Index offset = 0;
  for (int k = 0; k < kNumLayers; ++k) {
    offsets_[k] = offset;
    offset += static_cast<Eigen::Index>(dims_[k].first) * dims_[k].second;
  }
  flat_ = VectorXd::Zero(offset);
}

PolicyParams PolicyParams::Init(const NetworkShape& shape, Rng& rng) {
  PolicyParams p(shape);
  for (int k = 0; k < kNumLayers; ++k) {
    const auto layer = static_cast<Layer>(k);
    const bool is_bias = (k % 2) == 1;
    if (is_bias || layer == kActorW3) continue;
    const double scale = (layer == kCriticW3 ? 1.0 : std::sqrt(2.0)) /
                         std::sqrt(static_cast<double>(p.cols(layer)));
    auto m = p.mat(layer);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = scale * rng.normal();
    }
  }
  return p;
}

const char* PolicyParams::LayerName(Layer layer) {
  static constexpr const char* kNames[kNumLayers] = {
      "actor.w1",  "actor.b1",  "actor.w2",  "actor.b2",  "actor.w3",  "actor.b3",
      "critic.w1", "critic.b1", "critic.w2", "critic.b2", "critic.w3", "critic.b3"};
  return kNames[layer];
}

Eigen::VectorXd ObservationFeatures(const Observation& obs) {
  static constexpr double kScale[kObsChannels] = {1.0 / 16, 1.0 / 8, 1.0 / 4};
  VectorXd f(kObsSize);
  for (int i = 0; i < kObsSize; ++i) f[i] = obs.data[i] * kScale[i % kObsChannels];
  return f;
}

Eigen::MatrixXd ObservationFeatures(std::span<const Observation* const> observations) {
  MatrixXd x(kObsSize, static_cast<Eigen::Index>(observations.size()));
  for (std::size_t j = 0; j < observations.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j)) = ObservationFeatures(*observations[j]);
  }
  return x;
}

Eigen::MatrixXd LogSoftmax(const Eigen::MatrixXd& logits) {
  MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    const double lse = m + std::log((logits.col(j).array() - m).exp().sum());
    out.col(j) = logits.col(j).array() - lse;
  }
  return out;
}

ForwardOutput Forward(const PolicyParams& params, const Eigen::MatrixXd& features) {
  if (features.rows() != params.shape().inputs) {
    throw std::invalid_argument("feature rows do not match network input size");
  }
  ForwardOutput out;
  out.logits = MlpForward(params, kActorBase, features).out;
  out.values = MlpForward(params, kCriticBase, features).out.row(0).transpose();
  if (!out.logits.allFinite() || !out.values.allFinite()) {
    throw DivergenceError("non-finite network output");
  }
  return out;
}

void PpoConfig::validate() const {
  if (!(clip > 0.0 && clip < 1.0)) throw std::invalid_argument("ppo.clip must be in (0,1)");
  if (value_coef < 0.0 || entropy_coef < 0.0) {
    throw std::invalid_argument("ppo coefficients must be >= 0");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("ppo.gamma must be in (0,1]");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("ppo.gae_lambda must be in (0,1]");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("ppo.lr must be positive");
  if (epochs < 1 || minibatch_size < 1) {
    throw std::invalid_argument("ppo.epochs and ppo.minibatch_size must be >= 1");
  }
}

PpoLoss EvaluatePpoLoss(const PolicyParams& params, const PpoBatch& batch,
                        const PpoConfig& cfg, Eigen::VectorXd* grad) {
  const Eigen::Index n = batch.features.cols();
  if (n == 0) throw std::invalid_argument("empty PPO batch");
  const MlpCache actor = MlpForward(params, kActorBase, batch.features);
  const MlpCache critic = MlpForward(params, kCriticBase, batch.features);
  const MatrixXd log_p = LogSoftmax(actor.out);
  const MatrixXd p = log_p.array().exp();

  PpoLoss loss;
  MatrixXd d_logits = MatrixXd::Zero(actor.out.rows(), n);
  MatrixXd d_value(1, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = batch.actions[static_cast<std::size_t>(i)];
    const double adv = batch.advantages[i];
    const double log_ratio = log_p(a, i) - batch.old_log_probs[i];
    const double ratio = std::exp(log_ratio);
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double surr1 = ratio * adv;
    const double surr2 = clipped * adv;
    loss.policy -= std::min(surr1, surr2) * inv_n;
    const double entropy = -(p.col(i).array() * log_p.col(i).array()).sum();
    loss.entropy += entropy * inv_n;
    const double v_err = critic.out(0, i) - batch.returns[i];
    loss.value += v_err * v_err * inv_n;
    loss.mean_ratio += ratio * inv_n;
    loss.clip_fraction += (std::abs(ratio - 1.0) > cfg.clip ? 1.0 : 0.0) * inv_n;
    loss.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;

    // d(-min(surr1, surr2))/d log pi(a|s): only the unclipped branch carries
    // gradient.
    const double g = surr1 <= surr2 ? adv * ratio : 0.0;
    for (Eigen::Index j = 0; j < d_logits.rows(); ++j) {
      const double onehot = j == a ? 1.0 : 0.0;
      d_logits(j, i) = inv_n * (-g * (onehot - p(j, i)) +
                                cfg.entropy_coef * p(j, i) * (log_p(j, i) + entropy));
    }
    d_value(0, i) = cfg.value_coef * 2.0 * v_err * inv_n;
  }
  loss.total = loss.policy + cfg.value_coef * loss.value - cfg.entropy_coef * loss.entropy;
  CheckFinite(loss.total, "PPO loss");
  if (grad) {
    grad->setZero(params.size());
    MlpBackward(params, kActorBase, batch.features, actor, d_logits, *grad);
    MlpBackward(params, kCriticBase, batch.features, critic, d_value, *grad);
  }
  return loss;
}

double EvaluateBcLoss(const PolicyParams& params, const Eigen::MatrixXd& features,
                      std::span<const int> actions, std::span<const double> weights,
                      std::span<const double> returns, double value_coef,
                      Eigen::VectorXd* grad) {
  const Eigen::Index n = features.cols();
  if (n == 0) throw std::invalid_argument("empty BC batch");
  const MlpCache actor = MlpForward(params, kActorBase, features);
  const MatrixXd log_p = LogSoftmax(actor.out);
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  MatrixXd d_logits = log_p.array().exp();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
    loss -= w * log_p(a, i) * inv_n;
    d_logits(a, i) -= 1.0;
    d_logits.col(i) *= w * inv_n;
  }
  const bool fit_value = value_coef > 0.0 && !returns.empty();
  MlpCache critic;
  MatrixXd d_value;
  if (fit_value) {
    critic = MlpForward(params, kCriticBase, features);
    d_value.resize(1, n);
    double value_loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double err = critic.out(0, i) - returns[static_cast<std::size_t>(i)];
      value_loss += err * err * inv_n;
      d_value(0, i) = value_coef * 2.0 * err * inv_n;
    }
    loss += value_coef * value_loss;
  }
  CheckFinite(loss, "BC loss");
  if (grad) {
    grad->setZero(params.size());
    MlpBackward(params, kActorBase, features, actor, d_logits, *grad);
    if (fit_value) MlpBackward(params, kCriticBase, features, critic, d_value, *grad);
  }
  return loss;
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  if (m_.size() != params.size()) {
    m_ = VectorXd::Zero(params.size());
    v_ = VectorXd::Zero(params.size());
    t_ = 0;
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

AdvantageEstimate GaeAdvantages(std::span<const double> rewards,
                                std::span<const double> values,
                                const std::vector<bool>& dones, double bootstrap_value,
                                double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("rollout arrays differ in length");
  }
  AdvantageEstimate est;
  est.advantages.assign(n, 0.0);
  est.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double next_value = k + 1 == n ? bootstrap_value : values[k + 1];
    const double nonterminal = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * nonterminal - values[k];
    next_adv = delta + gamma * lambda * nonterminal * next_adv;
    est.advantages[k] = next_adv;
    est.returns[k] = next_adv + values[k];
  }
  return est;
}

PpoStats PpoUpdate(PolicyParams& params, Adam& optimizer, const Rollout& rollout,
                   const PpoConfig& cfg, Rng& rng) {
  PpoStats stats;
  const std::size_t n = rollout.size();
  if (n == 0) return stats;

  AdvantageEstimate est = GaeAdvantages(rollout.rewards, rollout.values, rollout.dones,
                                        rollout.bootstrap_value, cfg.gamma, cfg.gae_lambda);
  VectorXd adv = Eigen::Map<const VectorXd>(est.advantages.data(), static_cast<Eigen::Index>(n));
  if (cfg.normalize_advantages && n > 1) {
    const double mean = adv.mean();
    const double sd = std::sqrt((adv.array() - mean).square().sum() / static_cast<double>(n));
    adv = (adv.array() - mean) / (sd + 1e-8);
  }

  std::vector<const Observation*> obs_ptrs;
  obs_ptrs.reserve(n);
  for (const Observation& o : rollout.obs) obs_ptrs.push_back(&o);
  const MatrixXd features = ObservationFeatures(obs_ptrs);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  VectorXd grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
    }
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.minibatch_size));
      const auto m = static_cast<Eigen::Index>(end - start);
      PpoBatch batch;
      batch.features.resize(features.rows(), m);
      batch.actions.resize(static_cast<std::size_t>(m));
      batch.old_log_probs.resize(m);
      batch.advantages.resize(m);
      batch.returns.resize(m);
      for (Eigen::Index j = 0; j < m; ++j) {
        const std::size_t idx = order[start + static_cast<std::size_t>(j)];
        batch.features.col(j) = features.col(static_cast<Eigen::Index>(idx));
        batch.actions[static_cast<std::size_t>(j)] = rollout.actions[idx];
        batch.old_log_probs[j] = rollout.log_probs[idx];
        batch.advantages[j] = adv[static_cast<Eigen::Index>(idx)];
        batch.returns[j] = est.returns[idx];
      }
      const PpoLoss loss = EvaluatePpoLoss(params, batch, cfg, &grad);
      const double norm = grad.norm();
      if (cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm) grad *= cfg.max_grad_norm / norm;
      optimizer.step(params.flat(), grad, cfg.lr);
      if (!params.all_finite()) throw DivergenceError("non-finite parameters after PPO step");
      stats.policy_loss += loss.policy;
      stats.value_loss += loss.value;
      stats.entropy += loss.entropy;
      stats.mean_ratio += loss.mean_ratio;
      stats.clip_fraction += loss.clip_fraction;
      stats.approx_kl += loss.approx_kl;
      ++stats.minibatches;
    }
  }
  const double k = 1.0 / stats.minibatches;
  stats.policy_loss *= k;
  stats.value_loss *= k;
  stats.entropy *= k;
  stats.mean_ratio *= k;
  stats.clip_fraction *= k;
  stats.approx_kl *= k;
  return stats;
}

BcStats BcUpdate(PolicyParams& params, Adam& optimizer,
                 std::span<const Observation* const> observations,
                 std::span<const int> actions, std::span<const double> weights,
                 std::span<const double> returns, const BcOptions& options) {
  BcStats stats;
  if (observations.empty()) return stats;
  const MatrixXd features = ObservationFeatures(observations);
  VectorXd grad;
  stats.loss = EvaluateBcLoss(params, features, actions, weights, returns,
                              options.value_coef, &grad);
  stats.batch_size = observations.size();
  optimizer.step(params.flat(), grad, options.lr);
  if (!params.all_finite()) throw DivergenceError("non-finite parameters after BC step");
  return stats;
}

ActionChoice SampleAction(const PolicyParams& params, const Observation& obs, Rng& rng) {
  const MatrixXd x = ObservationFeatures(obs);
  const ForwardOutput out = Forward(params, x);
  const MatrixXd log_p = LogSoftmax(out.logits);
  const double u = rng.uniform();
  double cumulative = 0.0;
  ActionChoice choice;
  choice.action = static_cast<int>(log_p.rows()) - 1;
  for (Eigen::Index a = 0; a < log_p.rows(); ++a) {
    cumulative += std::exp(log_p(a, 0));
    if (u < cumulative) {
      choice.action = static_cast<int>(a);
      break;
    }
  }
  choice.log_prob = log_p(choice.action, 0);
  choice.value = out.values[0];
  return choice;
}

std::string SaveCheckpoint(const PolicyParams& params) {
  using nlohmann::json;
  json layers = json::object();
  for (int k = 0; k < PolicyParams::kNumLayers; ++k) {
    const auto layer = static_cast<Layer>(k);
    const auto m = params.mat(layer);
    layers[PolicyParams::LayerName(layer)] = {
        {"rows", m.rows()},
        {"cols", m.cols()},
        {"data", std::vector<double>(m.data(), m.data() + m.size())}};
  }
  json doc = {
      {"format", "silab-policy"},
      {"version", kCheckpointVersion},
      {"shape",
       {{"inputs", params.shape().inputs},
        {"hidden", params.shape().hidden},
        {"actions", params.shape().actions}}},
      {"layers", layers},
  };
  return doc.dump();
}

PolicyParams LoadCheckpoint(const std::string& json_text) {
  using nlohmann::json;
  const json doc = json::parse(json_text);
  if (doc.value("format", "") != "silab-policy" || doc.value("version", 0) != kCheckpointVersion) {
    throw std::invalid_argument("unsupported checkpoint format");
  }
  NetworkShape shape;
  shape.inputs = doc.at("shape").at("inputs").get<int>();
  shape.hidden = doc.at("shape").at("hidden").get<int>();
  shape.actions = doc.at("shape").at("actions").get<int>();
  PolicyParams params(shape);
  for (int k = 0; k < PolicyParams::kNumLayers; ++k) {
    const auto layer = static_cast<Layer>(k);
    const json& entry = doc.at("layers").at(PolicyParams::LayerName(layer));
    const auto data = entry.at("data").get<std::vector<double>>();
    if (entry.at("rows").get<int>() != params.rows(layer) ||
        entry.at("cols").get<int>() != params.cols(layer) ||
        static_cast<Eigen::Index>(data.size()) != params.mat(layer).size()) {
      throw std::invalid_argument(std::string("checkpoint layer shape mismatch: ") +
                                  PolicyParams::LayerName(layer));
    }
    std::copy(data.begin(), data.end(), params.mat(layer).data());
  }
  return params;
}

}  // namespace silab
