#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "silab/gridworld.h"
#include "silab/random.h"

namespace silab {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetworkShape {
  int inputs = kObsSize;
  int hidden = 64;
  int actions = kNumActions;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

// Actor and critic are separate two-layer tanh MLPs. All weights live in one
// flat vector so that optimizers and gradient checks see a single parameter
// list; the accessors below map layer views onto it (column-major).
class PolicyParams {
 public:
  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  enum Layer { kActorW1, kActorB1, kActorW2, kActorB2, kActorW3, kActorB3,
               kCriticW1, kCriticB1, kCriticW2, kCriticB2, kCriticW3, kCriticB3,
               kNumLayers };

  PolicyParams() : PolicyParams(NetworkShape{}) {}
  explicit PolicyParams(const NetworkShape& shape);

  // Gaussian init scaled by 1/sqrt(fan_in); the actor output layer starts at
  // zero so the initial policy is exactly uniform.
  static PolicyParams Init(const NetworkShape& shape, Rng& rng);

  const NetworkShape& shape() const { return shape_; }
  Eigen::VectorXd& flat() { return flat_; }
  const Eigen::VectorXd& flat() const { return flat_; }
  Eigen::Index size() const { return flat_.size(); }

  int rows(Layer layer) const { return dims_[layer].first; }
  int cols(Layer layer) const { return dims_[layer].second; }
  Eigen::Index offset(Layer layer) const { return offsets_[layer]; }
  static const char* LayerName(Layer layer);

  ConstMatMap mat(Layer layer) const {
    return ConstMatMap(flat_.data() + offsets_[layer], rows(layer), cols(layer));
  }
  MatMap mat(Layer layer) {
    return MatMap(flat_.data() + offsets_[layer], rows(layer), cols(layer));
  }
  ConstVecMap vec(Layer layer) const {
    return ConstVecMap(flat_.data() + offsets_[layer], rows(layer));
  }

  bool all_finite() const { return flat_.allFinite(); }

 private:
  NetworkShape shape_;
  std::array<std::pair<int, int>, kNumLayers> dims_{};
  std::array<Eigen::Index, kNumLayers> offsets_{};
  Eigen::VectorXd flat_;
};

// One column per observation; each channel scaled into [0, 1).
Eigen::MatrixXd ObservationFeatures(std::span<const Observation* const> observations);
Eigen::VectorXd ObservationFeatures(const Observation& obs);

struct ForwardOutput {
  Eigen::MatrixXd logits;  // actions x batch
  Eigen::VectorXd values;  // batch
};

// Throws DivergenceError on non-finite outputs.
ForwardOutput Forward(const PolicyParams& params, const Eigen::MatrixXd& features);

// Row-wise stable log-softmax of logits (actions x batch).
Eigen::MatrixXd LogSoftmax(const Eigen::MatrixXd& logits);

struct PpoConfig {
  double clip = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double lr = 7e-4;
  int epochs = 4;
  int minibatch_size = 256;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;

  void validate() const;
};

struct PpoBatch {
  Eigen::MatrixXd features;
  std::vector<int> actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

struct PpoLoss {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// total = -mean(min(rho*A, clip(rho)*A)) + value_coef * mean((V - R)^2)
//         - entropy_coef * mean(H). Writes d total / d params into grad.
PpoLoss EvaluatePpoLoss(const PolicyParams& params, const PpoBatch& batch,
                        const PpoConfig& cfg, Eigen::VectorXd* grad);

// mean_i w_i * -log pi(a_i|s_i) (+ value_coef * mean (V - G)^2 when
// value_coef > 0). Empty weights means all ones.
double EvaluateBcLoss(const PolicyParams& params, const Eigen::MatrixXd& features,
                      std::span<const int> actions, std::span<const double> weights,
                      std::span<const double> returns, double value_coef,
                      Eigen::VectorXd* grad);

class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
  int steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  Eigen::VectorXd m_, v_;
  int t_ = 0;
};

struct Rollout {
  std::vector<Observation> obs;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;  // reward used for learning (may include bonus)
  std::vector<double> values;
  std::vector<bool> dones;
  double bootstrap_value = 0.0;  // V of the state after the last step

  std::size_t size() const { return actions.size(); }
};

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

AdvantageEstimate GaeAdvantages(std::span<const double> rewards,
                                std::span<const double> values,
                                const std::vector<bool>& dones, double bootstrap_value,
                                double gamma, double lambda);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int minibatches = 0;
};

// cfg.epochs passes of shuffled minibatch Adam steps on the clipped surrogate.
PpoStats PpoUpdate(PolicyParams& params, Adam& optimizer, const Rollout& rollout,
                   const PpoConfig& cfg, Rng& rng);

struct BcStats {
  double loss = 0.0;
  std::size_t batch_size = 0;
};

struct BcOptions {
  double lr = 7e-4;
  double value_coef = 0.0;  // > 0 adds Monte Carlo value regression
};

// One Adam step on the behavior-cloning loss; empty batches are a no-op.
BcStats BcUpdate(PolicyParams& params, Adam& optimizer,
                 std::span<const Observation* const> observations,
                 std::span<const int> actions, std::span<const double> weights,
                 std::span<const double> returns, const BcOptions& options);

struct ActionChoice {
  int action = 0;
  double log_prob = 0.0;
  double value = 0.0;
};

ActionChoice SampleAction(const PolicyParams& params, const Observation& obs, Rng& rng);

std::string SaveCheckpoint(const PolicyParams& params);
PolicyParams LoadCheckpoint(const std::string& json_text);

}  // namespace silab
