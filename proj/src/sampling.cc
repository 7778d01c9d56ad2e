#include "silab/sampling.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <unordered_set>

namespace silab {

namespace {

constexpr std::size_t kChunk = 1024;

// Runs the network over the observations selected by `pick` in chunks.
template <typename Pick>
ForwardOutput ForwardView(const PolicyParams& agent, std::size_t n, Pick pick) {
  ForwardOutput all;
  all.logits.resize(agent.shape().actions, static_cast<Eigen::Index>(n));
  all.values.resize(static_cast<Eigen::Index>(n));
  std::vector<const Observation*> obs;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t end = std::min(n, start + kChunk);
    obs.clear();
    for (std::size_t i = start; i < end; ++i) obs.push_back(&pick(i));
    const ForwardOutput out = Forward(agent, ObservationFeatures(obs));
    const auto s = static_cast<Eigen::Index>(start);
    const auto m = static_cast<Eigen::Index>(end - start);
    all.logits.middleCols(s, m) = out.logits;
    all.values.segment(s, m) = out.values;
  }
  return all;
}

double NoveltyPriority(const Transition& t, const CountTable& counts) {
  const std::uint32_t n = counts.lifelong(t.obs);
  if (n == 0) throw ContractViolation("novelty priority for an uncounted observation");
  return 1.0 / std::sqrt(static_cast<double>(n));
}

}  // namespace

void PriorityConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0,1]");
  if (!(td_epsilon > 0.0)) throw std::invalid_argument("td_epsilon must be positive");
}

const char* ProxyName(PriorityProxy proxy) {
  switch (proxy) {
    case PriorityProxy::kTDError: return "td_error";
    case PriorityProxy::kLogLikelihood: return "log_likelihood";
    case PriorityProxy::kNovelty: return "novelty";
    default: return "uniform";
  }
}

PriorityProxy ParseProxy(const std::string& name) {
  if (name == "uniform") return PriorityProxy::kUniform;
  if (name == "td_error") return PriorityProxy::kTDError;
  if (name == "log_likelihood") return PriorityProxy::kLogLikelihood;
  if (name == "novelty") return PriorityProxy::kNovelty;
  throw std::invalid_argument("unknown priority proxy '" + name + "'");
}

const char* FilterName(ReplayFilter filter) {
  switch (filter) {
    case ReplayFilter::kNonZeroReturn: return "non_zero_return";
    case ReplayFilter::kPositiveAdvantage: return "positive_advantage";
    case ReplayFilter::kUniqueStates: return "unique_states";
    default: return "none";
  }
}

ReplayFilter ParseFilter(const std::string& name) {
  if (name == "none") return ReplayFilter::kNone;
  if (name == "non_zero_return") return ReplayFilter::kNonZeroReturn;
  if (name == "positive_advantage") return ReplayFilter::kPositiveAdvantage;
  if (name == "unique_states") return ReplayFilter::kUniqueStates;
  throw std::invalid_argument("unknown replay filter '" + name + "'");
}

double Priority(const Transition& t, const PriorityConfig& cfg, const PolicyParams& agent,
                const CountTable& counts) {
  switch (cfg.proxy) {
    case PriorityProxy::kUniform:
      return 1.0;
    case PriorityProxy::kNovelty:
      return NoveltyPriority(t, counts);
    case PriorityProxy::kTDError: {
      const double v = Forward(agent, ObservationFeatures(t.obs)).values[0];
      const double v_next =
          t.done ? 0.0 : Forward(agent, ObservationFeatures(t.next_obs)).values[0];
      return std::abs(t.reward + cfg.gamma * v_next - v) + cfg.td_epsilon;
    }
    case PriorityProxy::kLogLikelihood: {
      const auto out = Forward(agent, ObservationFeatures(t.obs));
      return std::exp(LogSoftmax(out.logits)(t.action, 0));
    }
  }
  return 1.0;
}

std::vector<double> Priorities(const TransitionView& view, const PriorityConfig& cfg,
                               const PolicyParams& agent, const CountTable& counts) {
  const std::size_t n = view.size();
  std::vector<double> p(n, 1.0);
  switch (cfg.proxy) {
    case PriorityProxy::kUniform:
      break;
    case PriorityProxy::kNovelty:
      for (std::size_t i = 0; i < n; ++i) p[i] = NoveltyPriority(view[i], counts);
      break;
    case PriorityProxy::kTDError: {
      const ForwardOutput now = ForwardView(agent, n, [&](std::size_t i) -> const Observation& {
        return view[i].obs;
      });
      const ForwardOutput next = ForwardView(agent, n, [&](std::size_t i) -> const Observation& {
        return view[i].next_obs;
      });
      for (std::size_t i = 0; i < n; ++i) {
        const Transition& t = view[i];
        const auto k = static_cast<Eigen::Index>(i);
        const double v_next = t.done ? 0.0 : next.values[k];
        p[i] = std::abs(t.reward + cfg.gamma * v_next - now.values[k]) + cfg.td_epsilon;
      }
      break;
    }
    case PriorityProxy::kLogLikelihood: {
      const ForwardOutput out = ForwardView(agent, n, [&](std::size_t i) -> const Observation& {
        return view[i].obs;
      });
      const Eigen::MatrixXd log_p = LogSoftmax(out.logits);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::exp(log_p(view[i].action, static_cast<Eigen::Index>(i)));
      }
      break;
    }
  }
  return p;
}

std::vector<double> SamplingProbabilities(std::span<const double> priorities, double alpha,
                                          bool* fell_back) {
  const std::size_t n = priorities.size();
  std::vector<double> probs(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(priorities[i] >= 0.0) || !std::isfinite(priorities[i])) {
      throw DivergenceError("priority must be finite and >= 0");
    }
    probs[i] = alpha == 0.0 ? 1.0 : std::pow(priorities[i], alpha);
    total += probs[i];
  }
  const bool degenerate = n > 0 && total <= 0.0;
  if (fell_back) *fell_back = degenerate;
  if (degenerate) {
    std::clog << "warning: all replay priorities are zero; sampling uniformly\n";
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(n));
    return probs;
  }
  for (double& q : probs) q /= total;
  return probs;
}

std::vector<std::size_t> DrawIndices(std::span<const double> probabilities, std::size_t n,
                                     Rng& rng) {
  std::vector<double> cdf(probabilities.size());
  double running = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    running += probabilities[i];
    cdf[i] = running;
  }
  std::vector<std::size_t> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform() * running;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // Skip trailing zero-probability entries that rounding could land on.
    std::size_t idx = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
    while (idx > 0 && probabilities[idx] == 0.0) --idx;
    out[k] = idx;
  }
  return out;
}

SampledBatch Sample(const TransitionView& view, std::size_t batch_size,
                    const PriorityConfig& cfg, const PolicyParams& agent,
                    const CountTable& counts, Rng& rng) {
  if (view.empty()) throw ContractViolation("cannot sample from an empty view");
  if (batch_size == 0) throw ContractViolation("batch_size must be >= 1");
  SampledBatch batch;
  const std::vector<double> p = Priorities(view, cfg, agent, counts);
  const std::vector<double> probs = SamplingProbabilities(p, cfg.alpha, &batch.stats.uniform_fallback);
  for (double q : probs) {
    if (q > 0.0) batch.stats.entropy -= q * std::log(q);
  }
  batch.indices = DrawIndices(probs, batch_size, rng);
  if (cfg.importance_weights) {
    const double n = static_cast<double>(view.size());
    double max_w = 0.0;
    batch.weights.reserve(batch_size);
    for (std::size_t idx : batch.indices) {
      batch.weights.push_back(1.0 / (n * probs[idx]));
      max_w = std::max(max_w, batch.weights.back());
    }
    for (double& w : batch.weights) w /= max_w;
  }
  return batch;
}

TransitionView ApplyFilter(const TransitionView& view, ReplayFilter filter,
                           const PolicyParams& agent) {
  switch (filter) {
    case ReplayFilter::kNone:
      return view;
    case ReplayFilter::kNonZeroReturn: {
      TransitionView out;
      for (std::size_t i = 0; i < view.size(); ++i) {
        if (view.episode(i).succeeded()) out.push_back(view.ref(i));
      }
      return out.empty() ? view : out;
    }
    case ReplayFilter::kPositiveAdvantage: {
      TransitionView out;
      const ForwardOutput values = ForwardView(agent, view.size(), [&](std::size_t i) -> const Observation& {
        return view[i].obs;
      });
      for (std::size_t i = 0; i < view.size(); ++i) {
        if (view[i].mc_return - values.values[static_cast<Eigen::Index>(i)] > 0.0) {
          out.push_back(view.ref(i));
        }
      }
      return out;
    }
    case ReplayFilter::kUniqueStates: {
      TransitionView out;
      std::map<const Episode*, std::unordered_set<Observation, ObservationHash>> seen;
      for (std::size_t i = 0; i < view.size(); ++i) {
        if (seen[&view.episode(i)].insert(view[i].next_obs).second) out.push_back(view.ref(i));
      }
      return out;
    }
  }
  return view;
}

}  // namespace silab
