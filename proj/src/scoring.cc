#include "silab/scoring.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace silab {

double Episode::undiscounted_return() const {
  double total = 0.0;
  for (const Transition& t : transitions) total += t.reward;
  return total;
}

void ComputeReturns(std::span<Transition> transitions, double gamma) {
  double g = 0.0;
  for (auto it = transitions.rbegin(); it != transitions.rend(); ++it) {
    g = it->reward + gamma * g;
    it->mc_return = g;
  }
}

void ScoreWeights::validate() const {
  for (double w : {w0, w1, w2}) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("score weights must be finite and >= 0");
    }
  }
}

double ExtrinsicScore(const Episode& episode, double gamma) {
  double discount = 1.0;
  double total = 0.0;
  for (const Transition& t : episode.transitions) {
    total += discount * t.reward;
    discount *= gamma;
  }
  return total;
}

double LocalScore(const Episode& episode) {
  if (episode.transitions.empty()) throw ContractViolation("empty episode");
  std::unordered_set<Observation, ObservationHash> distinct;
  for (const Transition& t : episode.transitions) distinct.insert(t.obs);
  return static_cast<double>(distinct.size()) / episode.transitions.size();
}

double GlobalScore(const Episode& episode, const CountTable& counts) {
  if (episode.transitions.empty()) throw ContractViolation("empty episode");
  double total = 0.0;
  for (const Transition& t : episode.transitions) {
    const std::uint32_t n = counts.lifelong(t.obs);
    if (n == 0) {
      throw ContractViolation("observation scored before being counted");
    }
    total += 1.0 / std::sqrt(static_cast<double>(n));
  }
  return total / episode.transitions.size();
}

double OptimalReturn(int optimal_steps, int max_steps) {
  return SuccessReward(optimal_steps, max_steps);
}

double NormalizeReturn(double g, int episode_steps, int optimal_steps, int max_steps,
                       NormalizationMode mode) {
  if (mode == NormalizationMode::kDefault) return g;
  if (optimal_steps < 1) throw ContractViolation("optimal_steps must be >= 1");
  const double normalized = std::clamp(g / OptimalReturn(optimal_steps, max_steps), 0.0, 1.0);
  if (mode == NormalizationMode::kNormalizedFlex && g > 0.0) {
    const int extra = episode_steps - optimal_steps;
    if (extra >= 0 && extra <= kFlexSlackSteps) return 1.0;
  }
  return normalized;
}

EpisodeScore ScoreEpisode(const Episode& episode, const ScoreWeights& weights,
                          const CountTable& counts, double gamma,
                          NormalizationMode mode, const Level& level) {
  EpisodeScore score;
  score.mode = mode;
  score.s_ext = NormalizeReturn(ExtrinsicScore(episode, gamma),
                                static_cast<int>(episode.size()), level.optimal_steps,
                                level.max_steps, mode);
  score.s_local = LocalScore(episode);
  score.s_global = GlobalScore(episode, counts);
  score.total = weights.w0 * score.s_ext + weights.w1 * score.s_local +
                weights.w2 * score.s_global;
  return score;
}

const char* NormalizationName(NormalizationMode mode) {
  switch (mode) {
    case NormalizationMode::kNormalized: return "normalized";
    case NormalizationMode::kNormalizedFlex: return "normalized_flex";
    default: return "default";
  }
}

NormalizationMode ParseNormalization(const std::string& name) {
  if (name == "default") return NormalizationMode::kDefault;
  if (name == "normalized") return NormalizationMode::kNormalized;
  if (name == "normalized_flex") return NormalizationMode::kNormalizedFlex;
  throw std::invalid_argument("unknown normalization mode '" + name + "'");
}

}  // namespace silab
