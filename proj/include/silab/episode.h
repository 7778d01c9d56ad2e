#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "silab/gridworld.h"

namespace silab {

enum class NormalizationMode : std::uint8_t { kDefault, kNormalized, kNormalizedFlex };

struct EpisodeScore {
  double s_ext = 0.0;
  double s_local = 0.0;
  double s_global = 0.0;
  double total = 0.0;
  NormalizationMode mode = NormalizationMode::kDefault;
};

struct Transition {
  Observation obs;
  int action = 0;
  double log_prob_behavior = 0.0;
  double reward = 0.0;  // extrinsic only
  Observation next_obs;
  bool done = false;
  double mc_return = 0.0;  // discounted return-to-go G_t
  std::int64_t episode_id = 0;
  std::int64_t level_id = 0;
  int step_index = 0;
};

struct Episode {
  std::vector<Transition> transitions;
  EpisodeScore score;
  std::int64_t level_id = 0;
  std::int64_t episode_id = 0;

  std::size_t size() const { return transitions.size(); }
  double undiscounted_return() const;
  bool succeeded() const { return undiscounted_return() > 0.0; }
};

// Fills mc_return for every transition: G_t = r_t + gamma * G_{t+1}.
void ComputeReturns(std::span<Transition> transitions, double gamma);

}  // namespace silab
