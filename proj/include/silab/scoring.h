#pragma once

#include "silab/episode.h"
#include "silab/intrinsic.h"

namespace silab {

// Weights on the extrinsic, in-episode diversity and lifelong novelty scores.
struct ScoreWeights {
  double w0 = 1.0;
  double w1 = 0.1;
  double w2 = 0.001;

  void validate() const;
};

// Discounted return from the first step, sum_k gamma^k r_k.
double ExtrinsicScore(const Episode& episode, double gamma);

// Fraction of distinct observations among the episode's steps.
double LocalScore(const Episode& episode);

// Mean of 1/sqrt(N(s_t)) over the episode's steps using lifelong counts.
// Throws ContractViolation if an observation has never been counted.
double GlobalScore(const Episode& episode, const CountTable& counts);

// Return an optimal solver would earn on a level.
double OptimalReturn(int optimal_steps, int max_steps);

// Default: g unchanged. Normalized: g / g_opt clamped to [0, 1].
// NormalizedFlex: 1 for successes within 20 steps of optimal, else Normalized.
double NormalizeReturn(double g, int episode_steps, int optimal_steps, int max_steps,
                       NormalizationMode mode);

inline constexpr int kFlexSlackSteps = 20;

EpisodeScore ScoreEpisode(const Episode& episode, const ScoreWeights& weights,
                          const CountTable& counts, double gamma,
                          NormalizationMode mode, const Level& level);

const char* NormalizationName(NormalizationMode mode);
NormalizationMode ParseNormalization(const std::string& name);

}  // namespace silab
