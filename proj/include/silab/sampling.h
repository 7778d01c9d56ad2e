#pragma once

#include <span>
#include <string>
#include <vector>

#include "silab/intrinsic.h"
#include "silab/policy.h"
#include "silab/random.h"
#include "silab/replay.h"

namespace silab {

enum class PriorityProxy { kUniform, kTDError, kLogLikelihood, kNovelty };
enum class ReplayFilter { kNone, kNonZeroReturn, kPositiveAdvantage, kUniqueStates };

struct PriorityConfig {
  PriorityProxy proxy = PriorityProxy::kUniform;
  double alpha = 0.6;
  double td_epsilon = 1e-6;
  double gamma = 0.99;
  // Scale BC terms by normalized (N * P(i))^-1 weights.
  bool importance_weights = false;

  void validate() const;
};

const char* ProxyName(PriorityProxy proxy);
PriorityProxy ParseProxy(const std::string& name);
const char* FilterName(ReplayFilter filter);
ReplayFilter ParseFilter(const std::string& name);

// Raw priority p_i >= 0 for one transition:
//   Uniform 1; TDError |r + gamma V(s') (1 - done) - V(s)| + eps;
//   LogLikelihood pi(a|s); Novelty 1 / sqrt(N(s)).
double Priority(const Transition& t, const PriorityConfig& cfg, const PolicyParams& agent,
                const CountTable& counts);

// Same as Priority for every entry of a view, with batched network calls.
std::vector<double> Priorities(const TransitionView& view, const PriorityConfig& cfg,
                               const PolicyParams& agent, const CountTable& counts);

// P(i) = p_i^alpha / sum_k p_k^alpha. Falls back to uniform when every p_i^alpha
// is zero and reports it through fell_back.
std::vector<double> SamplingProbabilities(std::span<const double> priorities, double alpha,
                                          bool* fell_back = nullptr);

// Independent draws with replacement by inverse CDF.
std::vector<std::size_t> DrawIndices(std::span<const double> probabilities, std::size_t n,
                                     Rng& rng);

struct SampleStats {
  double entropy = 0.0;  // entropy of P over the view, nats
  bool uniform_fallback = false;
};

struct SampledBatch {
  std::vector<std::size_t> indices;  // into the view
  std::vector<double> weights;       // importance weights, empty when disabled
  SampleStats stats;
};

SampledBatch Sample(const TransitionView& view, std::size_t batch_size,
                    const PriorityConfig& cfg, const PolicyParams& agent,
                    const CountTable& counts, Rng& rng);

// NonZeroReturn: entries of successful episodes, or the whole view if none.
// PositiveAdvantage: entries with G_t - V(s_t) > 0 (possibly empty).
// UniqueStates: per episode, the first entry reaching each distinct next_obs.
TransitionView ApplyFilter(const TransitionView& view, ReplayFilter filter,
                           const PolicyParams& agent);

}  // namespace silab
