#pragma once

#include <cstdint>
#include <unordered_map>

#include "silab/gridworld.h"

namespace silab {

// Lifelong visit counts N(s) plus per-episode counts N_e(s), keyed by the
// 64-bit observation hash.
class CountTable {
 public:
  // Increments both counters and returns the new episodic count.
  std::uint32_t record(const Observation& obs);

  std::uint32_t lifelong(const Observation& obs) const { return lifelong(obs.hash()); }
  std::uint32_t lifelong(std::uint64_t key) const;
  std::uint32_t episodic(const Observation& obs) const;

  void begin_episode() { episodic_.clear(); }

  std::size_t distinct_states() const { return lifelong_.size(); }
  std::size_t episodic_size() const { return episodic_.size(); }
  std::uint32_t max_count() const { return max_count_; }

 private:
  std::unordered_map<std::uint64_t, std::uint32_t> lifelong_;
  std::unordered_map<std::uint64_t, std::uint32_t> episodic_;
  std::uint32_t max_count_ = 0;
};

// BeBold count-difference bonus, evaluated after both observations have been
// recorded: beta * max(1/N(next) - 1/N(obs), 0) when next is visited for the
// first time this episode, 0 otherwise.
double BeboldReward(const CountTable& counts, const Observation& obs,
                    const Observation& next_obs, double beta = 1.0);

}  // namespace silab
