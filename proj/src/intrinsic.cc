#include "silab/intrinsic.h"

#include <algorithm>

namespace silab {

std::uint32_t CountTable::record(const Observation& obs) {
  const std::uint64_t key = obs.hash();
  const std::uint32_t n = ++lifelong_[key];
  max_count_ = std::max(max_count_, n);
  return ++episodic_[key];
}

std::uint32_t CountTable::lifelong(std::uint64_t key) const {
  auto it = lifelong_.find(key);
  return it == lifelong_.end() ? 0 : it->second;
}

std::uint32_t CountTable::episodic(const Observation& obs) const {
  auto it = episodic_.find(obs.hash());
  return it == episodic_.end() ? 0 : it->second;
}

double BeboldReward(const CountTable& counts, const Observation& obs,
                    const Observation& next_obs, double beta) {
  const std::uint32_t n_obs = counts.lifelong(obs);
  const std::uint32_t n_next = counts.lifelong(next_obs);
  if (n_obs == 0 || n_next == 0) {
    throw ContractViolation("BeBold reward requested for an unrecorded observation");
  }
  if (counts.episodic(next_obs) != 1) return 0.0;
  const double diff = 1.0 / n_next - 1.0 / n_obs;
  return beta * std::max(diff, 0.0);
}

}  // namespace silab
