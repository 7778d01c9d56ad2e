#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "silab/episode.h"

namespace silab {

// Read-only list of stored transitions, each tagged with its episode. Valid
// until the next mutation of the buffer it was taken from.
class TransitionView {
 public:
  struct Ref {
    const Episode* episode = nullptr;
    std::uint32_t step = 0;
  };

  std::size_t size() const { return refs_.size(); }
  bool empty() const { return refs_.empty(); }
  const Transition& operator[](std::size_t i) const {
    return refs_[i].episode->transitions[refs_[i].step];
  }
  const Episode& episode(std::size_t i) const { return *refs_[i].episode; }
  const Ref& ref(std::size_t i) const { return refs_[i]; }
  void push_back(Ref ref) { refs_.push_back(ref); }

  friend bool operator==(const TransitionView& a, const TransitionView& b) {
    if (a.refs_.size() != b.refs_.size()) return false;
    for (std::size_t i = 0; i < a.refs_.size(); ++i) {
      if (a.refs_[i].episode != b.refs_[i].episode || a.refs_[i].step != b.refs_[i].step) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Ref> refs_;
};

enum class InsertStatus {
  kStored,
  kRejectedCapacity,  // new episode ranked lowest while over capacity
  kRejectedQuota,     // level already at quota with better episodes
  kRejectedTooLong,   // episode alone exceeds the capacity
};

struct InsertResult {
  InsertStatus status = InsertStatus::kStored;
  std::vector<Episode> evicted;

  bool stored() const { return status == InsertStatus::kStored; }
};

// Episodes kept in rank order (score.total descending, newer first on ties)
// under a capacity measured in transitions. With a quota, each level keeps at
// most that many episodes.
class RankedBuffer {
 public:
  explicit RankedBuffer(std::size_t capacity_transitions,
                        std::optional<int> quota = std::nullopt);

  InsertResult insert(Episode episode);

  // Rank order, best first.
  std::vector<const Episode*> episodes() const;
  std::size_t num_episodes() const { return ranked_.size(); }
  std::size_t total_transitions() const { return total_transitions_; }
  std::size_t capacity() const { return capacity_; }
  std::optional<int> quota() const { return quota_; }
  int episodes_for_level(std::int64_t level_id) const;
  std::size_t distinct_levels() const { return per_level_.size(); }

  TransitionView all_transitions() const;
  // Transitions of episodes whose undiscounted return is positive.
  TransitionView success_subset() const;

  std::string snapshot_json(int indent = 2) const;

 private:
  struct Entry {
    Episode episode;
    std::uint64_t seq = 0;
  };
  static bool RanksAbove(const Entry& a, const Entry& b);
  void erase_at(std::size_t index, std::vector<Episode>* evicted);

  std::size_t capacity_;
  std::optional<int> quota_;
  std::vector<Entry> ranked_;
  std::unordered_map<std::int64_t, int> per_level_;
  std::size_t total_transitions_ = 0;
  std::uint64_t next_seq_ = 0;
};

}  // namespace silab
