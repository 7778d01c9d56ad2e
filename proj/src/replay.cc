#include "silab/replay.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "silab/scoring.h"

namespace silab {

RankedBuffer::RankedBuffer(std::size_t capacity_transitions, std::optional<int> quota)
    : capacity_(capacity_transitions), quota_(quota) {
  if (capacity_ == 0) throw std::invalid_argument("buffer capacity must be positive");
  if (quota_ && *quota_ < 1) throw std::invalid_argument("quota must be >= 1");
}

bool RankedBuffer::RanksAbove(const Entry& a, const Entry& b) {
  if (a.episode.score.total != b.episode.score.total) {
    return a.episode.score.total > b.episode.score.total;
  }
  return a.seq > b.seq;
}

void RankedBuffer::erase_at(std::size_t index, std::vector<Episode>* evicted) {
  Entry& entry = ranked_[index];
  total_transitions_ -= entry.episode.size();
  if (--per_level_[entry.episode.level_id] == 0) per_level_.erase(entry.episode.level_id);
  if (evicted) evicted->push_back(std::move(entry.episode));
  ranked_.erase(ranked_.begin() + static_cast<std::ptrdiff_t>(index));
}

InsertResult RankedBuffer::insert(Episode episode) {
  if (episode.transitions.empty()) throw ContractViolation("cannot store an empty episode");
  if (!std::isfinite(episode.score.total)) {
    throw ContractViolation("episode score must be finite");
  }
  InsertResult result;
  if (episode.size() > capacity_) {
    result.status = InsertStatus::kRejectedTooLong;
    return result;
  }

  if (quota_ && episodes_for_level(episode.level_id) >= *quota_) {
    // Lowest-ranked episode of the same level.
    std::size_t worst = ranked_.size();
    for (std::size_t i = ranked_.size(); i-- > 0;) {
      if (ranked_[i].episode.level_id == episode.level_id) {
        worst = i;
        break;
      }
    }
    if (!(episode.score.total > ranked_[worst].episode.score.total)) {
      result.status = InsertStatus::kRejectedQuota;
      return result;
    }
    erase_at(worst, &result.evicted);
  }

  Entry entry{std::move(episode), next_seq_++};
  const std::uint64_t seq = entry.seq;
  auto pos = std::upper_bound(ranked_.begin(), ranked_.end(), entry,
                              [](const Entry& a, const Entry& b) { return RanksAbove(a, b); });
  total_transitions_ += entry.episode.size();
  ++per_level_[entry.episode.level_id];
  ranked_.insert(pos, std::move(entry));

  while (total_transitions_ > capacity_) {
    if (ranked_.back().seq == seq) {
      result.status = InsertStatus::kRejectedCapacity;
      erase_at(ranked_.size() - 1, nullptr);
    } else {
      erase_at(ranked_.size() - 1, &result.evicted);
    }
  }
  return result;
}

std::vector<const Episode*> RankedBuffer::episodes() const {
  std::vector<const Episode*> out;
  out.reserve(ranked_.size());
  for (const Entry& entry : ranked_) out.push_back(&entry.episode);
  return out;
}

int RankedBuffer::episodes_for_level(std::int64_t level_id) const {
  auto it = per_level_.find(level_id);
  return it == per_level_.end() ? 0 : it->second;
}

TransitionView RankedBuffer::all_transitions() const {
  TransitionView view;
  for (const Entry& entry : ranked_) {
    for (std::size_t s = 0; s < entry.episode.size(); ++s) {
      view.push_back({&entry.episode, static_cast<std::uint32_t>(s)});
    }
  }
  return view;
}

TransitionView RankedBuffer::success_subset() const {
  TransitionView view;
  for (const Entry& entry : ranked_) {
    if (!entry.episode.succeeded()) continue;
    for (std::size_t s = 0; s < entry.episode.size(); ++s) {
      view.push_back({&entry.episode, static_cast<std::uint32_t>(s)});
    }
  }
  return view;
}

std::string RankedBuffer::snapshot_json(int indent) const {
  using nlohmann::json;
  json episodes = json::array();
  for (const Entry& entry : ranked_) {
    const Episode& ep = entry.episode;
    episodes.push_back({
        {"episode_id", ep.episode_id},
        {"level_id", ep.level_id},
        {"length", ep.size()},
        {"return", ep.undiscounted_return()},
        {"score",
         {{"total", ep.score.total},
          {"s_ext", ep.score.s_ext},
          {"s_local", ep.score.s_local},
          {"s_global", ep.score.s_global},
          {"mode", NormalizationName(ep.score.mode)}}},
    });
  }
  json doc = {
      {"capacity_transitions", capacity_},
      {"quota", quota_ ? json(*quota_) : json(nullptr)},
      {"total_transitions", total_transitions_},
      {"distinct_levels", per_level_.size()},
      {"episodes", episodes},
  };
  return doc.dump(indent);
}

}  // namespace silab
