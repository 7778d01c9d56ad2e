#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "json.hpp"
#include "silab/replay.h"
#include "test_support.h"

namespace silab {
namespace {

using testing::RandomEpisode;

Episode Scored(Rng& rng, int len, double score, std::int64_t level, std::int64_t id,
               double success_rate = 0.0) {
  Episode ep = RandomEpisode(rng, len, 20, success_rate, level, id);
  ep.score.total = score;
  return ep;
}

std::vector<std::int64_t> Ids(const RankedBuffer& b) {
  std::vector<std::int64_t> ids;
  for (const Episode* ep : b.episodes()) ids.push_back(ep->episode_id);
  return ids;
}

TEST(Buffer, EmptyAndSingleInsert) {
  Rng rng(1);
  RankedBuffer b(100);
  EXPECT_EQ(b.all_transitions().size(), 0u);
  const InsertResult r = b.insert(Scored(rng, 10, 0.5, 0, 0));
  EXPECT_TRUE(r.stored());
  EXPECT_TRUE(r.evicted.empty());
  const TransitionView v = b.all_transitions();
  ASSERT_EQ(v.size(), 10u);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i].step_index, static_cast<int>(i));
}

TEST(Buffer, EvictsLowestWholeEpisodes) {
  Rng rng(2);
  RankedBuffer b(20);
  b.insert(Scored(rng, 8, 0.5, 0, 0));
  b.insert(Scored(rng, 8, 0.9, 0, 1));
  const InsertResult r = b.insert(Scored(rng, 8, 0.7, 0, 2));
  EXPECT_TRUE(r.stored());
  ASSERT_EQ(r.evicted.size(), 1u);
  EXPECT_EQ(r.evicted[0].episode_id, 0);
  EXPECT_EQ(Ids(b), (std::vector<std::int64_t>{1, 2}));
  EXPECT_EQ(b.total_transitions(), 16u);
}

TEST(Buffer, RejectsLowestNewcomer) {
  Rng rng(3);
  RankedBuffer b(20);
  b.insert(Scored(rng, 10, 0.5, 0, 0));
  b.insert(Scored(rng, 10, 0.6, 0, 1));
  const InsertResult r = b.insert(Scored(rng, 5, 0.1, 0, 2));
  EXPECT_EQ(r.status, InsertStatus::kRejectedCapacity);
  EXPECT_TRUE(r.evicted.empty());
  EXPECT_EQ(Ids(b), (std::vector<std::int64_t>{1, 0}));
}

TEST(Buffer, TooLongRejected) {
  Rng rng(4);
  RankedBuffer b(10);
  EXPECT_EQ(b.insert(Scored(rng, 11, 1.0, 0, 0)).status, InsertStatus::kRejectedTooLong);
  EXPECT_EQ(b.num_episodes(), 0u);
}

TEST(Buffer, NewerWinsTies) {
  Rng rng(5);
  RankedBuffer b(10);
  b.insert(Scored(rng, 5, 0.5, 0, 0));
  b.insert(Scored(rng, 5, 0.5, 0, 1));
  const InsertResult r = b.insert(Scored(rng, 5, 0.5, 0, 2));
  EXPECT_TRUE(r.stored());
  EXPECT_EQ(Ids(b), (std::vector<std::int64_t>{2, 1}));
}

TEST(Quota, ReplacesOnlyWhenBetter) {
  Rng rng(6);
  RankedBuffer b(1000, 1);
  b.insert(Scored(rng, 5, 0.3, 5, 0));
  EXPECT_TRUE(b.insert(Scored(rng, 5, 0.7, 5, 1)).stored());
  EXPECT_EQ(Ids(b), (std::vector<std::int64_t>{1}));
  EXPECT_EQ(b.insert(Scored(rng, 5, 0.7, 5, 2)).status, InsertStatus::kRejectedQuota);
  EXPECT_EQ(b.insert(Scored(rng, 5, 0.2, 5, 3)).status, InsertStatus::kRejectedQuota);
  EXPECT_TRUE(b.insert(Scored(rng, 5, 0.1, 6, 4)).stored());
  EXPECT_EQ(b.episodes_for_level(5), 1);
  EXPECT_EQ(b.distinct_levels(), 2u);
}

TEST(Views, SuccessSubset) {
  Rng rng(7);
  RankedBuffer b(1000);
  for (int e = 0; e < 5; ++e) b.insert(Scored(rng, 6, 0.1 * e, 0, e, 0.0));
  EXPECT_TRUE(b.success_subset().empty());
  Episode win = Scored(rng, 4, 0.05, 0, 9, 1.0);
  ASSERT_TRUE(win.succeeded());
  b.insert(win);
  const TransitionView s = b.success_subset();
  ASSERT_EQ(s.size(), 4u);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i].episode_id, 9);
}

TEST(Snapshot, JsonFields) {
  Rng rng(8);
  RankedBuffer b(50, 2);
  b.insert(Scored(rng, 5, 0.4, 3, 0));
  const auto doc = nlohmann::json::parse(b.snapshot_json());
  EXPECT_EQ(doc.at("capacity_transitions"), 50);
  EXPECT_EQ(doc.at("quota"), 2);
  EXPECT_EQ(doc.at("total_transitions"), 5);
  ASSERT_EQ(doc.at("episodes").size(), 1u);
  EXPECT_EQ(doc.at("episodes")[0].at("level_id"), 3);
  EXPECT_EQ(doc.at("episodes")[0].at("length"), 5);
  EXPECT_DOUBLE_EQ(doc.at("episodes")[0].at("score").at("total").get<double>(), 0.4);
}

// Invariants under random streams: capacity, quota, rank order, conservation,
// evicted transitions absent, and a non-decreasing minimum at capacity.
TEST(Property, RandomStreams) {
  for (int stream = 0; stream < 30; ++stream) {
    Rng rng(100 + static_cast<std::uint64_t>(stream));
    const std::size_t cap = static_cast<std::size_t>(rng.uniform_int(40, 300));
    const bool with_quota = stream % 2 == 1;
    const std::optional<int> quota =
        with_quota ? std::optional<int>(static_cast<int>(rng.uniform_int(1, 4))) : std::nullopt;
    RankedBuffer b(cap, quota);
    for (int e = 0; e < 300; ++e) {
      Episode next = Scored(rng, static_cast<int>(rng.uniform_int(1, 40)),
                            std::round(rng.uniform() * 10) / 10, rng.uniform_int(0, 9), e);
      // At capacity: the arrival cannot fit without an eviction.
      const bool full = b.total_transitions() + next.size() > cap;
      const double min_before = b.num_episodes() ? b.episodes().back()->score.total : 0.0;
      const InsertResult r = b.insert(std::move(next));
      ASSERT_LE(b.total_transitions(), cap);
      const auto eps = b.episodes();
      std::size_t total = 0;
      std::map<std::int64_t, int> per_level;
      for (std::size_t i = 0; i < eps.size(); ++i) {
        total += eps[i]->size();
        ++per_level[eps[i]->level_id];
        if (i > 0) {
          ASSERT_TRUE(eps[i - 1]->score.total > eps[i]->score.total ||
                      (eps[i - 1]->score.total == eps[i]->score.total &&
                       eps[i - 1]->episode_id > eps[i]->episode_id));
        }
      }
      ASSERT_EQ(total, b.total_transitions());
      for (const auto& [level, n] : per_level) {
        if (quota) ASSERT_LE(n, *quota);
        ASSERT_EQ(n, b.episodes_for_level(level));
      }
      const TransitionView v = b.all_transitions();
      ASSERT_EQ(v.size(), total);
      for (const Episode& gone : r.evicted) {
        for (std::size_t i = 0; i < v.size(); ++i) ASSERT_NE(v[i].episode_id, gone.episode_id);
      }
      if (!quota && full && !eps.empty()) ASSERT_GE(eps.back()->score.total, min_before);
    }
  }
}

}  // namespace
}  // namespace silab
