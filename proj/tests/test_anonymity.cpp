// Copyright 2026 The QADR Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qadr/anonymity.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "qadr/shuffle_variant.hpp"

namespace qadr {
namespace {

RoundTranscript transcript(std::size_t round, std::vector<std::size_t> occupied, std::size_t m) {
  RoundTranscript t;
  t.round_index = round;
  t.occupied_slot_indices = std::move(occupied);
  for (std::size_t j = 0; j < m; ++j)
    if (!std::count(t.occupied_slot_indices.begin(), t.occupied_slot_indices.end(), j))
      t.empty_slot_indices.push_back(j);
  return t;
}

TEST(EntropyTest, MatchesDirectEvaluation) {
  const auto a = entropy_metrics(5, 3);
  EXPECT_NEAR(a.i_gain, 1.3219280948873624, 1e-12);
  EXPECT_NEAR(a.h_initial, std::log2(5.0), 1e-12);
  EXPECT_NEAR(a.h_final, 1.0, 1e-12);
  EXPECT_EQ(entropy_metrics(8, 0).i_gain, 0.0);
  EXPECT_THROW(entropy_metrics(5, 5), DomainError);
  EXPECT_THROW(entropy_metrics(0, 0), DomainError);
}

TEST(EntropyTest, TrivialPartitionsLeakNothing) {
  EXPECT_EQ(partition_information_gain(6, {1, 6, 0, true}), 0.0);
  EXPECT_EQ(partition_information_gain(6, {1, 0, 6, true}), 0.0);
  EXPECT_NEAR(partition_information_gain(6, {1, 4, 2, true}), std::log2(3.0), 1e-12);
}

TEST(ObserverTest, ReadsWinnersFromSlotRetention) {
  // Round 1: slots 0, 3 single, slot 5 holds two. Round 2: winners stay on
  // 0 and 3, colliders land on 1 and 7.
  const std::vector<RoundTranscript> ts{transcript(1, {0, 3, 5}, 8), transcript(2, {0, 1, 3, 7}, 8)};
  const auto views = observe_partition(4, ts);
  ASSERT_EQ(views.size(), 2u);
  EXPECT_EQ(views[0], (PartitionView{1, 2, 2, true}));
  EXPECT_EQ(views[1], (PartitionView{2, 4, 0, true}));
}

TEST(ObserverTest, MarksTheUnfinishedLastRoundAsBound) {
  const std::vector<RoundTranscript> ts{transcript(1, {2, 6}, 8)};
  const auto v = observe_partition(4, ts).front();
  EXPECT_FALSE(v.exact);
  EXPECT_EQ(v.succ_count, 2u);
  EXPECT_THROW(observe_partition(4, std::vector<RoundTranscript>{}), ParameterError);
}

TEST(ObserverTest, AgreesWithGroundTruthOnSimulatedRuns) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t n = 2 + seed % 14;
    const auto params = ProtocolParams::with_gamma(n, Ratio(2), {64, 64, 64, 16, 50});
    ReservationOptions fast;
    fast.masking = Masking::none;
    const auto out = run_reservation(params, seed, fast);
    const auto views = observe_partition(n, out.transcripts);
    EXPECT_TRUE(partition_matches_ground_truth(views, out.ground_truth_structures));
    for (std::size_t r = 0; r < views.size(); ++r) {
      EXPECT_TRUE(views[r].exact);
      EXPECT_EQ(views[r].succ_count, out.ground_truth_structures[r].singles());
      EXPECT_EQ(views[r].coll_count, out.colliding_by_round[r].size());
    }
  }
}

TEST(ObserverTest, ShuffleTranscriptsRevealNoPartition) {
  for (std::size_t n : {2, 7, 30}) {
    const auto params = ProtocolParams::with_gamma(n, Ratio(3), {64, 64, 64, 16, 50});
    const auto out = run_shuffle_reservation(params, n);
    const auto views = observe_partition(n, out.transcripts);
    ASSERT_EQ(views.size(), 1u);
    EXPECT_EQ(partition_information_gain(n, views[0]), 0.0);
  }
}

TEST(CoalitionTest, AttackForcesHonestCollisions) {
  const auto params = ProtocolParams::with_gamma(10, Ratio(3), {64, 64, 64, 16, 50});
  const MirrorCollisionStrategy mirror(3);
  double attacked = 0, baseline = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto t = coalition_attack_sim(params, 6, mirror, seed, Masking::none);
    const auto h = coalition_attack_sim(params, 10, mirror, seed, Masking::none);
    ASSERT_FALSE(t.honest_anonymity_set.empty());
    EXPECT_EQ(t.honest_anonymity_set.size(), t.outcome.rounds_used);
    EXPECT_TRUE(t.terminated);
    attacked += static_cast<double>(t.honest_anonymity_set[0]);
    baseline += static_cast<double>(h.honest_anonymity_set[0]);
  }
  EXPECT_GT(attacked, baseline);
}

TEST(CoalitionTest, EveryMirroredChoiceHitsAnHonestSlot) {
  const auto params = ProtocolParams::with_gamma(6, Ratio(3), {64, 64, 64, 16, 50});
  const MirrorCollisionStrategy mirror(1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = coalition_attack_sim(params, 4, mirror, seed, Masking::none);
    // Two members copy honest choices, so at least one honest participant
    // collides in round one.
    EXPECT_GE(t.honest_anonymity_set[0], 1u);
  }
  EXPECT_THROW(coalition_attack_sim(params, 1, mirror, 0), ParameterError);
  EXPECT_THROW(coalition_attack_sim(params, 7, mirror, 0), ParameterError);
}

}  // namespace
}  // namespace qadr
