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

// The adversary's view of the reservation stage.
//
// Winners of round r resubmit to their slot in round r+1 while colliders may
// only use slots that were empty in round r. An observer who sees nothing but
// the occupied/empty slot sets therefore learns how many participants won by
// round r: the slots occupied in both round r and round r+1. This splits the
// anonymity set into winners and colliders.

#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <span>
#include <vector>

#include "qadr/core_types.hpp"
#include "qadr/reservation.hpp"

namespace qadr {

struct PartitionView {
  std::size_t round = 0;
  std::size_t succ_count = 0;
  std::size_t coll_count = 0;
  // False when the round has no successor to read retention from; succ_count
  // is then only the upper bound given by the occupied-slot count.
  bool exact = true;

  friend bool operator==(const PartitionView&, const PartitionView&) = default;
};

// Sees public transcripts and nothing else.
inline std::vector<PartitionView> observe_partition(std::size_t n, std::span<const RoundTranscript> transcripts) {
  if (transcripts.empty()) throw ParameterError("observer needs at least one round transcript");
  std::vector<PartitionView> views;
  views.reserve(transcripts.size());
  for (std::size_t r = 0; r < transcripts.size(); ++r) {
    const auto& occ = transcripts[r].occupied_slot_indices;
    PartitionView v;
    v.round = transcripts[r].round_index;
    if (r + 1 < transcripts.size()) {
      const auto& next = transcripts[r + 1].occupied_slot_indices;
      std::vector<std::size_t> kept;
      std::set_intersection(occ.begin(), occ.end(), next.begin(), next.end(), std::back_inserter(kept));
      v.succ_count = kept.size();
    } else if (occ.size() == n) {
      v.succ_count = n;
    } else {
      v.succ_count = std::min(occ.size(), n);
      v.exact = false;
    }
    v.coll_count = n - v.succ_count;
    views.push_back(v);
  }
  return views;
}

// Checks exact views against the simulator's ground truth (test support; the
// observer itself never sees this).
inline bool partition_matches_ground_truth(std::span<const PartitionView> views,
                                           std::span<const CollisionStructure> truth) {
  if (views.size() != truth.size()) return false;
  for (std::size_t r = 0; r < views.size(); ++r)
    if (views[r].exact && views[r].succ_count != truth[r].singles()) return false;
  return true;
}

struct AnonymityMetrics {
  double h_initial = 0.0;
  double h_final = 0.0;
  double i_gain = 0.0;
};

// H_initial = log2 n, H_final = log2(n - c1), I_gain = log2(n / (n - c1)).
inline AnonymityMetrics entropy_metrics(std::size_t n, std::size_t c1) {
  if (n == 0) throw DomainError("entropy needs n >= 1");
  if (c1 >= n) throw DomainError("entropy metrics need c1 < n");
  const double hn = std::log2(static_cast<double>(n));
  const double hf = std::log2(static_cast<double>(n - c1));
  return {hn, hf, std::log2(static_cast<double>(n) / static_cast<double>(n - c1))};
}

// Leak carried by one observed partition. A trivial partition (nobody or
// everybody won) separates nothing and yields zero.
inline double partition_information_gain(std::size_t n, const PartitionView& v) {
  if (v.succ_count == 0 || v.succ_count >= n) return 0.0;
  return entropy_metrics(n, v.succ_count).i_gain;
}

// Baseline coalition: while the attack lasts, member t copies the slot choice
// of the t-th (mod count) honest participant still without a slot, forcing a
// collision on it. Afterwards members behave honestly.
class MirrorCollisionStrategy final : public CoalitionStrategy {
 public:
  explicit MirrorCollisionStrategy(std::size_t attack_rounds) : attack_rounds_(attack_rounds) {}

  std::size_t choose(const CoalitionContext& ctx, std::size_t member) const override {
    const auto fallback = ctx.choices[member];
    if (ctx.round > attack_rounds_) return fallback;
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < ctx.honest_count; ++i)
      if (ctx.states[i].status != ReservationStatus::successful) pending.push_back(i);
    if (pending.empty()) return fallback;
    return ctx.choices[pending[(member - ctx.honest_count) % pending.size()]];
  }

 private:
  std::size_t attack_rounds_;
};

struct CoalitionTrajectory {
  // Honest participants still colliding after each round.
  std::vector<std::size_t> honest_anonymity_set;
  bool terminated = false;
  ReservationOutcome outcome;
};

inline CoalitionTrajectory coalition_attack_sim(const ProtocolParams& params, std::size_t honest_count,
                                                const CoalitionStrategy& strategy, std::uint64_t master_seed,
                                                Masking masking = Masking::full) {
  if (honest_count < 2 || honest_count > params.n()) throw ParameterError("honest_count must lie in [2, n]");
  ReservationOptions opts;
  opts.masking = masking;
  if (honest_count < params.n()) {
    opts.coalition = &strategy;
    opts.honest_count = honest_count;
  }
  CoalitionTrajectory t;
  try {
    t.outcome = run_reservation(params, master_seed, opts);
    t.terminated = true;
  } catch (const ReservationTimeout& e) {
    t.outcome = e.partial();
  }
  for (const auto& ids : t.outcome.colliding_by_round)
    t.honest_anonymity_set.push_back(static_cast<std::size_t>(
        std::count_if(ids.begin(), ids.end(), [&](std::size_t id) { return id < honest_count; })));
  return t;
}

}  // namespace qadr
