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

// Iterative anonymous slot reservation.
//
// Each round every participant places a fresh SRM in a slot, masks the
// vector with its pairwise pads and sends it to the service provider, which
// XORs all n vectors. Pads cancel pairwise, leaving the bare SRMs. A
// participant that finds its SRM verbatim in the public aggregate has won
// that slot; the others collided. Winners resubmit to the same slot, losers
// draw from the slots that were empty in the previous aggregate. The stage
// ends once exactly n slots are occupied, after which the occupied slots are
// compacted into final positions.

#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qadr/core_types.hpp"
#include "qadr/keying.hpp"

namespace qadr {

enum class ReservationStatus { pending, successful, colliding };

struct ParticipantReservationState {
  std::size_t id = 0;
  Srm current_srm;
  ReservationStatus status = ReservationStatus::pending;
  std::optional<std::size_t> won_slot;
  std::size_t chosen_slot = 0;
  DeterministicStream rng;
};

inline ParticipantReservationState make_participant(std::size_t id, std::uint64_t master_seed) {
  ParticipantReservationState p;
  p.id = id;
  p.rng = DeterministicStream(derive_key(master_seed, "participant-stream", {id}));
  return p;
}

// Fresh SRM; the all-zero pseudonym is redrawn.
inline Srm draw_srm(DeterministicStream& rng, const ProtocolParams& params) {
  for (;;) {
    auto pn = rng.bytes(params.lambda() / 8);
    if (std::any_of(pn.begin(), pn.end(), [](std::uint8_t b) { return b != 0; }))
      return Srm(std::move(pn), params.l_srm());
  }
}

// C_i = place(SRM_i, slot) xor (xor of the n-1 pads P_i shares).
inline SlotVector build_masked_vector(const ParticipantReservationState& p, std::size_t chosen_slot,
                                      const PairwiseKeyTable& keys, const ProtocolParams& params) {
  if (keys.participants() != params.n()) throw IndexError("key table does not cover all participants");
  auto v = place_in_slot(p.current_srm.bits(), chosen_slot, params.l_srm(), params.m());
  v.xor_bytes(keys.combined_pad(p.id, params.reservation_vector_bits()));
  return v;
}

// XOR fold performed by the service provider.
inline SlotVector aggregate(std::span<const SlotVector> round_vectors, std::size_t expected_count) {
  if (round_vectors.size() != expected_count) throw DimensionError("aggregate expects one vector per participant");
  if (round_vectors.empty()) throw DimensionError("nothing to aggregate");
  SlotVector acc(round_vectors.front().slot_width(), round_vectors.front().slot_count());
  for (const auto& v : round_vectors) acc ^= v;
  return acc;
}

struct SlotPartition {
  std::vector<std::size_t> occupied;
  std::vector<std::size_t> empty;
};

inline SlotPartition classify_slots(const SlotVector& aggregate) {
  SlotPartition out;
  for (std::size_t j = 0; j < aggregate.slot_count(); ++j)
    (aggregate.slot_is_zero(j) ? out.empty : out.occupied).push_back(j);
  return out;
}

struct VerifyResult {
  ReservationStatus status = ReservationStatus::pending;
  std::optional<std::size_t> won_slot;
  std::size_t matches = 0;
  // The SRM appeared more than once, or somewhere other than the slot the
  // participant chose: an XOR of other SRMs equals this participant's SRM.
  bool ghost = false;
};

// Scans the public aggregate for the participant's own SRM. The lowest
// matching index wins.
inline VerifyResult private_verify(ParticipantReservationState& p, const SlotVector& aggregate) {
  VerifyResult r;
  for (std::size_t j = 0; j < aggregate.slot_count(); ++j) {
    if (!aggregate.slot_equals(j, p.current_srm.bits())) continue;
    if (r.matches++ == 0) r.won_slot = j;
  }
  if (r.matches == 0) {
    r.status = ReservationStatus::colliding;
  } else {
    r.status = ReservationStatus::successful;
    r.ghost = r.matches > 1 || *r.won_slot != p.chosen_slot;
  }
  p.status = r.status;
  p.won_slot = r.won_slot;
  return r;
}

// First round: uniform over all m slots, then a fresh SRM.
inline std::vector<std::size_t> initial_choices(std::span<ParticipantReservationState> states,
                                                const ProtocolParams& params) {
  std::vector<std::size_t> choices;
  choices.reserve(states.size());
  for (auto& p : states) {
    p.chosen_slot = static_cast<std::size_t>(p.rng.uniform(params.m()));
    p.current_srm = draw_srm(p.rng, params);
    choices.push_back(p.chosen_slot);
  }
  return choices;
}

// Winners keep their slot, colliders draw uniformly from the previous
// round's empty slots. Everyone draws a fresh SRM.
inline std::vector<std::size_t> rerun_choices(std::span<ParticipantReservationState> states,
                                              std::span<const std::size_t> empty_slots,
                                              const ProtocolParams& params) {
  std::vector<std::size_t> choices;
  choices.reserve(states.size());
  for (auto& p : states) {
    if (p.status == ReservationStatus::successful) {
      p.chosen_slot = *p.won_slot;
    } else {
      if (empty_slots.empty()) throw ProtocolFailure("colliding participants but no empty slots");
      p.chosen_slot = empty_slots[p.rng.uniform(empty_slots.size())];
    }
    p.current_srm = draw_srm(p.rng, params);
    choices.push_back(p.chosen_slot);
  }
  return choices;
}

// Compacts the occupied slots of the final aggregate, preserving slot order.
inline std::vector<Bytes> consolidate(const SlotVector& final_aggregate, std::size_t n) {
  const auto part = classify_slots(final_aggregate);
  if (part.occupied.size() != n)
    throw ProtocolFailure("consolidation needs exactly " + std::to_string(n) + " occupied slots, found " +
                          std::to_string(part.occupied.size()));
  std::vector<Bytes> out;
  out.reserve(n);
  for (auto j : part.occupied) out.push_back(extract_slot(final_aggregate, j));
  return out;
}

// Hook through which coalition members override their slot choice. Honest
// choices for the round are already fixed when choose() is called.
struct CoalitionContext {
  std::size_t round = 0;
  std::size_t honest_count = 0;
  std::span<const ParticipantReservationState> states;
  std::span<const std::size_t> choices;
  std::span<const std::size_t> available_slots;
};

class CoalitionStrategy {
 public:
  virtual ~CoalitionStrategy() = default;
  virtual std::size_t choose(const CoalitionContext& ctx, std::size_t member) const = 0;
};

enum class Masking {
  full,  // pads are expanded and cancelled exactly as in the protocol
  none,  // bare SRM vectors are aggregated; identical aggregate, no pad cost
};

struct ReservationOptions {
  KeyMode key_mode = KeyMode::prf_seed;
  Masking masking = Masking::full;
  const CoalitionStrategy* coalition = nullptr;
  // Participants [0, honest_count) are honest; 0 means everybody.
  std::size_t honest_count = 0;
  std::uint64_t first_epoch = 1;
};

struct ReservationOutcome {
  // final_positions[i] = pos_i.
  std::vector<std::size_t> final_positions;
  std::size_t rounds_used = 0;
  std::vector<RoundTranscript> transcripts;
  // Simulator-only knowledge below.
  std::vector<CollisionStructure> ground_truth_structures;
  std::vector<std::vector<std::size_t>> colliding_by_round;
  std::vector<Bytes> final_srms;
  std::size_t ghost_matches = 0;
  std::vector<KeyEpochRecord> key_epochs;
  std::size_t total_bits_sent = 0;

  friend bool operator==(const ReservationOutcome& a, const ReservationOutcome& b) {
    if (a.transcripts.size() != b.transcripts.size()) return false;
    for (std::size_t r = 0; r < a.transcripts.size(); ++r) {
      const auto& x = a.transcripts[r];
      const auto& y = b.transcripts[r];
      if (x.round_index != y.round_index || !(x.public_aggregate == y.public_aggregate) ||
          x.per_participant_bits_sent != y.per_participant_bits_sent ||
          x.occupied_slot_indices != y.occupied_slot_indices || x.empty_slot_indices != y.empty_slot_indices)
        return false;
    }
    return a.final_positions == b.final_positions && a.rounds_used == b.rounds_used &&
           a.ground_truth_structures == b.ground_truth_structures &&
           a.colliding_by_round == b.colliding_by_round && a.final_srms == b.final_srms &&
           a.ghost_matches == b.ghost_matches && a.total_bits_sent == b.total_bits_sent;
  }
};

// Raised when the round cap is hit; carries everything recorded so far.
class ReservationTimeout : public Error {
 public:
  explicit ReservationTimeout(ReservationOutcome partial)
      : Error("slot reservation did not terminate within " + std::to_string(partial.rounds_used) + " rounds"),
        partial_(std::move(partial)) {}
  const ReservationOutcome& partial() const { return partial_; }

 private:
  ReservationOutcome partial_;
};

// Maps every participant to the index of its current SRM in the compacted
// list. Each SRM must occur exactly once.
inline std::vector<std::size_t> assign_positions(std::span<const ParticipantReservationState> states,
                                                 std::span<const Bytes> final_srms) {
  std::vector<std::size_t> pos(states.size());
  for (const auto& p : states) {
    std::optional<std::size_t> hit;
    for (std::size_t k = 0; k < final_srms.size(); ++k) {
      const auto bits = p.current_srm.bits();
      if (!std::equal(bits.begin(), bits.end(), final_srms[k].begin(), final_srms[k].end())) continue;
      if (hit) throw ProtocolFailure("SRM appears twice in the consolidated vector");
      hit = k;
    }
    if (!hit) throw ProtocolFailure("participant SRM missing from the consolidated vector");
    pos[p.id] = *hit;
  }
  return pos;
}

inline ReservationOutcome run_reservation(const ProtocolParams& params, std::uint64_t master_seed,
                                          const ReservationOptions& opts = {}) {
  const auto n = params.n();
  const auto m = params.m();
  const auto honest = opts.honest_count == 0 ? n : opts.honest_count;
  if (honest > n) throw ParameterError("honest_count exceeds n");
  if (honest < n && opts.coalition == nullptr) throw ParameterError("coalition members need a strategy");

  std::vector<ParticipantReservationState> states;
  states.reserve(n);
  for (std::size_t i = 0; i < n; ++i) states.push_back(make_participant(i, master_seed));

  std::vector<std::size_t> available(m);
  std::iota(available.begin(), available.end(), std::size_t{0});

  ReservationOutcome out;
  const auto vector_bits = params.reservation_vector_bits();

  for (std::size_t round = 1; round <= params.max_rounds(); ++round) {
    auto choices = round == 1 ? initial_choices(states, params) : rerun_choices(states, available, params);

    if (opts.coalition != nullptr) {
      for (std::size_t id = honest; id < n; ++id) {
        const CoalitionContext ctx{round, honest, states, choices, available};
        const auto slot = opts.coalition->choose(ctx, id);
        if (slot >= m) throw IndexError("coalition strategy chose an invalid slot");
        choices[id] = slot;
        states[id].chosen_slot = slot;
      }
    }

    const std::uint64_t epoch = opts.first_epoch + round - 1;
    std::vector<SlotVector> vectors;
    vectors.reserve(n);
    if (opts.masking == Masking::full) {
      const auto keys = opts.key_mode == KeyMode::prf_seed
                            ? establish_keys(n, master_seed, epoch, params.lambda())
                            : establish_one_time_pads(n, master_seed, epoch, vector_bits);
      out.key_epochs.push_back({epoch, KeyStage::reservation, keys.key_bits()});
      for (const auto& p : states) vectors.push_back(build_masked_vector(p, p.chosen_slot, keys, params));
    } else {
      for (const auto& p : states) vectors.push_back(place_in_slot(p.current_srm.bits(), p.chosen_slot, params.l_srm(), m));
    }
    for (const auto& v : vectors) out.total_bits_sent += v.size_bits();

    auto agg = aggregate(vectors, n);
    auto part = classify_slots(agg);

    std::vector<std::size_t> occupants(m, 0);
    for (auto c : choices) ++occupants[c];
    out.ground_truth_structures.push_back(CollisionStructure::from_occupancy(occupants));

    std::vector<std::size_t> colliding;
    for (auto& p : states) {
      const auto r = private_verify(p, agg);
      out.ghost_matches += r.ghost;
      if (r.status == ReservationStatus::colliding) colliding.push_back(p.id);
    }
    out.colliding_by_round.push_back(std::move(colliding));

    const bool done = part.occupied.size() == n;
    out.transcripts.push_back({round, std::move(agg), vector_bits, part.occupied, part.empty});
    out.rounds_used = round;

    if (done) {
      out.final_srms = consolidate(out.transcripts.back().public_aggregate, n);
      out.final_positions = assign_positions(states, out.final_srms);
      return out;
    }
    available = std::move(part.empty);
  }
  throw ReservationTimeout(std::move(out));
}

}  // namespace qadr
