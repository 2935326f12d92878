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

// Parallel data submission. Every participant writes its masked message at
// offset pos_i * l_msg of an n * l_msg vector; the XOR of the n vectors is the
// concatenation of all messages.
// The aggregate is broadcast back and each participant returns one flag bit.

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qadr/core_types.hpp"
#include "qadr/keying.hpp"

namespace qadr {

// Right-pads msg with zero bytes up to l_msg bits.
inline Bytes pad_message(std::span<const std::uint8_t> msg, std::size_t l_msg) {
  if (msg.size() * 8 > l_msg) throw DimensionError("message longer than l_msg");
  Bytes out(l_msg / 8, 0);
  std::copy(msg.begin(), msg.end(), out.begin());
  return out;
}

inline SlotVector build_message_vector(std::span<const std::uint8_t> msg, std::size_t pos, std::size_t participant,
                                       const PairwiseKeyTable& keys, const ProtocolParams& params) {
  if (msg.size() * 8 != params.l_msg()) throw DimensionError("message width does not equal l_msg");
  if (pos >= params.n()) throw IndexError("position out of range");
  if (keys.participants() != params.n()) throw IndexError("key table does not cover all participants");
  auto v = place_in_slot(msg, pos, params.l_msg(), params.n());
  v.xor_bytes(keys.combined_pad(participant, params.submission_vector_bits()));
  return v;
}

inline SlotVector aggregate_and_broadcast(std::span<const SlotVector> vectors, std::size_t n) {
  if (vectors.size() != n) throw DimensionError("aggregate expects one vector per participant");
  if (vectors.empty()) throw DimensionError("nothing to aggregate");
  SlotVector acc(vectors.front().slot_width(), vectors.front().slot_count());
  for (const auto& v : vectors) acc ^= v;
  return acc;
}

// f_i: 1 iff slot pos of the broadcast equals msg bit for bit.
inline bool verify_and_flag(std::span<const std::uint8_t> msg, std::size_t pos, const SlotVector& broadcast) {
  return broadcast.slot_equals(pos, msg);
}

struct SubmissionResult {
  SlotVector concatenated;
  std::vector<std::uint8_t> flags;
  bool accepted = false;
};

struct RetransmissionPlan {
  std::vector<std::size_t> participants;
};

inline RetransmissionPlan recover(std::span<const std::uint8_t> flags) {
  RetransmissionPlan plan;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i] == 0) plan.participants.push_back(i);
  return plan;
}

// Tampering applied to the aggregate before broadcast (fault injection).
using BroadcastFault = std::function<void(SlotVector&)>;

namespace detail {

inline SubmissionResult verify_all(SlotVector broadcast, std::span<const std::size_t> positions,
                                   std::span<const Bytes> messages) {
  SubmissionResult r;
  r.flags.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i)
    r.flags.push_back(verify_and_flag(messages[i], positions[i], broadcast) ? 1 : 0);
  r.accepted = std::all_of(r.flags.begin(), r.flags.end(), [](std::uint8_t f) { return f == 1; });
  r.concatenated = std::move(broadcast);
  return r;
}

inline void check_inputs(const ProtocolParams& params, std::span<const std::size_t> positions,
                         std::span<const Bytes> messages) {
  if (positions.size() != params.n() || messages.size() != params.n())
    throw DimensionError("need one position and one message per participant");
}

}  // namespace detail

// messages[i] and positions[i] belong to participant i; messages must
// already be l_msg bits wide.
inline SubmissionResult run_submission(const ProtocolParams& params, std::span<const std::size_t> positions,
                                       std::span<const Bytes> messages, const PairwiseKeyTable& keys,
                                       const BroadcastFault& fault = {}) {
  detail::check_inputs(params, positions, messages);
  std::vector<SlotVector> vectors;
  vectors.reserve(params.n());
  for (std::size_t i = 0; i < params.n(); ++i)
    vectors.push_back(build_message_vector(messages[i], positions[i], i, keys, params));
  auto broadcast = aggregate_and_broadcast(vectors, params.n());
  if (fault) fault(broadcast);
  return detail::verify_all(std::move(broadcast), positions, messages);
}

// Masked rerun in which only planned participants resend their message and
// everyone else sends a masked zero vector, so traffic stays uniform. The
// service provider replaces every slot the rerun fills; an all-zero message
// is indistinguishable from an empty slot and cannot be repaired this way.
inline SubmissionResult run_recovery(const ProtocolParams& params, std::span<const std::size_t> positions,
                                     std::span<const Bytes> messages, const RetransmissionPlan& plan,
                                     const SlotVector& previous_broadcast, const PairwiseKeyTable& fresh_keys,
                                     const BroadcastFault& fault = {}) {
  detail::check_inputs(params, positions, messages);
  std::vector<std::uint8_t> resend(params.n(), 0);
  for (auto i : plan.participants) {
    if (i >= params.n()) throw IndexError("retransmission plan names an unknown participant");
    resend[i] = 1;
  }
  const Bytes zero(params.l_msg() / 8, 0);
  std::vector<SlotVector> vectors;
  vectors.reserve(params.n());
  for (std::size_t i = 0; i < params.n(); ++i)
    vectors.push_back(build_message_vector(resend[i] ? std::span<const std::uint8_t>(messages[i]) : zero,
                                           positions[i], i, fresh_keys, params));
  const auto rerun = aggregate_and_broadcast(vectors, params.n());

  SlotVector merged = previous_broadcast;
  if (!merged.same_shape(rerun)) throw DimensionError("previous broadcast has the wrong shape");
  for (std::size_t j = 0; j < rerun.slot_count(); ++j)
    if (!rerun.slot_is_zero(j)) merged.set_slot(j, rerun.slot(j));
  if (fault) fault(merged);
  return detail::verify_all(std::move(merged), positions, messages);
}

// Hand-off to the task requester: the accepted concatenation and its layout.
struct Delivery {
  Bytes blob;
  std::size_t message_count = 0;
  std::size_t message_bits = 0;
};

inline Delivery deliver(const SubmissionResult& r) {
  if (!r.accepted) throw ProtocolFailure("refusing to deliver data with failed validation flags");
  const auto b = r.concatenated.bytes();
  return Delivery{Bytes(b.begin(), b.end()), r.concatenated.slot_count(), r.concatenated.slot_width()};
}

}  // namespace qadr
