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

#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "qadr/keying.hpp"
#include "qadr/reservation.hpp"
#include "qadr/shuffle_variant.hpp"
#include "qadr/submission.hpp"

namespace qadr {

enum class Variant { standard, shuffle, one_time_pad };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::standard: return "default";
    case Variant::shuffle: return "shuffle";
    case Variant::one_time_pad: return "otp_mode";
  }
  return "unknown";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "default") return Variant::standard;
  if (s == "shuffle") return Variant::shuffle;
  if (s == "otp_mode") return Variant::one_time_pad;
  throw ParameterError("unknown variant '" + std::string(s) + "'");
}

struct TrafficReport {
  std::size_t reservation_bits = 0;
  std::size_t submission_bits = 0;
};

struct ProtocolRun {
  ReservationOutcome reservation;
  SubmissionResult submission;
  RetransmissionPlan plan;
  std::optional<SubmissionResult> recovery;
  KeyLedger keys;
  TrafficReport traffic;

  bool accepted() const { return recovery ? recovery->accepted : submission.accepted; }
  const SubmissionResult& final_submission() const { return recovery ? *recovery : submission; }
};

// Full session: setup keys, reservation, submission and, when a flag comes
// back 0, one recovery rerun on a fresh key epoch. `fault` tampers with the
// first broadcast only.
inline ProtocolRun run_protocol(const ProtocolParams& params, std::uint64_t master_seed,
                                std::span<const Bytes> raw_messages, Variant variant = Variant::standard,
                                const BroadcastFault& fault = {}) {
  const auto n = params.n();
  if (raw_messages.size() != n) throw DimensionError("need one message per participant");
  std::vector<Bytes> messages;
  messages.reserve(n);
  for (const auto& m : raw_messages) messages.push_back(pad_message(m, params.l_msg()));

  const bool otp = variant == Variant::one_time_pad;
  auto make_keys = [&](std::uint64_t epoch, std::size_t bits) {
    return otp ? establish_one_time_pads(n, master_seed, epoch, bits)
               : establish_keys(n, master_seed, epoch, params.lambda());
  };

  ProtocolRun run;
  std::uint64_t epoch = 0;
  run.keys.record(make_keys(epoch++, params.lambda()), KeyStage::setup);

  if (variant == Variant::shuffle) {
    run.reservation = run_shuffle_reservation(params, master_seed);
  } else {
    ReservationOptions opts;
    opts.key_mode = otp ? KeyMode::one_time_pad : KeyMode::prf_seed;
    opts.first_epoch = epoch;
    run.reservation = run_reservation(params, master_seed, opts);
    for (const auto& r : run.reservation.key_epochs) run.keys.record(r);
    epoch += run.reservation.rounds_used;
  }
  run.traffic.reservation_bits = run.reservation.total_bits_sent;

  const auto submit_keys = make_keys(epoch++, params.submission_vector_bits());
  run.keys.record(submit_keys, KeyStage::submission);
  run.submission = run_submission(params, run.reservation.final_positions, messages, submit_keys, fault);
  run.traffic.submission_bits = n * params.submission_vector_bits();

  if (!run.submission.accepted) {
    run.plan = recover(run.submission.flags);
    const auto fresh = make_keys(epoch++, params.submission_vector_bits());
    run.keys.record(fresh, KeyStage::recovery);
    run.recovery = run_recovery(params, run.reservation.final_positions, messages, run.plan,
                                run.submission.concatenated, fresh);
    run.traffic.submission_bits += n * params.submission_vector_bits();
  }
  return run;
}

}  // namespace qadr
