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

#include <bit>
#include <cstdint>
#include <optional>
#include <string_view>

#include "qadr/core_types.hpp"

namespace qadr {

enum class CostVariant { apmt_serial_n_messages, qadr_default, qadr_shuffle };

inline std::string_view to_string(CostVariant v) {
  switch (v) {
    case CostVariant::apmt_serial_n_messages: return "apmt_serial_n_messages";
    case CostVariant::qadr_default: return "qadr_default";
    case CostVariant::qadr_shuffle: return "qadr_shuffle";
  }
  return "unknown";
}

struct CostReport {
  CostVariant variant = CostVariant::qadr_default;
  std::uint64_t bandwidth_bits = 0;
  std::uint64_t key_bits = 0;
  std::uint64_t rounds = 0;
  double latency_units = 0.0;  // multiples of the round-trip time tau
};

// ceil(log2(msg_len + 1)), i.e. the bit length of msg_len.
inline std::uint64_t length_counter_bits(std::uint64_t msg_len) { return std::bit_width(msg_len); }

// Secret bits one APMT run consumes to send a single msg_len-bit message:
//   2 beta n^2 (n-1) + (msg_len + 2(ceil log2(msg_len+1) + beta)) n(n-1)/2
inline std::uint64_t apmt_cost(std::uint64_t n, std::uint64_t msg_len, std::uint64_t beta) {
  if (n < 2) throw DomainError("APMT cost needs n >= 2");
  if (msg_len == 0) throw DomainError("APMT cost needs msg_len >= 1");
  const auto pairs = n * (n - 1) / 2;
  return 2 * beta * n * n * (n - 1) + (msg_len + 2 * (length_counter_bits(msg_len) + beta)) * pairs;
}

// n messages need n serial APMT runs.
inline std::uint64_t apmt_n_message_cost(std::uint64_t n, std::uint64_t msg_len, std::uint64_t beta) {
  return n * apmt_cost(n, msg_len, beta);
}

// r n (gamma n l_srm) + n (n l_msg), with gamma n rounded up to whole slots.
inline std::uint64_t qadr_bandwidth(std::uint64_t n, Ratio gamma, std::uint64_t r, std::uint64_t l_srm,
                                    std::uint64_t l_msg) {
  if (n < 1) throw DomainError("bandwidth needs n >= 1");
  const auto m = gamma.ceil_times(n);
  return r * n * (m * l_srm) + n * (n * l_msg);
}

// (r + 2) lambda n(n-1)/2 key bits for the iterative reservation, 2 lambda
// n(n-1)/2 for the shuffle variant.
inline std::uint64_t qadr_key_bits(std::uint64_t n, std::uint64_t r, std::uint64_t lambda, CostVariant variant) {
  const auto pairs = n * (n - 1) / 2;
  switch (variant) {
    case CostVariant::qadr_default: return (r + 2) * lambda * pairs;
    case CostVariant::qadr_shuffle: return 2 * lambda * pairs;
    case CostVariant::apmt_serial_n_messages: break;
  }
  throw DomainError("key-bit formula is defined for the QADR variants only");
}

struct LatencyModel {
  // Submission stage: submit, then broadcast-and-verify.
  std::uint64_t submission_round_trips = 2;
  // Interactive rounds inside one APMT run.
  std::uint64_t apmt_rounds_per_run = 4;
};

inline double latency_model(std::uint64_t n, CostVariant variant, double tau, std::uint64_t r,
                            const LatencyModel& lm = {}) {
  switch (variant) {
    case CostVariant::qadr_default: return static_cast<double>(r + lm.submission_round_trips) * tau;
    case CostVariant::qadr_shuffle: return static_cast<double>(1 + lm.submission_round_trips) * tau;
    case CostVariant::apmt_serial_n_messages: return static_cast<double>(n * lm.apmt_rounds_per_run) * tau;
  }
  return 0.0;
}

// Parameter set of a cost comparison; defaults are the reference setting
// (beta 16, lambda 256, l_srm 256, l_msg 1024, gamma 3, r 3).
struct CostScenario {
  Ratio gamma{3};
  std::uint64_t r = 3;
  std::uint64_t l_srm = 256;
  std::uint64_t l_msg = 1024;
  std::uint64_t lambda = 256;
  std::uint64_t beta = 16;
  double tau = 1.0;
  LatencyModel latency{};
};

inline CostReport cost_report(CostVariant variant, std::uint64_t n, const CostScenario& s = {}) {
  CostReport c;
  c.variant = variant;
  c.latency_units = latency_model(n, variant, s.tau, s.r, s.latency);
  switch (variant) {
    case CostVariant::apmt_serial_n_messages:
      c.bandwidth_bits = c.key_bits = apmt_n_message_cost(n, s.l_msg, s.beta);
      c.rounds = n * s.latency.apmt_rounds_per_run;
      break;
    case CostVariant::qadr_default:
      c.bandwidth_bits = qadr_bandwidth(n, s.gamma, s.r, s.l_srm, s.l_msg);
      c.key_bits = qadr_key_bits(n, s.r, s.lambda, variant);
      c.rounds = s.r + s.latency.submission_round_trips;
      break;
    case CostVariant::qadr_shuffle:
      // One ciphertext per participant up, the published list down; the
      // shuffle proof is not counted.
      c.bandwidth_bits = n * (64 + s.lambda) + n * s.lambda + n * (n * s.l_msg);
      c.key_bits = qadr_key_bits(n, s.r, s.lambda, variant);
      c.rounds = 1 + s.latency.submission_round_trips;
      break;
  }
  return c;
}

// Smallest n in [2, n_max] where serial APMT costs more than QADR bandwidth.
inline std::optional<std::uint64_t> apmt_crossover(const CostScenario& s, std::uint64_t n_max) {
  for (std::uint64_t n = 2; n <= n_max; ++n)
    if (apmt_n_message_cost(n, s.l_msg, s.beta) > qadr_bandwidth(n, s.gamma, s.r, s.l_srm, s.l_msg)) return n;
  return std::nullopt;
}

}  // namespace qadr
