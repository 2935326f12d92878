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

// Single-round reservation through an oblivious shuffle.
//
// Participants encrypt a pseudonym to the service provider. It decrypts the
// permuted batch and publishes the pseudonym list with a proof of correct
// shuffling. A participant's slot is the index of its
// pseudonym in the list.
//
// NOTE: the public-key layer here is a mock (a keyed XOR stream) and the
// proof is a multiset commitment, not a zero-knowledge argument. Neither is
// cryptographically meaningful; they only preserve the message flow and the
// accept/reject behaviour of verification.

#pragma once

#include <sodium.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "qadr/core_types.hpp"
#include "qadr/keying.hpp"
#include "qadr/reservation.hpp"

namespace qadr {

struct MockSpKey {
  Key256 key{};
};

inline MockSpKey make_sp_key(std::uint64_t master_seed) { return {derive_key(master_seed, "sp-key", {})}; }

struct EncryptedPseudonym {
  std::uint64_t nonce = 0;
  Bytes body;

  friend bool operator==(const EncryptedPseudonym&, const EncryptedPseudonym&) = default;
};

namespace detail {

inline Bytes sp_keystream(const MockSpKey& sp, std::uint64_t nonce, std::size_t bytes) {
  std::array<std::uint8_t, 40> seed{};
  std::copy(sp.key.begin(), sp.key.end(), seed.begin());
  put_le64(seed.data() + 32, nonce);
  return expand_pad(seed, bytes * 8);
}

inline bool all_zero(std::span<const std::uint8_t> b) {
  return std::all_of(b.begin(), b.end(), [](std::uint8_t x) { return x == 0; });
}

}  // namespace detail

inline EncryptedPseudonym mock_encrypt(const MockSpKey& sp, std::span<const std::uint8_t> pn, std::uint64_t nonce) {
  EncryptedPseudonym c{nonce, Bytes(pn.begin(), pn.end())};
  const auto ks = detail::sp_keystream(sp, nonce, c.body.size());
  for (std::size_t i = 0; i < c.body.size(); ++i) c.body[i] ^= ks[i];
  return c;
}

inline Bytes mock_decrypt(const MockSpKey& sp, const EncryptedPseudonym& c) {
  Bytes pn = c.body;
  const auto ks = detail::sp_keystream(sp, c.nonce, pn.size());
  for (std::size_t i = 0; i < pn.size(); ++i) pn[i] ^= ks[i];
  return pn;
}

struct ShuffleSubmission {
  // pseudonyms[i] stays private to participant i.
  std::vector<Bytes> pseudonyms;
  std::vector<EncryptedPseudonym> ciphertexts;
};

// n distinct, nonzero lambda-bit pseudonyms encrypted to the service provider.
inline ShuffleSubmission submit_pseudonyms(std::size_t n, std::uint64_t master_seed, std::size_t lambda,
                                           const MockSpKey& sp) {
  if (n < 2) throw ParameterError("shuffle reservation needs at least two participants");
  if (lambda == 0 || lambda % 8 != 0) throw ParameterError("lambda must be a positive multiple of 8");
  ShuffleSubmission s;
  for (std::size_t i = 0; i < n; ++i) {
    DeterministicStream rng(derive_key(master_seed, "shuffle-participant", {i}));
    Bytes pn;
    do {
      pn = rng.bytes(lambda / 8);
    } while (detail::all_zero(pn) || std::find(s.pseudonyms.begin(), s.pseudonyms.end(), pn) != s.pseudonyms.end());
    s.ciphertexts.push_back(mock_encrypt(sp, pn, rng.next_u64()));
    s.pseudonyms.push_back(std::move(pn));
  }
  return s;
}

using Digest = std::array<std::uint8_t, 32>;

struct ShuffleProofStub {
  Digest multiset_commitment{};
  std::size_t count = 0;
};

namespace detail {

inline Digest multiset_digest(std::vector<Digest> tags) {
  std::sort(tags.begin(), tags.end());
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 32);
  std::uint8_t cnt[8];
  put_le64(cnt, tags.size());
  crypto_generichash_update(&st, cnt, sizeof cnt);
  for (const auto& t : tags) crypto_generichash_update(&st, t.data(), t.size());
  Digest d{};
  crypto_generichash_final(&st, d.data(), d.size());
  return d;
}

inline Digest pseudonym_tag(std::span<const std::uint8_t> pn) {
  Digest t{};
  crypto_generichash(t.data(), t.size(), pn.data(), pn.size(), nullptr, 0);
  return t;
}

}  // namespace detail

struct ShufflePublication {
  std::vector<Bytes> list;
  ShuffleProofStub proof;
};

// Commits to the input multiset, permutes uniformly (Fisher-Yates driven by
// sp_seed), decrypts and publishes.
inline ShufflePublication shuffle_and_publish(std::span<const EncryptedPseudonym> ciphertexts, const MockSpKey& sp,
                                              std::uint64_t sp_seed) {
  ensure_sodium();
  std::vector<Bytes> plain;
  plain.reserve(ciphertexts.size());
  std::vector<Digest> tags;
  for (const auto& c : ciphertexts) {
    plain.push_back(mock_decrypt(sp, c));
    tags.push_back(detail::pseudonym_tag(plain.back()));
  }
  ShufflePublication pub;
  pub.proof = {detail::multiset_digest(std::move(tags)), ciphertexts.size()};

  DeterministicStream rng(derive_key(sp_seed, "sp-shuffle", {}));
  for (std::size_t i = plain.size(); i > 1; --i) std::swap(plain[i - 1], plain[rng.uniform(i)]);
  pub.list = std::move(plain);
  return pub;
}

inline bool verify_shuffle(std::span<const Bytes> list, const ShuffleProofStub& proof) {
  ensure_sodium();
  if (list.size() != proof.count) return false;
  std::vector<Digest> tags;
  tags.reserve(list.size());
  for (const auto& pn : list) tags.push_back(detail::pseudonym_tag(pn));
  return detail::multiset_digest(std::move(tags)) == proof.multiset_commitment;
}

inline std::size_t find_position(std::span<const std::uint8_t> pn, std::span<const Bytes> list) {
  std::optional<std::size_t> hit;
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (!std::equal(pn.begin(), pn.end(), list[k].begin(), list[k].end())) continue;
    if (hit) throw ProtocolFailure("pseudonym appears more than once in the published list");
    hit = k;
  }
  if (!hit) throw ProtocolFailure("pseudonym missing from the published list");
  return *hit;
}

inline std::size_t ceil_log2(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(n - 1)); }

struct ShuffleCost {
  std::size_t key_bits = 0;
  // Service-provider proof generation, n * ceil(log2 n) units.
  std::size_t proof_work_units = 0;
  // Per-verifier work, n units.
  std::size_t verify_work_units = 0;
};

inline ShuffleCost shuffle_cost(const ProtocolParams& params) {
  const auto n = params.n();
  return {2 * params.lambda() * (n * (n - 1) / 2), n * ceil_log2(n), n};
}

// Runs the shuffle reservation and reports it in the same shape as the
// iterative reservation: one round, every published slot occupied.
inline ReservationOutcome run_shuffle_reservation(const ProtocolParams& params, std::uint64_t master_seed) {
  const auto sp = make_sp_key(master_seed);
  const auto sub = submit_pseudonyms(params.n(), master_seed, params.lambda(), sp);
  auto pub = shuffle_and_publish(sub.ciphertexts, sp, master_seed ^ 0x5350'5348'5546'464cULL);
  if (!verify_shuffle(pub.list, pub.proof)) throw ProtocolFailure("shuffle proof rejected");

  ReservationOutcome out;
  out.rounds_used = 1;
  for (const auto& pn : sub.pseudonyms) out.final_positions.push_back(find_position(pn, pub.list));

  const auto n = params.n();
  Bytes flat;
  for (const auto& pn : pub.list) flat.insert(flat.end(), pn.begin(), pn.end());
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const std::size_t ct_bits = 64 + params.lambda();
  out.transcripts.push_back({1, SlotVector(params.lambda(), n, std::move(flat)), ct_bits, all, {}});
  std::vector<std::size_t> singles(n, 0);
  singles[0] = n;
  out.ground_truth_structures.emplace_back(std::move(singles));
  out.colliding_by_round.emplace_back();
  out.final_srms = std::move(pub.list);
  out.total_bits_sent = n * ct_bits;
  return out;
}

}  // namespace qadr
