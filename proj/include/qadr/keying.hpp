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

// Simulated pairwise key establishment and keyed pad expansion.
//
// The pairwise key source stands in for a QKD link: every unordered pair of
// participants receives a shared seed that is a deterministic function of
// (master seed, epoch, pair). Pads are expanded from seeds with a keyed
// stream cipher. None of this is a security claim.

#pragma once

#include <sodium.h>

#include <array>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "qadr/core_types.hpp"

namespace qadr {

using Key256 = std::array<std::uint8_t, 32>;

inline void ensure_sodium() {
  static const bool ready = sodium_init() >= 0;
  if (!ready) throw Error("libsodium initialisation failed");
}

namespace detail {

inline void put_le64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace detail

// BLAKE2b-256 keyed by the master seed over (label, fields...). Used for every
// domain-separated derivation in the simulator.
inline Key256 derive_key(std::uint64_t master_seed, std::string_view label,
                         std::initializer_list<std::uint64_t> fields) {
  ensure_sodium();
  std::uint8_t mkey[16] = {};
  detail::put_le64(mkey, master_seed);
  detail::put_le64(mkey + 8, 0x51414452'73696d00ULL);

  crypto_generichash_state st;
  crypto_generichash_init(&st, mkey, sizeof mkey, 32);
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(label.data()), label.size());
  for (auto f : fields) {
    std::uint8_t buf[8];
    detail::put_le64(buf, f);
    crypto_generichash_update(&st, buf, sizeof buf);
  }
  Key256 out{};
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

// Keyed expansion of a seed into a pad of a requested length. Implementations
// must be deterministic and prefix-consistent.
class PadExpander {
 public:
  virtual ~PadExpander() = default;
  virtual Bytes expand(std::span<const std::uint8_t> seed, std::size_t length_bits) const = 0;
};

// BLAKE2b(seed) as a ChaCha20 key, zero nonce, keystream from block 0.
class ChaChaExpander final : public PadExpander {
 public:
  Bytes expand(std::span<const std::uint8_t> seed, std::size_t length_bits) const override {
    if (length_bits == 0) throw ParameterError("pad length must be positive");
    if (length_bits % 8 != 0) throw ParameterError("pad length must be a multiple of 8");
    if (seed.empty()) throw ParameterError("empty seed");
    ensure_sodium();
    Key256 key{};
    crypto_generichash(key.data(), key.size(), seed.data(), seed.size(), nullptr, 0);
    Bytes out(length_bits / 8);
    const std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {};
    crypto_stream_chacha20(out.data(), out.size(), nonce, key.data());
    sodium_memzero(key.data(), key.size());
    return out;
  }
};

inline std::shared_ptr<const PadExpander> default_expander() {
  static const auto e = std::make_shared<const ChaChaExpander>();
  return e;
}

inline Bytes expand_pad(std::span<const std::uint8_t> seed, std::size_t length_bits) {
  return default_expander()->expand(seed, length_bits);
}

// Deterministic random stream (ChaCha20 keystream). Used for every random
// choice a simulated party makes.
class DeterministicStream {
 public:
  DeterministicStream() : DeterministicStream(Key256{}) {}
  explicit DeterministicStream(const Key256& key) : key_(key) {}

  std::uint64_t next_u64() {
    std::uint8_t b[8];
    fill(b);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  // Uniform in [0, bound) by rejection.
  std::uint64_t uniform(std::uint64_t bound) {
    if (bound == 0) throw ParameterError("uniform bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
      const auto v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  void fill(std::span<std::uint8_t> out) {
    for (auto& byte : out) {
      if (pos_ == buf_.size()) refill();
      byte = buf_[pos_++];
    }
  }

  Bytes bytes(std::size_t count) {
    Bytes b(count);
    fill(b);
    return b;
  }

  friend bool operator==(const DeterministicStream& a, const DeterministicStream& b) {
    return a.key_ == b.key_ && a.block_ == b.block_ && a.pos_ == b.pos_;
  }

 private:
  void refill() {
    ensure_sodium();
    const std::uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {};
    buf_.fill(0);
    crypto_stream_chacha20_xor_ic(buf_.data(), buf_.data(), buf_.size(), nonce, block_, key_.data());
    block_ += buf_.size() / 64;
    pos_ = 0;
  }

  Key256 key_;
  std::array<std::uint8_t, 256> buf_{};
  std::uint64_t block_ = 0;
  std::size_t pos_ = buf_.size();
};

enum class KeyMode {
  prf_seed,      // lambda-bit seeds expanded on demand
  one_time_pad,  // key material is the full-length pad itself
};

struct PadRequest {
  std::size_t a = 0;
  std::size_t b = 0;
  std::uint64_t epoch = 0;
  std::size_t length_bits = 0;
};

// Shared key material for every unordered pair {i, j} at one epoch.
class PairwiseKeyTable {
 public:
  PairwiseKeyTable(std::size_t n, std::uint64_t epoch, KeyMode mode, std::size_t material_bits,
                   std::vector<Bytes> material, std::shared_ptr<const PadExpander> expander)
      : n_(n), epoch_(epoch), mode_(mode), material_bits_(material_bits),
        material_(std::move(material)), expander_(std::move(expander)) {
    if (material_.size() != n_ * (n_ - 1) / 2) throw DimensionError("key table has wrong number of pairs");
  }

  std::size_t participants() const { return n_; }
  std::uint64_t epoch() const { return epoch_; }
  KeyMode mode() const { return mode_; }
  std::size_t pair_count() const { return material_.size(); }
  std::size_t material_bits() const { return material_bits_; }
  std::size_t key_bits() const { return material_bits_ * material_.size(); }

  const Bytes& seed(std::size_t i, std::size_t j) const { return material_[pair_index(i, j)]; }

  Bytes pad(std::size_t i, std::size_t j, std::size_t length_bits) const {
    const auto& s = seed(i, j);
    if (mode_ == KeyMode::prf_seed) return expander_->expand(s, length_bits);
    if (length_bits == 0 || length_bits % 8 != 0) throw ParameterError("pad length must be a positive multiple of 8");
    if (length_bits > material_bits_) throw ProtocolFailure("one-time pad shorter than requested length");
    return Bytes(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(length_bits / 8));
  }

  Bytes pad(const PadRequest& req) const {
    if (req.epoch != epoch_) throw ProtocolFailure("pad requested for a different key epoch");
    return pad(req.a, req.b, req.length_bits);
  }

  // XOR of the n-1 pads participant i shares with everybody else.
  Bytes combined_pad(std::size_t i, std::size_t length_bits) const {
    Bytes acc(length_bits / 8, 0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == i) continue;
      const auto p = pad(i, j, length_bits);
      for (std::size_t b = 0; b < acc.size(); ++b) acc[b] ^= p[b];
    }
    return acc;
  }

 private:
  std::size_t pair_index(std::size_t i, std::size_t j) const {
    if (i == j || i >= n_ || j >= n_) throw IndexError("no key for this participant pair");
    if (i > j) std::swap(i, j);
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  std::size_t n_;
  std::uint64_t epoch_;
  KeyMode mode_;
  std::size_t material_bits_;
  std::vector<Bytes> material_;
  std::shared_ptr<const PadExpander> expander_;
};

namespace detail {

inline std::vector<Bytes> derive_pair_material(std::size_t n, std::uint64_t master_seed, std::uint64_t epoch,
                                               std::string_view label, std::size_t bits) {
  std::vector<Bytes> material;
  material.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto k = derive_key(master_seed, label, {epoch, i, j});
      material.push_back(expand_pad(k, bits));
    }
  return material;
}

}  // namespace detail

// lambda-bit seeds for all pairs, fresh per epoch.
inline PairwiseKeyTable establish_keys(std::size_t n, std::uint64_t master_seed, std::uint64_t epoch,
                                       std::size_t lambda = 256,
                                       std::shared_ptr<const PadExpander> expander = default_expander()) {
  if (n < 2) throw ParameterError("key establishment needs at least two participants");
  if (lambda == 0 || lambda % 8 != 0) throw ParameterError("lambda must be a positive multiple of 8");
  return PairwiseKeyTable(n, epoch, KeyMode::prf_seed, lambda,
                          detail::derive_pair_material(n, master_seed, epoch, "pair-seed", lambda),
                          std::move(expander));
}

// Full-length pads used directly as one-time pads.
inline PairwiseKeyTable establish_one_time_pads(std::size_t n, std::uint64_t master_seed, std::uint64_t epoch,
                                                std::size_t pad_bits) {
  if (n < 2) throw ParameterError("key establishment needs at least two participants");
  if (pad_bits == 0 || pad_bits % 8 != 0) throw ParameterError("pad length must be a positive multiple of 8");
  return PairwiseKeyTable(n, epoch, KeyMode::one_time_pad, pad_bits,
                          detail::derive_pair_material(n, master_seed, epoch, "pair-otp", pad_bits),
                          default_expander());
}

enum class KeyStage { setup, reservation, submission, recovery };

inline std::string_view to_string(KeyStage s) {
  switch (s) {
    case KeyStage::setup: return "setup";
    case KeyStage::reservation: return "reservation";
    case KeyStage::submission: return "submission";
    case KeyStage::recovery: return "recovery";
  }
  return "unknown";
}

struct KeyEpochRecord {
  std::uint64_t epoch = 0;
  KeyStage stage = KeyStage::setup;
  std::size_t key_bits = 0;
};

// Bookkeeping of every key exchange a session performed.
class KeyLedger {
 public:
  void record(const PairwiseKeyTable& t, KeyStage stage) { records_.push_back({t.epoch(), stage, t.key_bits()}); }
  void record(KeyEpochRecord r) { records_.push_back(r); }

  const std::vector<KeyEpochRecord>& records() const { return records_; }
  std::size_t epochs() const { return records_.size(); }

  std::size_t epochs(KeyStage stage) const {
    std::size_t c = 0;
    for (const auto& r : records_) c += r.stage == stage;
    return c;
  }

  std::size_t total_key_bits() const {
    std::size_t bits = 0;
    for (const auto& r : records_) bits += r.key_bits;
    return bits;
  }

 private:
  std::vector<KeyEpochRecord> records_;
};

}  // namespace qadr
