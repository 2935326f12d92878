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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qadr {

using Bytes = std::vector<std::uint8_t>;

// Error hierarchy. Everything the library throws derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid ProtocolParams or experiment configuration.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch between vectors or payloads; indicates a caller bug.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Out-of-range slot or participant index.
class IndexError : public Error {
 public:
  using Error::Error;
};

// The protocol reached a state it cannot recover from.
class ProtocolFailure : public Error {
 public:
  using Error::Error;
};

// Input outside a formula's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Exhaustive computation requested beyond the supported oracle scale.
class ScaleError : public Error {
 public:
  using Error::Error;
};

// Non-negative rational, always stored reduced.
struct Ratio {
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  constexpr Ratio() = default;
  constexpr Ratio(std::uint64_t n, std::uint64_t d = 1) : num(n), den(d) {
    if (d == 0) throw ParameterError("ratio with zero denominator");
    const auto g = std::gcd(n, d);
    if (g != 0) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  // ceil(this * k) for integer k.
  std::uint64_t ceil_times(std::uint64_t k) const { return (num * k + den - 1) / den; }

  friend constexpr bool operator==(const Ratio&, const Ratio&) = default;

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }
};

// Protocol-wide constants. Immutable once constructed; construction rejects
// every invariant violation.
class ProtocolParams {
 public:
  struct Options {
    std::size_t l_srm = 256;
    std::size_t l_msg = 1024;
    std::size_t lambda = 256;
    std::size_t beta = 16;
    std::size_t max_rounds = 50;
  };

  // m = ceil(gamma * n); gamma() then reports m / n.
  static ProtocolParams with_gamma(std::size_t n, Ratio gamma, const Options& opts) {
    if (gamma.num == 0) throw ParameterError("gamma must be positive");
    return ProtocolParams(n, gamma.ceil_times(n), opts);
  }
  static ProtocolParams with_gamma(std::size_t n, Ratio gamma) { return with_gamma(n, gamma, Options{}); }

  static ProtocolParams with_slots(std::size_t n, std::size_t m, const Options& opts) {
    return ProtocolParams(n, m, opts);
  }
  static ProtocolParams with_slots(std::size_t n, std::size_t m) { return with_slots(n, m, Options{}); }

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  Ratio gamma() const { return Ratio(m_, n_); }
  std::size_t l_srm() const { return opts_.l_srm; }
  std::size_t l_msg() const { return opts_.l_msg; }
  std::size_t lambda() const { return opts_.lambda; }
  std::size_t beta() const { return opts_.beta; }
  std::size_t max_rounds() const { return opts_.max_rounds; }
  const Options& options() const { return opts_; }

  // L_v of the reservation stage and of the submission stage.
  std::size_t reservation_vector_bits() const { return m_ * opts_.l_srm; }
  std::size_t submission_vector_bits() const { return n_ * opts_.l_msg; }

 private:
  ProtocolParams(std::size_t n, std::size_t m, const Options& opts) : n_(n), m_(m), opts_(opts) {
    if (n_ < 2) throw ParameterError("n must be at least 2");
    if (m_ < n_) throw ParameterError("m must be at least n");
    if (opts_.lambda < 64) throw ParameterError("lambda must be at least 64 bits");
    if (opts_.lambda % 8 != 0) throw ParameterError("lambda must be a multiple of 8");
    if (opts_.l_srm < opts_.lambda) throw ParameterError("l_srm must be at least lambda");
    if (opts_.l_srm % 8 != 0) throw ParameterError("l_srm must be a multiple of 8");
    if (opts_.l_msg == 0 || opts_.l_msg % 8 != 0) throw ParameterError("l_msg must be a positive multiple of 8");
    if (opts_.max_rounds == 0) throw ParameterError("max_rounds must be positive");
  }

  std::size_t n_;
  std::size_t m_;
  Options opts_;
};

// Fixed-width bitstring split into equal byte-aligned slots. Bit b of the
// vector is bit (7 - b % 8) of byte b / 8.
class SlotVector {
 public:
  SlotVector() = default;

  SlotVector(std::size_t slot_width, std::size_t slot_count)
      : slot_width_(slot_width), slot_count_(slot_count), bits_(checked_bytes(slot_width, slot_count), 0) {}

  SlotVector(std::size_t slot_width, std::size_t slot_count, Bytes bits)
      : slot_width_(slot_width), slot_count_(slot_count), bits_(std::move(bits)) {
    if (bits_.size() != checked_bytes(slot_width, slot_count))
      throw DimensionError("bit length does not equal slot_count * slot_width");
  }

  std::size_t slot_width() const { return slot_width_; }
  std::size_t slot_count() const { return slot_count_; }
  std::size_t size_bits() const { return bits_.size() * 8; }
  std::size_t size_bytes() const { return bits_.size(); }
  std::span<const std::uint8_t> bytes() const { return bits_; }

  std::span<const std::uint8_t> slot(std::size_t j) const {
    check_index(j);
    const auto w = slot_width_ / 8;
    return std::span<const std::uint8_t>(bits_).subspan(j * w, w);
  }

  bool slot_is_zero(std::size_t j) const {
    const auto s = slot(j);
    return std::all_of(s.begin(), s.end(), [](std::uint8_t b) { return b == 0; });
  }

  bool slot_equals(std::size_t j, std::span<const std::uint8_t> payload) const {
    const auto s = slot(j);
    return payload.size() == s.size() && std::equal(s.begin(), s.end(), payload.begin());
  }

  bool same_shape(const SlotVector& o) const {
    return slot_width_ == o.slot_width_ && slot_count_ == o.slot_count_;
  }

  SlotVector& operator^=(const SlotVector& o) {
    if (!same_shape(o)) throw DimensionError("XOR of differently shaped slot vectors");
    xor_bytes(o.bits_);
    return *this;
  }

  // XOR a raw bitstring of the full vector length into this vector.
  void xor_bytes(std::span<const std::uint8_t> other) {
    if (other.size() != bits_.size()) throw DimensionError("XOR with bitstring of wrong length");
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] ^= other[i];
  }

  // Overwrites slot j with payload.
  void set_slot(std::size_t j, std::span<const std::uint8_t> payload) {
    check_index(j);
    if (payload.size() * 8 != slot_width_) throw DimensionError("payload width does not equal slot width");
    std::copy(payload.begin(), payload.end(), bits_.begin() + static_cast<std::ptrdiff_t>(j * (slot_width_ / 8)));
  }

  void flip_bit(std::size_t bit) {
    if (bit >= size_bits()) throw IndexError("bit index out of range");
    bits_[bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
  }

  friend bool operator==(const SlotVector&, const SlotVector&) = default;

 private:
  static std::size_t checked_bytes(std::size_t slot_width, std::size_t slot_count) {
    if (slot_width == 0 || slot_width % 8 != 0) throw DimensionError("slot width must be a positive multiple of 8");
    return slot_width / 8 * slot_count;
  }

  void check_index(std::size_t j) const {
    if (j >= slot_count_) throw IndexError("slot index out of range");
  }

  std::size_t slot_width_ = 8;
  std::size_t slot_count_ = 0;
  Bytes bits_;
};

inline SlotVector xor_vectors(const SlotVector& a, const SlotVector& b) {
  SlotVector out = a;
  out ^= b;
  return out;
}

inline SlotVector place_in_slot(std::span<const std::uint8_t> payload, std::size_t slot_index,
                                std::size_t slot_width, std::size_t slot_count) {
  SlotVector v(slot_width, slot_count);
  v.set_slot(slot_index, payload);
  return v;
}

inline Bytes extract_slot(const SlotVector& v, std::size_t slot_index) {
  const auto s = v.slot(slot_index);
  return Bytes(s.begin(), s.end());
}

// Slot reservation message: a lambda-bit pseudonym followed by zero padding
// up to l_srm bits. The pseudonym is never all-zero so that an occupied slot
// is always distinguishable from an empty one.
class Srm {
 public:
  Srm() = default;

  Srm(Bytes pseudonym, std::size_t l_srm) : lambda_(pseudonym.size() * 8), bits_(std::move(pseudonym)) {
    if (bits_.empty()) throw ParameterError("empty pseudonym");
    if (l_srm % 8 != 0 || l_srm < lambda_) throw DimensionError("l_srm must be a byte multiple no shorter than the pseudonym");
    if (std::all_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b == 0; }))
      throw ParameterError("pseudonym must not be all-zero");
    bits_.resize(l_srm / 8, 0);
  }

  std::span<const std::uint8_t> pseudonym() const { return std::span<const std::uint8_t>(bits_).first(lambda_ / 8); }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::size_t width() const { return bits_.size() * 8; }

  friend bool operator==(const Srm&, const Srm&) = default;

 private:
  std::size_t lambda_ = 0;
  Bytes bits_;
};

// Occupancy vector (c_1, ..., c_n): c_k slots hold exactly k participants.
// The vector has exactly n entries and sum_k k * c_k = n.
class CollisionStructure {
 public:
  CollisionStructure() = default;

  explicit CollisionStructure(std::vector<std::size_t> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) throw ParameterError("collision structure needs at least one entry");
    std::size_t total = 0;
    for (std::size_t k = 1; k <= counts_.size(); ++k) total += k * counts_[k - 1];
    if (total != counts_.size())
      throw ParameterError("collision structure violates participant conservation");
  }

  // Builds the structure from per-slot occupant counts.
  static CollisionStructure from_occupancy(std::span<const std::size_t> occupants_per_slot) {
    const std::size_t n = std::accumulate(occupants_per_slot.begin(), occupants_per_slot.end(), std::size_t{0});
    std::vector<std::size_t> counts(n, 0);
    for (auto k : occupants_per_slot)
      if (k > 0) ++counts[k - 1];
    return CollisionStructure(std::move(counts));
  }

  std::size_t participants() const { return counts_.size(); }
  std::size_t occupied() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }
  std::size_t singles() const { return counts_.empty() ? 0 : counts_[0]; }
  std::size_t colliding() const { return participants() - singles(); }
  std::size_t collision_slots() const { return occupied() - singles(); }
  std::size_t count(std::size_t k) const { return k >= 1 && k <= counts_.size() ? counts_[k - 1] : 0; }
  const std::vector<std::size_t>& counts() const { return counts_; }

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(counts_[i]);
    }
    return s + ")";
  }

  friend bool operator==(const CollisionStructure&, const CollisionStructure&) = default;
  friend auto operator<=>(const CollisionStructure&, const CollisionStructure&) = default;

 private:
  std::vector<std::size_t> counts_;
};

// Everything an external observer sees in one reservation round.
struct RoundTranscript {
  std::size_t round_index = 0;
  SlotVector public_aggregate;
  std::size_t per_participant_bits_sent = 0;
  std::vector<std::size_t> occupied_slot_indices;
  std::vector<std::size_t> empty_slot_indices;
};

}  // namespace qadr
