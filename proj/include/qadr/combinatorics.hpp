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

// Exact collision analysis for n participants choosing uniformly among m
// slots.
//
// A round's outcome is summarised by its collision structure c = (c_1..c_n).
// The number of assignments producing c is
//
//   n! / prod_k (k!)^{c_k} c_k!      ways to group the participants
//   * m! / (m - j)!                   ways to place the j groups in slots
//
// out of m^n equally likely assignments. Multi-round behaviour follows by
// conditioning: only colliders play again, on the slots left over.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "qadr/core_types.hpp"

namespace qadr {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline BigInt factorial(std::size_t k) {
  BigInt f = 1;
  for (std::size_t i = 2; i <= k; ++i) f *= i;
  return f;
}

// P_{m,n}: probability that at least two of n participants share a slot.
inline Rational birthday_collision_probability_exact(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw DomainError("birthday bound needs n >= 1 and m >= 1");
  if (n > m) throw DomainError("birthday bound needs n <= m");
  Rational none = 1;
  for (std::size_t k = 1; k < n; ++k) none *= Rational(BigInt(m - k), BigInt(m));
  return 1 - none;
}

inline double birthday_collision_probability(std::size_t n, std::size_t m) {
  return to_double(birthday_collision_probability_exact(n, m));
}

inline void check_structure(const CollisionStructure& c, std::size_t m) {
  if (c.participants() == 0) throw DomainError("empty collision structure");
  if (c.occupied() > m) throw DomainError("structure occupies more slots than exist");
}

inline Rational structure_probability_exact(const CollisionStructure& c, std::size_t m) {
  check_structure(c, m);
  const auto n = c.participants();
  const auto j = c.occupied();
  BigInt denom = factorial(m - j);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto ck = c.count(k);
    if (ck == 0) continue;
    denom *= boost::multiprecision::pow(factorial(k), static_cast<unsigned>(ck)) * factorial(ck);
  }
  denom *= boost::multiprecision::pow(BigInt(m), static_cast<unsigned>(n));
  return Rational(factorial(n) * factorial(m), denom);
}

// Natural log of P(c) through lgamma, for sizes where exact evaluation is
// not wanted. Relative error of exp() of the result stays below 1e-9 for
// n, m up to a few thousand.
inline double structure_log_probability(const CollisionStructure& c, std::size_t m) {
  check_structure(c, m);
  const auto n = c.participants();
  const auto j = c.occupied();
  auto lf = [](std::size_t k) { return std::lgamma(static_cast<double>(k) + 1.0); };
  double lp = lf(n) + lf(m) - lf(m - j) - static_cast<double>(n) * std::log(static_cast<double>(m));
  for (std::size_t k = 1; k <= n; ++k) {
    const auto ck = c.count(k);
    if (ck) lp -= static_cast<double>(ck) * lf(k) + lf(ck);
  }
  return lp;
}

inline constexpr std::size_t kExactLimit = 64;

// Exact for n, m <= 64; log-gamma beyond.
inline double structure_probability(const CollisionStructure& c, std::size_t n, std::size_t m) {
  if (c.participants() != n) throw DomainError("structure does not describe n participants");
  if (n <= kExactLimit && m <= kExactLimit) return to_double(structure_probability_exact(c, m));
  return std::exp(structure_log_probability(c, m));
}

// Calls fn for every collision structure of n participants (every integer
// partition of n), largest parts first.
inline void for_each_structure(std::size_t n, const std::function<void(const CollisionStructure&)>& fn) {
  if (n == 0) return;
  std::vector<std::size_t> counts(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t remaining, std::size_t max_part) {
    if (remaining == 0) {
      fn(CollisionStructure(counts));
      return;
    }
    for (std::size_t k = std::min(remaining, max_part); k >= 1; --k) {
      ++counts[k - 1];
      rec(remaining - k, k);
      --counts[k - 1];
    }
  };
  rec(n, n);
}

struct StructureProbability {
  CollisionStructure structure;
  Rational exact;
  double probability = 0.0;
};

inline constexpr std::size_t kEnumerateMaxN = 12;
inline constexpr std::size_t kEnumerateMaxM = 16;

// Every structure reachable with n participants in m slots (j <= m) and its
// exact probability.
inline std::vector<StructureProbability> enumerate_structures(std::size_t n, std::size_t m) {
  if (n > kEnumerateMaxN || m > kEnumerateMaxM) throw ScaleError("enumeration limited to n <= 12, m <= 16");
  if (n == 0 || m == 0) throw DomainError("enumeration needs n >= 1 and m >= 1");
  std::vector<StructureProbability> out;
  for_each_structure(n, [&](const CollisionStructure& c) {
    if (c.occupied() > m) return;
    auto p = structure_probability_exact(c, m);
    out.push_back({c, p, to_double(p)});
  });
  return out;
}

// Sequence of rounds where round r+1 is played by the colliders of round r
// on the slots round r left empty.
struct RoundChain {
  struct Round {
    std::size_t n = 0;
    std::size_t m = 0;
    CollisionStructure structure;
  };
  std::vector<Round> rounds;
};

inline void check_chain(const RoundChain& chain) {
  if (chain.rounds.empty()) throw ParameterError("empty round chain");
  for (std::size_t r = 0; r < chain.rounds.size(); ++r) {
    const auto& cur = chain.rounds[r];
    if (cur.structure.participants() != cur.n) throw ParameterError("chain round structure does not match n");
    if (r + 1 == chain.rounds.size()) break;
    const auto& next = chain.rounds[r + 1];
    if (next.n != cur.n - cur.structure.singles() || next.m != cur.m - cur.structure.occupied())
      throw ParameterError("chain inconsistency: next round must have n' = n - c_1 and m' = m - j");
  }
}

inline Rational chain_probability_exact(const RoundChain& chain) {
  check_chain(chain);
  Rational p = 1;
  for (const auto& r : chain.rounds) p *= structure_probability_exact(r.structure, r.m);
  return p;
}

inline double chain_probability(const RoundChain& chain) { return to_double(chain_probability_exact(chain)); }

// Distribution of the number of rounds the iterative reservation needs.
// Index r-1 of each vector refers to round r.
struct RoundDistribution {
  std::vector<double> terminate_at;
  std::vector<double> resolved_by;
  // Expected number of colliding participants / collision slots at the end
  // of round r; terminated runs contribute zero.
  std::vector<double> expected_colliders;
  std::vector<double> expected_collision_slots;
  double unresolved = 0.0;

  double expected_rounds() const {
    double e = 0.0;
    for (std::size_t r = 0; r < terminate_at.size(); ++r) e += static_cast<double>(r + 1) * terminate_at[r];
    return e;
  }
};

inline constexpr std::size_t kDistributionMaxN = 10;

// Exact dynamic programme over (colliders, slots available to them). After a
// round with s new singles and q collision slots, the colliders of the next
// round may use every slot that round left empty:
//   m - (successful so far) - q.
// For round 2 this is m - j; from round 3 on the previous collision slots
// are free again.
inline RoundDistribution resolution_round_distribution(std::size_t n, std::size_t m, std::size_t max_rounds) {
  if (n > kDistributionMaxN) throw ScaleError("round distribution limited to n <= 10");
  if (n == 0 || m < n) throw DomainError("round distribution needs 1 <= n <= m");
  if (max_rounds == 0) throw DomainError("max_rounds must be positive");

  std::map<std::size_t, std::vector<CollisionStructure>> structures;
  auto structures_of = [&](std::size_t k) -> const std::vector<CollisionStructure>& {
    auto it = structures.find(k);
    if (it != structures.end()) return it->second;
    std::vector<CollisionStructure> v;
    for_each_structure(k, [&](const CollisionStructure& c) { v.push_back(c); });
    return structures.emplace(k, std::move(v)).first->second;
  };

  RoundDistribution d;
  std::map<std::pair<std::size_t, std::size_t>, double> states{{{n, m}, 1.0}};
  for (std::size_t round = 1; round <= max_rounds; ++round) {
    double term = 0.0, coll = 0.0, slots = 0.0;
    std::map<std::pair<std::size_t, std::size_t>, double> next;
    for (const auto& [state, mass] : states) {
      const auto [colliders, avail] = state;
      for (const auto& c : structures_of(colliders)) {
        if (c.occupied() > avail) continue;
        const double p = mass * structure_probability(c, colliders, avail);
        const auto left = c.colliding();
        if (left == 0) {
          term += p;
          continue;
        }
        const auto q = c.collision_slots();
        coll += p * static_cast<double>(left);
        slots += p * static_cast<double>(q);
        next[{left, m - (n - left) - q}] += p;
      }
    }
    d.terminate_at.push_back(term);
    d.resolved_by.push_back((d.resolved_by.empty() ? 0.0 : d.resolved_by.back()) + term);
    d.expected_colliders.push_back(coll);
    d.expected_collision_slots.push_back(slots);
    states = std::move(next);
  }
  for (const auto& [state, mass] : states) d.unresolved += mass;
  return d;
}

}  // namespace qadr
