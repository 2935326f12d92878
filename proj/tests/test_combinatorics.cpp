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

#include "qadr/combinatorics.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace qadr {
namespace {

TEST(BirthdayTest, MatchesHandComputedValues) {
  EXPECT_EQ(birthday_collision_probability_exact(5, 10), Rational(6976, 10000));
  EXPECT_NEAR(birthday_collision_probability(5, 10), 0.6976, 1e-12);
  EXPECT_EQ(birthday_collision_probability_exact(1, 7), Rational(0));
  EXPECT_EQ(birthday_collision_probability_exact(2, 2), Rational(1, 2));
  EXPECT_THROW(birthday_collision_probability_exact(6, 5), DomainError);
  EXPECT_THROW(birthday_collision_probability_exact(0, 5), DomainError);
}

TEST(BirthdayTest, ComplementIsTheAllSinglesStructure) {
  for (std::size_t n = 1; n <= 12; ++n)
    for (std::size_t m = n; m <= 20; ++m) {
      std::vector<std::size_t> c(n, 0);
      c[0] = n;
      EXPECT_EQ(1 - birthday_collision_probability_exact(n, m), structure_probability_exact(CollisionStructure(c), m));
    }
}

TEST(StructureProbabilityTest, WorkedExampleValues) {
  EXPECT_EQ(structure_probability_exact(CollisionStructure({3, 1, 0, 0, 0}), 10), Rational(63, 125));
  EXPECT_EQ(structure_probability_exact(CollisionStructure({2, 0}), 6), Rational(5, 6));
  const RoundChain chain{{{5, 10, CollisionStructure({3, 1, 0, 0, 0})}, {2, 6, CollisionStructure({2, 0})}}};
  EXPECT_EQ(chain_probability_exact(chain), Rational(21, 50));
  EXPECT_NEAR(chain_probability(chain), 0.42, 1e-15);
}

TEST(StructureProbabilityTest, EqualsExhaustiveEnumeration) {
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t m = 1; m <= 6; ++m) {
      const auto truth = oracle::structure_distribution(n, m);
      Rational total = 0;
      for (const auto& sp : enumerate_structures(n, m)) {
        const auto it = truth.find(sp.structure.counts());
        const Rational expected = it == truth.end() ? Rational(0) : it->second;
        EXPECT_EQ(sp.exact, expected) << "n=" << n << " m=" << m << " c=" << sp.structure.str();
        total += sp.exact;
      }
      EXPECT_EQ(total, Rational(1)) << "n=" << n << " m=" << m;
      for (const auto& [c, p] : truth) EXPECT_EQ(structure_probability_exact(CollisionStructure(c), m), p);
    }
}

TEST(StructureProbabilityTest, RejectsImpossibleStructures) {
  EXPECT_THROW(structure_probability_exact(CollisionStructure({4, 0, 0, 0}), 3), DomainError);
  EXPECT_THROW(structure_probability(CollisionStructure({2, 0}), 3, 5), DomainError);
  EXPECT_THROW(enumerate_structures(13, 16), ScaleError);
  EXPECT_THROW(enumerate_structures(5, 17), ScaleError);
}

TEST(StructureProbabilityTest, LogPathAgreesWithExactValues) {
  for (std::size_t n : {5, 20, 40, 64})
    for (std::size_t m : {n, 2 * n, 3 * n}) {
      if (m > 200) continue;
      for (const auto& counts : {std::vector<std::size_t>{}, std::vector<std::size_t>{2}}) {
        std::vector<std::size_t> c(n, 0);
        c[0] = counts.empty() ? n : n - 2;
        if (!counts.empty()) c[1] = 1;
        const CollisionStructure s(c);
        if (s.occupied() > m) continue;
        const double exact = to_double(structure_probability_exact(s, m));
        EXPECT_NEAR(std::exp(structure_log_probability(s, m)) / exact, 1.0, 1e-9) << n << " " << m;
      }
    }
}

TEST(StructureProbabilityTest, LargeInstancesUseTheLogPath) {
  // All-singles probability is prod_{k<n} (1 - k/m).
  const std::size_t n = 100, m = 300;
  double direct = 1.0;
  for (std::size_t k = 1; k < n; ++k) direct *= 1.0 - static_cast<double>(k) / m;
  std::vector<std::size_t> c(n, 0);
  c[0] = n;
  EXPECT_NEAR(structure_probability(CollisionStructure(c), n, m) / direct, 1.0, 1e-9);
}

TEST(ForEachStructureTest, CountsIntegerPartitions) {
  const std::size_t partitions[] = {1, 2, 3, 5, 7, 11, 15, 22, 30, 42};
  for (std::size_t n = 1; n <= 10; ++n) {
    std::size_t count = 0;
    for_each_structure(n, [&](const CollisionStructure& c) {
      EXPECT_EQ(c.participants(), n);
      ++count;
    });
    EXPECT_EQ(count, partitions[n - 1]);
  }
}

TEST(RoundChainTest, RejectsInconsistentChains) {
  EXPECT_THROW(check_chain(RoundChain{}), ParameterError);
  const RoundChain wrong_m{{{5, 10, CollisionStructure({3, 1, 0, 0, 0})}, {2, 7, CollisionStructure({2, 0})}}};
  EXPECT_THROW(check_chain(wrong_m), ParameterError);
  const RoundChain wrong_n{{{5, 10, CollisionStructure({3, 1, 0, 0, 0})}, {3, 6, CollisionStructure({3, 0, 0})}}};
  EXPECT_THROW(check_chain(wrong_n), ParameterError);
}

TEST(RoundDistributionTest, FirstRoundIsTheAllSinglesProbability) {
  const auto d15 = resolution_round_distribution(5, 15, 10);
  EXPECT_NEAR(d15.terminate_at[0], 24024.0 / 50625.0, 1e-12);
  const auto d10 = resolution_round_distribution(5, 10, 10);
  EXPECT_NEAR(d10.terminate_at[0], 0.3024, 1e-12);
}

TEST(RoundDistributionTest, IsANormalisedDistribution) {
  for (std::size_t n = 1; n <= 8; ++n)
    for (std::size_t m : {n, n + 1, 2 * n, 3 * n}) {
      const auto d = resolution_round_distribution(n, m, 30);
      double total = d.unresolved;
      for (std::size_t r = 0; r < d.terminate_at.size(); ++r) {
        total += d.terminate_at[r];
        if (r) EXPECT_GE(d.resolved_by[r], d.resolved_by[r - 1]);
      }
      EXPECT_NEAR(total, 1.0, 1e-12) << n << " " << m;
    }
}

TEST(RoundDistributionTest, MatchesExplicitRerunEnumeration) {
  for (auto [n, m, depth] : {std::tuple{3, 4, 4}, std::tuple{3, 5, 3}, std::tuple{2, 3, 5}, std::tuple{4, 5, 2}}) {
    const auto brute = oracle::termination_by_enumeration(n, m, depth);
    const auto d = resolution_round_distribution(n, m, depth);
    for (std::size_t r = 0; r < static_cast<std::size_t>(depth); ++r)
      EXPECT_NEAR(d.terminate_at[r], brute[r], 1e-12) << "n=" << n << " m=" << m << " round " << r + 1;
  }
}

TEST(RoundDistributionTest, SquareCaseDeadlocksAfterACollision) {
  const auto d = resolution_round_distribution(2, 2, 10);
  EXPECT_NEAR(d.terminate_at[0], 0.5, 1e-15);
  for (std::size_t r = 1; r < 10; ++r) EXPECT_EQ(d.terminate_at[r], 0.0);
  EXPECT_NEAR(d.unresolved, 0.5, 1e-15);
}

TEST(RoundDistributionTest, RejectsOutOfScaleRequests) {
  EXPECT_THROW(resolution_round_distribution(11, 33, 5), ScaleError);
  EXPECT_THROW(resolution_round_distribution(5, 4, 5), DomainError);
  EXPECT_THROW(resolution_round_distribution(5, 15, 0), DomainError);
}

}  // namespace
}  // namespace qadr
