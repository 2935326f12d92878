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

// Acceptance checks. Each criterion prints one PASS/FAIL line; the process
// exits nonzero if any selected criterion fails.
//
//   qadr_acceptance                      run all criteria
//   qadr_acceptance --criterion NAME     run one criterion
//   qadr_acceptance --list               list criterion names

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "qadr/anonymity.hpp"
#include "qadr/combinatorics.hpp"
#include "qadr/cost_model.hpp"
#include "qadr/harness.hpp"
#include "qadr/protocol.hpp"

namespace qadr {
namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double time_limit_s;  // 0: no stated limit
  std::function<Verdict()> run;
};

constexpr std::uint64_t kSeed = 0x41434345'50540001ULL;

CollisionStructure singles(std::size_t n) {
  std::vector<std::size_t> c(n, 0);
  c[0] = n;
  return CollisionStructure(c);
}

Verdict appendix_example() {
  const double p1 = structure_probability(CollisionStructure({3, 1, 0, 0, 0}), 5, 10);
  const double p2 = structure_probability(CollisionStructure({2, 0}), 2, 6);
  const double joint = chain_probability(
      RoundChain{{{5, 10, CollisionStructure({3, 1, 0, 0, 0})}, {2, 6, CollisionStructure({2, 0})}}});
  const auto brute5 = oracle::structure_distribution(5, 10);
  const auto brute2 = oracle::structure_distribution(2, 6);
  const bool oracle_ok = brute5.at({3, 1, 0, 0, 0}) == oracle::Rational(63, 125) &&
                         brute2.at({2, 0}) == oracle::Rational(5, 6);
  const bool pass = std::abs(p1 - 0.504) <= 1e-9 && std::abs(p2 - 5.0 / 6.0) <= 1e-9 &&
                    std::abs(joint - 0.42) <= 1e-9 && oracle_ok;
  return {pass, fmt::format("round1 {:.12f}, round2 {:.12f}, joint {:.12f}, enumeration {}", p1, p2, joint,
                            oracle_ok ? "agrees" : "DISAGREES")};
}

Verdict oracle_equivalence() {
  std::size_t cases = 0, mismatches = 0;
  double worst_sum = 0.0;
  for (std::size_t n = 1; n <= 6; ++n)
    for (std::size_t m = 1; m <= 8; ++m) {
      const auto truth = oracle::structure_distribution(n, m);
      double sum = 0.0;
      std::size_t seen = 0;
      for (const auto& sp : enumerate_structures(n, m)) {
        const auto it = truth.find(sp.structure.counts());
        const oracle::Rational expected = it == truth.end() ? oracle::Rational(0) : it->second;
        mismatches += sp.exact != expected;
        seen += it != truth.end();
        sum += sp.probability;
      }
      mismatches += seen != truth.size();
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      ++cases;
    }
  return {mismatches == 0 && worst_sum <= 1e-12,
          fmt::format("{} (n, m) cases, {} mismatches, max |sum - 1| = {:.2e}", cases, mismatches, worst_sum)};
}

Verdict birthday_consistency() {
  DeterministicStream rng(derive_key(kSeed, "birthday", {}));
  double worst = 0.0;
  std::string pairs;
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 1 + rng.uniform(40);
    const std::size_t m = n + rng.uniform(3 * n + 1);
    const double a = 1.0 - birthday_collision_probability(n, m);
    const double b = structure_probability(singles(n), n, m);
    worst = std::max(worst, std::abs(a - b));
    if (i < 4) pairs += fmt::format("({},{}) ", n, m);
  }
  return {worst <= 1e-12, fmt::format("20 pairs e.g. {}... max deviation {:.2e}", pairs, worst)};
}

Verdict mean_resolution_rounds() {
  std::map<std::pair<std::size_t, std::uint64_t>, double> mean;
  std::size_t timeouts = 0;
  for (std::uint64_t g : {2, 3, 5})
    for (std::size_t n : {5, 10, 20}) {
      const auto params = ProtocolParams::with_gamma(n, Ratio(g));
      double total = 0.0;
      for (std::size_t t = 0; t < 1000; ++t) {
        try {
          total += static_cast<double>(
              run_reservation(params, harness_detail::trial_seed(kSeed, "mean-rounds", n, g, t)).rounds_used);
        } catch (const ReservationTimeout& e) {
          ++timeouts;
          total += static_cast<double>(e.partial().rounds_used);
        }
      }
      mean[{n, g}] = total / 1000.0;
    }
  bool pass = timeouts == 0;
  std::string detail;
  for (std::size_t n : {5, 10, 20}) {
    const double m3 = mean[{n, 3}];
    pass = pass && m3 >= 1.5 && m3 <= 3.5 && mean[{n, 5}] < mean[{n, 2}];
    detail += fmt::format("n={}: g2 {:.3f} g3 {:.3f} g5 {:.3f}; ", n, mean[{n, 2}], m3, mean[{n, 5}]);
  }
  return {pass, detail + fmt::format("timeouts {}", timeouts)};
}

Verdict round_distribution() {
  constexpr std::size_t kTrials = 10000;
  constexpr double kMinExpected = 20.0;
  bool pass = true;
  std::string detail;
  double worst_sigma = 0.0;
  for (std::size_t m : {10, 15, 25}) {
    const auto params = ProtocolParams::with_slots(5, m, {64, 64, 64, 16, 50});
    std::vector<double> observed(params.max_rounds() + 1, 0.0);
    for (std::size_t t = 0; t < kTrials; ++t) {
      const auto out = run_reservation(params, harness_detail::trial_seed(kSeed, "round-dist", 5, m, t));
      observed[out.rounds_used - 1] += 1;
    }
    const auto d = resolution_round_distribution(5, m, params.max_rounds());
    // Rounds with a small expected count are pooled into a final ">= R" bin.
    std::size_t r = 0;
    std::size_t bins = 0;
    while (r < d.terminate_at.size()) {
      double p = d.terminate_at[r], obs = observed[r];
      const bool tail = p * kTrials < kMinExpected ||
                        (r + 1 < d.terminate_at.size() && d.terminate_at[r + 1] * kTrials < kMinExpected);
      std::size_t last = r;
      if (tail) {
        for (last = r + 1; last < d.terminate_at.size(); ++last) {
          p += d.terminate_at[last];
          obs += observed[last];
        }
        p += d.unresolved;
        --last;
      }
      const double expected = p * kTrials;
      const double sigma = std::sqrt(kTrials * p * (1.0 - p));
      const double z = sigma > 0 ? std::abs(obs - expected) / sigma : (obs == expected ? 0.0 : INFINITY);
      worst_sigma = std::max(worst_sigma, z);
      pass = pass && z <= 3.0;
      ++bins;
      r = last + 1;
    }
    detail += fmt::format("m={}: {} bins, E[r] {:.4f}; ", m, bins, d.expected_rounds());
  }
  return {pass, detail + fmt::format("max deviation {:.2f} sigma", worst_sigma)};
}

Verdict protocol_correctness() {
  ExperimentConfig c;
  c.scenario = Scenario::e2e_protocol;
  c.trials = 10000;
  c.n_min = 2;
  c.n_max = 32;
  c.gamma = Ratio(3);
  c.lambda = 64;
  c.l_srm = 64;
  c.l_msg = 256;
  c.master_seed = kSeed;
  const auto r = run_scenario(c);
  auto summary = r.summary;
  if (!summary.empty() && summary.back() == '\n') summary.pop_back();
  return {r.ok, summary};
}

Verdict fault_handling() {
  DeterministicStream rng(derive_key(kSeed, "faults", {}));
  std::size_t good = 0;
  for (std::size_t t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.uniform(15);
    const auto params = ProtocolParams::with_gamma(n, Ratio(3), {64, 128, 64, 16, 50});
    std::vector<Bytes> msgs;
    for (std::size_t i = 0; i < n; ++i) msgs.push_back(rng.bytes(16));
    const std::size_t slot = rng.uniform(n);
    const std::size_t bit = slot * params.l_msg() + rng.uniform(params.l_msg());
    const auto run = run_protocol(params, harness_detail::trial_seed(kSeed, "fault", n, t, 0), msgs,
                                  Variant::standard, [&](SlotVector& v) { v.flip_bit(bit); });
    bool ok = !run.submission.accepted && run.recovery && run.recovery->accepted &&
              run.keys.epochs(KeyStage::recovery) == 1;
    for (std::size_t i = 0; i < n; ++i)
      ok = ok && run.submission.flags[i] == (run.reservation.final_positions[i] == slot ? 0 : 1);
    ok = ok && run.plan.participants.size() == 1;
    good += ok;
  }
  return {good == 100, fmt::format("{} of 100 corrupted runs flagged the owner only and recovered", good)};
}

Verdict cost_scaling() {
  const CostScenario s;
  auto ratio = [&](std::uint64_t n) {
    return static_cast<double>(apmt_n_message_cost(n, s.l_msg, s.beta)) /
           static_cast<double>(qadr_bandwidth(n, s.gamma, s.r, s.l_srm, s.l_msg));
  };
  const double factor = ratio(100) / ratio(10);
  bool bw_ok = true;
  std::string bw;
  for (std::uint64_t n : {20, 40, 80}) {
    const double g = static_cast<double>(qadr_bandwidth(2 * n, s.gamma, s.r, s.l_srm, s.l_msg)) /
                     static_cast<double>(qadr_bandwidth(n, s.gamma, s.r, s.l_srm, s.l_msg));
    bw_ok = bw_ok && g >= 3.8 && g <= 4.2;
    bw += fmt::format(" {:.3f}", g);
  }
  return {factor > 50.0 && bw_ok,
          fmt::format("APMT/QADR ratio n=100 over n=10 = {:.3f} (need > 50); BW(2n)/BW(n) for n=20,40,80:{}",
                      factor, bw)};
}

Verdict traffic_key_accounting() {
  DeterministicStream rng(derive_key(kSeed, "traffic", {}));
  std::map<std::size_t, std::size_t> by_rounds;
  std::size_t bad = 0, runs = 0;
  for (std::size_t t = 0; t < 150; ++t) {
    const std::size_t n = 2 + rng.uniform(19);
    const auto params = ProtocolParams::with_gamma(n, Ratio(3));
    std::vector<Bytes> msgs;
    for (std::size_t i = 0; i < n; ++i) msgs.push_back(rng.bytes(params.l_msg() / 8));
    for (auto v : {Variant::standard, Variant::shuffle}) {
      const auto run = run_protocol(params, harness_detail::trial_seed(kSeed, "traffic", n, t, 0), msgs, v);
      const std::uint64_t r = run.reservation.rounds_used;
      const std::uint64_t m = params.m();
      const std::uint64_t res_term = r * n * (m * params.l_srm());
      const std::uint64_t sub_term = n * (n * params.l_msg());
      bool ok = run.traffic.submission_bits == sub_term;
      if (v == Variant::standard) {
        by_rounds[r]++;
        ok = ok && run.traffic.reservation_bits == res_term &&
             run.traffic.reservation_bits + run.traffic.submission_bits ==
                 qadr_bandwidth(n, Ratio(3), r, params.l_srm(), params.l_msg()) &&
             run.keys.epochs() == r + 2 &&
             run.keys.total_key_bits() == qadr_key_bits(n, r, params.lambda(), CostVariant::qadr_default);
      } else {
        ok = ok && run.keys.epochs() == 2 &&
             run.keys.total_key_bits() == qadr_key_bits(n, r, params.lambda(), CostVariant::qadr_shuffle);
      }
      bad += !ok;
      ++runs;
    }
  }
  std::string hist;
  for (const auto& [r, c] : by_rounds) hist += fmt::format(" r={}:{}", r, c);
  return {bad == 0 && by_rounds.size() >= 2, fmt::format("{} runs, {} mismatches; rounds seen{}", runs, bad, hist)};
}

Verdict anonymity_metrics() {
  std::size_t mismatches = 0, rounds = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + t % 30;
    const auto params = ProtocolParams::with_gamma(n, Ratio(2), {64, 64, 64, 16, 50});
    const auto out = run_reservation(params, harness_detail::trial_seed(kSeed, "anonymity", n, t, 0));
    const auto views = observe_partition(n, out.transcripts);
    for (std::size_t r = 0; r < views.size(); ++r) {
      ++rounds;
      const auto c1 = out.ground_truth_structures[r].singles();
      mismatches += !views[r].exact || views[r].succ_count != c1;
      if (c1 > 0 && c1 < n) {
        const double direct = std::log(static_cast<double>(n) / static_cast<double>(n - c1)) / std::log(2.0);
        worst = std::max(worst, std::abs(partition_information_gain(n, views[r]) - direct));
      }
    }
  }
  std::size_t shuffle_leaks = 0;
  for (std::size_t t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 30;
    const auto out = run_shuffle_reservation(ProtocolParams::with_gamma(n, Ratio(3), {64, 64, 64, 16, 50}),
                                             harness_detail::trial_seed(kSeed, "anonymity-shuffle", n, t, 0));
    for (const auto& v : observe_partition(n, out.transcripts)) shuffle_leaks += partition_information_gain(n, v) != 0.0;
  }
  return {mismatches == 0 && worst <= 1e-12 && shuffle_leaks == 0,
          fmt::format("1000 runs / {} rounds, {} observer mismatches, max i_gain error {:.2e}, "
                      "{} nonzero shuffle leaks in 200 runs",
                      rounds, mismatches, worst, shuffle_leaks)};
}

Verdict determinism() {
  std::size_t same = 0;
  std::string detail;
  for (auto s : kAllScenarios) {
    ExperimentConfig c;
    c.scenario = s;
    c.trials = 40;
    const bool eq = run_scenario(c).csv == run_scenario(c).csv;
    same += eq;
    detail += fmt::format("{} {}; ", to_string(s), eq ? "identical" : "DIFFERS");
  }
  detail.resize(detail.size() - 2);
  return {same == std::size(kAllScenarios), detail};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"appendix_example", 1.0, appendix_example},
      {"oracle_equivalence", 120.0, oracle_equivalence},
      {"birthday_consistency", 0.0, birthday_consistency},
      {"mean_resolution_rounds", 60.0, mean_resolution_rounds},
      {"round_distribution", 0.0, round_distribution},
      {"protocol_correctness", 120.0, protocol_correctness},
      {"fault_handling", 0.0, fault_handling},
      {"cost_scaling", 0.0, cost_scaling},
      {"traffic_key_accounting", 0.0, traffic_key_accounting},
      {"anonymity_metrics", 0.0, anonymity_metrics},
      {"determinism", 0.0, determinism},
  };
  return all;
}

bool run_one(const Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = c.run();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string timing = fmt::format("{:.2f}s", secs);
  if (c.time_limit_s > 0) {
    timing += fmt::format(" (limit {:.0f}s)", c.time_limit_s);
    if (secs > c.time_limit_s) v.pass = false;
  }
  std::cout << fmt::format("{} {:<24} {} [{}]\n", v.pass ? "PASS" : "FAIL", c.name, v.detail, timing) << std::flush;
  return v.pass;
}

}  // namespace
}  // namespace qadr

int main(int argc, char** argv) {
  CLI::App app{"QADR acceptance checks"};
  std::string only;
  bool list = false;
  app.add_option("--criterion", only, "run a single criterion");
  app.add_flag("--list", list, "list criteria");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& c : qadr::criteria()) std::cout << c.name << "\n";
    return 0;
  }
  std::size_t failed = 0, ran = 0;
  for (const auto& c : qadr::criteria()) {
    if (!only.empty() && c.name != only) continue;
    ++ran;
    failed += !qadr::run_one(c);
  }
  if (ran == 0) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
