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

// Experiment scenarios and their CSV output.
//
// Every scenario is a pure function of its ExperimentConfig: per-trial seeds
// are derived from the master seed, and no timestamps or host details reach
// the output, so reruns are byte-identical.
//
// CSV layout (schema version kCsvSchemaVersion):
//   # qadr-csv v<version>
//   # scenario = <name>
//   # <key> = <value>            one line per effective config entry
//   <header row>
//   <data rows>

#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qadr/anonymity.hpp"
#include "qadr/combinatorics.hpp"
#include "qadr/core_types.hpp"
#include "qadr/cost_model.hpp"
#include "qadr/keying.hpp"
#include "qadr/protocol.hpp"
#include "qadr/reservation.hpp"

namespace qadr {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultMasterSeed = 20251015;

enum class Scenario { collision_sweep, optimal_gamma, cost_compare, e2e_protocol, appendix_example, coalition_attack };

inline constexpr Scenario kAllScenarios[] = {Scenario::collision_sweep, Scenario::optimal_gamma,
                                             Scenario::cost_compare,    Scenario::e2e_protocol,
                                             Scenario::appendix_example, Scenario::coalition_attack};

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::collision_sweep: return "collision_sweep";
    case Scenario::optimal_gamma: return "optimal_gamma";
    case Scenario::cost_compare: return "cost_compare";
    case Scenario::e2e_protocol: return "e2e_protocol";
    case Scenario::appendix_example: return "appendix_example";
    case Scenario::coalition_attack: return "coalition_attack";
  }
  return "unknown";
}

inline Scenario parse_scenario(std::string_view s) {
  for (auto sc : kAllScenarios)
    if (to_string(sc) == s) return sc;
  throw ParameterError("unknown scenario '" + std::string(s) + "'");
}

// "3", "5/2".
inline Ratio parse_ratio(std::string_view s) {
  const auto slash = s.find('/');
  auto num = [](std::string_view t) {
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ParameterError("malformed ratio '" + std::string(t) + "'");
    return static_cast<std::uint64_t>(std::stoull(std::string(t)));
  };
  if (slash == std::string_view::npos) return Ratio(num(s));
  return Ratio(num(s.substr(0, slash)), num(s.substr(slash + 1)));
}

struct ExperimentConfig {
  Scenario scenario = Scenario::appendix_example;

  // Single-point parameters.
  std::size_t n = 10;
  std::optional<std::size_t> m;  // overrides gamma when set
  Ratio gamma{3};

  // Sweep grids.
  std::vector<std::size_t> n_list{5, 10, 20, 50};
  std::vector<Ratio> gamma_list{Ratio(2), Ratio(3), Ratio(4), Ratio(5)};
  // Range of n; scenario defaults when unset (cost_compare 2..200,
  // e2e_protocol 2..32 drawn per trial).
  std::optional<std::size_t> n_min;
  std::optional<std::size_t> n_max;

  std::size_t l_srm = 256;
  std::size_t l_msg = 1024;
  std::size_t lambda = 256;
  std::size_t beta = 16;
  std::size_t max_rounds = 50;
  std::size_t r = 3;  // assumed reservation rounds in cost formulas

  std::size_t trials = 1000;
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::string output_path;
  Variant variant = Variant::standard;

  // coalition_attack: honest participants (0 = n - 1) and attack length.
  std::size_t honest_count = 0;
  std::size_t attack_rounds = 3;

  // Aggregate bare SRM vectors instead of expanding pads (sweeps only).
  bool fast = false;

  ProtocolParams::Options options() const { return {l_srm, l_msg, lambda, beta, max_rounds}; }

  ProtocolParams params_for(std::size_t n_, Ratio g) const { return ProtocolParams::with_gamma(n_, g, options()); }

  ProtocolParams params() const {
    return m ? ProtocolParams::with_slots(n, *m, options()) : ProtocolParams::with_gamma(n, gamma, options());
  }

  std::size_t range_min() const { return n_min.value_or(2); }
  std::size_t range_max() const { return n_max.value_or(scenario == Scenario::cost_compare ? 200 : 32); }

  void validate() const {
    if (trials < 1) throw ParameterError("trials must be at least 1");
    if (range_min() < 2 || range_min() > range_max()) throw ParameterError("need 2 <= n_min <= n_max");
    switch (scenario) {
      case Scenario::collision_sweep:
      case Scenario::optimal_gamma:
        if (n_list.empty() || gamma_list.empty()) throw ParameterError("sweep needs n_list and gamma_list");
        for (auto v : n_list)
          for (auto g : gamma_list) (void)params_for(v, g);
        break;
      case Scenario::coalition_attack: {
        (void)params();
        const auto k = honest_count == 0 ? n - 1 : honest_count;
        if (k < 2 || k > n) throw ParameterError("honest_count must lie in [2, n]");
        break;
      }
      case Scenario::e2e_protocol:
        (void)params_for(range_max(), gamma);
        break;
      case Scenario::cost_compare:
      case Scenario::appendix_example:
        break;
    }
  }
};

inline std::string join(const std::vector<std::size_t>& v) {
  return fmt::format("{}", fmt::join(v, ","));
}

inline std::string join(const std::vector<Ratio>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i].str();
  return s;
}

// Effective configuration as "key = value" lines, in a fixed order.
inline std::vector<std::pair<std::string, std::string>> effective_config(const ExperimentConfig& c) {
  return {
      {"scenario", std::string(to_string(c.scenario))},
      {"n", std::to_string(c.n)},
      {"m", c.m ? std::to_string(*c.m) : "auto"},
      {"gamma", c.gamma.str()},
      {"n-list", join(c.n_list)},
      {"gamma-list", join(c.gamma_list)},
      {"n-min", std::to_string(c.range_min())},
      {"n-max", std::to_string(c.range_max())},
      {"l-srm", std::to_string(c.l_srm)},
      {"l-msg", std::to_string(c.l_msg)},
      {"lambda", std::to_string(c.lambda)},
      {"beta", std::to_string(c.beta)},
      {"max-rounds", std::to_string(c.max_rounds)},
      {"r", std::to_string(c.r)},
      {"trials", std::to_string(c.trials)},
      {"seed", std::to_string(c.master_seed)},
      {"variant", std::string(to_string(c.variant))},
      {"honest", std::to_string(c.honest_count)},
      {"attack-rounds", std::to_string(c.attack_rounds)},
      {"fast", c.fast ? "true" : "false"},
  };
}

struct ScenarioResult {
  std::string csv;
  std::string summary;
  // False when a scenario-level invariant failed.
  bool ok = true;
};

namespace harness_detail {

inline std::uint64_t trial_seed(std::uint64_t master, std::string_view label, std::uint64_t a, std::uint64_t b,
                                std::uint64_t trial) {
  const auto k = derive_key(master, label, {a, b, trial});
  std::uint64_t s = 0;
  for (int i = 0; i < 8; ++i) s |= static_cast<std::uint64_t>(k[i]) << (8 * i);
  return s;
}

inline std::string csv_preamble(const ExperimentConfig& c) {
  std::string out = fmt::format("# qadr-csv v{}\n", kCsvSchemaVersion);
  for (const auto& [k, v] : effective_config(c)) out += fmt::format("# {} = {}\n", k, v);
  return out;
}

inline std::string num(double v) { return fmt::format("{:.6f}", v); }

struct MeanStat {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double sd() const {
    if (count < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq - static_cast<double>(count) * m * m) / static_cast<double>(count - 1)));
  }
  double ci95() const { return count ? 1.96 * sd() / std::sqrt(static_cast<double>(count)) : 0.0; }
};

inline ReservationOptions sweep_options(const ExperimentConfig& c) {
  ReservationOptions o;
  o.masking = c.fast ? Masking::none : Masking::full;
  return o;
}

inline ScenarioResult collision_sweep(const ExperimentConfig& c) {
  ScenarioResult res;
  res.csv = csv_preamble(c);
  res.csv +=
      "n,gamma,m,round,trials,mean_colliding_participants,mean_collision_slots,p_resolved_by_round,"
      "analytic_p_resolved_by_round,analytic_mean_colliding_participants\n";
  res.summary = "collision sweep: mean colliding participants after each round\n";
  for (auto n : c.n_list) {
    for (auto g : c.gamma_list) {
      const auto params = c.params_for(n, g);
      std::vector<MeanStat> coll(params.max_rounds()), slots(params.max_rounds());
      std::vector<std::size_t> resolved(params.max_rounds(), 0);
      std::size_t deepest = 0, timeouts = 0;
      for (std::size_t t = 0; t < c.trials; ++t) {
        ReservationOutcome o;
        try {
          o = run_reservation(params, trial_seed(c.master_seed, "collision_sweep", n, g.num * 1000 + g.den, t),
                              sweep_options(c));
        } catch (const ReservationTimeout& e) {
          o = e.partial();
          ++timeouts;
        }
        deepest = std::max(deepest, o.rounds_used);
        for (std::size_t r = 0; r < params.max_rounds(); ++r) {
          const bool in_run = r < o.ground_truth_structures.size();
          coll[r].add(in_run ? static_cast<double>(o.ground_truth_structures[r].colliding()) : 0.0);
          slots[r].add(in_run ? static_cast<double>(o.ground_truth_structures[r].collision_slots()) : 0.0);
          if (o.final_positions.size() == n && r + 1 >= o.rounds_used) ++resolved[r];
        }
      }
      std::optional<RoundDistribution> analytic;
      if (n <= kDistributionMaxN) analytic = resolution_round_distribution(n, params.m(), deepest);
      for (std::size_t r = 0; r < deepest; ++r) {
        res.csv += fmt::format(
            "{},{},{},{},{},{},{},{},{},{}\n", n, g.str(), params.m(), r + 1, c.trials, num(coll[r].mean()),
            num(slots[r].mean()), num(static_cast<double>(resolved[r]) / static_cast<double>(c.trials)),
            analytic ? num(analytic->resolved_by[r]) : "", analytic ? num(analytic->expected_colliders[r]) : "");
      }
      res.summary += fmt::format("  n={:<3} gamma={:<4} m={:<4} round1={:.3f} round2={:.3f} timeouts={}\n", n,
                                 g.str(), params.m(), coll[0].mean(), params.max_rounds() > 1 ? coll[1].mean() : 0.0,
                                 timeouts);
    }
  }
  return res;
}

inline ScenarioResult optimal_gamma(const ExperimentConfig& c) {
  ScenarioResult res;
  res.csv = csv_preamble(c);
  res.csv += "gamma,n,m,trials,mean_rounds,sd_rounds,ci95_low,ci95_high,max_rounds_seen,timeouts,mean_reservation_bits\n";
  res.summary = "mean resolution rounds per gamma (95% CI)\n";
  for (auto g : c.gamma_list) {
    for (auto n : c.n_list) {
      const auto params = c.params_for(n, g);
      MeanStat rounds, bits;
      std::size_t seen = 0, timeouts = 0;
      for (std::size_t t = 0; t < c.trials; ++t) {
        try {
          const auto o = run_reservation(
              params, trial_seed(c.master_seed, "optimal_gamma", n, g.num * 1000 + g.den, t), sweep_options(c));
          rounds.add(static_cast<double>(o.rounds_used));
          bits.add(static_cast<double>(o.total_bits_sent));
          seen = std::max(seen, o.rounds_used);
        } catch (const ReservationTimeout&) {
          ++timeouts;
        }
      }
      res.csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", g.str(), n, params.m(), c.trials,
                             num(rounds.mean()), num(rounds.sd()), num(rounds.mean() - rounds.ci95()),
                             num(rounds.mean() + rounds.ci95()), seen, timeouts, num(bits.mean()));
      res.summary += fmt::format("  gamma={:<4} n={:<3} mean rounds {:.3f} [{:.3f}, {:.3f}]{}\n", g.str(), n,
                                 rounds.mean(), rounds.mean() - rounds.ci95(), rounds.mean() + rounds.ci95(),
                                 timeouts ? fmt::format(" timeouts={}", timeouts) : "");
    }
  }
  return res;
}

inline CostScenario cost_scenario(const ExperimentConfig& c) {
  CostScenario s;
  s.gamma = c.gamma;
  s.r = c.r;
  s.l_srm = c.l_srm;
  s.l_msg = c.l_msg;
  s.lambda = c.lambda;
  s.beta = c.beta;
  return s;
}

inline ScenarioResult cost_compare(const ExperimentConfig& c) {
  ScenarioResult res;
  const auto s = cost_scenario(c);
  res.csv = csv_preamble(c);
  res.csv +=
      "n,apmt_single_bits,apmt_n_message_bits,qadr_bandwidth_bits,qadr_key_bits,qadr_shuffle_key_bits,"
      "apmt_latency_tau,qadr_latency_tau,qadr_shuffle_latency_tau\n";
  for (std::size_t n = c.range_min(); n <= c.range_max(); ++n) {
    const auto apmt = cost_report(CostVariant::apmt_serial_n_messages, n, s);
    const auto qadr = cost_report(CostVariant::qadr_default, n, s);
    const auto shuf = cost_report(CostVariant::qadr_shuffle, n, s);
    res.csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", n, apmt_cost(n, s.l_msg, s.beta), apmt.bandwidth_bits,
                           qadr.bandwidth_bits, qadr.key_bits, shuf.key_bits, num(apmt.latency_units),
                           num(qadr.latency_units), num(shuf.latency_units));
  }
  const auto cross = apmt_crossover(s, c.range_max());
  res.summary = fmt::format("cost comparison n={}..{}: serial APMT exceeds QADR bandwidth from n = {}\n",
                            c.range_min(), c.range_max(), cross ? std::to_string(*cross) : "never");
  return res;
}

inline ScenarioResult e2e_protocol(const ExperimentConfig& c) {
  ScenarioResult res;
  res.csv = csv_preamble(c);
  res.csv +=
      "trial,n,m,variant,rounds,accepted,bijection_ok,concat_ok,partition_ok,ghost_matches,reservation_bits,"
      "submission_bits,key_epochs,key_bits,round1_succ,round1_i_gain\n";
  std::size_t failures = 0, ghosts = 0;
  MeanStat rounds;
  const auto span_n = c.range_max() - c.range_min() + 1;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const auto seed = trial_seed(c.master_seed, "e2e_protocol", 0, 0, t);
    DeterministicStream rng(derive_key(seed, "e2e-trial", {}));
    const auto n = c.range_min() + static_cast<std::size_t>(rng.uniform(span_n));
    const auto params = c.params_for(n, c.gamma);
    std::vector<Bytes> messages;
    for (std::size_t i = 0; i < n; ++i) messages.push_back(rng.bytes(params.l_msg() / 8));

    const auto run = run_protocol(params, seed, messages, c.variant);
    const auto& res_out = run.reservation;

    auto sorted = res_out.final_positions;
    std::sort(sorted.begin(), sorted.end());
    bool bijection = sorted.size() == n;
    for (std::size_t i = 0; bijection && i < n; ++i) bijection = sorted[i] == i;

    bool concat = true;
    for (std::size_t i = 0; concat && i < n; ++i)
      concat = run.submission.concatenated.slot_equals(res_out.final_positions[i], messages[i]);

    const auto views = observe_partition(n, res_out.transcripts);
    const bool partition = partition_matches_ground_truth(views, res_out.ground_truth_structures);

    const std::size_t expected_epochs = c.variant == Variant::shuffle ? 2 : res_out.rounds_used + 2;
    const bool ok = bijection && concat && partition && run.accepted() && run.submission.accepted &&
                    run.keys.epochs() == expected_epochs;
    failures += !ok;
    ghosts += res_out.ghost_matches;
    rounds.add(static_cast<double>(res_out.rounds_used));

    res.csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", t, n, params.m(), to_string(c.variant),
                           res_out.rounds_used, int(run.accepted()), int(bijection), int(concat), int(partition),
                           res_out.ghost_matches, run.traffic.reservation_bits, run.traffic.submission_bits,
                           run.keys.epochs(), run.keys.total_key_bits(), views.front().succ_count,
                           num(partition_information_gain(n, views.front())));
  }
  res.ok = failures == 0 && ghosts == 0;
  res.summary = fmt::format("e2e protocol: {} trials, {} invariant failures, {} ghost matches, mean rounds {:.3f}\n",
                            c.trials, failures, ghosts, rounds.mean());
  return res;
}

inline ScenarioResult appendix_example(const ExperimentConfig& c) {
  ScenarioResult res;
  res.csv = csv_preamble(c);
  res.csv += "quantity,n,m,structure,exact,value,reference,matches_reference\n";
  const CollisionStructure first({3, 1, 0, 0, 0});
  const CollisionStructure second({2, 0});
  const RoundChain chain{{{5, 10, first}, {2, 6, second}}};

  struct Row {
    std::string quantity;
    std::size_t n, m;
    std::string structure;
    Rational exact;
    double reference;
  };
  const Row rows[] = {
      {"round1_structure", 5, 10, first.str(), structure_probability_exact(first, 10), 0.504},
      {"round2_conditional", 2, 6, second.str(), structure_probability_exact(second, 6), 5.0 / 6.0},
      {"two_round_joint", 5, 10, first.str() + "->" + second.str(), chain_probability_exact(chain), 0.42},
  };
  res.summary = "two-round worked example\n";
  for (const auto& r : rows) {
    const double v = to_double(r.exact);
    const bool match = std::abs(v - r.reference) < 1e-9;
    res.ok = res.ok && match;
    res.csv += fmt::format("{},{},{},\"{}\",{},{:.10f},{:.10f},{}\n", r.quantity, r.n, r.m, r.structure,
                           r.exact.str(), v, r.reference, int(match));
    res.summary += fmt::format("  {:<20} n={} m={:<3} {:<22} = {:<8} = {:.4f}\n", r.quantity, r.n, r.m, r.structure,
                               r.exact.str(), v);
  }
  return res;
}

inline ScenarioResult coalition_attack(const ExperimentConfig& c) {
  ScenarioResult res;
  const auto params = c.params();
  const auto k = c.honest_count == 0 ? params.n() - 1 : c.honest_count;
  const MirrorCollisionStrategy strategy(c.attack_rounds);
  std::vector<MeanStat> set_size(params.max_rounds());
  std::vector<std::size_t> isolated(params.max_rounds(), 0);
  std::size_t deepest = 0, unterminated = 0;
  bool monotone = true;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const auto traj = coalition_attack_sim(params, k, strategy,
                                           trial_seed(c.master_seed, "coalition_attack", params.n(), k, t),
                                           c.fast ? Masking::none : Masking::full);
    unterminated += !traj.terminated;
    const auto& h = traj.honest_anonymity_set;
    deepest = std::max(deepest, h.size());
    for (std::size_t r = 0; r < params.max_rounds(); ++r) {
      const auto v = r < h.size() ? h[r] : 0;
      set_size[r].add(static_cast<double>(v));
      isolated[r] += v == 1;
      if (r > 0 && r < h.size() && h[r] > h[r - 1]) monotone = false;
    }
  }
  res.csv = csv_preamble(c);
  res.csv += "round,honest,trials,mean_honest_anonymity_set,p_single_target_isolated\n";
  for (std::size_t r = 0; r < deepest; ++r)
    res.csv += fmt::format("{},{},{},{},{}\n", r + 1, k, c.trials, num(set_size[r].mean()),
                           num(static_cast<double>(isolated[r]) / static_cast<double>(c.trials)));
  res.ok = monotone;
  res.summary = fmt::format(
      "coalition attack n={} honest={} attack_rounds={}: mean honest colliders round1 {:.3f}, unterminated {}{}\n",
      params.n(), k, c.attack_rounds, set_size[0].mean(), unterminated, monotone ? "" : ", NON-MONOTONE");
  return res;
}

}  // namespace harness_detail

inline ScenarioResult run_scenario(const ExperimentConfig& config) {
  config.validate();
  switch (config.scenario) {
    case Scenario::collision_sweep: return harness_detail::collision_sweep(config);
    case Scenario::optimal_gamma: return harness_detail::optimal_gamma(config);
    case Scenario::cost_compare: return harness_detail::cost_compare(config);
    case Scenario::e2e_protocol: return harness_detail::e2e_protocol(config);
    case Scenario::appendix_example: return harness_detail::appendix_example(config);
    case Scenario::coalition_attack: return harness_detail::coalition_attack(config);
  }
  throw ParameterError("unknown scenario");
}

}  // namespace qadr
