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

// Command-line front end for the experiment harness. Needs CLI11.hpp on the
// include path; the rest of the library does not.

#pragma once

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qadr/harness.hpp"

namespace qadr {

// Raw option values; converted into an ExperimentConfig after parsing.
struct CliOptions {
  ExperimentConfig config;
  std::string gamma = "3";
  std::vector<std::string> gamma_list{"2", "3", "4", "5"};
  std::optional<std::size_t> m, n_min, n_max;
  std::string variant = "default";
  std::string output;
  std::vector<CLI::App*> scenario_commands;
};

// Options live on the top-level app; subcommands fall through to them, so
// "qadr_cli optimal_gamma --trials 50" and "qadr_cli --trials 50
// optimal_gamma" are equivalent. A --config file supplies the same keys as
// "key = value" lines; explicit flags win over file values.
inline void configure_app(CLI::App& app, CliOptions& o) {
  auto& c = o.config;
  app.set_config("--config", "", "key = value file with option defaults");
  app.require_subcommand(1);

  app.add_option("--n", c.n, "participants")->capture_default_str();
  app.add_option("--m", o.m, "slots (overrides --gamma)");
  app.add_option("--gamma", o.gamma, "slot ratio m/n, integer or p/q")->capture_default_str();
  app.add_option("--n-list", c.n_list, "participant counts for sweeps")->delimiter(',')->capture_default_str();
  app.add_option("--gamma-list", o.gamma_list, "slot ratios for sweeps")->delimiter(',')->capture_default_str();
  app.add_option("--n-min", o.n_min, "smallest n (cost_compare, e2e_protocol)");
  app.add_option("--n-max", o.n_max, "largest n (cost_compare, e2e_protocol)");
  app.add_option("--l-srm", c.l_srm, "SRM bits")->capture_default_str();
  app.add_option("--l-msg", c.l_msg, "message bits")->capture_default_str();
  app.add_option("--lambda", c.lambda, "pseudonym and key bits")->capture_default_str();
  app.add_option("--beta", c.beta, "APMT security parameter")->capture_default_str();
  app.add_option("--max-rounds", c.max_rounds, "reservation round limit")->capture_default_str();
  app.add_option("--r", c.r, "reservation rounds assumed by cost formulas")->capture_default_str();
  app.add_option("--trials", c.trials, "trials per grid point")->capture_default_str();
  app.add_option("--seed", c.master_seed, "master seed")->capture_default_str();
  app.add_option("--variant", o.variant, "default, shuffle or otp_mode")
      ->check(CLI::IsMember({"default", "shuffle", "otp_mode"}))
      ->capture_default_str();
  app.add_option("-o,--output", o.output, "CSV path ('-' for stdout; default <scenario>.csv)");
  app.add_option("--honest", c.honest_count, "honest participants in coalition_attack (0: n-1)")
      ->capture_default_str();
  app.add_option("--attack-rounds", c.attack_rounds, "rounds the coalition attacks")->capture_default_str();
  app.add_flag("--fast", c.fast, "skip pad expansion in sweeps");

  const char* help[] = {"collisions per round, simulated and analytical", "mean resolution rounds per gamma",
                        "APMT versus QADR cost scaling", "full protocol runs with invariant checks",
                        "two-round worked example, exact", "colluding participants forcing collisions"};
  std::size_t i = 0;
  for (auto s : kAllScenarios) {
    auto* sub = app.add_subcommand(std::string(to_string(s)), help[i++]);
    sub->fallthrough();
    o.scenario_commands.push_back(sub);
  }
}

// Call after a successful parse.
inline ExperimentConfig finish_config(const CliOptions& o) {
  ExperimentConfig c = o.config;
  for (std::size_t i = 0; i < o.scenario_commands.size(); ++i)
    if (o.scenario_commands[i]->parsed()) c.scenario = kAllScenarios[i];
  c.m = o.m;
  c.n_min = o.n_min;
  c.n_max = o.n_max;
  c.gamma = parse_ratio(o.gamma);
  c.gamma_list.clear();
  for (const auto& g : o.gamma_list) c.gamma_list.push_back(parse_ratio(g));
  c.variant = parse_variant(o.variant);
  c.output_path = o.output.empty() ? std::string(to_string(c.scenario)) + ".csv" : o.output;
  return c;
}

// Exit codes: 0 success, 1 invariant failure, 2 invalid configuration,
// 3 output not writable.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"QADR protocol simulator"};
  CliOptions opts;
  configure_app(app, opts);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    const auto config = finish_config(opts);
    const auto result = run_scenario(config);
    if (config.output_path == "-") {
      out << result.csv;
    } else {
      std::ofstream f(config.output_path, std::ios::binary);
      if (!(f << result.csv)) {
        err << "error: cannot write " << config.output_path << "\n";
        return 3;
      }
      out << "wrote " << config.output_path << "\n";
    }
    out << result.summary;
    if (!result.ok) {
      err << "error: invariant check failed in " << to_string(config.scenario) << "\n";
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace qadr
