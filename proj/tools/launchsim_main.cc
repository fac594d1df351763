// Copyright 2026 The launchsim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// launchsim: run scenarios, compare policies, plan preloads, generate
// profiles.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "launchsim/engine.h"
#include "launchsim/error.h"
#include "launchsim/metrics.h"
#include "launchsim/preloader.h"
#include "launchsim/workload.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;

using launchsim::PolicyKind;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PolicyKind PolicyOrThrow(const std::string& name) {
  const auto kind = launchsim::ParsePolicy(name);
  if (!kind) {
    throw UsageError("unknown policy '" + name +
                     "' (baseline, preload-only, reclaim-only, "
                     "naive-combined, appflow)");
  }
  return *kind;
}

std::vector<PolicyKind> PolicyList(const std::string& csv) {
  std::vector<PolicyKind> out;
  std::string item;
  for (std::size_t i = 0; i <= csv.size(); ++i) {
    if (i == csv.size() || csv[i] == ',') {
      if (!item.empty()) out.push_back(PolicyOrThrow(item));
      item.clear();
    } else {
      item.push_back(csv[i]);
    }
  }
  if (out.empty()) throw UsageError("--policies needs at least one policy");
  return out;
}

launchsim::ScenarioOptions Options(std::optional<std::uint64_t> seed) {
  launchsim::ScenarioOptions o;
  o.seed = seed;
  o.config_dir = launchsim::ConfigDirFromEnv();
  return o;
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

int Simulate(const std::string& scenario_path, const std::string& policy,
             std::optional<std::uint64_t> seed, const std::string& out_path,
             const std::string& events_path) {
  const PolicyKind kind = PolicyOrThrow(policy);
  const launchsim::Scenario scenario =
      launchsim::ParseScenario(scenario_path, Options(seed));
  launchsim::SimulationOptions options;
  std::ofstream events;
  if (!events_path.empty()) {
    events.open(events_path, std::ios::binary);
    if (!events) throw UsageError("cannot write " + events_path);
    options.event_log = &events;
  }
  const launchsim::MetricsReport report =
      launchsim::Simulate(scenario, kind, options);
  const std::string text = launchsim::ReportToString(report) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    WriteFile(out_path, text);
  }
  return kExitOk;
}

int Compare(const std::string& scenario_path, const std::string& policies,
            const std::string& format, std::optional<std::uint64_t> seed,
            const std::string& out_path) {
  const std::vector<PolicyKind> kinds = PolicyList(policies);
  const launchsim::Scenario scenario =
      launchsim::ParseScenario(scenario_path, Options(seed));
  std::vector<launchsim::MetricsReport> reports;
  for (PolicyKind k : kinds) reports.push_back(launchsim::Simulate(scenario, k));
  const launchsim::Comparison c = launchsim::Compare(reports);
  std::string text;
  if (format == "csv") {
    text = launchsim::ComparisonToCsv(c);
  } else if (format == "json") {
    text = launchsim::ComparisonToJson(c).dump(2) + "\n";
  } else {
    text = launchsim::ComparisonToText(c);
  }
  if (out_path.empty()) {
    std::cout << text;
  } else {
    WriteFile(out_path, text);
  }
  return kExitOk;
}

int Plan(const std::string& profiles_path, double budget_mb,
         std::uint64_t seed) {
  if (budget_mb < 0) throw UsageError("--budget-mb must not be negative");
  const auto profiles = launchsim::ParseProfiles(profiles_path, seed);
  const launchsim::DeviceConfig device = launchsim::DeviceConfig::Default();
  const launchsim::IoModel io(device);
  const auto budget =
      static_cast<launchsim::Bytes>(budget_mb * static_cast<double>(launchsim::kMiB));
  const launchsim::CutoffPlan plan = launchsim::PlanCutoffs(
      profiles, budget, io.BlockSizes(), io, device.tuning.plan_quantum);
  nlohmann::json apps = nlohmann::json::array();
  for (const auto& a : plan.apps) {
    apps.push_back({{"app", a.app_id},
                    {"cutoff", a.chosen.cutoff},
                    {"preload_bytes", a.chosen.preload_size},
                    {"predicted_io_ms", launchsim::RoundMillis(a.chosen.predicted_io_ms)}});
  }
  const nlohmann::json j = {{"budget", budget},
                            {"total_preload", plan.total_preload},
                            {"objective_ms", launchsim::RoundMillis(plan.objective)},
                            {"budget_exceeded", plan.budget_exceeded},
                            {"apps", apps}};
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int Gen(const std::string& app_class, std::uint64_t seed) {
  const launchsim::LaunchProfile p =
      launchsim::GenerateProfile(seed, launchsim::ParseAppClass(app_class));
  nlohmann::json j = launchsim::ProfileToJson(p);
  std::cout << j.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mobile memory scheduling simulator for app launches"};
  app.require_subcommand(1);

  std::string scenario;
  std::string policy;
  std::string policies = "baseline,appflow";
  std::string format = "text";
  std::string out_path;
  std::string events_path;
  std::string profiles;
  std::string app_class;
  std::uint64_t seed = 0;
  double budget_mb = 100.0;

  auto* sim = app.add_subcommand("simulate", "Run one scenario under one policy");
  sim->add_option("--scenario", scenario, "Scenario JSON lines")->required();
  sim->add_option("--policy", policy, "Policy name")->required();
  auto* sim_seed = sim->add_option("--seed", seed, "Seed for generated apps");
  sim->add_option("--out", out_path, "Write the report here");
  sim->add_option("--events", events_path, "Write the event log here");

  auto* cmp = app.add_subcommand("compare", "Run several policies on one scenario");
  cmp->add_option("--scenario", scenario, "Scenario JSON lines")->required();
  cmp->add_option("--policies", policies, "Comma separated policy names");
  cmp->add_option("--format", format, "text, csv or json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  auto* cmp_seed = cmp->add_option("--seed", seed, "Seed for generated apps");
  cmp->add_option("--out", out_path, "Write the table here");

  auto* plan = app.add_subcommand("plan", "Choose preload cutoffs for profiles");
  plan->add_option("--profiles", profiles, "Profile JSON lines")->required();
  plan->add_option("--budget-mb", budget_mb, "Preload budget in MiB");
  plan->add_option("--seed", seed, "Seed for generated apps");

  auto* gen = app.add_subcommand("gen", "Print a synthetic launch profile");
  gen->add_option("--class", app_class, "gb or low")
      ->required()
      ->check(CLI::IsMember({"gb", "low"}));
  gen->add_option("--seed", seed, "Generator seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const auto opt_seed = [&](CLI::Option* o) {
      return o->count() > 0 ? std::optional<std::uint64_t>(seed) : std::nullopt;
    };
    if (*sim) return Simulate(scenario, policy, opt_seed(sim_seed), out_path, events_path);
    if (*cmp) return Compare(scenario, policies, format, opt_seed(cmp_seed), out_path);
    if (*plan) return Plan(profiles, budget_mb, seed);
    if (*gen) return Gen(app_class, seed);
  } catch (const launchsim::InvariantViolation& e) {
    std::cerr << "invariant breach: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const launchsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
