#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "planloc/a_graph.hpp"
#include "planloc/errors.hpp"
#include "planloc/graph_io.hpp"
#include "planloc/matcher.hpp"
#include "planloc/plans.hpp"
#include "planloc/scenario.hpp"

namespace fs = std::filesystem;
using namespace planloc;

namespace {

int cmd_build_agraph(const fs::path& plan_path, const fs::path& out) {
  const FloorPlan plan = load_plan(plan_path);
  const AGraph a = build_a_graph(plan);
  save_graph(out, a.graph);
  std::cout << "agraph: " << a.walls.size() << " walls, " << a.rooms.size() << " rooms, "
            << a.doorways.size() << " doorways, " << a.graph.num_factors() << " factors -> "
            << out.string() << '\n';
  return 0;
}

ScenarioConfig load_with_seed(const fs::path& path, std::optional<std::uint64_t> seed) {
  ScenarioConfig config = load_scenario(path);
  if (seed) config.sim.seed = *seed;
  return config;
}

int cmd_run(const fs::path& scenario, const fs::path& out, std::optional<std::uint64_t> seed,
            bool localize) {
  const ScenarioResult r = run_scenario(load_with_seed(scenario, seed), localize);
  write_scenario_outputs(r, out);
  std::cout << scenario_report(r).dump(2) << '\n';
  if (!localize) return 0;
  if (r.match.status == MatchStatus::Ambiguous) {
    std::cerr << "ambiguous: " << r.match.cluster.size()
              << " candidates remain in the winning cluster; no merge performed\n";
  }
  return exit_code(r.match.status);
}

int cmd_match(const fs::path& agraph, const fs::path& sgraph, const std::optional<fs::path>& out) {
  const FactorGraph a = load_graph(agraph);
  const FactorGraph s = load_graph(sgraph);
  const MatchResult m = match(a, s);
  const auto doc = match_result_to_json(m);
  if (out) write_json_file(*out, doc);
  std::cout << doc.dump(2) << '\n';
  return exit_code(m.status);
}

int cmd_gen_plan(int rooms, std::uint64_t seed, bool equal_dims, const std::string& fixture,
                 const fs::path& out) {
  FloorPlan plan;
  if (!fixture.empty()) {
    plan = fixture_plan(fixture);
  } else {
    GeneratorOptions options;
    options.distinct_dimensions = !equal_dims;
    plan = generate_random_plan(rooms, seed, options);
  }
  save_plan(out, plan);
  std::cout << plan.rooms.size() << " rooms, " << plan.doorways.size() << " doorways -> "
            << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global localization of a simulated robot against a floor plan"};
  app.require_subcommand(1);

  fs::path plan_path, out_path, scenario_path, agraph_path, sgraph_path, dir;
  std::string match_out;
  std::optional<std::uint64_t> seed;
  std::uint64_t seed_value = 0;

  auto* build = app.add_subcommand("build-agraph", "Build the architectural graph of a plan");
  build->add_option("plan", plan_path, "Plan JSON")->required()->check(CLI::ExistingFile);
  build->add_option("-o,--output", out_path, "Output graph JSON")->required();

  auto* simulate = app.add_subcommand("simulate", "Simulate a scenario and estimate its S-graph");
  simulate->add_option("scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--output", dir, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Simulate, match, merge and evaluate a scenario");
  run->add_option("scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", dir, "Output directory")->required();

  for (auto* sub : {simulate, run}) {
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { seed = v; },
                                            "Override the scenario seed");
  }

  auto* match_cmd = app.add_subcommand("match", "Match an S-graph against an A-graph");
  match_cmd->add_option("agraph", agraph_path, "A-graph JSON")->required()->check(CLI::ExistingFile);
  match_cmd->add_option("sgraph", sgraph_path, "S-graph JSON")->required()->check(CLI::ExistingFile);
  match_cmd->add_option("-o,--output", match_out, "Also write the result here");

  auto* eval = app.add_subcommand("eval", "Recompute metrics of a run directory");
  eval->add_option("dir", dir, "Directory written by run")->required()->check(CLI::ExistingDirectory);

  int rooms = 5;
  bool equal_dims = false;
  std::string fixture;
  auto* gen = app.add_subcommand("gen-plan", "Generate a random plan or export a bundled one");
  gen->add_option("-n,--rooms", rooms, "Number of rooms")->check(CLI::Range(2, 20));
  gen->add_option("--seed", seed_value, "Generator seed");
  gen->add_flag("--allow-equal-dims", equal_dims, "Do not force distinct room dimensions");
  gen->add_option("--fixture", fixture, "Export a bundled plan instead")
      ->check(CLI::IsMember(fixture_names()));
  gen->add_option("-o,--output", out_path, "Output plan JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return cmd_build_agraph(plan_path, out_path);
    if (*simulate) return cmd_run(scenario_path, dir, seed, false);
    if (*run) return cmd_run(scenario_path, dir, seed, true);
    if (*match_cmd) {
      return cmd_match(agraph_path, sgraph_path,
                       match_out.empty() ? std::nullopt : std::optional<fs::path>(match_out));
    }
    if (*eval) {
      std::cout << evaluate_directory(dir).dump(2) << '\n';
      return 0;
    }
    if (*gen) return cmd_gen_plan(rooms, seed_value, equal_dims, fixture, out_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
