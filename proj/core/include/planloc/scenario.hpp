#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "planloc/a_graph.hpp"
#include "planloc/eval.hpp"
#include "planloc/matcher.hpp"
#include "planloc/merger.hpp"
#include "planloc/s_graph.hpp"
#include "planloc/simulator.hpp"

namespace planloc {

struct TourSpec {
  std::string start_room;
  int max_rooms = 0;
};

/// Scenario file:
///   {"name", "plan": path relative to the file, "seed",
///    "waypoints": [[x, y], ...] | "tour": {"start_room", "max_rooms"},
///    "keyframe_spacing", "sensor_range", "max_steps",
///    "noise": {"sigma_xy", "sigma_theta_deg", "sigma_phi_deg", "sigma_d"},
///    "map_offset": {"x", "y", "theta_deg"}}
/// Everything but "plan" and one of waypoints/tour is optional.
struct ScenarioConfig {
  std::string name;
  std::filesystem::path plan_path;
  FloorPlan plan;
  std::optional<TourSpec> tour;
  SimConfig sim;
  SGraphConfig sgraph;
  MatcherConfig matcher;
  MergeConfig merge;
  /// Replace the S-graph's odometry and pose-plane information by noise_information(sim).
  bool information_from_noise = true;
};

/// Inverse variances of the simulator noise (sigmas floored at 1 mm / 0.01 deg so a
/// noise-free run still has finite weights); other entries keep their defaults.
InformationDefaults noise_information(const SimConfig& sim, InformationDefaults base = {});

/// Throws ParseError for malformed files, ValidationError for bad plans or paths that
/// leave free space.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
/// Builds a scenario directly from a plan; waypoints come from `tour` when given.
ScenarioConfig make_scenario(std::string name, FloorPlan plan, SimConfig sim,
                             std::optional<TourSpec> tour = std::nullopt);

struct ScenarioResult {
  std::string name;
  std::uint64_t seed = 0;
  FloorPlan plan;
  AGraph agraph;
  SGraph sgraph;
  MatchResult match;
  /// Keyframe after which the match first came back Matched (-1 when it never did).
  int match_keyframe = -1;
  std::optional<MergedState> merged;
  Pose2 true_map_offset;
  std::vector<Pose2> ground_truth;    // frame B, one per keyframe
  std::vector<Pose2> map_trajectory;  // frame M, S-graph estimate
  std::vector<Pose2> localized;       // frame B, empty without a merge
  ApeReport ape;
  std::vector<EstimatedPlane> map_planes;
  std::optional<MapRmseReport> map_rmse;
  double seconds = 0.0;
};

/// simulate -> S-graph update -> match after every update until Matched -> continue to
/// the end of the path -> extend the match -> merge -> evaluate. With `localize` false only
/// the S-graph is built; the match is then NoMatch and APE is aligned.
ScenarioResult run_scenario(const ScenarioConfig& config, bool localize = true);

/// Writes plan.json, agraph.json, sgraph.json, isgraph.json (after a merge), match.json,
/// trajectory.csv, map_planes.json, ape.json, map_rmse.json, report.json and timing.json.
void write_scenario_outputs(const ScenarioResult& result, const std::filesystem::path& dir);

nlohmann::json scenario_report(const ScenarioResult& result);

/// Recomputes APE and map RMSE from a directory written by write_scenario_outputs.
nlohmann::json evaluate_directory(const std::filesystem::path& dir);

/// Process exit status for a match outcome: 0 Matched, 2 Ambiguous, 3 NoMatch.
int exit_code(MatchStatus status);

}  // namespace planloc
