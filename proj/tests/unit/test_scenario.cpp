#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "planloc/errors.hpp"
#include "planloc/graph_io.hpp"
#include "planloc/scenario.hpp"
#include "test_support.hpp"

using namespace planloc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

ScenarioConfig bundled(const std::string& name) {
  return load_scenario(test::data_path("scenarios/" + name + ".json"));
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("planloc_scenario_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json minimal_doc() {
  return json::parse(R"({"plan": "../plans/two_room.json", "tour": {"start_room": "A"}})");
}

}  // namespace

TEST(LoadScenario, BundledFilesLoad) {
  for (const auto& entry : fs::directory_iterator(test::data_path("scenarios"))) {
    const ScenarioConfig c = load_scenario(entry.path());
    EXPECT_EQ(c.name, entry.path().stem().string());
    EXPECT_EQ(c.sim.seed, 1u);
    EXPECT_GE(c.sim.waypoints.size(), 2u);
    EXPECT_NEAR(c.sim.sigma_theta, 0.2 * kDeg, 1e-15);
    EXPECT_NEAR(c.sim.sigma_phi, 0.3 * kDeg, 1e-15);
    EXPECT_FALSE(c.plan.rooms.empty());
  }
}

TEST(LoadScenario, OptionalFieldsAndOffset) {
  json doc = minimal_doc();
  ScenarioConfig c = scenario_from_json(doc, test::data_path("scenarios"));
  EXPECT_FALSE(c.sim.map_offset.has_value());
  doc["map_offset"] = {{"x", 2.0}, {"y", 1.0}, {"theta_deg", 30.0}};
  doc["seed"] = 7;
  c = scenario_from_json(doc, test::data_path("scenarios"));
  ASSERT_TRUE(c.sim.map_offset.has_value());
  EXPECT_NEAR(c.sim.map_offset->theta, 30 * kDeg, 1e-15);
  EXPECT_EQ(c.sim.seed, 7u);
}

TEST(LoadScenario, ErrorsNameTheField) {
  const fs::path base = test::data_path("scenarios");
  auto message = [&](const json& doc) -> std::string {
    try {
      scenario_from_json(doc, base);
    } catch (const Error& e) {
      return e.what();
    }
    return "";
  };
  json doc = minimal_doc();
  doc.erase("plan");
  EXPECT_NE(message(doc).find("$.plan"), std::string::npos);

  doc = minimal_doc();
  doc.erase("tour");
  EXPECT_NE(message(doc).find("waypoints"), std::string::npos);

  doc = minimal_doc();
  doc["seed"] = "one";
  EXPECT_NE(message(doc).find("$.seed"), std::string::npos);

  doc = minimal_doc();
  doc["tour"]["start_room"] = "Z";
  EXPECT_THROW(scenario_from_json(doc, base), ValidationError);

  // Straight through the shared wall, away from the doorway.
  doc = minimal_doc();
  doc.erase("tour");
  doc["waypoints"] = {{2.0, 1.5}, {9.0, 1.5}};
  EXPECT_THROW(scenario_from_json(doc, base), ValidationError);

  EXPECT_THROW(load_scenario(base / "missing.json"), Error);
}

TEST(NoiseInformation, InverseVariancesWithFloors) {
  SimConfig sim;
  sim.sigma_xy = 0.01;
  sim.sigma_theta = 0.002;
  sim.sigma_phi = 0.005;
  sim.sigma_d = 0.02;
  const InformationDefaults base;
  const InformationDefaults info = noise_information(sim, base);
  EXPECT_NEAR(info.odometry[0], 1e4, 1e-6);
  EXPECT_NEAR(info.odometry[2], 1.0 / 4e-6, 1e-3);
  EXPECT_NEAR(info.pose_plane[0], 1.0 / 25e-6, 1e-3);
  EXPECT_NEAR(info.pose_plane[1], 2500.0, 1e-6);
  EXPECT_EQ(info.structure, base.structure);
  EXPECT_EQ(info.merge, base.merge);

  sim.sigma_xy = sim.sigma_theta = sim.sigma_phi = sim.sigma_d = 0.0;
  const InformationDefaults floored = noise_information(sim);
  EXPECT_NEAR(floored.odometry[0], 1e6, 1e-3);
  EXPECT_TRUE(std::isfinite(floored.pose_plane[0]));
}

TEST(RunScenario, BundledOutcomes) {
  const std::vector<std::pair<std::string, MatchStatus>> expected = {
      {"asym5", MatchStatus::Matched},        {"two_room", MatchStatus::Matched},
      {"corridor", MatchStatus::Matched},     {"sym2x2", MatchStatus::Ambiguous},
      {"sym2x2_annex", MatchStatus::Matched}, {"single_room", MatchStatus::NoMatch}};
  for (const auto& [name, status] : expected) {
    const ScenarioResult r = run_scenario(bundled(name));
    EXPECT_EQ(r.match.status, status) << name << ": " << r.match.reason;
    EXPECT_EQ(r.ground_truth.size(), r.sgraph.keyframes().size());
    EXPECT_EQ(r.map_trajectory.size(), r.ground_truth.size());
    if (status == MatchStatus::Matched) {
      ASSERT_TRUE(r.merged.has_value()) << name;
      EXPECT_GE(r.match_keyframe, 0);
      EXPECT_EQ(r.localized.size(), r.ground_truth.size());
      EXPECT_EQ(r.ape.alignment, Alignment::None);
      EXPECT_LE(r.ape.rmse, 0.1) << name;
      ASSERT_TRUE(r.map_rmse.has_value());
      EXPECT_LE(r.map_rmse->rmse, 0.05) << name;
      const Pose2 t = r.merged->map_to_plan().pose;
      EXPECT_LT((t.translation() - r.true_map_offset.translation()).norm(), 0.1) << name;
    } else {
      EXPECT_FALSE(r.merged.has_value());
      EXPECT_TRUE(r.localized.empty());
      EXPECT_EQ(r.ape.alignment, Alignment::SE2Umeyama);
      EXPECT_FALSE(r.match.reason.empty());
    }
  }
}

TEST(RunScenario, ExitCodes) {
  EXPECT_EQ(exit_code(MatchStatus::Matched), 0);
  EXPECT_EQ(exit_code(MatchStatus::Ambiguous), 2);
  EXPECT_EQ(exit_code(MatchStatus::NoMatch), 3);
}

TEST(RunScenario, WithoutLocalization) {
  const ScenarioResult r = run_scenario(bundled("asym5"), false);
  EXPECT_EQ(r.match.status, MatchStatus::NoMatch);
  EXPECT_EQ(r.match.reason, "matching disabled");
  EXPECT_FALSE(r.merged.has_value());
  EXPECT_EQ(r.ape.alignment, Alignment::SE2Umeyama);
  EXPECT_EQ(r.sgraph.room_planes().size(), 5u);
}

TEST(ScenarioOutputs, FilesAndReEvaluation) {
  const ScenarioResult r = run_scenario(bundled("two_room"));
  const fs::path dir = fresh_dir("two_room");
  write_scenario_outputs(r, dir);
  for (const char* f : {"plan.json", "agraph.json", "sgraph.json", "isgraph.json", "match.json",
                        "trajectory.csv", "map_planes.json", "ape.json", "map_rmse.json",
                        "report.json", "timing.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const json report = read_json_file(dir / "report.json");
  EXPECT_EQ(report.at("name"), "two_room");
  EXPECT_EQ(match_status_from_string(report.at("status").get<std::string>()), MatchStatus::Matched);

  const json again = evaluate_directory(dir);
  EXPECT_NEAR(again.at("ape").at("rmse").get<double>(), r.ape.rmse, 1e-6);
  EXPECT_NEAR(again.at("map_rmse").at("rmse").get<double>(), r.map_rmse->rmse, 1e-6);

  // Saved graphs reload to the same content.
  EXPECT_EQ(graph_to_json(load_graph(dir / "sgraph.json")).dump(), graph_to_json(r.sgraph.graph()).dump());
  EXPECT_EQ(graph_to_json(load_graph(dir / "isgraph.json")).dump(), graph_to_json(r.merged->graph).dump());
  fs::remove_all(dir);
}

TEST(ScenarioOutputs, UnmatchedRunHasNoInformedGraph) {
  const ScenarioResult r = run_scenario(bundled("single_room"));
  const fs::path dir = fresh_dir("single_room");
  write_scenario_outputs(r, dir);
  EXPECT_FALSE(fs::exists(dir / "isgraph.json"));
  const json again = evaluate_directory(dir);
  EXPECT_EQ(again.at("ape").at("alignment"), std::string(to_string(Alignment::SE2Umeyama)));
  EXPECT_NEAR(again.at("ape").at("rmse").get<double>(), r.ape.rmse, 1e-6);
  fs::remove_all(dir);
}

TEST(ScenarioOutputs, MalformedTrajectoryNamesTheLine) {
  const ScenarioResult r = run_scenario(bundled("two_room"));
  const fs::path dir = fresh_dir("broken");
  write_scenario_outputs(r, dir);
  {
    std::ofstream out(dir / "trajectory.csv", std::ios::app);
    out << "99,abc,0,0,0,0,0,,,\n";
  }
  try {
    evaluate_directory(dir);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":" + std::to_string(r.ground_truth.size() + 2)), std::string::npos)
        << e.what();
  }
  fs::remove(dir / "trajectory.csv");
  EXPECT_THROW(evaluate_directory(dir), InvalidInput);
  fs::remove_all(dir);
}

TEST(ScenarioOutputs, DeterministicApartFromTiming) {
  const ScenarioConfig c = bundled("asym5");
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  write_scenario_outputs(run_scenario(c), a);
  write_scenario_outputs(run_scenario(c), b);
  for (const auto& entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    if (name == "timing.json") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(ScenarioOutputs, SeedChangesTheRun) {
  ScenarioConfig c = bundled("asym5");
  const ScenarioResult first = run_scenario(c, false);
  c.sim.seed = 2;
  const ScenarioResult second = run_scenario(c, false);
  EXPECT_NE(graph_to_json(first.sgraph.graph()).dump(), graph_to_json(second.sgraph.graph()).dump());
}
