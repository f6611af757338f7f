#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "planloc/floor_plan.hpp"
#include "planloc/simulator.hpp"

namespace planloc {

enum class Alignment { None, SE2Umeyama };

std::string_view to_string(Alignment alignment);

struct ApeReport {
  double rmse = 0.0;
  double mean = 0.0;
  double max = 0.0;
  std::vector<double> per_pose;
  Alignment alignment = Alignment::None;
};

/// Translational error per pose, optionally after the rigid alignment that best maps the
/// estimate onto the ground truth. Throws InvalidInput on empty or unequal inputs.
ApeReport compute_ape(std::span<const Pose2> estimated, std::span<const Pose2> ground_truth,
                      Alignment alignment = Alignment::None);

/// A plane estimate in frame B with the stretches it was observed over.
struct EstimatedPlane {
  Plane plane;
  std::vector<Segment> extent;  // frame B
  /// Plan surface (wall id, face) when known from the match.
  std::optional<std::pair<std::string, int>> surface;
};

struct MapRmseReport {
  double rmse = 0.0;
  std::size_t n_points = 0;
};

/// Samples every plane every 0.1 m over its extent and measures the distance of each sample
/// to its plan surface. Planes without a known surface use the nearest same-axis surface
/// within 0.5 m; planes with neither are skipped. Throws InvalidInput when nothing is left.
MapRmseReport compute_map_rmse(std::span<const EstimatedPlane> planes, const FloorPlan& plan);

nlohmann::json ape_to_json(const ApeReport& report);
nlohmann::json map_rmse_to_json(const MapRmseReport& report);

}  // namespace planloc
