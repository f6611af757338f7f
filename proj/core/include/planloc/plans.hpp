#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "planloc/floor_plan.hpp"

namespace planloc {

/// Room given by its wall centerlines: [x0, x1] x [y0, y1].
struct RectRoom {
  std::string id;
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
};

struct RectDoor {
  std::string id;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  std::string room_a;
  std::string room_b;
  double width = 0.9;
};

/// Builds walls as maximal contiguous runs of collinear room edges, so rooms that share
/// an edge share one wall. Wall ids are W1, W2, ... (vertical lines first, by coordinate).
FloorPlan build_rect_plan(const std::vector<RectRoom>& rooms, const std::vector<RectDoor>& doors,
                          double thickness = 0.2);

/// Names of the bundled plans: single_room, two_room, asym5, sym2x2, sym2x2_annex, corridor.
const std::vector<std::string>& fixture_names();
/// Plan behind data/plans/<name>.json. Throws InvalidInput for an unknown name.
FloorPlan fixture_plan(const std::string& name);

struct GeneratorOptions {
  /// Column widths and row heights drawn as pairwise distinct decimeter values at least
  /// `min_separation` apart, so no two rooms share dimensions.
  bool distinct_dimensions = true;
  double min_separation = 0.4;
  double min_size = 2.0;
  double max_size = 8.0;
  double thickness = 0.2;
  int max_retries = 200;
};

/// Grid-packed rectangular rooms grown from one cell; every attachment adds a doorway, so
/// the doorways form a spanning tree. Deterministic per (n_rooms, seed, options).
/// Throws InvalidInput for n_rooms outside [2, 20], GenerationError when packing fails.
FloorPlan generate_random_plan(int n_rooms, std::uint64_t seed, const GeneratorOptions& options = {});

/// Depth-first tour through the doorway graph from `start_room`, visiting at most
/// `max_rooms` rooms (0 = all). Goes through room centers and approach points 0.6 m
/// either side of each doorway; the final walk back is dropped.
std::vector<Eigen::Vector2d> tour_waypoints(const FloorPlan& plan, const std::string& start_room,
                                            int max_rooms = 0);

/// Order in which tour_waypoints enters rooms.
std::vector<std::string> tour_rooms(const FloorPlan& plan, const std::string& start_room,
                                    int max_rooms = 0);

}  // namespace planloc
