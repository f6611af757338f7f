#include "planloc/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "planloc/errors.hpp"
#include "planloc/graph_io.hpp"
#include "planloc/plans.hpp"

namespace planloc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

double number(const json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_number()) throw ParseError(std::string("$.") + key + ": expected a number");
  return doc.at(key).get<double>();
}

json pose_json(const Pose2& p) { return {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

std::vector<EstimatedPlane> planes_in_plan(const ScenarioResult& r) {
  std::vector<EstimatedPlane> out;
  if (!r.merged) return out;
  const MergedState& m = *r.merged;
  const FrameTransform t = m.map_to_plan();

  // Extents follow the merged keyframe estimates.
  SGraph view = r.sgraph;
  for (const auto& [sid, mid] : m.s_ids) view.graph().set_value(sid, m.graph.value(mid));

  std::map<VariableId, VariableId> s_to_a;
  for (const auto& p : m.match.plane_pairs()) s_to_a[p.s_node] = p.a_node;

  for (const auto& [id, record] : view.planes()) {
    EstimatedPlane est;
    est.plane = transform_plane(t, view.plane(id));
    for (const auto& seg : view.extent_segments(id)) est.extent.push_back({t.apply(seg.a), t.apply(seg.b)});
    if (auto it = s_to_a.find(id); it != s_to_a.end()) {
      if (auto src = r.agraph.plane_sources.find(it->second); src != r.agraph.plane_sources.end()) {
        est.surface = src->second;
      }
    }
    out.push_back(std::move(est));
  }
  return out;
}

json planes_to_json(const std::vector<EstimatedPlane>& planes) {
  json out = json::array();
  for (const auto& p : planes) {
    json extent = json::array();
    for (const auto& s : p.extent) extent.push_back({{s.a.x(), s.a.y()}, {s.b.x(), s.b.y()}});
    json surface = p.surface ? json{{"wall", p.surface->first}, {"face", p.surface->second}}
                             : json(nullptr);
    out.push_back({{"normal", {p.plane.normal.x(), p.plane.normal.y()}},
                   {"dist", p.plane.dist},
                   {"extent", std::move(extent)},
                   {"surface", std::move(surface)}});
  }
  return out;
}

std::vector<EstimatedPlane> planes_from_json(const json& doc) {
  std::vector<EstimatedPlane> out;
  try {
    for (const auto& p : doc) {
      EstimatedPlane est;
      est.plane.normal = {p.at("normal").at(0).get<double>(), p.at("normal").at(1).get<double>()};
      est.plane.dist = p.at("dist").get<double>();
      for (const auto& s : p.at("extent")) {
        est.extent.push_back({{s.at(0).at(0).get<double>(), s.at(0).at(1).get<double>()},
                              {s.at(1).at(0).get<double>(), s.at(1).at(1).get<double>()}});
      }
      if (!p.at("surface").is_null()) {
        est.surface = {p.at("surface").at("wall").get<std::string>(),
                       p.at("surface").at("face").get<int>()};
      }
      out.push_back(std::move(est));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("map_planes.json: ") + e.what());
  }
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(9) << v;
  return os.str();
}

}  // namespace

ScenarioConfig scenario_from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ParseError("$: expected an object");
  ScenarioConfig c;
  c.name = doc.value("name", "scenario");
  if (!doc.contains("plan") || !doc.at("plan").is_string()) {
    throw ParseError("$.plan: expected a path string");
  }
  c.plan_path = base_dir / doc.at("plan").get<std::string>();
  c.plan = load_plan(c.plan_path);

  c.sim.seed = static_cast<std::uint64_t>(number(doc, "seed", 0.0));
  c.sim.keyframe_spacing = number(doc, "keyframe_spacing", c.sim.keyframe_spacing);
  c.sim.sensor_range = number(doc, "sensor_range", c.sim.sensor_range);
  c.sim.max_steps = static_cast<int>(number(doc, "max_steps", 0.0));
  if (doc.contains("noise")) {
    const json& n = doc.at("noise");
    c.sim.sigma_xy = number(n, "sigma_xy", c.sim.sigma_xy);
    c.sim.sigma_theta = number(n, "sigma_theta_deg", c.sim.sigma_theta / kDeg) * kDeg;
    c.sim.sigma_phi = number(n, "sigma_phi_deg", c.sim.sigma_phi / kDeg) * kDeg;
    c.sim.sigma_d = number(n, "sigma_d", c.sim.sigma_d);
  }
  if (doc.contains("map_offset")) {
    const json& m = doc.at("map_offset");
    c.sim.map_offset = Pose2(number(m, "x", 0.0), number(m, "y", 0.0), number(m, "theta_deg", 0.0) * kDeg);
  }

  if (doc.contains("waypoints")) {
    try {
      for (const auto& w : doc.at("waypoints")) {
        c.sim.waypoints.emplace_back(w.at(0).get<double>(), w.at(1).get<double>());
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("$.waypoints: ") + e.what());
    }
  } else if (doc.contains("tour")) {
    const json& t = doc.at("tour");
    if (!t.contains("start_room") || !t.at("start_room").is_string()) {
      throw ParseError("$.tour.start_room: expected a room id");
    }
    c.tour = TourSpec{t.at("start_room").get<std::string>(), static_cast<int>(number(t, "max_rooms", 0.0))};
    if (!c.plan.room_index(c.tour->start_room)) {
      throw ValidationError("$.tour.start_room: unknown room '" + c.tour->start_room + "'");
    }
    c.sim.waypoints = tour_waypoints(c.plan, c.tour->start_room, c.tour->max_rooms);
  } else {
    throw ParseError("$: expected \"waypoints\" or \"tour\"");
  }
  try {
    c.sim.validate();
    check_path_free(c.plan, c.sim.waypoints);
  } catch (const InvalidInput& e) {
    throw ValidationError(e.what());
  }
  return c;
}

ScenarioConfig load_scenario(const fs::path& path) {
  try {
    return scenario_from_json(read_json_file(path), path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ScenarioConfig make_scenario(std::string name, FloorPlan plan, SimConfig sim,
                             std::optional<TourSpec> tour) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.plan = std::move(plan);
  c.tour = std::move(tour);
  c.sim = std::move(sim);
  if (c.tour) c.sim.waypoints = tour_waypoints(c.plan, c.tour->start_room, c.tour->max_rooms);
  return c;
}

InformationDefaults noise_information(const SimConfig& sim, InformationDefaults base) {
  auto inv = [](double sigma, double floor) {
    const double s = std::max(sigma, floor);
    return 1.0 / (s * s);
  };
  constexpr double kMinLength = 1e-3;
  constexpr double kMinAngle = 0.01 * kDeg;
  base.odometry = {inv(sim.sigma_xy, kMinLength), inv(sim.sigma_xy, kMinLength),
                   inv(sim.sigma_theta, kMinAngle)};
  base.pose_plane = {inv(sim.sigma_phi, kMinAngle), inv(sim.sigma_d, kMinLength)};
  return base;
}

ScenarioResult run_scenario(const ScenarioConfig& config, bool localize) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult r;
  r.name = config.name;
  r.seed = config.sim.seed;
  r.plan = config.plan;
  r.agraph = build_a_graph(config.plan, config.merge.information);
  SGraphConfig sgraph_config = config.sgraph;
  if (config.information_from_noise) {
    sgraph_config.information = noise_information(config.sim, sgraph_config.information);
  }
  r.sgraph = SGraph(sgraph_config);
  Simulator sim(config.plan, config.sim);
  r.true_map_offset = sim.map_offset();

  MatchResult first;
  if (!localize) first.reason = "matching disabled";
  bool matched = false;
  while (!sim.done()) {
    const SimStep step = sim.step();
    UpdateInput in;
    in.odometry = step.odometry;
    in.observations = step.observations;
    in.ground_truth = step.ground_truth;
    if (step.index == 0) in.initial_pose = sim.initial_map_pose();
    const UpdateReport u = r.sgraph.update(in);
    r.ground_truth.push_back(step.ground_truth);
    if (matched || !localize) continue;
    MatchResult m = match(r.agraph.graph, r.sgraph.graph(), config.matcher);
    if (m.status == MatchStatus::Matched) {
      matched = true;
      r.match_keyframe = static_cast<int>(u.keyframe.index);
    }
    first = std::move(m);
  }
  r.match = first;

  for (VariableId kf : r.sgraph.keyframes()) {
    r.map_trajectory.push_back(Pose2::from_vector(r.sgraph.graph().value(kf).head<3>()));
  }

  if (matched) {
    MatchCandidate extended = extend_match(*first.best, r.agraph.graph, r.sgraph.graph(), config.matcher);
    r.merged = merge_candidate(r.agraph.graph, r.sgraph.graph(), extended, config.merge);
    r.localized = localized_trajectory(*r.merged);
    r.ape = compute_ape(r.localized, r.ground_truth, Alignment::None);
    r.map_planes = planes_in_plan(r);
    try {
      r.map_rmse = compute_map_rmse(r.map_planes, r.plan);
    } catch (const InvalidInput&) {
    }
  } else {
    r.ape = compute_ape(r.map_trajectory, r.ground_truth, Alignment::SE2Umeyama);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

json scenario_report(const ScenarioResult& r) {
  json report = {{"name", r.name},
                 {"seed", r.seed},
                 {"status", std::string(to_string(r.match.status))},
                 {"reason", r.match.reason},
                 {"match_keyframe", r.match_keyframe},
                 {"keyframes", r.sgraph.keyframes().size()},
                 {"planes", r.sgraph.planes().size()},
                 {"rooms", r.sgraph.room_planes().size()},
                 {"two_wall_rooms", r.sgraph.two_wall_planes().size()},
                 {"true_map_offset", pose_json(r.true_map_offset)},
                 {"ape", {{"rmse", r.ape.rmse}, {"alignment", std::string(to_string(r.ape.alignment))}}},
                 {"map_rmse", r.map_rmse ? json(r.map_rmse->rmse) : json(nullptr)}};
  if (r.merged) {
    const Pose2 est = r.merged->map_to_plan().pose;
    report["estimated_map_offset"] = pose_json(est);
    report["transform_error"] = {
        {"translation", (est.translation() - r.true_map_offset.translation()).norm()},
        {"rotation", std::abs(wrap_angle(est.theta - r.true_map_offset.theta))}};
    report["matched_rooms"] = r.merged->match.room_pairs().size();
    report["matched_planes"] = r.merged->match.plane_pairs().size();
    report["solver"] = {{"converged", r.merged->report.converged},
                        {"iterations", r.merged->report.iterations},
                        {"final_cost", r.merged->report.final_cost},
                        {"message", r.merged->report.message}};
  }
  return report;
}

void write_scenario_outputs(const ScenarioResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  save_plan(dir / "plan.json", r.plan);
  save_graph(dir / "agraph.json", r.agraph.graph);
  save_graph(dir / "sgraph.json", r.sgraph.graph());
  if (r.merged) save_graph(dir / "isgraph.json", r.merged->graph);
  write_json_file(dir / "match.json", match_result_to_json(r.match));
  write_json_file(dir / "map_planes.json", planes_to_json(r.map_planes));
  write_json_file(dir / "ape.json", ape_to_json(r.ape));
  if (r.map_rmse) write_json_file(dir / "map_rmse.json", map_rmse_to_json(*r.map_rmse));
  write_json_file(dir / "report.json", scenario_report(r));
  write_json_file(dir / "timing.json", {{"seconds", r.seconds}});

  std::ofstream csv(dir / "trajectory.csv");
  if (!csv) throw InvalidInput("cannot write " + (dir / "trajectory.csv").string());
  csv << "keyframe,gt_x,gt_y,gt_theta,map_x,map_y,map_theta,est_x,est_y,est_theta\n";
  for (std::size_t i = 0; i < r.ground_truth.size(); ++i) {
    const Pose2& g = r.ground_truth[i];
    const Pose2& m = r.map_trajectory.at(i);
    csv << i << ',' << format_number(g.x) << ',' << format_number(g.y) << ','
        << format_number(g.theta) << ',' << format_number(m.x) << ',' << format_number(m.y) << ','
        << format_number(m.theta);
    if (i < r.localized.size()) {
      const Pose2& e = r.localized[i];
      csv << ',' << format_number(e.x) << ',' << format_number(e.y) << ',' << format_number(e.theta);
    } else {
      csv << ",,,";
    }
    csv << '\n';
  }
}

json evaluate_directory(const fs::path& dir) {
  std::ifstream csv(dir / "trajectory.csv");
  if (!csv) throw InvalidInput("missing " + (dir / "trajectory.csv").string());
  std::string line;
  std::getline(csv, line);
  std::vector<Pose2> gt;
  std::vector<Pose2> map;
  std::vector<Pose2> est;
  int line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 10) cells.emplace_back();
    try {
      gt.emplace_back(std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]));
      map.emplace_back(std::stod(cells[4]), std::stod(cells[5]), std::stod(cells[6]));
      if (!cells[7].empty()) est.emplace_back(std::stod(cells[7]), std::stod(cells[8]), std::stod(cells[9]));
    } catch (const std::logic_error&) {
      throw ParseError((dir / "trajectory.csv").string() + ":" + std::to_string(line_no) +
                       ": malformed number");
    }
  }
  json out;
  if (!est.empty()) {
    out["ape"] = ape_to_json(compute_ape(est, gt, Alignment::None));
  } else {
    out["ape"] = ape_to_json(compute_ape(map, gt, Alignment::SE2Umeyama));
  }
  out["ape"].erase("per_pose");
  const auto planes = planes_from_json(read_json_file(dir / "map_planes.json"));
  if (!planes.empty()) {
    out["map_rmse"] = map_rmse_to_json(compute_map_rmse(planes, load_plan(dir / "plan.json")));
  } else {
    out["map_rmse"] = nullptr;
  }
  return out;
}

int exit_code(MatchStatus status) {
  switch (status) {
    case MatchStatus::Matched:
      return 0;
    case MatchStatus::Ambiguous:
      return 2;
    case MatchStatus::NoMatch:
      return 3;
  }
  return 3;
}

}  // namespace planloc
