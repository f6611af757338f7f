#include "planloc/eval.hpp"

#include <algorithm>
#include <cmath>

#include "planloc/errors.hpp"

namespace planloc {
namespace {

constexpr double kSampleStep = 0.1;
constexpr double kAssociationRadius = 0.5;

const WallSurface* find_surface(const std::vector<WallSurfaces>& surfaces, const std::string& wall,
                                int face) {
  for (const auto& s : surfaces) {
    if (s.wall_id == wall) return face == 0 ? &s.first : &s.second;
  }
  return nullptr;
}

const WallSurface* nearest_surface(const std::vector<WallSurfaces>& surfaces, const Plane& plane,
                                   const std::vector<Eigen::Vector2d>& samples) {
  const Axis axis = classify_axis(plane);
  const WallSurface* best = nullptr;
  double best_err = kAssociationRadius;
  for (const auto& s : surfaces) {
    if (s.axis != axis) continue;
    for (const WallSurface* face : {&s.first, &s.second}) {
      double err = 0.0;
      for (const auto& p : samples) err = std::max(err, std::abs(face->plane.signed_distance(p)));
      if (err <= best_err && (!best || err < best_err)) {
        best_err = err;
        best = face;
      }
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(Alignment alignment) {
  return alignment == Alignment::None ? "None" : "SE2Umeyama";
}

ApeReport compute_ape(std::span<const Pose2> estimated, std::span<const Pose2> ground_truth,
                      Alignment alignment) {
  if (estimated.empty()) throw InvalidInput("compute_ape: empty trajectory");
  if (estimated.size() != ground_truth.size()) {
    throw InvalidInput("compute_ape: trajectory lengths differ (" +
                       std::to_string(estimated.size()) + " vs " +
                       std::to_string(ground_truth.size()) + ")");
  }
  FrameTransform align = FrameTransform::identity();
  if (alignment == Alignment::SE2Umeyama && estimated.size() >= 2) {
    std::vector<PointPair> pairs;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
      pairs.push_back({estimated[i].translation(), ground_truth[i].translation()});
    }
    try {
      align = estimate_transform_closed_form(pairs);
    } catch (const DegenerateInput&) {
      align.pose = Pose2(ground_truth[0].x - estimated[0].x, ground_truth[0].y - estimated[0].y, 0.0);
    }
  } else if (alignment == Alignment::SE2Umeyama) {
    align.pose = Pose2(ground_truth[0].x - estimated[0].x, ground_truth[0].y - estimated[0].y, 0.0);
  }

  ApeReport report;
  report.alignment = alignment;
  double sq = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    const double e = (align.apply(estimated[i].translation()) - ground_truth[i].translation()).norm();
    report.per_pose.push_back(e);
    sq += e * e;
    report.mean += e;
    report.max = std::max(report.max, e);
  }
  const double n = static_cast<double>(estimated.size());
  report.rmse = std::sqrt(sq / n);
  report.mean /= n;
  return report;
}

MapRmseReport compute_map_rmse(std::span<const EstimatedPlane> planes, const FloorPlan& plan) {
  const auto surfaces = extract_wall_surfaces(plan);
  double sq = 0.0;
  MapRmseReport report;
  for (const auto& est : planes) {
    std::vector<Eigen::Vector2d> samples;
    for (const auto& seg : est.extent) {
      const Eigen::Vector2d d = seg.b - seg.a;
      const double len = d.norm();
      // The tolerance keeps lengths like 3.0 (29.999... steps) from losing their last sample.
      const int n = std::max(1, static_cast<int>(std::floor(len / kSampleStep + 1e-9)) + 1);
      for (int k = 0; k < n; ++k) {
        const double t = n == 1 ? 0.5 : std::min(1.0, k * kSampleStep / len);
        // Project onto the estimated plane so the sample lies on the estimate.
        const Eigen::Vector2d p = seg.a + t * d;
        samples.push_back(p - est.plane.signed_distance(p) * est.plane.normal);
      }
    }
    if (samples.empty()) continue;
    const WallSurface* target = est.surface
                                    ? find_surface(surfaces, est.surface->first, est.surface->second)
                                    : nearest_surface(surfaces, est.plane, samples);
    if (!target) continue;
    for (const auto& p : samples) {
      const double e = target->plane.signed_distance(p);
      sq += e * e;
    }
    report.n_points += samples.size();
  }
  if (report.n_points == 0) throw InvalidInput("compute_map_rmse: no plane could be associated");
  report.rmse = std::sqrt(sq / static_cast<double>(report.n_points));
  return report;
}

nlohmann::json ape_to_json(const ApeReport& report) {
  return {{"rmse", report.rmse},
          {"mean", report.mean},
          {"max", report.max},
          {"alignment", std::string(to_string(report.alignment))},
          {"per_pose", report.per_pose}};
}

nlohmann::json map_rmse_to_json(const MapRmseReport& report) {
  return {{"rmse", report.rmse}, {"n_points", report.n_points}};
}

}  // namespace planloc
