// Copyright 2026 The bagdyn Authors
//
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
#include "bagdyn/actions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "bagdyn/rng.hpp"

namespace bagdyn {
namespace {

void CheckParams(const ActionParams& p) {
  const bool ok = p.steps >= 1 && p.recorded_dt > 0.0 && p.speed_min > 0.0 &&
                  p.speed_max >= p.speed_min && p.circle_radius_min > 0.0 &&
                  p.circle_radius_max >= p.circle_radius_min &&
                  p.push_radius_min > 0.0 && p.push_radius_max >= p.push_radius_min &&
                  p.theta_max_deg >= 0.0 && p.handle_marker_radius > 0.0;
  if (!ok) throw Error(ErrorCode::kInvalidParameter, "invalid action parameters");
}

std::vector<Vec3> StraightLine(const Vec3& start, const Vec3& direction,
                               double speed, const ActionParams& p) {
  std::vector<Vec3> w;
  w.reserve(p.steps + 1);
  const double stride = speed * p.recorded_dt;
  for (int k = 0; k <= p.steps; ++k) w.push_back(start + direction * (stride * k));
  return w;
}

Vec3 Horizontal(const Vec3& v) { return Vec3(v.x(), v.y(), 0.0); }

ActionTrajectory HandleTrajectory(ActionKind kind, const ActionParams& p,
                                  std::vector<Vec3> waypoints) {
  ActionTrajectory t;
  t.kind = kind;
  t.target = EntityRef::handle(HandleSide::kLeft);
  t.waypoints = std::move(waypoints);
  t.r_a = p.handle_marker_radius;
  return t;
}

void RequireMovingLeft(const SceneState& scene, const char* who) {
  if (scene.grasp(HandleSide::kLeft).state != HandleState::kMoving) {
    throw Error(ErrorCode::kInvalidParameter,
                std::string(who) + ": left handle must be grasped and moving");
  }
}

}  // namespace

PushPlan plan_push(const SceneState& scene, const ActionParams& params,
                   std::uint64_t seed) {
  CheckParams(params);
  Rng rng(seed);
  const Vec3 bag = bag_centroid(scene);
  const double bag_radius = bag_horizontal_radius(scene, bag);
  const std::size_t n_objects = scene.spheres.size() + 1;  // bag is object 0

  PushPlan plan;
  bool placed = false;
  for (int attempt = 0; attempt < params.placement_retries && !placed; ++attempt) {
    const double r = rng.uniform(params.push_radius_min, params.push_radius_max);
    const std::size_t anchor = rng.below(n_objects);
    const Vec3 anchor_pos = anchor == 0 ? bag : scene.spheres[anchor - 1].center;
    const double anchor_r = anchor == 0 ? bag_radius : scene.spheres[anchor - 1].radius;
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double d = anchor_r + r + rng.uniform(params.push_gap_min, params.push_gap_max);
    const Vec3 c(anchor_pos.x() + d * std::cos(angle),
                 anchor_pos.y() + d * std::sin(angle), r);
    if ((c - bag).head<2>().norm() < bag_radius + r) continue;
    const bool clear = std::all_of(
        scene.spheres.begin(), scene.spheres.end(), [&](const RigidSphere& o) {
          return (o.center - c).norm() >= o.radius + r + 0.005;
        });
    if (!clear) continue;
    plan.sphere.center = c;
    plan.sphere.radius = r;
    plan.sphere.inverse_mass = 0.0;
    plan.sphere.controlled = true;
    placed = true;
  }
  if (!placed) {
    throw Error(ErrorCode::kPlacementFailed,
                "plan_push: no free spot for the push sphere after " +
                    std::to_string(params.placement_retries) + " retries");
  }

  Vec3 goal = bag;
  if (!scene.spheres.empty() && !rng.bernoulli(params.push_bag_probability)) {
    goal = scene.spheres[rng.below(scene.spheres.size())].center;
  }
  Vec3 direction = Horizontal(goal - plan.sphere.center);
  if (direction.norm() == 0.0) direction = Vec3::UnitX();
  direction.normalize();
  const double speed = rng.uniform(params.speed_min, params.speed_max);

  ActionTrajectory& t = plan.trajectory;
  t.kind = ActionKind::kPush;
  t.target = EntityRef::sphere(static_cast<Index>(scene.spheres.size()));
  t.waypoints = StraightLine(plan.sphere.center, direction, speed, params);
  t.r_a = plan.sphere.radius;
  return plan;
}

Vec3 circle_point(const Vec3& start, const Vec3& radial, const Vec3& tangent,
                  double radius, double phase) {
  return start + radius * ((std::cos(phase) - 1.0) * radial + std::sin(phase) * tangent);
}

ActionTrajectory plan_circular(const SceneState& scene, const ActionParams& params,
                               std::uint64_t seed) {
  CheckParams(params);
  RequireMovingLeft(scene, "plan_circular");
  Rng rng(seed);
  const Vec3 start = grasp_centroid(scene, HandleSide::kLeft);

  static const Vec3 kAxes[3][2] = {
      {Vec3::UnitX(), Vec3::UnitY()},  // xy
      {Vec3::UnitX(), Vec3::UnitZ()},  // xz
      {Vec3::UnitY(), Vec3::UnitZ()},  // yz
  };
  const std::size_t plane = rng.below(3);
  const Vec3& e1 = kAxes[plane][0];
  const Vec3& e2 = kAxes[plane][1];
  const double radius = rng.uniform(params.circle_radius_min, params.circle_radius_max);
  const double alpha = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double sense = rng.bernoulli(0.5) ? 1.0 : -1.0;
  const double speed = rng.uniform(params.speed_min, params.speed_max);

  Vec3 radial = std::cos(alpha) * e1 + std::sin(alpha) * e2;
  // Keep the centre at or above the start so vertical circles stay clear of
  // the table.
  if (radial.z() > 0.0) radial = -radial;
  const Vec3 tangent = sense * e1.cross(e2).cross(radial);

  const double circumference = 2.0 * std::numbers::pi * radius;
  const double period = std::max(1.0, std::round(circumference / (speed * params.recorded_dt)));
  const double omega = 2.0 * std::numbers::pi / period;

  std::vector<Vec3> w;
  w.reserve(params.steps + 1);
  for (int k = 0; k <= params.steps; ++k) {
    w.push_back(circle_point(start, radial, tangent, radius, omega * k));
  }
  return HandleTrajectory(ActionKind::kCircular, params, std::move(w));
}

ActionTrajectory plan_open(const SceneState& scene, const ActionParams& params,
                           std::uint64_t seed) {
  CheckParams(params);
  RequireMovingLeft(scene, "plan_open");
  if (scene.grasp(HandleSide::kRight).state != HandleState::kFixed) {
    throw Error(ErrorCode::kInvalidParameter, "plan_open: right handle must be fixed");
  }
  Rng rng(seed);
  const Vec3 moving = grasp_centroid(scene, HandleSide::kLeft);
  const Vec3 fixed = grasp_centroid(scene, HandleSide::kRight);
  Vec3 base = Horizontal(moving - fixed);
  if (base.norm() == 0.0) base = -Vec3::UnitX();
  base.normalize();
  const double theta_max = params.theta_max_deg * std::numbers::pi / 180.0;
  const double theta = rng.uniform(-theta_max, theta_max);
  const double c = std::cos(theta), s = std::sin(theta);
  const Vec3 direction(c * base.x() - s * base.y(), s * base.x() + c * base.y(), 0.0);
  const double speed = rng.uniform(params.speed_min, params.speed_max);
  return HandleTrajectory(ActionKind::kOpen, params,
                          StraightLine(moving, direction, speed, params));
}

ActionTrajectory plan_lift(const SceneState& scene, const ActionParams& params,
                           std::uint64_t seed) {
  CheckParams(params);
  RequireMovingLeft(scene, "plan_lift");
  Rng rng(seed);
  const Vec3 start = grasp_centroid(scene, HandleSide::kLeft);
  const double speed = rng.uniform(params.speed_min, params.speed_max);
  return HandleTrajectory(ActionKind::kLift, params,
                          StraightLine(start, Vec3::UnitZ(), speed, params));
}

ActionTrajectory plan_action(const TaskConfig& task, SceneState& scene,
                             const ActionParams& params, std::uint64_t seed) {
  switch (task.action) {
    case ActionKind::kPush: {
      PushPlan plan = plan_push(scene, params, seed);
      scene.spheres.push_back(plan.sphere);
      return std::move(plan.trajectory);
    }
    case ActionKind::kCircular: return plan_circular(scene, params, seed);
    case ActionKind::kOpen: return plan_open(scene, params, seed);
    case ActionKind::kLift: return plan_lift(scene, params, seed);
  }
  throw Error(ErrorCode::kInvalidParameter, "plan_action: unknown action");
}

ActionWindow action_window(const ActionTrajectory& traj, std::size_t t, std::size_t h) {
  if (traj.waypoints.empty()) {
    throw Error(ErrorCode::kInvalidParameter, "action_window: empty trajectory");
  }
  const std::size_t last = traj.last_frame();
  ActionWindow w;
  w.p_start = traj.waypoints[std::min(t, last)];
  w.p_end = traj.waypoints[std::min(t + h, last)];
  w.r_a = traj.r_a;
  return w;
}

}  // namespace bagdyn
