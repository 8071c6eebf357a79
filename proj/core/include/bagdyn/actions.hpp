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
#pragma once

#include <cstdint>
#include <vector>

#include "bagdyn/common.hpp"
#include "bagdyn/scene.hpp"
#include "bagdyn/task.hpp"

namespace bagdyn {

struct ActionParams {
  double theta_max_deg = 15.0;
  double circle_radius_min = 0.1;  // m
  double circle_radius_max = 0.3;
  double speed_min = 0.05;  // m/s
  double speed_max = 0.2;
  double push_radius_min = 0.03;  // m
  double push_radius_max = 0.10;
  double push_gap_min = 0.05;  // clearance between new push sphere and anchor
  double push_gap_max = 0.20;
  double push_bag_probability = 0.5;
  double handle_marker_radius = 0.02;  // r_a for handle actions
  int placement_retries = 100;
  int steps = 59;  // waypoints 0..steps, one per recorded frame
  double recorded_dt = 0.1;
};

// Scripted per-frame positions of the manipulated entity. For handle actions
// the waypoints are grasp-centroid positions.
struct ActionTrajectory {
  ActionKind kind = ActionKind::kPush;
  EntityRef target;
  std::vector<Vec3> waypoints;
  double r_a = 0.0;

  std::size_t last_frame() const { return waypoints.empty() ? 0 : waypoints.size() - 1; }

  friend bool operator==(const ActionTrajectory&, const ActionTrajectory&) = default;
};

struct PushPlan {
  RigidSphere sphere;
  ActionTrajectory trajectory;
};

// New kinematic sphere resting on the table next to a random existing object
// (bag or sphere), moving in a straight horizontal line at constant speed
// towards the bag centroid (probability push_bag_probability) or a random
// rigid sphere. The trajectory targets sphere index scene.spheres.size().
PushPlan plan_push(const SceneState& scene, const ActionParams& params,
                   std::uint64_t seed);

// Closed circle through the left grasp centroid in a random coordinate plane.
// The period is rounded to a whole number of frames.
ActionTrajectory plan_circular(const SceneState& scene, const ActionParams& params,
                               std::uint64_t seed);

// Straight line of the left handle away from the right handle, deflected by
// a random angle in [-theta_max, theta_max] about z.
ActionTrajectory plan_open(const SceneState& scene, const ActionParams& params,
                           std::uint64_t seed);

// Vertical constant-speed lift of the left grasp centroid.
ActionTrajectory plan_lift(const SceneState& scene, const ActionParams& params,
                           std::uint64_t seed);

// Dispatches on task.action. For push the new sphere is appended to scene.
ActionTrajectory plan_action(const TaskConfig& task, SceneState& scene,
                             const ActionParams& params, std::uint64_t seed);

struct ActionWindow {
  Vec3 p_start = Vec3::Zero();
  Vec3 p_end = Vec3::Zero();
  double r_a = 0.0;
};

// Waypoints at t and t + h, both clamped to the final waypoint.
ActionWindow action_window(const ActionTrajectory& traj, std::size_t t, std::size_t h);

// Point on a circle anchored at start: start + radius * ((cos(phase) - 1) * radial
// + sin(phase) * tangent). Exact at phase 0.
Vec3 circle_point(const Vec3& start, const Vec3& radial, const Vec3& tangent,
                  double radius, double phase);

}  // namespace bagdyn
