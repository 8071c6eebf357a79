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

#include <array>
#include <cstdint>
#include <vector>

#include "bagdyn/common.hpp"
#include "bagdyn/mesh.hpp"
#include "bagdyn/task.hpp"

namespace bagdyn {

struct RigidSphere {
  Vec3 center = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double radius = 0.05;
  double inverse_mass = 0.0;
  // Kinematic spheres always carry inverse_mass == 0.
  bool controlled = false;

  friend bool operator==(const RigidSphere&, const RigidSphere&) = default;
};

struct Grasp {
  // Empty when the handle is released.
  std::vector<Index> vertices;
  HandleState state = HandleState::kReleased;

  bool holds() const { return state != HandleState::kReleased; }

  friend bool operator==(const Grasp&, const Grasp&) = default;
};

// A scripted entity: one rigid sphere or one grasped handle.
struct EntityRef {
  enum class Kind : std::uint8_t { kSphere, kHandle };
  Kind kind = Kind::kSphere;
  Index index = 0;  // sphere index, or HandleSide value for handles

  static EntityRef sphere(Index i) { return {Kind::kSphere, i}; }
  static EntityRef handle(HandleSide side) {
    return {Kind::kHandle, static_cast<Index>(side)};
  }

  friend bool operator==(const EntityRef&, const EntityRef&) = default;
};

struct SceneState {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<RigidSphere> spheres;
  std::array<Grasp, 2> grasps;  // indexed by HandleSide
  std::uint32_t frame_index = 0;

  const Grasp& grasp(HandleSide side) const {
    return grasps[static_cast<int>(side)];
  }

  friend bool operator==(const SceneState&, const SceneState&) = default;
};

struct SceneParams {
  double sphere_radius_min = 0.03;  // m
  double sphere_radius_max = 0.10;  // m
  double sphere_density = 500.0;    // kg/m^3
  int free_spheres_min = 1;
  int free_spheres_max = 3;
  int placement_retries = 100;
  double drop_height = 0.01;  // gap between bag bottom and table at frame 0
};

double sphere_inverse_mass(double radius, double density);

// Bag centred on the z axis, bottom drop_height above the table; an optional
// sphere inside; free_spheres_min..max spheres resting on the table around
// the bag; grasps from the task's handle states; zero velocities.
//
// Throws Error(kPlacementFailed) when a non-overlapping placement is not
// found within placement_retries draws.
SceneState initial_scene(const TaskConfig& task, const DeformableMesh& mesh,
                         const SceneParams& params, std::uint64_t seed);

// Per-particle inverse masses with every held grasp vertex pinned to 0.
std::vector<double> effective_inverse_masses(const DeformableMesh& mesh,
                                             const SceneState& state);

Vec3 grasp_centroid(const SceneState& state, HandleSide side);
Vec3 bag_centroid(const SceneState& state);

// Horizontal radius of the smallest z-axis cylinder around (cx, cy)
// containing every particle.
double bag_horizontal_radius(const SceneState& state, const Vec3& centre);

}  // namespace bagdyn
