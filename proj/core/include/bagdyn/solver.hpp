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

#include <span>

#include "bagdyn/common.hpp"
#include "bagdyn/mesh.hpp"
#include "bagdyn/scene.hpp"
#include "bagdyn/task.hpp"

namespace bagdyn {

struct SolverConfig {
  double recorded_dt = 0.1;  // s between recorded frames
  int substeps = 10;
  int iterations = 10;
  double stretch_stiffness = 0.9;
  double bend_stiffness_soft = 0.05;
  double bend_stiffness_stiff = 0.9;
  double velocity_damping = 0.995;  // per substep
  double table_friction = 0.3;      // tangential velocity loss per contact substep
  double contact_offset = 0.002;    // m
  Vec3 gravity{0.0, 0.0, -9.81};

  double bend_stiffness(Stiffness s) const {
    return s == Stiffness::kSoft ? bend_stiffness_soft : bend_stiffness_stiff;
  }
};

// Throws Error(kInvalidParameter) if any field is outside its domain.
void validate(const SolverConfig& cfg);

// Position corrections for a pair of points.
struct CorrectionPair {
  Vec3 first = Vec3::Zero();
  Vec3 second = Vec3::Zero();
};

// Mass-weighted projection of |p_i - p_j| towards rest, scaled by k.
// Zero corrections when both points are immovable or coincide.
CorrectionPair project_distance(const Vec3& p_i, const Vec3& p_j, double w_i,
                                double w_j, double rest, double k);

// Bending as a distance constraint between second neighbours.
CorrectionPair project_bend(const Vec3& p_i, const Vec3& p_j, double w_i,
                            double w_j, double rest, double k);

// Full correction that moves p onto the sphere surface inflated by offset.
// A point at the exact centre is pushed along +z.
Vec3 resolve_particle_sphere(const Vec3& p, const RigidSphere& s, double offset);

// Lifts p to z = offset; points at or above the offset are untouched.
Vec3 resolve_particle_table(const Vec3& p, double offset);

// Separates overlapping spheres along the centre line, weighted by inverse
// mass. Coincident centres separate along +x.
CorrectionPair resolve_sphere_sphere(const RigidSphere& a, const RigidSphere& b);

// Scripted end-of-frame position for one controlled entity. For a handle the
// position is the target grasp centroid.
struct ControlTarget {
  EntityRef entity;
  Vec3 position = Vec3::Zero();
};

// Advances one recorded frame. Held grasp vertices are kinematic; commanded
// entities are interpolated linearly over the substeps and land exactly on
// their targets. Entities without a command hold still.
//
// Throws Error(kSimulationDiverged) naming the substep on NaN, and
// Error(kInvalidParameter) when a command targets an entity that is not
// moving or controlled.
SceneState step(const SceneState& state, const DeformableMesh& mesh,
                std::span<const ControlTarget> commanded, const TaskConfig& task,
                const SolverConfig& cfg);

// Maximum per-particle (and per-sphere) displacement below which a frame
// counts as at rest.
inline constexpr double kSettleThreshold = 1e-4;

// Steps without commands until the scene is at rest or max_frames is hit.
SceneState settle(const SceneState& state, const DeformableMesh& mesh,
                  const TaskConfig& task, const SolverConfig& cfg,
                  int max_frames);

}  // namespace bagdyn
