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

// JSON mappings for the configuration structs. Missing keys keep their
// defaults; unknown keys are rejected so typos do not pass silently.

#include <initializer_list>
#include <string>

#include "json.hpp"

#include "bagdyn/common.hpp"
#include "bagdyn/dataset.hpp"

namespace bagdyn::detail {

using json = nlohmann::json;

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                           const char* section) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, std::string(section) + ": expected an object");
  }
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) {
      throw Error(ErrorCode::kInvalidConfig,
                  std::string(section) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const char* section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string(section) + "." + key + ": " + e.what());
  }
}

inline json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline void read_vec3(const json& j, const char* key, Vec3& out, const char* section) {
  if (!j.contains(key)) return;
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string(section) + "." + key + ": expected [x, y, z]");
  }
  out = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

inline json mesh_json(const MeshParams& p) {
  return {{"n_around", p.n_around},
          {"n_height", p.n_height},
          {"handle_segments", p.handle_segments},
          {"scale", vec3_json(p.scale)},
          {"particle_mass", p.particle_mass}};
}

inline MeshParams mesh_from(const json& j) {
  const char* s = "mesh";
  reject_unknown(j, {"n_around", "n_height", "handle_segments", "scale", "particle_mass"}, s);
  MeshParams p;
  read(j, "n_around", p.n_around, s);
  read(j, "n_height", p.n_height, s);
  read(j, "handle_segments", p.handle_segments, s);
  read_vec3(j, "scale", p.scale, s);
  read(j, "particle_mass", p.particle_mass, s);
  return p;
}

inline json scene_json(const SceneParams& p) {
  return {{"sphere_radius_min", p.sphere_radius_min},
          {"sphere_radius_max", p.sphere_radius_max},
          {"sphere_density", p.sphere_density},
          {"free_spheres_min", p.free_spheres_min},
          {"free_spheres_max", p.free_spheres_max},
          {"placement_retries", p.placement_retries},
          {"drop_height", p.drop_height}};
}

inline SceneParams scene_from(const json& j) {
  const char* s = "scene";
  reject_unknown(j, {"sphere_radius_min", "sphere_radius_max", "sphere_density",
                     "free_spheres_min", "free_spheres_max", "placement_retries",
                     "drop_height"}, s);
  SceneParams p;
  read(j, "sphere_radius_min", p.sphere_radius_min, s);
  read(j, "sphere_radius_max", p.sphere_radius_max, s);
  read(j, "sphere_density", p.sphere_density, s);
  read(j, "free_spheres_min", p.free_spheres_min, s);
  read(j, "free_spheres_max", p.free_spheres_max, s);
  read(j, "placement_retries", p.placement_retries, s);
  read(j, "drop_height", p.drop_height, s);
  return p;
}

inline json solver_json(const SolverConfig& c) {
  return {{"recorded_dt", c.recorded_dt},
          {"substeps", c.substeps},
          {"iterations", c.iterations},
          {"stretch_stiffness", c.stretch_stiffness},
          {"bend_stiffness_soft", c.bend_stiffness_soft},
          {"bend_stiffness_stiff", c.bend_stiffness_stiff},
          {"velocity_damping", c.velocity_damping},
          {"table_friction", c.table_friction},
          {"contact_offset", c.contact_offset},
          {"gravity", vec3_json(c.gravity)}};
}

inline SolverConfig solver_from(const json& j) {
  const char* s = "solver";
  reject_unknown(j, {"recorded_dt", "substeps", "iterations", "stretch_stiffness",
                     "bend_stiffness_soft", "bend_stiffness_stiff", "velocity_damping",
                     "table_friction", "contact_offset", "gravity"}, s);
  SolverConfig c;
  read(j, "recorded_dt", c.recorded_dt, s);
  read(j, "substeps", c.substeps, s);
  read(j, "iterations", c.iterations, s);
  read(j, "stretch_stiffness", c.stretch_stiffness, s);
  read(j, "bend_stiffness_soft", c.bend_stiffness_soft, s);
  read(j, "bend_stiffness_stiff", c.bend_stiffness_stiff, s);
  read(j, "velocity_damping", c.velocity_damping, s);
  read(j, "table_friction", c.table_friction, s);
  read(j, "contact_offset", c.contact_offset, s);
  read_vec3(j, "gravity", c.gravity, s);
  return c;
}

inline json action_json(const ActionParams& p) {
  return {{"theta_max_deg", p.theta_max_deg},
          {"circle_radius_min", p.circle_radius_min},
          {"circle_radius_max", p.circle_radius_max},
          {"speed_min", p.speed_min},
          {"speed_max", p.speed_max},
          {"push_radius_min", p.push_radius_min},
          {"push_radius_max", p.push_radius_max},
          {"push_gap_min", p.push_gap_min},
          {"push_gap_max", p.push_gap_max},
          {"push_bag_probability", p.push_bag_probability},
          {"handle_marker_radius", p.handle_marker_radius},
          {"placement_retries", p.placement_retries}};
}

inline ActionParams action_from(const json& j) {
  const char* s = "action";
  reject_unknown(j, {"theta_max_deg", "circle_radius_min", "circle_radius_max",
                     "speed_min", "speed_max", "push_radius_min", "push_radius_max",
                     "push_gap_min", "push_gap_max", "push_bag_probability",
                     "handle_marker_radius", "placement_retries"}, s);
  ActionParams p;
  read(j, "theta_max_deg", p.theta_max_deg, s);
  read(j, "circle_radius_min", p.circle_radius_min, s);
  read(j, "circle_radius_max", p.circle_radius_max, s);
  read(j, "speed_min", p.speed_min, s);
  read(j, "speed_max", p.speed_max, s);
  read(j, "push_radius_min", p.push_radius_min, s);
  read(j, "push_radius_max", p.push_radius_max, s);
  read(j, "push_gap_min", p.push_gap_min, s);
  read(j, "push_gap_max", p.push_gap_max, s);
  read(j, "push_bag_probability", p.push_bag_probability, s);
  read(j, "handle_marker_radius", p.handle_marker_radius, s);
  read(j, "placement_retries", p.placement_retries, s);
  return p;
}

// The simulation section bundles the sub-configs plus episode settings.
inline json simulation_json(const SimulationConfig& c) {
  return {{"mesh", mesh_json(c.mesh)},
          {"scene", scene_json(c.scene)},
          {"solver", solver_json(c.solver)},
          {"action", action_json(c.action)},
          {"frames", c.frames},
          {"settle_frames", c.settle_frames},
          {"settle_all_actions", c.settle_all_actions},
          {"max_resamples", c.max_resamples}};
}

inline SimulationConfig simulation_from(const json& j) {
  const char* s = "simulation";
  reject_unknown(j, {"mesh", "scene", "solver", "action", "frames", "settle_frames",
                     "settle_all_actions", "max_resamples"}, s);
  SimulationConfig c;
  if (j.contains("mesh")) c.mesh = mesh_from(j.at("mesh"));
  if (j.contains("scene")) c.scene = scene_from(j.at("scene"));
  if (j.contains("solver")) c.solver = solver_from(j.at("solver"));
  if (j.contains("action")) c.action = action_from(j.at("action"));
  read(j, "frames", c.frames, s);
  read(j, "settle_frames", c.settle_frames, s);
  read(j, "settle_all_actions", c.settle_all_actions, s);
  read(j, "max_resamples", c.max_resamples, s);
  return c;
}

}  // namespace bagdyn::detail
