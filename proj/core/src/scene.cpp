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
#include "bagdyn/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bagdyn/rng.hpp"

namespace bagdyn {

double sphere_inverse_mass(double radius, double density) {
  const double mass = density * 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
  return 1.0 / mass;
}

SceneState initial_scene(const TaskConfig& task, const DeformableMesh& mesh,
                         const SceneParams& params, std::uint64_t seed) {
  if (!(params.sphere_radius_min > 0.0) ||
      params.sphere_radius_max < params.sphere_radius_min ||
      params.free_spheres_min < 0 ||
      params.free_spheres_max < params.free_spheres_min) {
    throw Error(ErrorCode::kInvalidParameter, "initial_scene: bad sphere ranges");
  }
  Rng rng(seed);
  SceneState s;
  s.positions.reserve(mesh.particle_count());
  for (const Vec3& x : mesh.rest_positions) {
    s.positions.push_back(x + Vec3(0.0, 0.0, params.drop_height));
  }
  s.velocities.assign(mesh.particle_count(), Vec3::Zero());

  double body_radius = std::numeric_limits<double>::max();
  double rim_height = 0.0;
  for (Index v : mesh.rim_vertices) {
    const Vec3& x = mesh.rest_positions[v];
    body_radius = std::min(body_radius, x.head<2>().norm());
    rim_height = std::max(rim_height, x.z());
  }
  const double outer_radius = bag_horizontal_radius(s, Vec3::Zero());

  if (task.content == BagContent::kObjectInside) {
    const double r_hi = std::min(params.sphere_radius_max, 0.6 * body_radius);
    const double r_lo = std::min(params.sphere_radius_min, r_hi);
    const double r = rng.uniform(r_lo, r_hi);
    const double reach = std::max(0.0, 0.5 * body_radius - r);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double d = reach * std::sqrt(rng.uniform());
    RigidSphere inside;
    inside.radius = r;
    inside.center = Vec3(d * std::cos(angle), d * std::sin(angle),
                         params.drop_height + r + 0.005);
    inside.inverse_mass = sphere_inverse_mass(r, params.sphere_density);
    s.spheres.push_back(inside);
  }

  const int free_count =
      params.free_spheres_min +
      static_cast<int>(rng.below(static_cast<std::uint64_t>(
          params.free_spheres_max - params.free_spheres_min + 1)));
  for (int k = 0; k < free_count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < params.placement_retries && !placed; ++attempt) {
      const double r = rng.uniform(params.sphere_radius_min, params.sphere_radius_max);
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double d = outer_radius + r + rng.uniform(0.03, 0.25);
      const Vec3 c(d * std::cos(angle), d * std::sin(angle), r);
      const bool clear = std::all_of(
          s.spheres.begin(), s.spheres.end(), [&](const RigidSphere& o) {
            return (o.center - c).norm() >= o.radius + r + 0.005;
          });
      if (!clear) continue;
      RigidSphere sphere;
      sphere.center = c;
      sphere.radius = r;
      sphere.inverse_mass = sphere_inverse_mass(r, params.sphere_density);
      s.spheres.push_back(sphere);
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorCode::kPlacementFailed,
                  "initial_scene: could not place free sphere " +
                      std::to_string(k) + " after " +
                      std::to_string(params.placement_retries) + " retries");
    }
  }

  for (HandleSide side : {HandleSide::kLeft, HandleSide::kRight}) {
    Grasp& g = s.grasps[static_cast<int>(side)];
    g.state = task.handle(side);
    if (g.holds()) g.vertices = mesh.handle_vertices(side == HandleSide::kLeft);
  }
  return s;
}

std::vector<double> effective_inverse_masses(const DeformableMesh& mesh,
                                             const SceneState& state) {
  std::vector<double> w = mesh.inverse_masses;
  for (const Grasp& g : state.grasps) {
    if (!g.holds()) continue;
    for (Index v : g.vertices) w[v] = 0.0;
  }
  return w;
}

Vec3 grasp_centroid(const SceneState& state, HandleSide side) {
  const Grasp& g = state.grasp(side);
  if (g.vertices.empty()) {
    throw Error(ErrorCode::kInvalidParameter,
                std::string("grasp_centroid: ") + to_string(side) +
                    " handle holds no vertices");
  }
  Vec3 c = Vec3::Zero();
  for (Index v : g.vertices) c += state.positions[v];
  return c / static_cast<double>(g.vertices.size());
}

Vec3 bag_centroid(const SceneState& state) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& x : state.positions) c += x;
  return c / static_cast<double>(state.positions.size());
}

double bag_horizontal_radius(const SceneState& state, const Vec3& centre) {
  double r = 0.0;
  for (const Vec3& x : state.positions) {
    r = std::max(r, (x.head<2>() - centre.head<2>()).norm());
  }
  return r;
}

}  // namespace bagdyn
