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
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bagdyn/common.hpp"

namespace bagdyn {

using Index = std::uint32_t;

// A distance constraint between two particles.
struct Link {
  Index i = 0;
  Index j = 0;
  double rest_length = 0.0;
};

struct DeformableMesh {
  std::vector<Vec3> rest_positions;
  std::vector<double> inverse_masses;
  std::vector<Link> stretch_edges;
  // Second neighbours across each interior edge shared by two triangles.
  std::vector<Link> bend_pairs;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<Index> left_handle_vertices;
  std::vector<Index> right_handle_vertices;
  std::vector<Index> rim_vertices;
  Index bottom_center = 0;

  std::size_t particle_count() const { return rest_positions.size(); }

  const std::vector<Index>& handle_vertices(bool left) const {
    return left ? left_handle_vertices : right_handle_vertices;
  }
};

struct MeshParams {
  int n_around = 16;
  int n_height = 8;
  int handle_segments = 6;
  // Body diameter along x and y, body height along z (meters).
  Vec3 scale{0.3, 0.3, 0.4};
  double particle_mass = 0.01;  // kg
};

// Closed-form element counts of build_bag_mesh for the given parameters.
struct MeshCounts {
  std::size_t particles = 0;
  std::size_t stretch_edges = 0;
  std::size_t triangles = 0;
};
MeshCounts expected_mesh_counts(const MeshParams& params);

// Open-top cylinder (n_around x n_height grid), a bottom disc made of a
// half-radius ring plus a centre vertex, and two ribbon handles arching over
// the rim on the -x (left) and +x (right) sides. Each handle encloses a hole
// with the rim, so the surface has one top opening and two handle holes.
// Ring 0 sits at z = 0; the rim is ring n_height - 1.
//
// Throws Error(kInvalidParameter) when n_around < 8, n_height < 4 or
// handle_segments < 3.
DeformableMesh build_bag_mesh(const MeshParams& params);

// Empty result means the mesh satisfies every structural invariant.
std::vector<std::string> validate_mesh(const DeformableMesh& mesh);

}  // namespace bagdyn
