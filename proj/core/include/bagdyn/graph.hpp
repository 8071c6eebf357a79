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
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bagdyn/actions.hpp"
#include "bagdyn/common.hpp"
#include "bagdyn/dataset.hpp"
#include "bagdyn/mesh.hpp"

namespace bagdyn {

// Radius feature assigned to every keypoint vertex.
inline constexpr double kKeypointRadius = 1e-5;

struct GraphConfig {
  int keypoints = 30;
  double active_threshold = 1e-3;  // m, strict
  std::uint64_t keypoint_seed = 0;
};

struct KeypointMap {
  std::vector<Index> indices;  // mesh vertex of each keypoint
  // Unordered keypoint pairs (a < b, positions in indices), sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> adjacency;
  // Keypoints lying in each handle's grasp vertex set, by HandleSide.
  std::array<std::vector<std::uint32_t>, 2> handle_keypoints;

  std::size_t size() const { return indices.size(); }
  bool adjacent(std::uint32_t a, std::uint32_t b) const;
  std::vector<std::uint8_t> matrix;  // K x K lookup, see finalize_keypoints
};

// Rebuilds the dense adjacency lookup from adjacency; call after editing it.
void finalize_keypoints(KeypointMap& map);

// Greedy farthest-point sampling over points, starting from seeds (kept first,
// in order). Ties pick the lowest index.
std::vector<Index> farthest_point_sampling(std::span<const Vec3> points,
                                           std::span<const Index> seeds,
                                           std::size_t count);

// Mandatory seeds (one representative per handle, four evenly spaced rim
// vertices whose phase depends on seed, the bottom centre) followed by
// farthest-point sampling over rest positions up to K keypoints.
KeypointMap select_keypoints(const DeformableMesh& mesh, std::size_t K,
                             std::uint64_t seed);

// Every mesh vertex joins the keypoint region with the fewest stretch-edge
// hops (ties to the lower keypoint position); two keypoints are adjacent iff
// a stretch edge crosses their regions. Throws kInvalidParameter when some
// component holds no keypoint.
std::vector<std::pair<std::uint32_t, std::uint32_t>> keypoint_adjacency(
    const DeformableMesh& mesh, std::span<const Index> keypoints);

enum class VertexRole : std::uint8_t {
  kFreeSphere,
  kControlledSphere,
  kFreeKeypoint,
  kFixedKeypoint,   // held by a fixed grasp
  kMovingKeypoint,  // held by a moving grasp
};

struct VertexId {
  bool sphere = false;
  Index index = 0;  // sphere index or mesh vertex

  friend bool operator==(const VertexId&, const VertexId&) = default;
};

// World-frame state of the graph vertices: spheres first, then keypoints.
struct GraphState {
  std::vector<Vec3> positions;
  std::vector<double> radii;
  std::vector<VertexRole> roles;
  std::vector<VertexId> ids;
  std::size_t sphere_count = 0;

  std::size_t size() const { return positions.size(); }
  bool held(std::size_t i) const { return roles[i] != VertexRole::kFreeKeypoint; }
};

GraphState graph_state(const Frame& frame, const KeypointMap& keypoints,
                       const TaskConfig& task, const EntityRef& controlled);
GraphState graph_state(const TrajectoryRecord& record, std::size_t t,
                       const KeypointMap& keypoints);

// World positions of the graph vertices of a recorded frame.
std::vector<Vec3> graph_positions(const Frame& frame, const KeypointMap& keypoints);

struct SceneGraph {
  Eigen::Matrix<double, Eigen::Dynamic, 5> nodes;  // (t, r, f) per vertex
  std::vector<std::uint32_t> senders;
  std::vector<std::uint32_t> receivers;
  Eigen::Matrix<double, Eigen::Dynamic, 4> edges;  // (d, c) per edge
  Eigen::Vector4d global = Eigen::Vector4d::Zero();  // (p_end - p_start, r_a)
  std::vector<VertexId> ids;

  std::size_t num_nodes() const { return static_cast<std::size_t>(nodes.rows()); }
  std::size_t num_edges() const { return senders.size(); }
};

// Fully connected directed graph in the action-local frame (origin p_start).
// Edges are ordered sender-major; d = t_receiver - t_sender; c = 1 iff both
// endpoints are adjacent keypoints. f = 1 for spheres and held keypoints.
SceneGraph build_graph(const GraphState& state, const KeypointMap& keypoints,
                       const ActionWindow& window);
SceneGraph build_graph(const Frame& frame, const KeypointMap& keypoints,
                       const ActionWindow& window);

// 1 where the vertex moved strictly more than tau between the two states.
std::vector<std::uint8_t> active_labels(std::span<const Vec3> from,
                                        std::span<const Vec3> to, double tau);
std::vector<std::uint8_t> active_labels(const Frame& from, const Frame& to,
                                        const KeypointMap& keypoints, double tau);

}  // namespace bagdyn
