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
#include "bagdyn/graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "bagdyn/rng.hpp"

namespace bagdyn {
namespace {

constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

std::vector<std::vector<Index>> neighbours(const DeformableMesh& mesh) {
  std::vector<std::vector<Index>> adj(mesh.particle_count());
  for (const Link& e : mesh.stretch_edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  return adj;
}

Index handle_representative(const DeformableMesh& mesh,
                            const std::vector<Index>& cluster) {
  if (cluster.empty()) throw Error(ErrorCode::kInvalidParameter, "empty handle vertex set");
  Vec3 c = Vec3::Zero();
  for (Index v : cluster) c += mesh.rest_positions[v];
  c /= static_cast<double>(cluster.size());
  Index best = cluster.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (Index v : cluster) {
    const double d = (mesh.rest_positions[v] - c).squaredNorm();
    if (d < best_d || (d == best_d && v < best)) {
      best = v;
      best_d = d;
    }
  }
  return best;
}

}  // namespace

bool KeypointMap::adjacent(std::uint32_t a, std::uint32_t b) const {
  const std::size_t k = indices.size();
  if (a >= k || b >= k) return false;
  if (matrix.size() != k * k) {
    return std::binary_search(adjacency.begin(), adjacency.end(),
                              std::pair{std::min(a, b), std::max(a, b)});
  }
  return matrix[a * k + b] != 0;
}

void finalize_keypoints(KeypointMap& map) {
  const std::size_t k = map.indices.size();
  std::sort(map.adjacency.begin(), map.adjacency.end());
  map.matrix.assign(k * k, 0);
  for (auto [a, b] : map.adjacency) {
    map.matrix[a * k + b] = 1;
    map.matrix[b * k + a] = 1;
  }
}

std::vector<Index> farthest_point_sampling(std::span<const Vec3> points,
                                           std::span<const Index> seeds,
                                           std::size_t count) {
  const std::size_t n = points.size();
  if (count > n) throw Error(ErrorCode::kInvalidParameter, "more samples than points");
  if (seeds.empty() && count > 0) throw Error(ErrorCode::kInvalidParameter, "no seed points");
  std::vector<Index> out;
  out.reserve(count);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  auto take = [&](Index s) {
    out.push_back(s);
    for (std::size_t i = 0; i < n; ++i)
      dist[i] = std::min(dist[i], (points[i] - points[s]).squaredNorm());
  };
  for (Index s : seeds) {
    if (out.size() == count) break;
    if (s >= n) throw Error(ErrorCode::kInvalidParameter, "seed index out of range");
    if (std::find(out.begin(), out.end(), s) != out.end()) continue;
    take(s);
  }
  while (out.size() < count) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (dist[i] > dist[best]) best = i;
    take(static_cast<Index>(best));
  }
  return out;
}

KeypointMap select_keypoints(const DeformableMesh& mesh, std::size_t K,
                             std::uint64_t seed) {
  std::vector<Index> seeds;
  auto add = [&](Index v) {
    if (std::find(seeds.begin(), seeds.end(), v) == seeds.end()) seeds.push_back(v);
  };
  add(handle_representative(mesh, mesh.left_handle_vertices));
  add(handle_representative(mesh, mesh.right_handle_vertices));
  const std::size_t nr = mesh.rim_vertices.size();
  if (nr < 4) throw Error(ErrorCode::kInvalidParameter, "rim has fewer than 4 vertices");
  const std::size_t phase = mix_seed(seed, 0x4B50) % nr;
  for (std::size_t q = 0; q < 4; ++q) add(mesh.rim_vertices[(phase + q * nr / 4) % nr]);
  add(mesh.bottom_center);
  if (K < seeds.size())
    throw Error(ErrorCode::kInvalidParameter,
                "K=" + std::to_string(K) + " is below the " +
                    std::to_string(seeds.size()) + " mandatory keypoints");

  KeypointMap map;
  map.indices = farthest_point_sampling(mesh.rest_positions, seeds, K);
  map.adjacency = keypoint_adjacency(mesh, map.indices);
  for (int side = 0; side < 2; ++side) {
    const auto& cluster = side == 0 ? mesh.left_handle_vertices : mesh.right_handle_vertices;
    for (std::uint32_t k = 0; k < map.indices.size(); ++k)
      if (std::find(cluster.begin(), cluster.end(), map.indices[k]) != cluster.end())
        map.handle_keypoints[side].push_back(k);
  }
  finalize_keypoints(map);
  return map;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> keypoint_adjacency(
    const DeformableMesh& mesh, std::span<const Index> keypoints) {
  const std::size_t n = mesh.particle_count();
  const auto adj = neighbours(mesh);
  std::vector<std::uint32_t> owner(n, kUnassigned);
  std::vector<Index> frontier;
  for (std::uint32_t k = 0; k < keypoints.size(); ++k) {
    const Index v = keypoints[k];
    if (v >= n) throw Error(ErrorCode::kInvalidParameter, "keypoint index out of range");
    if (owner[v] != kUnassigned) throw Error(ErrorCode::kInvalidParameter, "duplicate keypoint");
    owner[v] = k;
    frontier.push_back(v);
  }
  std::vector<std::uint32_t> candidate(n, kUnassigned);
  while (!frontier.empty()) {
    std::vector<Index> next;
    for (Index u : frontier) {
      for (Index v : adj[u]) {
        if (owner[v] != kUnassigned) continue;
        if (candidate[v] == kUnassigned) next.push_back(v);
        candidate[v] = std::min(candidate[v], owner[u]);
      }
    }
    for (Index v : next) owner[v] = candidate[v];
    frontier = std::move(next);
  }
  for (std::size_t v = 0; v < n; ++v)
    if (owner[v] == kUnassigned)
      throw Error(ErrorCode::kInvalidParameter,
                  "vertex " + std::to_string(v) + " lies in a component without keypoints");

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const Link& e : mesh.stretch_edges) {
    const std::uint32_t a = owner[e.i], b = owner[e.j];
    if (a != b) pairs.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::vector<Vec3> graph_positions(const Frame& frame, const KeypointMap& keypoints) {
  std::vector<Vec3> out;
  out.reserve(frame.spheres.size() + keypoints.size());
  for (const SphereRecord& s : frame.spheres) out.push_back(to_double(s.center));
  for (Index v : keypoints.indices) {
    if (v >= frame.positions.size())
      throw Error(ErrorCode::kDimensionMismatch, "keypoint outside frame");
    out.push_back(to_double(frame.positions[v]));
  }
  return out;
}

GraphState graph_state(const Frame& frame, const KeypointMap& keypoints,
                       const TaskConfig& task, const EntityRef& controlled) {
  GraphState g;
  g.positions = graph_positions(frame, keypoints);
  g.sphere_count = frame.spheres.size();
  const std::size_t n = g.positions.size();
  g.radii.resize(n, kKeypointRadius);
  g.roles.resize(n, VertexRole::kFreeKeypoint);
  g.ids.resize(n);
  for (std::size_t s = 0; s < g.sphere_count; ++s) {
    g.radii[s] = frame.spheres[s].radius;
    const bool ctl = controlled.kind == EntityRef::Kind::kSphere && controlled.index == s;
    g.roles[s] = ctl ? VertexRole::kControlledSphere : VertexRole::kFreeSphere;
    g.ids[s] = {true, static_cast<Index>(s)};
  }
  for (std::size_t k = 0; k < keypoints.size(); ++k) {
    const Index v = keypoints.indices[k];
    const std::size_t i = g.sphere_count + k;
    g.ids[i] = {false, v};
    for (int side = 0; side < 2; ++side) {
      const auto& held = frame.grasped[side];
      if (std::find(held.begin(), held.end(), v) == held.end()) continue;
      g.roles[i] = task.handle(static_cast<HandleSide>(side)) == HandleState::kMoving
                       ? VertexRole::kMovingKeypoint
                       : VertexRole::kFixedKeypoint;
    }
  }
  return g;
}

GraphState graph_state(const TrajectoryRecord& record, std::size_t t,
                       const KeypointMap& keypoints) {
  if (t >= record.frames.size())
    throw Error(ErrorCode::kInvalidParameter, "frame index beyond trajectory");
  return graph_state(record.frames[t], keypoints, record.task, record.action.target);
}

SceneGraph build_graph(const GraphState& state, const KeypointMap& keypoints,
                       const ActionWindow& window) {
  const std::size_t n = state.size();
  if (n < 2) throw Error(ErrorCode::kInvalidParameter, "graph needs at least two vertices");
  SceneGraph g;
  g.nodes.resize(static_cast<Eigen::Index>(n), 5);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 t = state.positions[i] - window.p_start;
    g.nodes.row(i) << t.x(), t.y(), t.z(), state.radii[i], state.held(i) ? 1.0 : 0.0;
  }
  const std::size_t e = n * (n - 1);
  g.senders.reserve(e);
  g.receivers.reserve(e);
  g.edges.resize(static_cast<Eigen::Index>(e), 4);
  const std::size_t ns = state.sphere_count;
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t r = 0; r < n; ++r) {
      if (s == r) continue;
      g.senders.push_back(static_cast<std::uint32_t>(s));
      g.receivers.push_back(static_cast<std::uint32_t>(r));
      const bool c = s >= ns && r >= ns &&
                     keypoints.adjacent(static_cast<std::uint32_t>(s - ns),
                                        static_cast<std::uint32_t>(r - ns));
      g.edges.row(row).head<3>() = g.nodes.row(r).head<3>() - g.nodes.row(s).head<3>();
      g.edges(row, 3) = c ? 1.0 : 0.0;
      ++row;
    }
  }
  g.global.head<3>() = window.p_end - window.p_start;
  g.global(3) = window.r_a;
  g.ids = state.ids;
  return g;
}

SceneGraph build_graph(const Frame& frame, const KeypointMap& keypoints,
                       const ActionWindow& window) {
  GraphState s;
  s.positions = graph_positions(frame, keypoints);
  s.sphere_count = frame.spheres.size();
  s.radii.assign(s.positions.size(), kKeypointRadius);
  s.roles.assign(s.positions.size(), VertexRole::kFreeKeypoint);
  s.ids.resize(s.positions.size());
  for (std::size_t i = 0; i < s.sphere_count; ++i) {
    s.radii[i] = frame.spheres[i].radius;
    s.roles[i] = VertexRole::kFreeSphere;
    s.ids[i] = {true, static_cast<Index>(i)};
  }
  for (std::size_t k = 0; k < keypoints.size(); ++k) {
    const Index v = keypoints.indices[k];
    s.ids[s.sphere_count + k] = {false, v};
    for (const auto& held : frame.grasped)
      if (std::find(held.begin(), held.end(), v) != held.end())
        s.roles[s.sphere_count + k] = VertexRole::kFixedKeypoint;
  }
  return build_graph(s, keypoints, window);
}

std::vector<std::uint8_t> active_labels(std::span<const Vec3> from,
                                        std::span<const Vec3> to, double tau) {
  if (from.size() != to.size())
    throw Error(ErrorCode::kDimensionMismatch, "vertex count mismatch");
  std::vector<std::uint8_t> out(from.size());
  for (std::size_t i = 0; i < from.size(); ++i)
    out[i] = (to[i] - from[i]).norm() > tau ? 1 : 0;
  return out;
}

std::vector<std::uint8_t> active_labels(const Frame& from, const Frame& to,
                                        const KeypointMap& keypoints, double tau) {
  const auto a = graph_positions(from, keypoints);
  const auto b = graph_positions(to, keypoints);
  return active_labels(a, b, tau);
}

}  // namespace bagdyn
