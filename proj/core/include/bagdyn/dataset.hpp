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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bagdyn/actions.hpp"
#include "bagdyn/common.hpp"
#include "bagdyn/mesh.hpp"
#include "bagdyn/scene.hpp"
#include "bagdyn/solver.hpp"
#include "bagdyn/task.hpp"

namespace bagdyn {

inline constexpr std::uint32_t kTrajectoryFormatVersion = 1;
inline constexpr std::size_t kFramesPerTrajectory = 60;

struct SimulationConfig {
  MeshParams mesh;
  SceneParams scene;
  SolverConfig solver;
  ActionParams action;
  int frames = static_cast<int>(kFramesPerTrajectory);
  int settle_frames = 40;
  // Lift always settles; other actions settle too unless this is false.
  bool settle_all_actions = true;
  int max_resamples = 3;
};

struct SphereRecord {
  Vec3f center = Vec3f::Zero();
  float radius = 0.0f;

  friend bool operator==(const SphereRecord&, const SphereRecord&) = default;
};

struct Frame {
  std::vector<Vec3f> positions;
  std::vector<SphereRecord> spheres;
  std::array<std::vector<Index>, 2> grasped;  // by HandleSide, held vertices only
  Vec3f control = Vec3f::Zero();

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct TrajectoryRecord {
  TaskConfig task;
  std::uint64_t seed = 0;
  std::vector<Frame> frames;
  // Waypoints and r_a are float32-representable.
  ActionTrajectory action;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

Frame record_frame(const SceneState& scene, const Vec3& control);

// One episode: initial scene, optional settle, action plan, then frames - 1
// solver steps. Throws on divergence or placement failure.
TrajectoryRecord simulate_trajectory(const TaskConfig& task, const DeformableMesh& mesh,
                                     const SimulationConfig& cfg, std::uint64_t seed);

// simulate_trajectory with up to cfg.max_resamples fresh derived seeds after
// a divergence or placement failure. resamples receives the number used.
TrajectoryRecord generate_trajectory(const TaskConfig& task, const DeformableMesh& mesh,
                                     const SimulationConfig& cfg, std::uint64_t seed,
                                     int* resamples = nullptr);

// Binary layout (little-endian):
//   "DRBG" | u32 version | u32 particle_count | u32 sphere_count | u32 frame_count
//   frames:  per frame, positions (3 f32 each), spheres (cx cy cz r f32),
//            control position (3 f32)
//   grasps:  per frame, u32 n_left, n_left u32, u32 n_right, n_right u32
//   action:  u32 kind | u32 target kind | u32 target index | f32 r_a |
//            u32 waypoint_count | waypoints (3 f32 each)
//   task:    6 x u32 (stiffness, content, left, right, controlled, action) |
//            u64 seed
std::vector<std::uint8_t> encode_trajectory(const TrajectoryRecord& record);

// Throws kBadMagic, kVersionMismatch, kTruncated or kCorrupt.
TrajectoryRecord decode_trajectory(std::span<const std::uint8_t> bytes);

void write_trajectory(const TrajectoryRecord& record, const std::filesystem::path& path);
TrajectoryRecord read_trajectory(const std::filesystem::path& path);

enum class Split : std::uint8_t { kTrain, kVal, kTest, kUnassigned };
const char* to_string(Split s);
Split split_from_string(const std::string& s);

struct TrajectoryEntry {
  std::size_t index = 0;
  std::string file;
  std::uint64_t seed = 0;  // seed actually simulated
  int resamples = 0;
  Split split = Split::kUnassigned;
};

struct DatasetManifest {
  int format_version = static_cast<int>(kTrajectoryFormatVersion);
  TaskConfig task;
  std::uint64_t master_seed = 0;
  std::size_t frames_per_trajectory = kFramesPerTrajectory;
  std::vector<TrajectoryEntry> trajectories;
  SimulationConfig simulation;

  std::string task_id() const { return task.id(); }
  std::size_t recorded_steps() const {
    return trajectories.size() * frames_per_trajectory;
  }
  std::size_t count(Split s) const;
};

// Assigns val/test counts floor(ratio * n) by ranking a hash of each
// trajectory index; the remainder goes to train. Throws for n < 3 or ratios
// that do not sum to 1.
DatasetManifest split(DatasetManifest manifest,
                      std::array<double, 3> ratios = {0.8, 0.1, 0.1});

// Per-trajectory seed for index i.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::size_t index);

// Simulates n_traj trajectories (in parallel), writes traj_NNNNN.drbg files
// and manifest.json into out_dir, and returns the manifest.
DatasetManifest generate_dataset(const TaskConfig& task, std::size_t n_traj,
                                 std::uint64_t master_seed,
                                 const std::filesystem::path& out_dir,
                                 const SimulationConfig& cfg, unsigned threads = 0);

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct Dataset {
  DatasetManifest manifest;
  std::vector<TrajectoryRecord> records;  // aligned with manifest.trajectories

  std::vector<const TrajectoryRecord*> select(Split s) const;
};

// Reads manifest.json and every trajectory file in dir.
Dataset load_dataset(const std::filesystem::path& dir, unsigned threads = 0);

}  // namespace bagdyn
