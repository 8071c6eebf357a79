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
#include "bagdyn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bagdyn/parallel.hpp"
#include "bagdyn/rng.hpp"
#include "binary_io.hpp"
#include "json_io.hpp"

namespace bagdyn {
namespace {

using detail::ByteReader;
using detail::ByteWriter;
using detail::json;

constexpr char kMagic[5] = "DRBG";

ActionParams EpisodeActionParams(const SimulationConfig& cfg) {
  ActionParams p = cfg.action;
  p.steps = cfg.frames - 1;
  p.recorded_dt = cfg.solver.recorded_dt;
  return p;
}

template <typename E>
E CheckedEnum(std::uint32_t raw, std::uint32_t count, const char* what) {
  if (raw >= count) {
    throw Error(ErrorCode::kCorrupt, std::string("trajectory: bad ") + what + " value");
  }
  return static_cast<E>(raw);
}

}  // namespace

Frame record_frame(const SceneState& scene, const Vec3& control) {
  Frame f;
  f.positions.reserve(scene.positions.size());
  for (const Vec3& x : scene.positions) f.positions.push_back(to_float(x));
  f.spheres.reserve(scene.spheres.size());
  for (const RigidSphere& s : scene.spheres) {
    f.spheres.push_back({to_float(s.center), static_cast<float>(s.radius)});
  }
  for (int side = 0; side < 2; ++side) {
    if (scene.grasps[side].holds()) f.grasped[side] = scene.grasps[side].vertices;
  }
  f.control = to_float(control);
  return f;
}

TrajectoryRecord simulate_trajectory(const TaskConfig& task, const DeformableMesh& mesh,
                                     const SimulationConfig& cfg, std::uint64_t seed) {
  if (cfg.frames < 2) {
    throw Error(ErrorCode::kInvalidParameter, "simulate_trajectory: need >= 2 frames");
  }
  SceneState scene = initial_scene(task, mesh, cfg.scene, mix_seed(seed, 1));
  if (task.action == ActionKind::kLift || cfg.settle_all_actions) {
    scene = settle(scene, mesh, task, cfg.solver, cfg.settle_frames);
  }
  scene.frame_index = 0;

  TrajectoryRecord rec;
  rec.task = task;
  rec.seed = seed;
  rec.action = plan_action(task, scene, EpisodeActionParams(cfg), mix_seed(seed, 2));
  for (Vec3& w : rec.action.waypoints) w = quantize_f32(w);
  rec.action.r_a = quantize_f32(rec.action.r_a);

  rec.frames.reserve(cfg.frames);
  rec.frames.push_back(record_frame(scene, rec.action.waypoints[0]));
  for (int k = 1; k < cfg.frames; ++k) {
    const ControlTarget cmd{rec.action.target, rec.action.waypoints[k]};
    scene = step(scene, mesh, std::span(&cmd, 1), task, cfg.solver);
    rec.frames.push_back(record_frame(scene, rec.action.waypoints[k]));
  }
  return rec;
}

TrajectoryRecord generate_trajectory(const TaskConfig& task, const DeformableMesh& mesh,
                                     const SimulationConfig& cfg, std::uint64_t seed,
                                     int* resamples) {
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : mix_seed(seed, 1000 + attempt);
    try {
      TrajectoryRecord rec = simulate_trajectory(task, mesh, cfg, s);
      if (resamples) *resamples = attempt;
      return rec;
    } catch (const Error& e) {
      const bool retryable = e.code() == ErrorCode::kSimulationDiverged ||
                             e.code() == ErrorCode::kPlacementFailed;
      if (!retryable || attempt >= cfg.max_resamples) throw;
    }
  }
}

std::vector<std::uint8_t> encode_trajectory(const TrajectoryRecord& r) {
  if (r.frames.empty()) {
    throw Error(ErrorCode::kInvalidParameter, "encode_trajectory: no frames");
  }
  const std::size_t particles = r.frames[0].positions.size();
  const std::size_t spheres = r.frames[0].spheres.size();
  for (const Frame& f : r.frames) {
    if (f.positions.size() != particles || f.spheres.size() != spheres) {
      throw Error(ErrorCode::kInvalidParameter,
                  "encode_trajectory: frames disagree on particle or sphere count");
    }
  }

  ByteWriter w;
  w.magic(kMagic);
  w.u32(kTrajectoryFormatVersion);
  w.u32(static_cast<std::uint32_t>(particles));
  w.u32(static_cast<std::uint32_t>(spheres));
  w.u32(static_cast<std::uint32_t>(r.frames.size()));
  for (const Frame& f : r.frames) {
    for (const Vec3f& x : f.positions) w.vec3f(x);
    for (const SphereRecord& s : f.spheres) {
      w.vec3f(s.center);
      w.f32(s.radius);
    }
    w.vec3f(f.control);
  }
  for (const Frame& f : r.frames) {
    for (const auto& g : f.grasped) {
      w.u32(static_cast<std::uint32_t>(g.size()));
      for (Index v : g) w.u32(v);
    }
  }
  w.u32(static_cast<std::uint32_t>(r.action.kind));
  w.u32(static_cast<std::uint32_t>(r.action.target.kind));
  w.u32(r.action.target.index);
  w.f32(static_cast<float>(r.action.r_a));
  w.u32(static_cast<std::uint32_t>(r.action.waypoints.size()));
  for (const Vec3& p : r.action.waypoints) w.vec3f(to_float(p));
  const TaskConfig& t = r.task;
  for (std::uint8_t field : {static_cast<std::uint8_t>(t.stiffness),
                             static_cast<std::uint8_t>(t.content),
                             static_cast<std::uint8_t>(t.left_handle),
                             static_cast<std::uint8_t>(t.right_handle),
                             static_cast<std::uint8_t>(t.controlled_target),
                             static_cast<std::uint8_t>(t.action)}) {
    w.u32(field);
  }
  w.u64(r.seed);
  return w.take();
}

TrajectoryRecord decode_trajectory(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, "trajectory");
  if (!in.magic_is(kMagic)) {
    throw Error(ErrorCode::kBadMagic, "trajectory: bad magic (expected DRBG)");
  }
  const std::uint32_t version = in.u32();
  if (version != kTrajectoryFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "trajectory: unsupported format version " + std::to_string(version));
  }
  const std::uint32_t particles = in.u32();
  const std::uint32_t spheres = in.u32();
  const std::uint32_t frames = in.u32();
  in.need((std::size_t{particles} * 12 + std::size_t{spheres} * 16 + 12) * frames);

  TrajectoryRecord r;
  r.frames.resize(frames);
  for (Frame& f : r.frames) {
    f.positions.resize(particles);
    for (Vec3f& x : f.positions) x = in.vec3f();
    f.spheres.resize(spheres);
    for (SphereRecord& s : f.spheres) {
      s.center = in.vec3f();
      s.radius = in.f32();
    }
    f.control = in.vec3f();
  }
  for (Frame& f : r.frames) {
    for (auto& g : f.grasped) {
      const std::uint32_t n = in.u32();
      in.need(std::size_t{n} * 4);
      g.resize(n);
      for (Index& v : g) {
        v = in.u32();
        if (v >= particles) throw Error(ErrorCode::kCorrupt, "trajectory: grasp index out of range");
      }
    }
  }
  r.action.kind = CheckedEnum<ActionKind>(in.u32(), 4, "action kind");
  r.action.target.kind = CheckedEnum<EntityRef::Kind>(in.u32(), 2, "target kind");
  r.action.target.index = in.u32();
  r.action.r_a = in.f32();
  const std::uint32_t n_way = in.u32();
  in.need(std::size_t{n_way} * 12);
  r.action.waypoints.resize(n_way);
  for (Vec3& p : r.action.waypoints) p = to_double(in.vec3f());
  r.task.stiffness = CheckedEnum<Stiffness>(in.u32(), 2, "stiffness");
  r.task.content = CheckedEnum<BagContent>(in.u32(), 2, "content");
  r.task.left_handle = CheckedEnum<HandleState>(in.u32(), 3, "handle state");
  r.task.right_handle = CheckedEnum<HandleState>(in.u32(), 3, "handle state");
  r.task.controlled_target = CheckedEnum<ControlledTarget>(in.u32(), 2, "controlled target");
  r.task.action = CheckedEnum<ActionKind>(in.u32(), 4, "action");
  r.seed = in.u64();
  if (in.remaining() != 0) {
    throw Error(ErrorCode::kCorrupt, "trajectory: trailing bytes after record");
  }
  return r;
}

void write_trajectory(const TrajectoryRecord& record, const std::filesystem::path& path) {
  detail::write_file(path, encode_trajectory(record));
}

TrajectoryRecord read_trajectory(const std::filesystem::path& path) {
  return decode_trajectory(detail::read_file(path));
}

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "unassigned";
  }
  return "?";
}

Split split_from_string(const std::string& s) {
  for (Split v : {Split::kTrain, Split::kVal, Split::kTest, Split::kUnassigned}) {
    if (s == to_string(v)) return v;
  }
  throw Error(ErrorCode::kInvalidParameter, "unknown split '" + s + "'");
}

std::size_t DatasetManifest::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(
      trajectories.begin(), trajectories.end(),
      [s](const TrajectoryEntry& e) { return e.split == s; }));
}

DatasetManifest split(DatasetManifest manifest, std::array<double, 3> ratios) {
  const std::size_t n = manifest.trajectories.size();
  if (n < 3) {
    throw Error(ErrorCode::kInvalidParameter, "split: need at least 3 trajectories");
  }
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
    throw Error(ErrorCode::kInvalidParameter, "split: ratios must be >= 0 and sum to 1");
  }
  const auto n_val = static_cast<std::size_t>(std::floor(ratios[1] * n + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(ratios[2] * n + 1e-9));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t k) {
    return mix_seed(manifest.master_seed ^ 0x5EEDu, manifest.trajectories[k].index);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = key(a), kb = key(b);
    return ka != kb ? ka < kb : a < b;
  });
  for (std::size_t r = 0; r < n; ++r) {
    Split s = Split::kTrain;
    if (r < n_val) {
      s = Split::kVal;
    } else if (r < n_val + n_test) {
      s = Split::kTest;
    }
    manifest.trajectories[order[r]].split = s;
  }
  return manifest;
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::size_t index) {
  return mix_seed(master_seed, index);
}

DatasetManifest generate_dataset(const TaskConfig& task, std::size_t n_traj,
                                 std::uint64_t master_seed,
                                 const std::filesystem::path& out_dir,
                                 const SimulationConfig& cfg, unsigned threads) {
  if (n_traj == 0) {
    throw Error(ErrorCode::kInvalidParameter, "generate_dataset: n_traj must be positive");
  }
  if (!is_valid_task(task)) {
    throw Error(ErrorCode::kInvalidParameter, "generate_dataset: task is not a valid row");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + out_dir.string() + "'");

  const DeformableMesh mesh = build_bag_mesh(cfg.mesh);
  DatasetManifest m;
  m.task = task;
  m.master_seed = master_seed;
  m.frames_per_trajectory = static_cast<std::size_t>(cfg.frames);
  m.simulation = cfg;
  m.trajectories.resize(n_traj);

  parallel_for(n_traj, [&](std::size_t i) {
    TrajectoryEntry& e = m.trajectories[i];
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%05zu.drbg", i);
    e.index = i;
    e.file = name;
    int resamples = 0;
    const TrajectoryRecord rec =
        generate_trajectory(task, mesh, cfg, trajectory_seed(master_seed, i), &resamples);
    e.seed = rec.seed;
    e.resamples = resamples;
    write_trajectory(rec, out_dir / e.file);
  }, threads);

  if (n_traj >= 3) {
    m = split(std::move(m));
  } else {
    for (auto& e : m.trajectories) e.split = Split::kTrain;
  }
  write_manifest(m, out_dir / "manifest.json");
  return m;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json entries = json::array();
  for (const TrajectoryEntry& e : m.trajectories) {
    entries.push_back({{"index", e.index},
                       {"file", e.file},
                       {"seed", e.seed},
                       {"resamples", e.resamples},
                       {"split", to_string(e.split)}});
  }
  json j = {{"format_version", m.format_version},
            {"task_id", m.task_id()},
            {"master_seed", m.master_seed},
            {"frames_per_trajectory", m.frames_per_trajectory},
            {"trajectory_count", m.trajectories.size()},
            {"split_counts",
             {{"train", m.count(Split::kTrain)},
              {"val", m.count(Split::kVal)},
              {"test", m.count(Split::kTest)}}},
            {"trajectories", entries},
            {"simulation", detail::simulation_json(m.simulation)}};
  return j.dump(2);
}

DatasetManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorrupt, std::string("manifest: ") + e.what());
  }
  try {
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != static_cast<int>(kTrajectoryFormatVersion)) {
      throw Error(ErrorCode::kVersionMismatch,
                  "manifest: unsupported format version " + std::to_string(m.format_version));
    }
    m.task = task_from_id(j.at("task_id").get<std::string>());
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.frames_per_trajectory = j.at("frames_per_trajectory").get<std::size_t>();
    for (const json& e : j.at("trajectories")) {
      TrajectoryEntry t;
      t.index = e.at("index").get<std::size_t>();
      t.file = e.at("file").get<std::string>();
      t.seed = e.at("seed").get<std::uint64_t>();
      t.resamples = e.at("resamples").get<int>();
      t.split = split_from_string(e.at("split").get<std::string>());
      m.trajectories.push_back(std::move(t));
    }
    if (j.at("trajectory_count").get<std::size_t>() != m.trajectories.size()) {
      throw Error(ErrorCode::kCorrupt, "manifest: trajectory_count mismatch");
    }
    if (j.contains("simulation")) m.simulation = detail::simulation_from(j.at("simulation"));
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorrupt, std::string("manifest: ") + e.what());
  }
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << manifest_to_json(manifest) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str());
}

std::vector<const TrajectoryRecord*> Dataset::select(Split s) const {
  std::vector<const TrajectoryRecord*> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (manifest.trajectories[i].split == s) out.push_back(&records[i]);
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& dir, unsigned threads) {
  Dataset d;
  d.manifest = read_manifest(dir / "manifest.json");
  d.records.resize(d.manifest.trajectories.size());
  parallel_for(d.records.size(), [&](std::size_t i) {
    d.records[i] = read_trajectory(dir / d.manifest.trajectories[i].file);
  }, threads);
  return d;
}

}  // namespace bagdyn
