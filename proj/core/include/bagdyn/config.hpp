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
#include <filesystem>
#include <string>
#include <vector>

#include "bagdyn/dataset.hpp"
#include "bagdyn/graph.hpp"
#include "bagdyn/training.hpp"

namespace bagdyn {

inline constexpr int kConfigVersion = 1;

struct PipelineConfig {
  int version = kConfigVersion;
  std::uint64_t seed = 0;
  std::size_t trajectories = 100;  // per task
  std::vector<std::string> tasks;  // task ids; empty selects every task
  SimulationConfig simulation;
  GraphConfig graph;
  TrainConfig training;
  std::vector<int> horizons = {1, 5};
};

// 8 tasks (one per action and stiffness), 100 trajectories, K = 30, D = 64, L = 2.
PipelineConfig desk_scale_config();

std::vector<TaskConfig> selected_tasks(const PipelineConfig& cfg);

// Training settings for one model, with tau taken from the graph section.
TrainConfig train_config(const PipelineConfig& cfg, int horizon);

// Top-level keys: version, seed, trajectories, tasks, mesh, scene, solver,
// action, episode, graph, training. Missing keys keep defaults; unknown keys
// throw kInvalidConfig.
std::string config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

}  // namespace bagdyn
