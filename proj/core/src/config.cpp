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
#include "bagdyn/config.hpp"

#include <fstream>
#include <sstream>

#include "json_io.hpp"

namespace bagdyn {
namespace {

using detail::json;
using detail::read;
using detail::reject_unknown;

json graph_json(const GraphConfig& g) {
  return {{"keypoints", g.keypoints}, {"active_threshold", g.active_threshold},
          {"keypoint_seed", g.keypoint_seed}};
}

GraphConfig graph_from(const json& j) {
  const char* s = "graph";
  reject_unknown(j, {"keypoints", "active_threshold", "keypoint_seed"}, s);
  GraphConfig g;
  read(j, "keypoints", g.keypoints, s);
  read(j, "active_threshold", g.active_threshold, s);
  read(j, "keypoint_seed", g.keypoint_seed, s);
  return g;
}

json training_json(const TrainConfig& t, const std::vector<int>& horizons) {
  return {{"learning_rate", t.learning_rate}, {"batch_size", t.batch_size},
          {"epochs", t.epochs},               {"seed", t.seed},
          {"latent", t.latent},               {"blocks", t.blocks},
          {"hidden_layers", t.hidden_layers}, {"patience", t.patience},
          {"pairs_per_epoch", t.pairs_per_epoch}, {"max_val_pairs", t.max_val_pairs},
          {"threads", t.threads},             {"horizons", horizons}};
}

void training_from(const json& j, TrainConfig& t, std::vector<int>& horizons) {
  const char* s = "training";
  reject_unknown(j, {"learning_rate", "batch_size", "epochs", "seed", "latent", "blocks",
                     "hidden_layers", "patience", "pairs_per_epoch", "max_val_pairs", "threads",
                     "horizons"}, s);
  read(j, "learning_rate", t.learning_rate, s);
  read(j, "batch_size", t.batch_size, s);
  read(j, "epochs", t.epochs, s);
  read(j, "seed", t.seed, s);
  read(j, "latent", t.latent, s);
  read(j, "blocks", t.blocks, s);
  read(j, "hidden_layers", t.hidden_layers, s);
  read(j, "patience", t.patience, s);
  read(j, "pairs_per_epoch", t.pairs_per_epoch, s);
  read(j, "max_val_pairs", t.max_val_pairs, s);
  read(j, "threads", t.threads, s);
  read(j, "horizons", horizons, s);
}

void check(const PipelineConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (c.version != kConfigVersion) fail("unsupported config version " + std::to_string(c.version));
  if (c.trajectories < 1) fail("trajectories must be positive");
  if (c.graph.keypoints < 1) fail("graph.keypoints must be positive");
  if (!(c.graph.active_threshold >= 0)) fail("graph.active_threshold must be non-negative");
  if (c.horizons.empty()) fail("training.horizons is empty");
  for (int h : c.horizons)
    if (h != 1 && h != 5) fail("training.horizons may only hold 1 and 5");
  for (const auto& id : c.tasks) task_from_id(id);
  validate(c.simulation.solver);
  TrainConfig t = c.training;
  t.tau = c.graph.active_threshold;
  validate(t);
}

}  // namespace

PipelineConfig desk_scale_config() {
  PipelineConfig c;
  c.trajectories = 100;
  c.tasks = {"push_inside_ff_soft",     "push_inside_ff_stiff",
             "circular_inside_mf_soft", "circular_inside_mf_stiff",
             "open_inside_mf_soft",     "open_inside_mf_stiff",
             "lift_inside_mr_soft",     "lift_inside_mr_stiff"};
  c.graph.keypoints = 30;
  c.training.latent = 64;
  c.training.blocks = 2;
  return c;
}

std::vector<TaskConfig> selected_tasks(const PipelineConfig& cfg) {
  if (cfg.tasks.empty()) return all_tasks();
  std::vector<TaskConfig> out;
  for (const auto& id : cfg.tasks) out.push_back(task_from_id(id));
  return out;
}

TrainConfig train_config(const PipelineConfig& cfg, int horizon) {
  TrainConfig t = cfg.training;
  t.horizon = horizon;
  t.tau = cfg.graph.active_threshold;
  return t;
}

std::string config_to_json(const PipelineConfig& c) {
  const SimulationConfig& s = c.simulation;
  json j = {{"version", c.version},
            {"seed", c.seed},
            {"trajectories", c.trajectories},
            {"tasks", c.tasks},
            {"mesh", detail::mesh_json(s.mesh)},
            {"scene", detail::scene_json(s.scene)},
            {"solver", detail::solver_json(s.solver)},
            {"action", detail::action_json(s.action)},
            {"episode",
             {{"frames", s.frames},
              {"settle_frames", s.settle_frames},
              {"settle_all_actions", s.settle_all_actions},
              {"max_resamples", s.max_resamples}}},
            {"graph", graph_json(c.graph)},
            {"training", training_json(c.training, c.horizons)}};
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config: ") + e.what());
  }
  const char* s = "config";
  reject_unknown(j, {"version", "seed", "trajectories", "tasks", "mesh", "scene", "solver",
                     "action", "episode", "graph", "training"}, s);
  PipelineConfig c;
  read(j, "version", c.version, s);
  read(j, "seed", c.seed, s);
  read(j, "trajectories", c.trajectories, s);
  read(j, "tasks", c.tasks, s);
  SimulationConfig& sim = c.simulation;
  if (j.contains("mesh")) sim.mesh = detail::mesh_from(j.at("mesh"));
  if (j.contains("scene")) sim.scene = detail::scene_from(j.at("scene"));
  if (j.contains("solver")) sim.solver = detail::solver_from(j.at("solver"));
  if (j.contains("action")) sim.action = detail::action_from(j.at("action"));
  if (j.contains("episode")) {
    const json& e = j.at("episode");
    const char* es = "episode";
    reject_unknown(e, {"frames", "settle_frames", "settle_all_actions", "max_resamples"}, es);
    read(e, "frames", sim.frames, es);
    read(e, "settle_frames", sim.settle_frames, es);
    read(e, "settle_all_actions", sim.settle_all_actions, es);
    read(e, "max_resamples", sim.max_resamples, es);
  }
  if (j.contains("graph")) c.graph = graph_from(j.at("graph"));
  if (j.contains("training")) training_from(j.at("training"), c.training, c.horizons);
  check(c);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << config_to_json(cfg);
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace bagdyn
