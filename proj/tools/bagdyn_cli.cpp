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
// Command-line driver: dataset generation, training, evaluation, CSV export.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bagdyn/config.hpp"
#include "bagdyn/dataset.hpp"
#include "bagdyn/evaluation.hpp"
#include "bagdyn/graph.hpp"
#include "bagdyn/mesh.hpp"
#include "bagdyn/model_io.hpp"
#include "bagdyn/rng.hpp"
#include "bagdyn/rollout.hpp"
#include "bagdyn/task.hpp"
#include "bagdyn/training.hpp"

namespace fs = std::filesystem;
using namespace bagdyn;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  unsigned threads = 0;
  std::vector<std::string> tasks;
};

PipelineConfig load(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.tasks.empty()) cfg.tasks = c.tasks;
  return cfg;
}

std::size_t task_ordinal(const TaskConfig& task) {
  const auto all = all_tasks();
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all[i] == task) return i;
  return all.size();
}

fs::path data_dir(const fs::path& root, const TaskConfig& t) { return root / t.id(); }

fs::path model_path(const fs::path& root, const TaskConfig& t, Head head, int h) {
  return root / t.id() / (std::string(to_string(head)) + "_h" + std::to_string(h) + ".drnn");
}

KeypointMap keypoints_for(const DatasetManifest& m, const PipelineConfig& cfg) {
  const DeformableMesh mesh = build_bag_mesh(m.simulation.mesh);
  return select_keypoints(mesh, static_cast<std::size_t>(cfg.graph.keypoints),
                          cfg.graph.keypoint_seed);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int gen_data(const Common& c) {
  const PipelineConfig cfg = load(c);
  const fs::path root = fs::path(c.out) / "data";
  for (const TaskConfig& task : selected_tasks(cfg)) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = mix_seed(cfg.seed, task_ordinal(task));
    const DatasetManifest m = generate_dataset(task, cfg.trajectories, seed, data_dir(root, task),
                                               cfg.simulation, c.threads);
    std::printf("%s: %zu trajectories, %zu recorded steps (%.1f s)\n", task.id().c_str(),
                m.trajectories.size(), m.recorded_steps(), seconds_since(t0));
  }
  save_config(cfg, fs::path(c.out) / "config.json");
  return 0;
}

int train_cmd(const Common& c, const std::string& data, const std::vector<std::string>& heads,
              std::vector<int> horizons) {
  const PipelineConfig cfg = load(c);
  const fs::path data_root = data.empty() ? fs::path(c.out) / "data" : fs::path(data);
  const fs::path model_root = fs::path(c.out) / "models";
  if (horizons.empty()) horizons = cfg.horizons;
  for (const TaskConfig& task : selected_tasks(cfg)) {
    const Dataset ds = load_dataset(data_dir(data_root, task), c.threads);
    const KeypointMap kp = keypoints_for(ds.manifest, cfg);
    for (int h : horizons) {
      for (const std::string& hs : heads) {
        const Head head = head_from_string(hs);
        TrainConfig tc = train_config(cfg, h);
        tc.threads = c.threads;
        tc.seed = mix_seed(cfg.training.seed, task_ordinal(task) * 16 + static_cast<std::size_t>(h) * 2 +
                                                  static_cast<std::size_t>(head));
        const auto t0 = std::chrono::steady_clock::now();
        const TrainResult r = train(ds, kp, tc, head, [&](int epoch, double tl, double vl) {
          std::printf("  %s %s h=%d epoch %d train %.6g val %.6g\n", task.id().c_str(), hs.c_str(), h,
                      epoch, tl, vl);
          std::fflush(stdout);
        });
        const fs::path path = model_path(model_root, task, head, h);
        fs::create_directories(path.parent_path());
        write_model({r.params, r.stats}, path);
        nlohmann::json curve = {{"task", task.id()},
                                {"head", hs},
                                {"horizon", h},
                                {"checkpoint", "best-val"},
                                {"best_epoch", r.curve.best_epoch},
                                {"best_val_loss", r.curve.best_val_loss},
                                {"steps", r.curve.steps},
                                {"train_loss", r.curve.train_loss},
                                {"val_loss", r.curve.val_loss}};
        fs::path curve_path = path;
        curve_path.replace_extension(".curve.json");
        write_text(curve_path, curve.dump(2) + "\n");
        std::printf("%s %s h=%d: best epoch %d, val %.6g (%.1f s)\n", task.id().c_str(), hs.c_str(), h,
                    r.curve.best_epoch, r.curve.best_val_loss, seconds_since(t0));
      }
    }
  }
  return 0;
}

struct Loaded {
  std::vector<Dataset> datasets;
  std::vector<std::map<std::string, Model>> models;
  std::vector<TaskEvaluation> tasks;
};

Loaded load_eval(const Common& c, const PipelineConfig& cfg, const std::string& data,
                 const std::string& models, const std::vector<int>& horizons) {
  const fs::path data_root = data.empty() ? fs::path(c.out) / "data" : fs::path(data);
  const fs::path model_root = models.empty() ? fs::path(c.out) / "models" : fs::path(models);
  Loaded l;
  const auto tasks = selected_tasks(cfg);
  l.datasets.reserve(tasks.size());
  l.models.resize(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    l.datasets.push_back(load_dataset(data_dir(data_root, tasks[i]), c.threads));
    for (int h : horizons)
      for (Head head : {Head::kApm, Head::kPpm}) {
        const fs::path p = model_path(model_root, tasks[i], head, h);
        if (!fs::exists(p))
          throw Error(ErrorCode::kMissingModel, "task " + tasks[i].id() + ": missing " + p.string());
        l.models[i].emplace(p.filename().string(), read_model(p));
      }
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    TaskEvaluation te;
    te.task = tasks[i];
    te.dataset = &l.datasets[i];
    te.keypoints = keypoints_for(l.datasets[i].manifest, cfg);
    for (int h : horizons) {
      const std::string suffix = "_h" + std::to_string(h) + ".drnn";
      const StepModel sm = learned_step_model(l.models[i].at("ppm" + suffix), &l.models[i].at("apm" + suffix));
      (h == 1 ? te.m1 : te.m5) = sm;
    }
    l.tasks.push_back(std::move(te));
  }
  return l;
}

int eval_single(const Common& c, const std::string& data, const std::string& models,
                const std::string& split_name) {
  const PipelineConfig cfg = load(c);
  const Loaded l = load_eval(c, cfg, data, models, {1});
  const auto reports = eval_single_step(l.tasks, split_from_string(split_name), c.threads);
  const fs::path out = fs::path(c.out) / "single_step.json";
  write_text(out, reports_to_json(reports, {{"checkpoint", "best-val"}, {"split", split_name}}));
  for (const auto& r : reports)
    std::printf("%-28s %-12s mean %.6g std %.6g n %zu\n", r.group.c_str(), r.model.c_str(), r.mean, r.std, r.n);
  return 0;
}

int eval_rollout(const Common& c, const std::string& data, const std::string& models,
                 const std::string& split_name, std::size_t max_t) {
  const PipelineConfig cfg = load(c);
  const Loaded l = load_eval(c, cfg, data, models, {1, 5});
  std::vector<std::string> warnings;
  const auto reports = eval_long_horizon(l.tasks, split_from_string(split_name), max_t, c.threads, &warnings);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const fs::path out = fs::path(c.out) / "long_horizon.json";
  write_text(out, reports_to_json(reports, {{"checkpoint", "best-val"}, {"split", split_name}}));
  std::printf("wrote %zu rows to %s\n", reports.size(), out.string().c_str());
  return 0;
}

int export_cmd(const Common& c, const std::vector<std::string>& inputs) {
  std::vector<ErrorReport> all;
  for (const auto& in : inputs) {
    const auto r = reports_from_json(read_text(in));
    all.insert(all.end(), r.begin(), r.end());
  }
  fs::path out = c.out;
  if (out.extension() != ".csv") {
    fs::create_directories(out);
    out /= inputs.size() == 1 ? fs::path(inputs.front()).stem().string() + ".csv" : "reports.csv";
  }
  export_csv(all, out);
  std::printf("wrote %zu rows to %s\n", all.size(), out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformable bag dynamics: simulation, graph-network training and evaluation"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Master seed (overrides the config)");
    sub->add_option("--out", common.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", common.threads, "Worker threads (0: hardware)");
    sub->add_option("--task", common.tasks, "Restrict to these task ids");
  };

  auto* gen = app.add_subcommand("gen-data", "Simulate the task grid into DRBG trajectories");
  add_common(gen);

  std::string data, models, split = "test";
  std::vector<std::string> heads = {"apm", "ppm"};
  std::vector<int> horizons;
  std::size_t max_t = 60;
  auto* tr = app.add_subcommand("train", "Train APM and PPM per task and horizon");
  add_common(tr);
  tr->add_option("--data", data, "Dataset root (default <out>/data)");
  tr->add_option("--head", heads, "Heads to train")->check(CLI::IsMember({"apm", "ppm"}));
  tr->add_option("--horizon", horizons, "Horizons to train")->check(CLI::IsMember({1, 5}));

  auto* es = app.add_subcommand("eval-single", "Single-step errors per task and stiffness");
  add_common(es);
  es->add_option("--data", data, "Dataset root (default <out>/data)");
  es->add_option("--models", models, "Model root (default <out>/models)");
  es->add_option("--split", split)->check(CLI::IsMember({"train", "val", "test"}))->capture_default_str();

  auto* er = app.add_subcommand("eval-rollout", "Long-horizon errors per action");
  add_common(er);
  er->add_option("--data", data, "Dataset root (default <out>/data)");
  er->add_option("--models", models, "Model root (default <out>/models)");
  er->add_option("--split", split)->check(CLI::IsMember({"train", "val", "test"}))->capture_default_str();
  er->add_option("--max-t", max_t, "Largest horizon")->capture_default_str();

  std::vector<std::string> inputs;
  auto* ex = app.add_subcommand("export-csv", "Convert report JSON files to CSV");
  add_common(ex);
  ex->add_option("--in", inputs, "Report JSON files")->required()->check(CLI::ExistingFile);

  bool desk = false;
  auto* dc = app.add_subcommand("default-config", "Print the default pipeline config");
  dc->add_flag("--desk", desk, "Desk-scale settings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) return gen_data(common);
    if (*tr) return train_cmd(common, data, heads, horizons);
    if (*es) return eval_single(common, data, models, split);
    if (*er) return eval_rollout(common, data, models, split, max_t);
    if (*ex) return export_cmd(common, inputs);
    if (*dc) {
      std::cout << config_to_json(desk ? desk_scale_config() : PipelineConfig{});
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "bagdyn: %s: %s\n", to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bagdyn: %s\n", e.what());
    return 2;
  }
  return 1;
}
