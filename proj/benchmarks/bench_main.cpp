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
#include <vector>

#include <benchmark/benchmark.h>

#include "bagdyn/dataset.hpp"
#include "bagdyn/graph.hpp"
#include "bagdyn/mesh.hpp"
#include "bagdyn/network.hpp"
#include "bagdyn/scene.hpp"
#include "bagdyn/solver.hpp"
#include "bagdyn/task.hpp"
#include "bagdyn/training.hpp"

namespace {

using namespace bagdyn;

struct Fixture {
  DeformableMesh mesh = build_bag_mesh({});
  TaskConfig task = task_from_id("push_inside_ff_soft");
  SimulationConfig sim;
  TrajectoryRecord record = simulate_trajectory(task, mesh, sim, 11);
  KeypointMap keypoints = select_keypoints(mesh, 30, 0);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_SolverStep(benchmark::State& state) {
  const DeformableMesh mesh = build_bag_mesh({});
  const TaskConfig task = task_from_id("lift_inside_mr_soft");
  SceneState scene = initial_scene(task, mesh, {}, 5);
  const SolverConfig cfg;
  for (auto _ : state) {
    scene = step(scene, mesh, {}, task, cfg);
    benchmark::DoNotOptimize(scene.positions.data());
  }
}
BENCHMARK(BM_SolverStep)->Unit(benchmark::kMillisecond);

void BM_SimulateTrajectory(benchmark::State& state) {
  const auto& f = fixture();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto r = simulate_trajectory(f.task, f.mesh, f.sim, ++seed);
    benchmark::DoNotOptimize(r.frames.data());
  }
}
BENCHMARK(BM_SimulateTrajectory)->Unit(benchmark::kMillisecond);

void BM_BuildGraph(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto ex = make_example(f.record, 10, 1, f.keypoints, 1e-3);
    benchmark::DoNotOptimize(ex.graph.edges.data());
  }
}
BENCHMARK(BM_BuildGraph)->Unit(benchmark::kMicrosecond);

GNParams desk_params(Head head) { return init_params({64, 2, 2}, head, 1, 3); }

void BM_Forward(benchmark::State& state) {
  const auto& f = fixture();
  const auto ex = make_example(f.record, 10, 1, f.keypoints, 1e-3);
  const GNParams p = desk_params(Head::kPpm);
  const NormStats stats;
  for (auto _ : state) {
    auto out = forward(ex.graph, p, stats);
    benchmark::DoNotOptimize(out.positions.data());
  }
}
BENCHMARK(BM_Forward)->Unit(benchmark::kMillisecond);

void BM_GradientsF64(benchmark::State& state) {
  const auto& f = fixture();
  const std::vector<TrainingExample> batch = {make_example(f.record, 10, 1, f.keypoints, 1e-3)};
  const GNParams p = desk_params(Head::kPpm);
  const NormStats stats = compute_norm_stats(batch);
  for (auto _ : state) {
    auto g = gradients(p, stats, batch, Head::kPpm);
    benchmark::DoNotOptimize(g.loss);
  }
}
BENCHMARK(BM_GradientsF64)->Unit(benchmark::kMillisecond);

void BM_GradientsF32(benchmark::State& state) {
  const auto& f = fixture();
  const std::vector<TrainingExample> batch = {make_example(f.record, 10, 1, f.keypoints, 1e-3)};
  const GNParams p = desk_params(Head::kPpm);
  const std::vector<double> flat = flatten(p);
  const NormStats stats = compute_norm_stats(batch);
  std::vector<double> grad;
  for (auto _ : state) {
    double loss = batch_gradient_f32(p, flat, stats, batch, 1.0, grad, 1);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_GradientsF32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
