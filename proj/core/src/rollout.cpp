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
#include "bagdyn/rollout.hpp"

namespace bagdyn {
namespace {

HeadFunction wrap(const Model& m) {
  const Model* p = &m;
  return [p](const SceneGraph& g, const StepQuery&) { return forward(g, p->params, p->stats); };
}

std::vector<Vec3> ppm_world(const GraphState& state, const StepModel& model, std::size_t t,
                            const SceneGraph& graph, const ActionWindow& window) {
  if (!model.ppm) throw Error(ErrorCode::kMissingModel, "no position model");
  const HeadOutput out = model.ppm(graph, {t, model.horizon});
  if (static_cast<std::size_t>(out.positions.rows()) != state.size())
    throw Error(ErrorCode::kDimensionMismatch, "position model output has the wrong vertex count");
  std::vector<Vec3> world(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    world[i] = out.positions.row(static_cast<Eigen::Index>(i)).transpose() + window.p_start;
  return world;
}

}  // namespace

StepModel learned_step_model(const Model& ppm, const Model* apm) {
  if (ppm.params.head != Head::kPpm) throw Error(ErrorCode::kDimensionMismatch, "expected a position model");
  StepModel s;
  s.horizon = ppm.params.horizon;
  s.ppm = wrap(ppm);
  if (apm) {
    if (apm->params.head != Head::kApm) throw Error(ErrorCode::kDimensionMismatch, "expected an active model");
    if (apm->params.horizon != s.horizon)
      throw Error(ErrorCode::kDimensionMismatch, "active and position models have different horizons");
    s.apm = wrap(*apm);
  }
  return s;
}

const char* to_string(PredictMode m) {
  return m == PredictMode::kOneStage ? "one-stage" : "two-stage";
}

GraphState with_positions(const GraphState& base, std::vector<Vec3> positions) {
  if (positions.size() != base.size())
    throw Error(ErrorCode::kDimensionMismatch, "vertex count mismatch");
  GraphState s = base;
  s.positions = std::move(positions);
  return s;
}

void apply_control_overrides(const GraphState& state, const ActionTrajectory& action,
                             std::size_t t, int h, std::vector<Vec3>& positions) {
  const ActionWindow w = action_window(action, t, static_cast<std::size_t>(h));
  const Vec3 delta = w.p_end - w.p_start;
  for (std::size_t i = 0; i < state.size(); ++i) {
    switch (state.roles[i]) {
      case VertexRole::kControlledSphere:
        positions[i] = w.p_end;
        break;
      case VertexRole::kMovingKeypoint:
        positions[i] = state.positions[i] + delta;
        break;
      case VertexRole::kFixedKeypoint:
        positions[i] = state.positions[i];
        break;
      default:
        break;
    }
  }
}

PredictedFrame predict_one_stage(const GraphState& state, const StepModel& model,
                                 const ActionTrajectory& action, std::size_t t,
                                 const KeypointMap& keypoints) {
  const ActionWindow window = action_window(action, t, static_cast<std::size_t>(model.horizon));
  const SceneGraph graph = build_graph(state, keypoints, window);
  PredictedFrame f;
  f.positions = ppm_world(state, model, t, graph, window);
  apply_control_overrides(state, action, t, model.horizon, f.positions);
  f.frame_index = t + static_cast<std::size_t>(model.horizon);
  return f;
}

PredictedFrame predict_two_stage(const GraphState& state, const StepModel& model,
                                 const ActionTrajectory& action, std::size_t t,
                                 const KeypointMap& keypoints) {
  if (!model.apm) throw Error(ErrorCode::kMissingModel, "no active model");
  const ActionWindow window = action_window(action, t, static_cast<std::size_t>(model.horizon));
  const SceneGraph graph = build_graph(state, keypoints, window);
  const HeadOutput act = model.apm(graph, {t, model.horizon});
  if (static_cast<std::size_t>(act.probability.size()) != state.size())
    throw Error(ErrorCode::kDimensionMismatch, "active model output has the wrong vertex count");
  const std::vector<Vec3> moved = ppm_world(state, model, t, graph, window);
  PredictedFrame f;
  f.positions = state.positions;
  std::vector<std::uint8_t> mask(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    mask[i] = act.probability(static_cast<Eigen::Index>(i)) > kActiveThreshold ? 1 : 0;
    if (mask[i]) f.positions[i] = moved[i];
  }
  apply_control_overrides(state, action, t, model.horizon, f.positions);
  f.active = std::move(mask);
  f.frame_index = t + static_cast<std::size_t>(model.horizon);
  return f;
}

PredictedFrame predict(const GraphState& state, const StepModel& model, PredictMode mode,
                       const ActionTrajectory& action, std::size_t t,
                       const KeypointMap& keypoints) {
  return mode == PredictMode::kOneStage ? predict_one_stage(state, model, action, t, keypoints)
                                        : predict_two_stage(state, model, action, t, keypoints);
}

std::vector<PredictedFrame> rollout_fixed(const GraphState& initial, std::size_t t,
                                          const StepModel& model, PredictMode mode,
                                          const ActionTrajectory& action,
                                          const KeypointMap& keypoints, std::size_t start) {
  const auto h = static_cast<std::size_t>(model.horizon);
  if (h == 0 || t % h != 0)
    throw Error(ErrorCode::kInvalidParameter,
                "horizon " + std::to_string(h) + " does not divide " + std::to_string(t));
  std::vector<PredictedFrame> out;
  out.push_back({initial.positions, start, std::nullopt});
  GraphState state = initial;
  for (std::size_t k = 0; k < t / h; ++k) {
    PredictedFrame f = predict(state, model, mode, action, start + k * h, keypoints);
    state.positions = f.positions;
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<PredictedFrame> rollout_mixed(const GraphState& initial, std::size_t t,
                                          const StepModel& m5, const StepModel& m1,
                                          const ActionTrajectory& action,
                                          const KeypointMap& keypoints, MixedCalls* calls,
                                          std::size_t start) {
  if (m5.horizon != 5 || m1.horizon != 1)
    throw Error(ErrorCode::kInvalidParameter, "mixed rollout needs horizon 5 and horizon 1 models");
  MixedCalls local;
  std::vector<PredictedFrame> out;
  out.push_back({initial.positions, start, std::nullopt});
  GraphState state = initial;
  std::size_t frame = start;
  auto step = [&](const StepModel& m, std::size_t& counter) {
    PredictedFrame f = predict_two_stage(state, m, action, frame, keypoints);
    ++counter;
    frame = f.frame_index;
    state.positions = f.positions;
    out.push_back(std::move(f));
  };
  for (std::size_t k = 0; k < t / 5; ++k) step(m5, local.m5);
  for (std::size_t k = 0; k < t % 5; ++k) step(m1, local.m1);
  if (calls) *calls = local;
  return out;
}

}  // namespace bagdyn
