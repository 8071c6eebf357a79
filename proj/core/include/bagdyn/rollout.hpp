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
#include <functional>
#include <optional>
#include <vector>

#include "bagdyn/actions.hpp"
#include "bagdyn/graph.hpp"
#include "bagdyn/model_io.hpp"
#include "bagdyn/network.hpp"

namespace bagdyn {

inline constexpr double kActiveThreshold = 0.5;

struct PredictedFrame {
  std::vector<Vec3> positions;  // world frame, spheres then keypoints
  std::size_t frame_index = 0;
  std::optional<std::vector<std::uint8_t>> active;  // from the last two-stage step
};

struct StepQuery {
  std::size_t t = 0;
  int horizon = 1;
};

// Maps a graph to per-vertex head output (probability or local positions).
using HeadFunction = std::function<HeadOutput(const SceneGraph&, const StepQuery&)>;

// A predictor of horizon h. apm may be empty when only one-stage use is needed.
struct StepModel {
  int horizon = 1;
  HeadFunction apm;
  HeadFunction ppm;
};

// Wraps trained models; they must outlive the returned value. Throws
// kDimensionMismatch when heads or horizons disagree.
StepModel learned_step_model(const Model& ppm, const Model* apm = nullptr);

enum class PredictMode : std::uint8_t { kOneStage, kTwoStage };
const char* to_string(PredictMode m);

// Vertex roles and radii from base, positions replaced.
GraphState with_positions(const GraphState& base, std::vector<Vec3> positions);

// Overwrites controlled entities after a step from t to t + h: the
// controlled sphere goes to the clamped waypoint at t + h, keypoints of a
// moving grasp shift by the waypoint displacement, keypoints of a fixed
// grasp keep their position in state.
void apply_control_overrides(const GraphState& state, const ActionTrajectory& action,
                             std::size_t t, int h, std::vector<Vec3>& positions);

PredictedFrame predict_one_stage(const GraphState& state, const StepModel& model,
                                 const ActionTrajectory& action, std::size_t t,
                                 const KeypointMap& keypoints);

// Vertices with active probability > 0.5 take the PPM position, the rest
// keep their current position; overrides as in predict_one_stage.
PredictedFrame predict_two_stage(const GraphState& state, const StepModel& model,
                                 const ActionTrajectory& action, std::size_t t,
                                 const KeypointMap& keypoints);

PredictedFrame predict(const GraphState& state, const StepModel& model, PredictMode mode,
                       const ActionTrajectory& action, std::size_t t,
                       const KeypointMap& keypoints);

// Initial frame plus t / h predictions starting at frame start. Throws
// kInvalidParameter when h does not divide t.
std::vector<PredictedFrame> rollout_fixed(const GraphState& initial, std::size_t t,
                                          const StepModel& model, PredictMode mode,
                                          const ActionTrajectory& action,
                                          const KeypointMap& keypoints, std::size_t start = 0);

struct MixedCalls {
  std::size_t m5 = 0;
  std::size_t m1 = 0;
};

// floor(t / 5) two-stage M5 steps, then t mod 5 two-stage M1 steps. Returns
// the initial frame and every intermediate frame.
std::vector<PredictedFrame> rollout_mixed(const GraphState& initial, std::size_t t,
                                          const StepModel& m5, const StepModel& m1,
                                          const ActionTrajectory& action,
                                          const KeypointMap& keypoints,
                                          MixedCalls* calls = nullptr, std::size_t start = 0);

}  // namespace bagdyn
