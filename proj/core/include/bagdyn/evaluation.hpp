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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bagdyn/dataset.hpp"
#include "bagdyn/graph.hpp"
#include "bagdyn/rollout.hpp"

namespace bagdyn {

struct ErrorReport {
  std::string group;  // task id, stiffness or action
  std::string model;  // one-stage, two-stage, mixed-horizon, persistence
  int horizon = 0;
  double mean = 0.0;  // m
  double std = 0.0;   // m, population
  std::size_t n = 0;

  friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

inline constexpr const char* kOneStage = "one-stage";
inline constexpr const char* kTwoStage = "two-stage";
inline constexpr const char* kMixedHorizon = "mixed-horizon";
inline constexpr const char* kPersistence = "persistence";

// Mean Euclidean distance over graph vertices. Throws kDimensionMismatch.
double mean_position_error(std::span<const Vec3> pred, std::span<const Vec3> gt);
double mean_position_error(const PredictedFrame& pred, const Frame& gt,
                           const KeypointMap& keypoints);

// Mean and population standard deviation of the samples.
ErrorReport summarize(std::string group, std::string model, int horizon,
                      std::span<const double> samples);

struct TaskEvaluation {
  TaskConfig task;
  const Dataset* dataset = nullptr;
  KeypointMap keypoints;
  std::optional<StepModel> m1;
  std::optional<StepModel> m5;
};

// For every (t, t + 1) pair of the split: one-stage, two-stage and
// persistence errors, reported per task id and per stiffness group.
// Throws kMissingModel naming the task.
std::vector<ErrorReport> eval_single_step(std::span<const TaskEvaluation> tasks, Split split,
                                          unsigned threads = 0);

// Rollouts from frame 0 of each trajectory of the split, reported per action
// for horizons 0 .. min(max_t, 59): iterated one-stage and two-stage M1 and
// the mixed-horizon composition. A max_t beyond the trajectory is clamped
// and noted in warnings.
std::vector<ErrorReport> eval_long_horizon(std::span<const TaskEvaluation> tasks, Split split,
                                           std::size_t max_t = 60, unsigned threads = 0,
                                           std::vector<std::string>* warnings = nullptr);

// Sorted by (group, model, horizon).
void sort_reports(std::vector<ErrorReport>& reports);

inline constexpr const char* kCsvHeader = "group,model,horizon,mean_error_m,std_error_m,n";

std::string format_csv(std::vector<ErrorReport> reports);
void export_csv(const std::vector<ErrorReport>& reports, const std::filesystem::path& path);
// Throws kCorrupt on malformed input.
std::vector<ErrorReport> parse_csv(const std::string& text);

// JSON document {"metadata": {...}, "reports": [...]}.
std::string reports_to_json(const std::vector<ErrorReport>& reports,
                            const std::map<std::string, std::string>& metadata = {});
std::vector<ErrorReport> reports_from_json(const std::string& text,
                                           std::map<std::string, std::string>* metadata = nullptr);

}  // namespace bagdyn
