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
#include <span>
#include <vector>

#include "bagdyn/dataset.hpp"
#include "bagdyn/graph.hpp"
#include "bagdyn/network.hpp"

namespace bagdyn {

struct TrainConfig {
  int horizon = 1;
  double learning_rate = 1e-3;
  int batch_size = 16;
  int epochs = 50;
  std::uint64_t seed = 0;
  double tau = 1e-3;  // m, active threshold
  int latent = 128;
  int blocks = 3;
  int hidden_layers = 2;
  int patience = 10;
  std::size_t pairs_per_epoch = 0;  // 0: every training pair
  std::size_t max_val_pairs = 0;    // 0: every validation pair
  unsigned threads = 0;

  NetworkConfig network() const { return {latent, blocks, hidden_layers}; }
};

// Throws kInvalidConfig.
void validate(const TrainConfig& cfg);

struct PairRef {
  std::uint32_t record = 0;
  std::uint32_t t = 0;
};

// Every (record, t) with t + h inside the record.
std::vector<PairRef> enumerate_pairs(std::span<const TrajectoryRecord* const> records, int h);

// Graph of frame t with the action window over [t, t + h]; labels from the
// displacement to frame t + h, targets are frame t + h positions in the
// same local frame.
TrainingExample make_example(const TrajectoryRecord& record, std::size_t t, int h,
                             const KeypointMap& keypoints, double tau);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m, v;
  std::uint64_t step = 0;
};

void adam_step(std::vector<double>& params, std::span<const double> grad, AdamState& state,
               const AdamConfig& cfg);

// Mixed-precision batch gradient: float32 kernel, float64 accumulation in
// batch order. Returns the mean batch loss; grad receives loss_scale times
// its gradient (flattened).
double batch_gradient_f32(const GNParams& shape, std::span<const double> flat_params,
                          const NormStats& stats, std::span<const TrainingExample> batch,
                          double loss_scale, std::vector<double>& grad, unsigned threads = 0);

// Loss scale applied to the PPM objective so normalized displacements have
// unit weight.
double regression_loss_scale(const NormStats& stats);

struct TrainingCurve {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  std::size_t steps = 0;
};

struct TrainResult {
  GNParams params;  // best validation epoch, rounded to float32
  NormStats stats;
  TrainingCurve curve;
};

using EpochCallback = std::function<void(int epoch, double train_loss, double val_loss)>;

// Throws kEmptyInput without training pairs and kTrainingDiverged on a
// non-finite loss.
TrainResult train(const Dataset& dataset, const KeypointMap& keypoints, const TrainConfig& cfg,
                  Head head, const EpochCallback& on_epoch = {});

struct OverfitResult {
  std::vector<double> losses;  // before each step, then the final loss
  int steps = 0;               // optimizer steps taken
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double accuracy = 0.0;  // APM only
};

// Repeated Adam steps on one fixed batch.
// Stops early once a step's loss is below stop_ratio times the initial loss.
OverfitResult overfit_batch(std::span<const TrainingExample> batch, const NormStats& stats,
                            const TrainConfig& cfg, Head head, int steps, double stop_ratio = 0.0);

// Fraction of vertices whose thresholded APM output matches the label.
double apm_accuracy(const GNParams& params, const NormStats& stats,
                    std::span<const TrainingExample> batch);

}  // namespace bagdyn
