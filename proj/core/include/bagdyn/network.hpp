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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bagdyn/graph.hpp"

namespace bagdyn {

enum class Head : std::uint8_t { kApm = 0, kPpm = 1 };
const char* to_string(Head h);
Head head_from_string(const std::string& s);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Rectifier between layers, no activation after the last one.
struct MLPParams {
  std::vector<DenseLayer> layers;

  int in_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols()); }
  int out_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows()); }

  friend bool operator==(const MLPParams&, const MLPParams&) = default;
};

struct ProcessorBlock {
  MLPParams edge;    // [e, v_sender, v_receiver, u] -> D
  MLPParams node;    // [v, mean incoming e, u] -> D
  MLPParams global;  // [u, mean v, mean e] -> D

  friend bool operator==(const ProcessorBlock&, const ProcessorBlock&) = default;
};

struct GNParams {
  Head head = Head::kPpm;
  int horizon = 1;
  int latent = 128;
  MLPParams node_encoder;
  MLPParams edge_encoder;
  MLPParams global_encoder;
  std::vector<ProcessorBlock> blocks;
  MLPParams decoder;  // D -> 2 logits (APM) or 3 (PPM)

  std::size_t parameter_count() const;

  friend bool operator==(const GNParams&, const GNParams&) = default;
};

struct NetworkConfig {
  int latent = 128;
  int blocks = 3;
  int hidden_layers = 2;
};

// Fixed traversal order shared by flatten, optimizers and the model file.
void for_each_layer(GNParams& p, const std::function<void(DenseLayer&)>& fn);
void for_each_layer(const GNParams& p, const std::function<void(const DenseLayer&)>& fn);

std::vector<double> flatten(const GNParams& p);
void unflatten(GNParams& p, std::span<const double> values);
GNParams zeros_like(const GNParams& p);
GNParams round_to_f32(GNParams p);

// Weights uniform in +-sqrt(6 / fan_in), biases zero.
GNParams init_params(const NetworkConfig& cfg, Head head, int horizon, std::uint64_t seed);

struct NormStats {
  Eigen::Matrix<double, 5, 1> node_mean = Eigen::Matrix<double, 5, 1>::Zero();
  Eigen::Matrix<double, 5, 1> node_std = Eigen::Matrix<double, 5, 1>::Ones();
  Eigen::Vector4d edge_mean = Eigen::Vector4d::Zero();
  Eigen::Vector4d edge_std = Eigen::Vector4d::Ones();
  Eigen::Vector4d global_mean = Eigen::Vector4d::Zero();
  Eigen::Vector4d global_std = Eigen::Vector4d::Ones();
  Eigen::Vector3d target_mean = Eigen::Vector3d::Zero();  // PPM displacement
  Eigen::Vector3d target_std = Eigen::Vector3d::Ones();

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

inline constexpr double kStdFloor = 1e-8;

NormStats round_to_f32(NormStats s);

// Per-vertex output of one forward pass. APM fills probability (active class),
// PPM fills positions in the action-local frame.
struct HeadOutput {
  Head head = Head::kPpm;
  Eigen::VectorXd probability;
  Eigen::Matrix<double, Eigen::Dynamic, 3> positions;
};

HeadOutput forward(const SceneGraph& graph, const GNParams& params, const NormStats& stats);

// Throws kEmptyInput or kDimensionMismatch.
double loss_classification(std::span<const double> probability,
                           std::span<const std::uint8_t> labels);
double loss_regression(const Eigen::Matrix<double, Eigen::Dynamic, 3>& pred,
                       const Eigen::Matrix<double, Eigen::Dynamic, 3>& gt);

inline constexpr double kProbabilityClamp = 1e-7;

// One supervised graph: APM uses labels, PPM uses target positions (local frame).
struct TrainingExample {
  SceneGraph graph;
  std::vector<std::uint8_t> labels;
  Eigen::Matrix<double, Eigen::Dynamic, 3> target;
};

struct GradientResult {
  double loss = 0.0;
  GNParams gradient;
};

// Mean batch loss of the given head and its exact gradient. The head must
// match params.head.
GradientResult gradients(const GNParams& params, const NormStats& stats,
                         std::span<const TrainingExample> batch, Head head);

// Mean loss over a batch without gradients.
double batch_loss(const GNParams& params, const NormStats& stats,
                  std::span<const TrainingExample> batch, Head head);

// Population mean and std per component over every row of the examples;
// std floored at kStdFloor. Targets are displacements target - t.
NormStats compute_norm_stats(std::span<const TrainingExample> examples);

// Streaming form of compute_norm_stats (Welford updates).
class NormAccumulator {
 public:
  void add(const TrainingExample& ex);
  NormStats finish() const;

 private:
  template <int C>
  struct Moments {
    Eigen::Matrix<double, C, 1> mean = Eigen::Matrix<double, C, 1>::Zero();
    Eigen::Matrix<double, C, 1> m2 = Eigen::Matrix<double, C, 1>::Zero();
    double n = 0;
    void add(const Eigen::Matrix<double, C, 1>& x);
    void finish(Eigen::Matrix<double, C, 1>& m, Eigen::Matrix<double, C, 1>& stdev) const;
  };
  Moments<5> node_;
  Moments<4> edge_, global_;
  Moments<3> target_;
};

}  // namespace bagdyn
