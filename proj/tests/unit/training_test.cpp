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


#include <cmath>

#include <gtest/gtest.h>

#include "bagdyn/graph.hpp"
#include "bagdyn/training.hpp"
#include "test_util.hpp"

namespace bagdyn {
namespace {

TEST(Adam, MatchesClosedFormSteps) {
  const AdamConfig cfg;
  std::vector<double> p = {1.0, -2.0};
  AdamState st;
  const std::vector<std::vector<double>> grads = {{0.5, -1.0}, {0.1, 2.0}, {-0.3, 0.0}};
  // Alternative form: step size lr*sqrt(1-b2^t)/(1-b1^t) on raw moments.
  std::vector<double> q = p, m(2, 0.0), v(2, 0.0);
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    adam_step(p, grads[t - 1], st, cfg);
    const double lr_t = cfg.learning_rate * std::sqrt(1 - std::pow(cfg.beta2, t)) /
                        (1 - std::pow(cfg.beta1, t));
    for (int i = 0; i < 2; ++i) {
      const double g = grads[t - 1][i];
      m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g * g;
      q[i] -= lr_t * m[i] / (std::sqrt(v[i]) + cfg.epsilon * std::sqrt(1 - std::pow(cfg.beta2, t)));
      EXPECT_NEAR(p[i], q[i], 1e-12) << t << " " << i;
    }
  }
  EXPECT_EQ(st.step, 3u);
  // First step moves each coordinate by about lr against the gradient sign.
  std::vector<double> r = {0.0};
  AdamState s2;
  adam_step(r, std::vector<double>{4.0}, s2, cfg);
  EXPECT_NEAR(r[0], -cfg.learning_rate, 1e-10);
  EXPECT_THROW(adam_step(r, std::vector<double>{1.0, 2.0}, s2, cfg), Error);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(validate(c));
  c.horizon = 3;
  EXPECT_THROW(validate(c), Error);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(validate(c), Error);
  c = TrainConfig{};
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.batch_size, 16);
  EXPECT_EQ(c.epochs, 50);
  EXPECT_EQ(c.patience, 10);
  EXPECT_EQ(c.latent, 128);
  EXPECT_EQ(c.blocks, 3);
}

class TinyDataset : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("train");
    const SimulationConfig cfg = testing::small_sim_config(8);
    generate_dataset(testing::task("push_inside_ff_soft"), 10, 3, dir_->path(), cfg, 1);
    data_ = new Dataset(load_dataset(dir_->path()));
    const DeformableMesh mesh = build_bag_mesh(cfg.mesh);
    kp_ = new KeypointMap(select_keypoints(mesh, 8, 0));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete kp_;
    delete dir_;
  }
  static TrainConfig tiny_config() {
    TrainConfig c;
    c.latent = 8;
    c.blocks = 1;
    c.hidden_layers = 1;
    c.epochs = 3;
    c.batch_size = 4;
    c.threads = 1;
    c.seed = 4;
    return c;
  }
  static testing::TempDir* dir_;
  static Dataset* data_;
  static KeypointMap* kp_;
};
testing::TempDir* TinyDataset::dir_ = nullptr;
Dataset* TinyDataset::data_ = nullptr;
KeypointMap* TinyDataset::kp_ = nullptr;

TEST_F(TinyDataset, PairsAndExamples) {
  const auto train = data_->select(Split::kTrain);
  ASSERT_EQ(train.size(), 8u);
  EXPECT_EQ(enumerate_pairs(train, 1).size(), 8u * 7);
  EXPECT_EQ(enumerate_pairs(train, 5).size(), 8u * 3);
  const TrajectoryRecord& r = *train[0];
  const TrainingExample ex = make_example(r, 2, 5, *kp_, 1e-3);
  const auto now = graph_positions(r.frames[2], *kp_);
  const auto later = graph_positions(r.frames[7], *kp_);
  const ActionWindow w = action_window(r.action, 2, 5);
  ASSERT_EQ(ex.target.rows(), static_cast<Eigen::Index>(later.size()));
  for (std::size_t i = 0; i < later.size(); ++i) {
    EXPECT_TRUE(Vec3(ex.target.row(i).transpose()) == later[i] - w.p_start);
    EXPECT_EQ(ex.labels[i], (later[i] - now[i]).norm() > 1e-3 ? 1 : 0);
  }
  EXPECT_TRUE(Vec3(ex.graph.global.head<3>()) == w.p_end - w.p_start);
  EXPECT_THROW(make_example(r, 3, 5, *kp_, 1e-3), Error);
}

TEST_F(TinyDataset, TrainDeterministicWithCurve) {
  for (Head head : {Head::kApm, Head::kPpm}) {
    const TrainResult a = train(*data_, *kp_, tiny_config(), head);
    const TrainResult b = train(*data_, *kp_, tiny_config(), head);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.stats, b.stats);
    EXPECT_EQ(a.curve.val_loss, b.curve.val_loss);
    ASSERT_EQ(a.curve.train_loss.size(), 3u);
    EXPECT_GE(a.curve.best_epoch, 0);
    EXPECT_EQ(a.curve.best_val_loss, a.curve.val_loss[static_cast<std::size_t>(a.curve.best_epoch)]);
    EXPECT_EQ(a.params, round_to_f32(a.params));
    EXPECT_EQ(a.curve.steps, 3u * 14);
    EXPECT_EQ(a.params.head, head);
  }
}

TEST_F(TinyDataset, Subsampling) {
  TrainConfig c = tiny_config();
  c.epochs = 2;
  c.pairs_per_epoch = 10;
  const TrainResult r = train(*data_, *kp_, c, Head::kPpm);
  EXPECT_EQ(r.curve.steps, 2u * 3);
}

TEST_F(TinyDataset, EarlyStop) {
  TrainConfig c = tiny_config();
  c.epochs = 12;
  c.patience = 1;
  c.pairs_per_epoch = 8;
  c.learning_rate = 0.05;
  const TrainResult r = train(*data_, *kp_, c, Head::kApm);
  const std::size_t n = r.curve.val_loss.size();
  ASSERT_GE(n, 1u);
  if (n < 12u) {
    EXPECT_EQ(static_cast<int>(n), r.curve.best_epoch + 2);
    EXPECT_GE(r.curve.val_loss.back(), r.curve.best_val_loss);
  }
  for (double v : r.curve.val_loss) EXPECT_GE(v, r.curve.best_val_loss);
}

TEST_F(TinyDataset, OverfitSmallBatch) {
  const auto train_records = data_->select(Split::kTrain);
  std::vector<TrainingExample> batch;
  for (std::size_t i = 0; i < 4; ++i) batch.push_back(make_example(*train_records[i], 3, 1, *kp_, 1e-3));
  const NormStats st = round_to_f32(compute_norm_stats(batch));
  TrainConfig c = tiny_config();
  c.latent = 16;
  for (Head head : {Head::kApm, Head::kPpm}) {
    const OverfitResult r = overfit_batch(batch, st, c, head, 300);
    EXPECT_LT(r.final_loss, 0.1 * r.initial_loss) << to_string(head);
    EXPECT_EQ(r.losses.size(), 301u);
    EXPECT_EQ(r.steps, 300);
    if (head == Head::kApm) EXPECT_GT(r.accuracy, 0.95);
    const OverfitResult early = overfit_batch(batch, st, c, head, 300, 0.5);
    EXPECT_LT(early.steps, 300);
    EXPECT_LT(early.losses.end()[-2], 0.5 * early.initial_loss);
    for (std::size_t i = 1; i + 2 < early.losses.size(); ++i)
      EXPECT_GE(early.losses[i], 0.5 * early.initial_loss);
  }
}

TEST(RegressionScale, FromStats) {
  NormStats s;
  s.target_std = Eigen::Vector3d(1.0, 2.0, 2.0);
  EXPECT_DOUBLE_EQ(regression_loss_scale(s), 3.0 / 9.0);
}

}  // namespace
}  // namespace bagdyn
