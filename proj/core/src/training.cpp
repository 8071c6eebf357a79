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
#include "bagdyn/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bagdyn/parallel.hpp"
#include "bagdyn/rng.hpp"
#include "gn_kernel.hpp"

namespace bagdyn {
namespace {

using detail::KNet;

void load_flat(KNet<float>& k, std::span<const double> flat) {
  std::size_t i = 0;
  for (auto& l : k.layers) {
    for (Eigen::Index j = 0; j < l.w.size(); ++j) l.w.data()[j] = static_cast<float>(flat[i++]);
    for (Eigen::Index j = 0; j < l.b.size(); ++j) l.b.data()[j] = static_cast<float>(flat[i++]);
  }
}

void add_flat(const KNet<float>& k, std::vector<double>& out) {
  std::size_t i = 0;
  for (const auto& l : k.layers) {
    for (Eigen::Index j = 0; j < l.w.size(); ++j) out[i++] += l.w.data()[j];
    for (Eigen::Index j = 0; j < l.b.size(); ++j) out[i++] += l.b.data()[j];
  }
}

double eval_loss_f32(const KNet<float>& net, const detail::KStats<float>& st,
                     std::span<const TrainingExample> examples, unsigned threads) {
  std::vector<double> losses(examples.size());
  parallel_for(
      examples.size(),
      [&](std::size_t i) {
        detail::Tape<float> tape;
        losses[i] = detail::example_loss<float>(net, st, examples[i], 0.0, nullptr, tape);
      },
      threads);
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(examples.size());
}

}  // namespace

void validate(const TrainConfig& cfg) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (cfg.horizon != 1 && cfg.horizon != 5) fail("horizon must be 1 or 5");
  if (!(cfg.learning_rate > 0)) fail("learning rate must be positive");
  if (cfg.batch_size < 1 || cfg.epochs < 1 || cfg.patience < 1) fail("counts must be positive");
  if (cfg.latent < 1 || cfg.blocks < 1 || cfg.hidden_layers < 0) fail("network sizes must be positive");
  if (!(cfg.tau >= 0)) fail("tau must be non-negative");
}

std::vector<PairRef> enumerate_pairs(std::span<const TrajectoryRecord* const> records, int h) {
  std::vector<PairRef> out;
  for (std::uint32_t r = 0; r < records.size(); ++r) {
    const std::size_t n = records[r]->frames.size();
    for (std::size_t t = 0; t + static_cast<std::size_t>(h) < n; ++t)
      out.push_back({r, static_cast<std::uint32_t>(t)});
  }
  return out;
}

TrainingExample make_example(const TrajectoryRecord& record, std::size_t t, int h,
                             const KeypointMap& keypoints, double tau) {
  const std::size_t t1 = t + static_cast<std::size_t>(h);
  if (t1 >= record.frames.size()) throw Error(ErrorCode::kInvalidParameter, "pair beyond trajectory end");
  const ActionWindow window = action_window(record.action, t, static_cast<std::size_t>(h));
  TrainingExample ex;
  const GraphState state = graph_state(record, t, keypoints);
  ex.graph = build_graph(state, keypoints, window);
  const auto next = graph_positions(record.frames[t1], keypoints);
  ex.labels = active_labels(state.positions, next, tau);
  ex.target.resize(static_cast<Eigen::Index>(next.size()), 3);
  for (std::size_t i = 0; i < next.size(); ++i)
    ex.target.row(static_cast<Eigen::Index>(i)) = (next[i] - window.p_start).transpose();
  return ex;
}

void adam_step(std::vector<double>& params, std::span<const double> grad, AdamState& state,
               const AdamConfig& cfg) {
  if (grad.size() != params.size()) throw Error(ErrorCode::kDimensionMismatch, "gradient length mismatch");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    params[i] -= cfg.learning_rate * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + cfg.epsilon);
  }
}

double batch_gradient_f32(const GNParams& shape, std::span<const double> flat_params,
                          const NormStats& stats, std::span<const TrainingExample> batch,
                          double loss_scale, std::vector<double>& grad, unsigned threads) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  KNet<float> net = detail::to_kernel<float>(shape);
  load_flat(net, flat_params);
  const auto st = detail::to_kernel<float>(stats);
  grad.assign(flat_params.size(), 0.0);
  const double w = loss_scale / static_cast<double>(batch.size());
  std::vector<KNet<float>> grads(batch.size());
  std::vector<double> losses(batch.size());
  parallel_for(
      batch.size(),
      [&](std::size_t i) {
        grads[i] = net;
        grads[i].set_zero();
        detail::Tape<float> tape;
        losses[i] = detail::example_loss<float>(net, st, batch[i], w, &grads[i], tape);
      },
      threads);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    add_flat(grads[i], grad);
    loss += losses[i];
  }
  return loss / static_cast<double>(batch.size());
}

double regression_loss_scale(const NormStats& stats) {
  return 1.0 / stats.target_std.squaredNorm() * 3.0;
}

TrainResult train(const Dataset& dataset, const KeypointMap& keypoints, const TrainConfig& cfg,
                  Head head, const EpochCallback& on_epoch) {
  validate(cfg);
  const int h = cfg.horizon;
  const auto train_records = dataset.select(Split::kTrain);
  const auto val_records = dataset.select(Split::kVal);
  const auto train_pairs = enumerate_pairs(train_records, h);
  if (train_pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no training pairs");
  auto val_pairs = enumerate_pairs(val_records, h);
  if (cfg.max_val_pairs > 0 && val_pairs.size() > cfg.max_val_pairs) {
    std::vector<PairRef> kept;
    for (std::size_t i = 0; i < cfg.max_val_pairs; ++i)
      kept.push_back(val_pairs[i * val_pairs.size() / cfg.max_val_pairs]);
    val_pairs = std::move(kept);
  }

  NormAccumulator acc;
  for (const PairRef& p : train_pairs)
    acc.add(make_example(*train_records[p.record], p.t, h, keypoints, cfg.tau));
  TrainResult result;
  result.stats = round_to_f32(acc.finish());
  const double scale = head == Head::kPpm ? regression_loss_scale(result.stats) : 1.0;

  std::vector<TrainingExample> val;
  val.reserve(val_pairs.size());
  for (const PairRef& p : val_pairs)
    val.push_back(make_example(*val_records[p.record], p.t, h, keypoints, cfg.tau));

  const GNParams shape = init_params(cfg.network(), head, h, cfg.seed);
  std::vector<double> params = flatten(shape);
  std::vector<double> best = params;
  AdamState adam;
  const AdamConfig adam_cfg{cfg.learning_rate};
  const auto st = detail::to_kernel<float>(result.stats);
  KNet<float> eval_net = detail::to_kernel<float>(shape);
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<double> grad;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train_pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(cfg.seed, 0xE90C0000ULL + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    if (cfg.pairs_per_epoch > 0 && order.size() > cfg.pairs_per_epoch) order.resize(cfg.pairs_per_epoch);

    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<TrainingExample> batch(end - start);
      parallel_for(
          batch.size(),
          [&](std::size_t i) {
            const PairRef& p = train_pairs[order[start + i]];
            batch[i] = make_example(*train_records[p.record], p.t, h, keypoints, cfg.tau);
          },
          cfg.threads);
      const double loss =
          batch_gradient_f32(shape, params, result.stats, batch, scale, grad, cfg.threads);
      if (!std::isfinite(loss))
        throw Error(ErrorCode::kTrainingDiverged,
                    "non-finite training loss at epoch " + std::to_string(epoch));
      adam_step(params, grad, adam, adam_cfg);
      epoch_loss += loss;
      ++batches;
      ++result.curve.steps;
    }
    epoch_loss /= static_cast<double>(batches);

    double val_loss = epoch_loss;
    if (!val.empty()) {
      load_flat(eval_net, params);
      val_loss = eval_loss_f32(eval_net, st, val, cfg.threads);
    }
    if (!std::isfinite(val_loss))
      throw Error(ErrorCode::kTrainingDiverged, "non-finite validation loss at epoch " + std::to_string(epoch));
    result.curve.train_loss.push_back(epoch_loss);
    result.curve.val_loss.push_back(val_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss, val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best = params;
      result.curve.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  result.curve.best_val_loss = best_val;
  result.params = shape;
  unflatten(result.params, best);
  result.params = round_to_f32(std::move(result.params));
  return result;
}

OverfitResult overfit_batch(std::span<const TrainingExample> batch, const NormStats& stats,
                            const TrainConfig& cfg, Head head, int steps, double stop_ratio) {
  validate(cfg);
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  const GNParams shape = init_params(cfg.network(), head, cfg.horizon, cfg.seed);
  std::vector<double> params = flatten(shape);
  const double scale = head == Head::kPpm ? regression_loss_scale(stats) : 1.0;
  AdamState adam;
  const AdamConfig adam_cfg{cfg.learning_rate};
  std::vector<double> grad;
  OverfitResult r;
  for (int s = 0; s < steps; ++s) {
    const double loss = batch_gradient_f32(shape, params, stats, batch, scale, grad, cfg.threads);
    if (!std::isfinite(loss)) throw Error(ErrorCode::kTrainingDiverged, "non-finite loss");
    r.losses.push_back(loss);
    if (s > 0 && loss < stop_ratio * r.losses.front()) break;
    adam_step(params, grad, adam, adam_cfg);
    ++r.steps;
  }
  GNParams trained = shape;
  unflatten(trained, params);
  r.final_loss = batch_loss(trained, stats, batch, head);
  r.losses.push_back(r.final_loss);
  r.initial_loss = r.losses.front();
  if (head == Head::kApm) r.accuracy = apm_accuracy(trained, stats, batch);
  return r;
}

double apm_accuracy(const GNParams& params, const NormStats& stats,
                    std::span<const TrainingExample> batch) {
  std::size_t hit = 0, total = 0;
  for (const auto& ex : batch) {
    const HeadOutput out = forward(ex.graph, params, stats);
    for (Eigen::Index i = 0; i < out.probability.size(); ++i) {
      hit += (out.probability(i) > 0.5) == (ex.labels[static_cast<std::size_t>(i)] != 0);
      ++total;
    }
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

}  // namespace bagdyn
