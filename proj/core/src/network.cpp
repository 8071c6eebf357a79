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
#include "bagdyn/network.hpp"

#include <algorithm>
#include <cmath>

#include "bagdyn/rng.hpp"
#include "gn_kernel.hpp"

namespace bagdyn {
namespace {

template <class P, class L, class Fn>
void visit(P& p, Fn&& fn) {
  auto mlp = [&](auto& m) {
    for (L& l : m.layers) fn(l);
  };
  mlp(p.node_encoder);
  mlp(p.edge_encoder);
  mlp(p.global_encoder);
  for (auto& b : p.blocks) {
    mlp(b.edge);
    mlp(b.node);
    mlp(b.global);
  }
  mlp(p.decoder);
}

MLPParams make_mlp(int in, int hidden, int out, int hidden_layers, Rng& rng) {
  MLPParams m;
  int prev = in;
  for (int l = 0; l <= hidden_layers; ++l) {
    const int width = l == hidden_layers ? out : hidden;
    DenseLayer layer;
    layer.weight.resize(width, prev);
    const double bound = std::sqrt(6.0 / prev);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
        layer.weight(r, c) = rng.uniform(-bound, bound);
    layer.bias = Eigen::VectorXd::Zero(width);
    m.layers.push_back(std::move(layer));
    prev = width;
  }
  return m;
}

}  // namespace

const char* to_string(Head h) { return h == Head::kApm ? "apm" : "ppm"; }

Head head_from_string(const std::string& s) {
  if (s == "apm") return Head::kApm;
  if (s == "ppm") return Head::kPpm;
  throw Error(ErrorCode::kInvalidParameter, "unknown head '" + s + "'");
}

void for_each_layer(GNParams& p, const std::function<void(DenseLayer&)>& fn) {
  visit<GNParams, DenseLayer>(p, fn);
}

void for_each_layer(const GNParams& p, const std::function<void(const DenseLayer&)>& fn) {
  visit<const GNParams, const DenseLayer>(p, fn);
}

std::size_t GNParams::parameter_count() const {
  std::size_t n = 0;
  for_each_layer(*this, [&](const DenseLayer& l) {
    n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  });
  return n;
}

std::vector<double> flatten(const GNParams& p) {
  std::vector<double> out;
  out.reserve(p.parameter_count());
  for_each_layer(p, [&](const DenseLayer& l) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  });
  return out;
}

void unflatten(GNParams& p, std::span<const double> values) {
  if (values.size() != p.parameter_count())
    throw Error(ErrorCode::kDimensionMismatch, "parameter vector length mismatch");
  std::size_t i = 0;
  for_each_layer(p, [&](DenseLayer& l) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(i), l.weight.size(), l.weight.data());
    i += static_cast<std::size_t>(l.weight.size());
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(i), l.bias.size(), l.bias.data());
    i += static_cast<std::size_t>(l.bias.size());
  });
}

GNParams zeros_like(const GNParams& p) {
  GNParams z = p;
  for_each_layer(z, [](DenseLayer& l) {
    l.weight.setZero();
    l.bias.setZero();
  });
  return z;
}

GNParams round_to_f32(GNParams p) {
  for_each_layer(p, [](DenseLayer& l) {
    l.weight = l.weight.cast<float>().cast<double>();
    l.bias = l.bias.cast<float>().cast<double>();
  });
  return p;
}

NormStats round_to_f32(NormStats s) {
  auto r = [](auto& v) { v = v.template cast<float>().template cast<double>(); };
  r(s.node_mean);
  r(s.node_std);
  r(s.edge_mean);
  r(s.edge_std);
  r(s.global_mean);
  r(s.global_std);
  r(s.target_mean);
  r(s.target_std);
  return s;
}

GNParams init_params(const NetworkConfig& cfg, Head head, int horizon, std::uint64_t seed) {
  if (cfg.latent < 1 || cfg.blocks < 1 || cfg.hidden_layers < 0)
    throw Error(ErrorCode::kInvalidParameter, "network sizes must be positive");
  if (horizon < 1) throw Error(ErrorCode::kInvalidParameter, "horizon must be positive");
  Rng rng(mix_seed(seed, 0x4E4E));
  const int D = cfg.latent, H = cfg.hidden_layers;
  GNParams p;
  p.head = head;
  p.horizon = horizon;
  p.latent = D;
  p.node_encoder = make_mlp(5, D, D, H, rng);
  p.edge_encoder = make_mlp(4, D, D, H, rng);
  p.global_encoder = make_mlp(4, D, D, H, rng);
  for (int b = 0; b < cfg.blocks; ++b) {
    ProcessorBlock blk;
    blk.edge = make_mlp(4 * D, D, D, H, rng);
    blk.node = make_mlp(3 * D, D, D, H, rng);
    blk.global = make_mlp(3 * D, D, D, H, rng);
    p.blocks.push_back(std::move(blk));
  }
  p.decoder = make_mlp(D, D, head == Head::kApm ? 2 : 3, H, rng);
  return p;
}

HeadOutput forward(const SceneGraph& graph, const GNParams& params, const NormStats& stats) {
  const auto net = detail::to_kernel<double>(params);
  const auto st = detail::to_kernel<double>(stats);
  detail::Tape<double> tape;
  const auto& out = detail::run_forward(net, st, graph, tape);
  HeadOutput h;
  h.head = params.head;
  const Eigen::Index N = out.cols();
  if (params.head == Head::kApm) {
    h.probability.resize(N);
    for (Eigen::Index i = 0; i < N; ++i)
      h.probability(i) = detail::active_probability(out(0, i), out(1, i));
  } else {
    h.positions.resize(N, 3);
    for (Eigen::Index i = 0; i < N; ++i)
      for (int c = 0; c < 3; ++c)
        h.positions(i, c) = graph.nodes(i, c) + stats.target_mean(c) + stats.target_std(c) * out(c, i);
  }
  return h;
}

double loss_classification(std::span<const double> probability,
                           std::span<const std::uint8_t> labels) {
  if (probability.empty()) throw Error(ErrorCode::kEmptyInput, "empty prediction");
  if (probability.size() != labels.size())
    throw Error(ErrorCode::kDimensionMismatch, "prediction and label counts differ");
  double loss = 0.0;
  for (std::size_t i = 0; i < probability.size(); ++i) {
    const double p = std::clamp(probability[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double y = labels[i];
    loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return loss / static_cast<double>(probability.size());
}

double loss_regression(const Eigen::Matrix<double, Eigen::Dynamic, 3>& pred,
                       const Eigen::Matrix<double, Eigen::Dynamic, 3>& gt) {
  if (pred.rows() == 0) throw Error(ErrorCode::kEmptyInput, "empty prediction");
  if (pred.rows() != gt.rows())
    throw Error(ErrorCode::kDimensionMismatch, "prediction and target counts differ");
  return (pred - gt).rowwise().squaredNorm().mean();
}

GradientResult gradients(const GNParams& params, const NormStats& stats,
                         std::span<const TrainingExample> batch, Head head) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  if (head != params.head) throw Error(ErrorCode::kDimensionMismatch, "head does not match the model");
  const auto net = detail::to_kernel<double>(params);
  const auto st = detail::to_kernel<double>(stats);
  auto grad = net;
  grad.set_zero();
  detail::Tape<double> tape;
  const double w = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& ex : batch) loss += w * detail::example_loss(net, st, ex, w, &grad, tape);
  GradientResult r;
  r.loss = loss;
  r.gradient = zeros_like(params);
  detail::add_to(grad, r.gradient);
  return r;
}

double batch_loss(const GNParams& params, const NormStats& stats,
                  std::span<const TrainingExample> batch, Head head) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  if (head != params.head) throw Error(ErrorCode::kDimensionMismatch, "head does not match the model");
  const auto net = detail::to_kernel<double>(params);
  const auto st = detail::to_kernel<double>(stats);
  detail::Tape<double> tape;
  double loss = 0.0;
  for (const auto& ex : batch) loss += detail::example_loss<double>(net, st, ex, 0.0, nullptr, tape);
  return loss / static_cast<double>(batch.size());
}

template <int C>
void NormAccumulator::Moments<C>::add(const Eigen::Matrix<double, C, 1>& x) {
  n += 1;
  const Eigen::Matrix<double, C, 1> delta = x - mean;
  mean += delta / n;
  m2 += delta.cwiseProduct(x - mean);
}

template <int C>
void NormAccumulator::Moments<C>::finish(Eigen::Matrix<double, C, 1>& m,
                                         Eigen::Matrix<double, C, 1>& stdev) const {
  m = mean;
  stdev = (m2 / n).cwiseSqrt().cwiseMax(kStdFloor);
}

void NormAccumulator::add(const TrainingExample& ex) {
  const auto& g = ex.graph;
  for (Eigen::Index i = 0; i < g.nodes.rows(); ++i) node_.add(g.nodes.row(i).transpose());
  for (Eigen::Index i = 0; i < g.edges.rows(); ++i) edge_.add(g.edges.row(i).transpose());
  global_.add(g.global);
  if (ex.target.rows() == g.nodes.rows())
    for (Eigen::Index i = 0; i < g.nodes.rows(); ++i)
      target_.add((ex.target.row(i) - g.nodes.row(i).head<3>()).transpose());
}

NormStats NormAccumulator::finish() const {
  if (node_.n == 0) throw Error(ErrorCode::kEmptyInput, "no training examples");
  NormStats s;
  node_.finish(s.node_mean, s.node_std);
  edge_.finish(s.edge_mean, s.edge_std);
  global_.finish(s.global_mean, s.global_std);
  if (target_.n > 0) target_.finish(s.target_mean, s.target_std);
  return s;
}

NormStats compute_norm_stats(std::span<const TrainingExample> examples) {
  if (examples.empty()) throw Error(ErrorCode::kEmptyInput, "no training examples");
  NormAccumulator acc;
  for (const auto& ex : examples) acc.add(ex);
  return acc.finish();
}

}  // namespace bagdyn
