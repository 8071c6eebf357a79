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

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "bagdyn/common.hpp"
#include "bagdyn/network.hpp"

namespace bagdyn::detail {

template <class S>
using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
struct KLayer {
  MatS<S> w;
  VecS<S> b;
};

// All MLPs share one depth. MLP m owns layers [m * depth, (m + 1) * depth) in
// the order node enc, edge enc, global enc, per block (edge, node, global), decoder.
template <class S>
struct KNet {
  Head head = Head::kPpm;
  int latent = 0;
  int depth = 0;
  int blocks = 0;
  std::vector<KLayer<S>> layers;

  static constexpr int kNodeEnc = 0, kEdgeEnc = 1, kGlobalEnc = 2;
  static int edge_mlp(int b) { return 3 + 3 * b; }
  static int node_mlp(int b) { return 4 + 3 * b; }
  static int global_mlp(int b) { return 5 + 3 * b; }
  int decoder() const { return 3 + 3 * blocks; }

  KLayer<S>& at(int mlp, int l) { return layers[static_cast<std::size_t>(mlp * depth + l)]; }
  const KLayer<S>& at(int mlp, int l) const {
    return layers[static_cast<std::size_t>(mlp * depth + l)];
  }

  void set_zero() {
    for (auto& l : layers) {
      l.w.setZero();
      l.b.setZero();
    }
  }
};

template <class S>
KNet<S> to_kernel(const GNParams& p) {
  KNet<S> k;
  k.head = p.head;
  k.latent = p.latent;
  k.blocks = static_cast<int>(p.blocks.size());
  k.depth = static_cast<int>(p.node_encoder.layers.size());
  bool uniform = k.depth > 0;
  auto check = [&](const MLPParams& m) {
    if (static_cast<int>(m.layers.size()) != k.depth) uniform = false;
  };
  check(p.edge_encoder);
  check(p.global_encoder);
  check(p.decoder);
  for (const auto& b : p.blocks) {
    check(b.edge);
    check(b.node);
    check(b.global);
  }
  if (!uniform) throw Error(ErrorCode::kDimensionMismatch, "MLP depths differ");
  for_each_layer(p, [&](const DenseLayer& l) {
    k.layers.push_back({l.weight.cast<S>(), l.bias.cast<S>()});
  });
  return k;
}

// out += kernel values, in for_each_layer order.
template <class S>
void add_to(const KNet<S>& k, GNParams& out) {
  std::size_t i = 0;
  for_each_layer(out, [&](DenseLayer& l) {
    l.weight += k.layers[i].w.template cast<double>();
    l.bias += k.layers[i].b.template cast<double>();
    ++i;
  });
}

template <class S>
struct KStats {
  VecS<S> node_mean, node_inv, edge_mean, edge_inv, global_mean, global_inv;
  VecS<S> target_mean, target_std;
};

template <class S>
KStats<S> to_kernel(const NormStats& s) {
  KStats<S> k;
  k.node_mean = s.node_mean.cast<S>();
  k.node_inv = s.node_std.cwiseInverse().cast<S>();
  k.edge_mean = s.edge_mean.cast<S>();
  k.edge_inv = s.edge_std.cwiseInverse().cast<S>();
  k.global_mean = s.global_mean.cast<S>();
  k.global_inv = s.global_std.cwiseInverse().cast<S>();
  k.target_mean = s.target_mean.cast<S>();
  k.target_std = s.target_std.cast<S>();
  return k;
}

template <class S>
struct MlpTape {
  std::vector<MatS<S>> acts;  // rectified outputs of layers 0 .. depth - 2
};

template <class S>
struct BlockTape {
  MatS<S> e_in, v_in;
  VecS<S> u_in;
  MlpTape<S> edge, node, global;
  MatS<S> e_out, agg, v_out;
  VecS<S> g_in;
};

template <class S>
struct Tape {
  MatS<S> xn, xe;
  VecS<S> xg;
  MlpTape<S> enc_node, enc_edge, enc_global, dec;
  std::vector<BlockTape<S>> blocks;
  MatS<S> v_final;
  MatS<S> out;  // decoder output, one column per vertex
};

// Layers 1.. of an MLP, starting from the pre-activation of layer 0.
template <class S>
MatS<S> mlp_tail(const KNet<S>& net, int m, MatS<S> z, MlpTape<S>& tape) {
  tape.acts.resize(static_cast<std::size_t>(net.depth - 1));
  for (int l = 0; l < net.depth; ++l) {
    if (l > 0) {
      const auto& L = net.at(m, l);
      MatS<S> nz = L.w * tape.acts[static_cast<std::size_t>(l - 1)];
      nz.colwise() += L.b;
      z = std::move(nz);
    }
    if (l + 1 < net.depth) tape.acts[static_cast<std::size_t>(l)] = z.cwiseMax(S(0));
  }
  return z;
}

// Returns the gradient with respect to the layer-0 pre-activation.
template <class S>
MatS<S> mlp_tail_back(const KNet<S>& net, KNet<S>& grad, int m, const MlpTape<S>& tape,
                      MatS<S> g) {
  for (int l = net.depth - 1; l >= 1; --l) {
    const MatS<S>& h = tape.acts[static_cast<std::size_t>(l - 1)];
    auto& G = grad.at(m, l);
    G.w.noalias() += g * h.transpose();
    G.b += g.rowwise().sum();
    MatS<S> gh = net.at(m, l).w.transpose() * g;
    g = gh.cwiseProduct((h.array() > S(0)).template cast<S>().matrix());
  }
  return g;
}

template <class S>
MatS<S> mlp_forward(const KNet<S>& net, int m, const MatS<S>& x, MlpTape<S>& tape) {
  const auto& L = net.at(m, 0);
  MatS<S> z = L.w * x;
  z.colwise() += L.b;
  return mlp_tail(net, m, std::move(z), tape);
}

// Accumulates parameter gradients; returns the input gradient when want_dx.
template <class S>
MatS<S> mlp_backward(const KNet<S>& net, KNet<S>& grad, int m, const MlpTape<S>& tape,
                     const MatS<S>& x, MatS<S> g, bool want_dx) {
  g = mlp_tail_back(net, grad, m, tape, std::move(g));
  auto& G = grad.at(m, 0);
  G.w.noalias() += g * x.transpose();
  G.b += g.rowwise().sum();
  if (!want_dx) return {};
  return net.at(m, 0).w.transpose() * g;
}

template <class S>
void normalize_inputs(const SceneGraph& graph, const KStats<S>& st, Tape<S>& t) {
  t.xn = graph.nodes.transpose().cast<S>();
  t.xn.colwise() -= st.node_mean;
  t.xn.array().colwise() *= st.node_inv.array();
  t.xe = graph.edges.transpose().cast<S>();
  t.xe.colwise() -= st.edge_mean;
  t.xe.array().colwise() *= st.edge_inv.array();
  t.xg = ((graph.global.cast<S>() - st.global_mean).array() * st.global_inv.array()).matrix();
}

template <class S>
void check_dims(const KNet<S>& net, const SceneGraph& graph) {
  const auto& first = net.layers.front();
  if (first.w.cols() != 5 || graph.nodes.cols() != 5 || graph.edges.cols() != 4)
    throw Error(ErrorCode::kDimensionMismatch, "feature width does not match the model");
  if (graph.num_nodes() < 2 || graph.num_edges() == 0 ||
      static_cast<std::size_t>(graph.edges.rows()) != graph.num_edges() ||
      graph.receivers.size() != graph.num_edges())
    throw Error(ErrorCode::kDimensionMismatch, "malformed graph");
  const int out = static_cast<int>(net.at(net.decoder(), net.depth - 1).w.rows());
  if (out != (net.head == Head::kApm ? 2 : 3))
    throw Error(ErrorCode::kDimensionMismatch, "decoder width does not match the head");
}

template <class S>
const MatS<S>& run_forward(const KNet<S>& net, const KStats<S>& st, const SceneGraph& graph,
                           Tape<S>& t) {
  check_dims(net, graph);
  const Eigen::Index D = net.latent;
  const Eigen::Index N = static_cast<Eigen::Index>(graph.num_nodes());
  const std::size_t E = graph.num_edges();
  const auto& snd = graph.senders;
  const auto& rcv = graph.receivers;
  for (std::size_t e = 0; e < E; ++e)
    if (snd[e] >= N || rcv[e] >= N) throw Error(ErrorCode::kDimensionMismatch, "edge endpoint out of range");

  normalize_inputs(graph, st, t);
  MatS<S> v = mlp_forward(net, KNet<S>::kNodeEnc, t.xn, t.enc_node);
  MatS<S> e = mlp_forward(net, KNet<S>::kEdgeEnc, t.xe, t.enc_edge);
  VecS<S> u = mlp_forward(net, KNet<S>::kGlobalEnc, MatS<S>(t.xg), t.enc_global);

  std::vector<S> inv_count(static_cast<std::size_t>(N), S(0));
  for (std::size_t k = 0; k < E; ++k) inv_count[rcv[k]] += S(1);
  for (auto& c : inv_count) c = c > S(0) ? S(1) / c : S(0);

  t.blocks.resize(static_cast<std::size_t>(net.blocks));
  for (int b = 0; b < net.blocks; ++b) {
    BlockTape<S>& bt = t.blocks[static_cast<std::size_t>(b)];
    bt.e_in = std::move(e);
    bt.v_in = std::move(v);
    bt.u_in = std::move(u);

    const int me = KNet<S>::edge_mlp(b);
    const auto& W = net.at(me, 0);
    MatS<S> z = W.w.leftCols(D) * bt.e_in;
    const MatS<S> ps = W.w.middleCols(D, D) * bt.v_in;
    const MatS<S> pr = W.w.middleCols(2 * D, D) * bt.v_in;
    const VecS<S> cu = W.w.rightCols(D) * bt.u_in + W.b;
    for (std::size_t k = 0; k < E; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      z.col(kk) += ps.col(snd[k]) + pr.col(rcv[k]) + cu;
    }
    bt.e_out = bt.e_in + mlp_tail(net, me, std::move(z), bt.edge);

    bt.agg = MatS<S>::Zero(D, N);
    for (std::size_t k = 0; k < E; ++k)
      bt.agg.col(rcv[k]) += bt.e_out.col(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < N; ++i) bt.agg.col(i) *= inv_count[static_cast<std::size_t>(i)];

    const int mn = KNet<S>::node_mlp(b);
    const auto& Wn = net.at(mn, 0);
    MatS<S> zn = Wn.w.leftCols(D) * bt.v_in;
    zn.noalias() += Wn.w.middleCols(D, D) * bt.agg;
    zn.colwise() += Wn.w.rightCols(D) * bt.u_in + Wn.b;
    bt.v_out = bt.v_in + mlp_tail(net, mn, std::move(zn), bt.node);

    bt.g_in.resize(3 * D);
    bt.g_in.head(D) = bt.u_in;
    bt.g_in.segment(D, D) = bt.v_out.rowwise().mean();
    bt.g_in.tail(D) = bt.e_out.rowwise().mean();
    const MatS<S> du = mlp_forward(net, KNet<S>::global_mlp(b), MatS<S>(bt.g_in), bt.global);

    e = bt.e_out;
    v = bt.v_out;
    u = bt.u_in + du.col(0);
  }
  t.v_final = std::move(v);
  t.out = mlp_forward(net, net.decoder(), t.v_final, t.dec);
  return t.out;
}

// d_out is the gradient with respect to the decoder output.
template <class S>
void run_backward(const KNet<S>& net, const SceneGraph& graph, const Tape<S>& t,
                  const MatS<S>& d_out, KNet<S>& grad) {
  const Eigen::Index D = net.latent;
  const Eigen::Index N = static_cast<Eigen::Index>(graph.num_nodes());
  const std::size_t E = graph.num_edges();
  const auto& snd = graph.senders;
  const auto& rcv = graph.receivers;
  std::vector<S> inv_count(static_cast<std::size_t>(N), S(0));
  for (std::size_t k = 0; k < E; ++k) inv_count[rcv[k]] += S(1);
  for (auto& c : inv_count) c = c > S(0) ? S(1) / c : S(0);

  MatS<S> dv = mlp_backward(net, grad, net.decoder(), t.dec, t.v_final, d_out, true);
  MatS<S> de = MatS<S>::Zero(D, static_cast<Eigen::Index>(E));
  VecS<S> du = VecS<S>::Zero(D);

  for (int b = net.blocks - 1; b >= 0; --b) {
    const BlockTape<S>& bt = t.blocks[static_cast<std::size_t>(b)];
    // global update
    VecS<S> du_in = du;
    const MatS<S> dg = mlp_backward(net, grad, KNet<S>::global_mlp(b), bt.global,
                                    MatS<S>(bt.g_in), MatS<S>(du), true);
    du_in += dg.col(0).head(D);
    dv.colwise() += dg.col(0).segment(D, D) / static_cast<S>(N);
    de.colwise() += dg.col(0).tail(D) / static_cast<S>(E);

    // node update
    const int mn = KNet<S>::node_mlp(b);
    const auto& Wn = net.at(mn, 0);
    const MatS<S> gn = mlp_tail_back(net, grad, mn, bt.node, dv);
    auto& Gn = grad.at(mn, 0);
    Gn.w.leftCols(D).noalias() += gn * bt.v_in.transpose();
    Gn.w.middleCols(D, D).noalias() += gn * bt.agg.transpose();
    const VecS<S> gn1 = gn.rowwise().sum();
    Gn.w.rightCols(D).noalias() += gn1 * bt.u_in.transpose();
    Gn.b += gn1;
    MatS<S> dv_in = dv;
    dv_in.noalias() += Wn.w.leftCols(D).transpose() * gn;
    const MatS<S> dagg = Wn.w.middleCols(D, D).transpose() * gn;
    du_in.noalias() += Wn.w.rightCols(D).transpose() * gn1;
    for (std::size_t k = 0; k < E; ++k)
      de.col(static_cast<Eigen::Index>(k)) += dagg.col(rcv[k]) * inv_count[rcv[k]];

    // edge update
    const int me = KNet<S>::edge_mlp(b);
    const auto& We = net.at(me, 0);
    const MatS<S> ge = mlp_tail_back(net, grad, me, bt.edge, de);
    MatS<S> gs = MatS<S>::Zero(D, N), gr = MatS<S>::Zero(D, N);
    for (std::size_t k = 0; k < E; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      gs.col(snd[k]) += ge.col(kk);
      gr.col(rcv[k]) += ge.col(kk);
    }
    auto& Ge = grad.at(me, 0);
    Ge.w.leftCols(D).noalias() += ge * bt.e_in.transpose();
    Ge.w.middleCols(D, D).noalias() += gs * bt.v_in.transpose();
    Ge.w.middleCols(2 * D, D).noalias() += gr * bt.v_in.transpose();
    const VecS<S> ge1 = ge.rowwise().sum();
    Ge.w.rightCols(D).noalias() += ge1 * bt.u_in.transpose();
    Ge.b += ge1;
    MatS<S> de_in = de;
    de_in.noalias() += We.w.leftCols(D).transpose() * ge;
    dv_in.noalias() += We.w.middleCols(D, D).transpose() * gs;
    dv_in.noalias() += We.w.middleCols(2 * D, D).transpose() * gr;
    du_in.noalias() += We.w.rightCols(D).transpose() * ge1;

    dv = std::move(dv_in);
    de = std::move(de_in);
    du = std::move(du_in);
  }
  mlp_backward(net, grad, KNet<S>::kNodeEnc, t.enc_node, t.xn, dv, false);
  mlp_backward(net, grad, KNet<S>::kEdgeEnc, t.enc_edge, t.xe, de, false);
  mlp_backward(net, grad, KNet<S>::kGlobalEnc, t.enc_global, MatS<S>(t.xg), MatS<S>(du), false);
}

inline double active_probability(double z0, double z1) {
  const double d = z1 - z0;
  if (d >= 0) return 1.0 / (1.0 + std::exp(-d));
  const double x = std::exp(d);
  return x / (1.0 + x);
}

// Loss of one example; when grad is given, accumulates weight * dLoss.
template <class S>
double example_loss(const KNet<S>& net, const KStats<S>& st, const TrainingExample& ex,
                    double weight, KNet<S>* grad, Tape<S>& tape) {
  const MatS<S>& out = run_forward(net, st, ex.graph, tape);
  const Eigen::Index N = out.cols();
  const double inv_n = 1.0 / static_cast<double>(N);
  MatS<S> d_out;
  if (grad) d_out = MatS<S>::Zero(out.rows(), N);
  double loss = 0.0;
  if (net.head == Head::kApm) {
    if (ex.labels.size() != static_cast<std::size_t>(N))
      throw Error(ErrorCode::kDimensionMismatch, "label count does not match the graph");
    for (Eigen::Index i = 0; i < N; ++i) {
      // cross-entropy on the logit gap: softplus(d) - y d
      const double d = static_cast<double>(out(1, i)) - static_cast<double>(out(0, i));
      const double p = active_probability(out(0, i), out(1, i));
      const double y = ex.labels[static_cast<std::size_t>(i)];
      loss += (std::max(d, 0.0) + std::log1p(std::exp(-std::abs(d))) - y * d) * inv_n;
      if (grad) {
        const S g = static_cast<S>(weight * (p - y) * inv_n);
        d_out(1, i) = g;
        d_out(0, i) = -g;
      }
    }
  } else {
    if (ex.target.rows() != N) throw Error(ErrorCode::kDimensionMismatch, "target count does not match the graph");
    for (Eigen::Index i = 0; i < N; ++i) {
      for (int c = 0; c < 3; ++c) {
        const double pos = ex.graph.nodes(i, c) + static_cast<double>(st.target_mean(c)) +
                           static_cast<double>(st.target_std(c)) * static_cast<double>(out(c, i));
        const double r = pos - ex.target(i, c);
        loss += r * r * inv_n;
        if (grad) d_out(c, i) = static_cast<S>(weight * 2.0 * r * inv_n * static_cast<double>(st.target_std(c)));
      }
    }
  }
  if (grad) run_backward(net, ex.graph, tape, d_out, *grad);
  return loss;
}

}  // namespace bagdyn::detail
