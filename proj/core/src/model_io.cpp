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
#include "bagdyn/model_io.hpp"

#include "binary_io.hpp"

namespace bagdyn {
namespace {

constexpr char kMagic[5] = "DRNN";

template <class V>
void put(detail::ByteWriter& w, const V& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f32(static_cast<float>(v(i)));
}

template <class V>
void get(detail::ByteReader& r, V& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = r.f32();
}

std::size_t depth_of(const GNParams& p) { return p.node_encoder.layers.size(); }

}  // namespace

std::vector<std::uint8_t> encode_model(const Model& model) {
  const GNParams& p = model.params;
  detail::ByteWriter w;
  w.magic(kMagic);
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(p.head));
  w.u32(static_cast<std::uint32_t>(p.horizon));
  w.u32(static_cast<std::uint32_t>(p.latent));
  w.u32(static_cast<std::uint32_t>(p.blocks.size()));
  w.u32(static_cast<std::uint32_t>(depth_of(p)));
  std::uint32_t count = 0;
  for_each_layer(p, [&](const DenseLayer&) { ++count; });
  w.u32(count);
  for_each_layer(p, [&](const DenseLayer& l) {
    w.u32(static_cast<std::uint32_t>(l.weight.rows()));
    w.u32(static_cast<std::uint32_t>(l.weight.cols()));
  });
  const NormStats& s = model.stats;
  put(w, s.node_mean);
  put(w, s.node_std);
  put(w, s.edge_mean);
  put(w, s.edge_std);
  put(w, s.global_mean);
  put(w, s.global_std);
  put(w, s.target_mean);
  put(w, s.target_std);
  for_each_layer(p, [&](const DenseLayer& l) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.f32(static_cast<float>(l.weight(r, c)));
    put(w, l.bias);
  });
  return w.take();
}

Model decode_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "model");
  if (!r.magic_is(kMagic)) throw Error(ErrorCode::kBadMagic, "model: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::kVersionMismatch,
                "model: unsupported version " + std::to_string(version));
  const std::uint32_t head = r.u32();
  const std::uint32_t h = r.u32();
  const std::uint32_t D = r.u32();
  const std::uint32_t L = r.u32();
  const std::uint32_t depth = r.u32();
  if (head > 1 || h < 1 || D < 1 || L < 1 || depth < 1 || D > (1u << 16) || L > 1024 || depth > 1024)
    throw Error(ErrorCode::kCorrupt, "model: invalid header");

  Model m;
  GNParams& p = m.params;
  p.head = static_cast<Head>(head);
  p.horizon = static_cast<int>(h);
  p.latent = static_cast<int>(D);
  p.node_encoder.layers.resize(depth);
  p.edge_encoder.layers.resize(depth);
  p.global_encoder.layers.resize(depth);
  p.decoder.layers.resize(depth);
  p.blocks.resize(L);
  for (auto& b : p.blocks) {
    b.edge.layers.resize(depth);
    b.node.layers.resize(depth);
    b.global.layers.resize(depth);
  }
  const std::uint32_t count = r.u32();
  std::uint32_t expected = 0;
  for_each_layer(p, [&](const DenseLayer&) { ++expected; });
  if (count != expected) throw Error(ErrorCode::kCorrupt, "model: layer count does not match the header");
  r.need(std::size_t{count} * 8);
  for_each_layer(p, [&](DenseLayer& l) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20))
      throw Error(ErrorCode::kCorrupt, "model: invalid layer shape");
    l.weight.resize(rows, cols);
    l.bias.resize(rows);
  });

  auto chain = [&](const MLPParams& mlp, Eigen::Index in) {
    for (const auto& l : mlp.layers) {
      if (l.weight.cols() != in) throw Error(ErrorCode::kCorrupt, "model: layer dimensions do not chain");
      in = l.weight.rows();
    }
    return in;
  };
  const Eigen::Index d = D;
  bool ok = chain(p.node_encoder, 5) == d && chain(p.edge_encoder, 4) == d &&
            chain(p.global_encoder, 4) == d;
  for (const auto& b : p.blocks)
    ok = ok && chain(b.edge, 4 * d) == d && chain(b.node, 3 * d) == d && chain(b.global, 3 * d) == d;
  ok = ok && chain(p.decoder, d) == (p.head == Head::kApm ? 2 : 3);
  if (!ok) throw Error(ErrorCode::kCorrupt, "model: latent widths do not match D");

  NormStats& s = m.stats;
  r.need(32 * 4);
  get(r, s.node_mean);
  get(r, s.node_std);
  get(r, s.edge_mean);
  get(r, s.edge_std);
  get(r, s.global_mean);
  get(r, s.global_std);
  get(r, s.target_mean);
  get(r, s.target_std);
  for_each_layer(p, [&](DenseLayer& l) {
    r.need(static_cast<std::size_t>(l.weight.size() + l.bias.size()) * 4);
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = r.f32();
    get(r, l.bias);
  });
  if (r.remaining() != 0) throw Error(ErrorCode::kCorrupt, "model: trailing bytes");
  return m;
}

void write_model(const Model& model, const std::filesystem::path& path) {
  detail::write_file(path, encode_model(model));
}

Model read_model(const std::filesystem::path& path) {
  return decode_model(detail::read_file(path));
}

}  // namespace bagdyn
