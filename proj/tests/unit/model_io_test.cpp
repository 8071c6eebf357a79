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


#include <cstring>

#include <gtest/gtest.h>

#include "bagdyn/model_io.hpp"
#include "test_util.hpp"

namespace bagdyn {
namespace {

Model sample_model(Head head) {
  Model m;
  m.params = round_to_f32(init_params({8, 2, 1}, head, 5, 3));
  m.stats.node_mean << 0.1, 0.2, 0.3, 0.01, 0.5;
  m.stats.target_std = Eigen::Vector3d(0.004, 0.005, 0.006);
  m.stats = round_to_f32(m.stats);
  return m;
}

std::uint32_t u32_at(const std::vector<std::uint8_t>& b, std::size_t off) {
  std::uint32_t v;
  std::memcpy(&v, b.data() + off, 4);
  return v;
}

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_model(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return ErrorCode::kIo;
}

TEST(ModelIo, HeaderAndSize) {
  const Model m = sample_model(Head::kPpm);
  const auto bytes = encode_model(m);
  EXPECT_EQ(std::memcmp(bytes.data(), "DRNN", 4), 0);
  EXPECT_EQ(u32_at(bytes, 4), 1u);
  EXPECT_EQ(u32_at(bytes, 8), 1u);   // head
  EXPECT_EQ(u32_at(bytes, 12), 5u);  // horizon
  EXPECT_EQ(u32_at(bytes, 16), 8u);  // latent
  EXPECT_EQ(u32_at(bytes, 20), 2u);  // blocks
  EXPECT_EQ(u32_at(bytes, 24), 2u);  // layers per MLP
  const std::uint32_t layers = u32_at(bytes, 28);
  EXPECT_EQ(layers, 2u * (4 + 3 * 2));
  EXPECT_EQ(u32_at(bytes, 32), 8u);  // node encoder first layer rows
  EXPECT_EQ(u32_at(bytes, 36), 5u);  // and cols
  const std::size_t header = 32 + 8 * layers + 32 * 4;
  EXPECT_EQ(bytes.size(), header + 4 * m.params.parameter_count());
  float first;
  std::memcpy(&first, bytes.data() + header, 4);
  EXPECT_EQ(first, static_cast<float>(m.params.node_encoder.layers[0].weight(0, 0)));
  float second;
  std::memcpy(&second, bytes.data() + header + 4, 4);
  EXPECT_EQ(second, static_cast<float>(m.params.node_encoder.layers[0].weight(0, 1)));
}

TEST(ModelIo, RoundtripExact) {
  testing::TempDir dir("model");
  for (Head head : {Head::kApm, Head::kPpm}) {
    const Model m = sample_model(head);
    write_model(m, dir.path() / "m.drnn");
    const Model back = read_model(dir.path() / "m.drnn");
    EXPECT_EQ(back, m);
  }
}

TEST(ModelIo, Errors) {
  const auto good = encode_model(sample_model(Head::kApm));
  auto bad = good;
  bad[1] = 'X';
  EXPECT_EQ(decode_error(bad), ErrorCode::kBadMagic);
  bad = good;
  bad[4] = 99;
  EXPECT_EQ(decode_error(bad), ErrorCode::kVersionMismatch);
  bad.assign(good.begin(), good.end() - 3);
  EXPECT_EQ(decode_error(bad), ErrorCode::kTruncated);
  bad.assign(good.begin(), good.begin() + 20);
  EXPECT_EQ(decode_error(bad), ErrorCode::kTruncated);
  bad = good;
  bad.push_back(1);
  EXPECT_EQ(decode_error(bad), ErrorCode::kCorrupt);
  bad = good;
  bad[36] = 6;  // node encoder input width
  EXPECT_EQ(decode_error(bad), ErrorCode::kCorrupt);
  bad = good;
  bad[8] = 7;  // head tag
  EXPECT_EQ(decode_error(bad), ErrorCode::kCorrupt);
}

}  // namespace
}  // namespace bagdyn
