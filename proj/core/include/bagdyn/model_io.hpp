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
#include <filesystem>
#include <span>
#include <vector>

#include "bagdyn/network.hpp"

namespace bagdyn {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct Model {
  GNParams params;
  NormStats stats;

  friend bool operator==(const Model&, const Model&) = default;
};

// Binary layout (little-endian):
//   "DRNN" | u32 version | u32 head | u32 h | u32 D | u32 L | u32 depth |
//   u32 layer_count | per layer u32 rows, u32 cols |
//   NormStats as 32 f32 (node mean, node std, edge mean, edge std,
//   global mean, global std, target mean, target std) |
//   per layer: weight (rows x cols f32, row-major), bias (rows f32)
// Layers follow for_each_layer order. Values are stored as float32.
std::vector<std::uint8_t> encode_model(const Model& model);

// Throws kBadMagic, kVersionMismatch, kTruncated, kCorrupt.
Model decode_model(std::span<const std::uint8_t> bytes);

void write_model(const Model& model, const std::filesystem::path& path);
Model read_model(const std::filesystem::path& path);

}  // namespace bagdyn
