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
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bagdyn {

using Vec3 = Eigen::Vector3d;
using Vec3f = Eigen::Vector3f;

enum class ErrorCode {
  kInvalidParameter,
  kPlacementFailed,
  kSimulationDiverged,
  kBadMagic,
  kVersionMismatch,
  kTruncated,
  kCorrupt,
  kIo,
  kDimensionMismatch,
  kEmptyInput,
  kTrainingDiverged,
  kMissingModel,
  kInvalidConfig,
};

const char* to_string(ErrorCode code);

// All library failures surface as this exception; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Vec3f to_float(const Vec3& v) { return v.cast<float>(); }
inline Vec3 to_double(const Vec3f& v) { return v.cast<double>(); }

// Rounds through float32 so the value survives a 32-bit file roundtrip exactly.
inline double quantize_f32(double x) {
  return static_cast<double>(static_cast<float>(x));
}
inline Vec3 quantize_f32(const Vec3& v) { return to_double(to_float(v)); }

}  // namespace bagdyn
