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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bagdyn {

enum class Stiffness : std::uint8_t { kSoft, kStiff };
enum class BagContent : std::uint8_t { kEmpty, kObjectInside };
enum class HandleState : std::uint8_t { kFixed, kMoving, kReleased };
enum class ControlledTarget : std::uint8_t { kSphere, kLeftHand };
enum class ActionKind : std::uint8_t { kPush, kCircular, kOpen, kLift };
enum class HandleSide : std::uint8_t { kLeft = 0, kRight = 1 };

struct TaskConfig {
  Stiffness stiffness = Stiffness::kSoft;
  BagContent content = BagContent::kEmpty;
  HandleState left_handle = HandleState::kFixed;
  HandleState right_handle = HandleState::kFixed;
  ControlledTarget controlled_target = ControlledTarget::kSphere;
  ActionKind action = ActionKind::kPush;

  friend bool operator==(const TaskConfig&, const TaskConfig&) = default;

  HandleState handle(HandleSide side) const {
    return side == HandleSide::kLeft ? left_handle : right_handle;
  }

  // Stable identifier, e.g. "circular_inside_mr_soft".
  std::string id() const;
};

// The ten task rows; each row exists once per stiffness value.
std::span<const TaskConfig> task_rows();

// All 20 valid tasks in row-major order, soft before stiff.
std::vector<TaskConfig> all_tasks();

bool is_valid_task(const TaskConfig& task);

// Inverse of TaskConfig::id(); throws kInvalidParameter on unknown ids.
TaskConfig task_from_id(const std::string& id);

const char* to_string(Stiffness s);
const char* to_string(BagContent c);
const char* to_string(HandleState h);
const char* to_string(ActionKind a);
const char* to_string(HandleSide s);

ActionKind action_from_string(const std::string& name);

}  // namespace bagdyn
