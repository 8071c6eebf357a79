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
#include "bagdyn/task.hpp"

#include <algorithm>

#include "bagdyn/common.hpp"

namespace bagdyn {
namespace {

constexpr TaskConfig Row(BagContent content, HandleState left, HandleState right,
                         ControlledTarget target, ActionKind action) {
  return TaskConfig{Stiffness::kSoft, content, left, right, target, action};
}

using enum BagContent;
using enum HandleState;
using enum ControlledTarget;
using enum ActionKind;

constexpr std::array<TaskConfig, 10> kRows = {
    Row(kObjectInside, kFixed, kFixed, kSphere, kPush),
    Row(kEmpty, kFixed, kFixed, kSphere, kPush),
    Row(kObjectInside, kMoving, kFixed, kLeftHand, kCircular),
    Row(kEmpty, kMoving, kFixed, kLeftHand, kCircular),
    Row(kObjectInside, kMoving, kReleased, kLeftHand, kCircular),
    Row(kEmpty, kMoving, kReleased, kLeftHand, kCircular),
    Row(kObjectInside, kMoving, kFixed, kLeftHand, kOpen),
    Row(kEmpty, kMoving, kFixed, kLeftHand, kOpen),
    Row(kObjectInside, kMoving, kReleased, kLeftHand, kLift),
    Row(kEmpty, kMoving, kReleased, kLeftHand, kLift),
};

char handle_letter(HandleState h) {
  switch (h) {
    case kFixed: return 'f';
    case kMoving: return 'm';
    case kReleased: return 'r';
  }
  return '?';
}

}  // namespace

std::span<const TaskConfig> task_rows() { return kRows; }

std::vector<TaskConfig> all_tasks() {
  std::vector<TaskConfig> out;
  out.reserve(2 * kRows.size());
  for (const TaskConfig& row : kRows) {
    for (Stiffness s : {Stiffness::kSoft, Stiffness::kStiff}) {
      TaskConfig t = row;
      t.stiffness = s;
      out.push_back(t);
    }
  }
  return out;
}

bool is_valid_task(const TaskConfig& task) {
  return std::any_of(kRows.begin(), kRows.end(), [&](TaskConfig row) {
    row.stiffness = task.stiffness;
    return row == task;
  });
}

std::string TaskConfig::id() const {
  std::string out = to_string(action);
  out += content == kObjectInside ? "_inside_" : "_empty_";
  out += handle_letter(left_handle);
  out += handle_letter(right_handle);
  out += '_';
  out += to_string(stiffness);
  return out;
}

TaskConfig task_from_id(const std::string& id) {
  for (const TaskConfig& t : all_tasks()) {
    if (t.id() == id) return t;
  }
  throw Error(ErrorCode::kInvalidParameter, "unknown task id '" + id + "'");
}

const char* to_string(Stiffness s) {
  return s == Stiffness::kSoft ? "soft" : "stiff";
}

const char* to_string(BagContent c) {
  return c == kEmpty ? "empty" : "inside";
}

const char* to_string(HandleState h) {
  switch (h) {
    case kFixed: return "fixed";
    case kMoving: return "moving";
    case kReleased: return "released";
  }
  return "?";
}

const char* to_string(ActionKind a) {
  switch (a) {
    case kPush: return "push";
    case kCircular: return "circular";
    case kOpen: return "open";
    case kLift: return "lift";
  }
  return "?";
}

const char* to_string(HandleSide s) {
  return s == HandleSide::kLeft ? "left" : "right";
}

ActionKind action_from_string(const std::string& name) {
  for (ActionKind a : {kPush, kCircular, kOpen, kLift}) {
    if (name == to_string(a)) return a;
  }
  throw Error(ErrorCode::kInvalidParameter, "unknown action '" + name + "'");
}

}  // namespace bagdyn
