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
#include <numbers>

#include <gtest/gtest.h>

#include "bagdyn/actions.hpp"
#include "bagdyn/solver.hpp"
#include "test_util.hpp"

namespace bagdyn {
namespace {

SceneState scene_for(const char* id, std::uint64_t seed) {
  static const DeformableMesh mesh = build_bag_mesh(MeshParams{});
  return initial_scene(testing::task(id), mesh, SceneParams{}, seed);
}

Vec3 horizontal_unit(Vec3 v) {
  v.z() = 0.0;
  return v.normalized();
}

TEST(Push, PlanarTowardBagOrSphere) {
  int toward_bag = 0, toward_sphere = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const SceneState s = scene_for(seed % 2 ? "push_inside_ff_soft" : "push_empty_ff_stiff", seed);
    const PushPlan plan = plan_push(s, ActionParams{}, seed);
    const auto& w = plan.trajectory.waypoints;
    ASSERT_EQ(w.size(), 60u);
    for (std::size_t k = 1; k < w.size(); ++k) EXPECT_EQ(w[k].z() - w[k - 1].z(), 0.0);
    EXPECT_EQ(w[0], plan.sphere.center);
    EXPECT_TRUE(plan.sphere.controlled);
    EXPECT_EQ(plan.sphere.inverse_mass, 0.0);
    EXPECT_EQ(plan.trajectory.r_a, plan.sphere.radius);
    EXPECT_EQ(plan.trajectory.target, EntityRef::sphere(static_cast<Index>(s.spheres.size())));

    const Vec3 dir = horizontal_unit(w[1] - w[0]);
    if ((dir - horizontal_unit(bag_centroid(s) - w[0])).norm() < 1e-9) {
      ++toward_bag;
      continue;
    }
    bool hit = false;
    for (const RigidSphere& o : s.spheres) hit |= (dir - horizontal_unit(o.center - w[0])).norm() < 1e-9;
    EXPECT_TRUE(hit) << seed;
    ++toward_sphere;
  }
  EXPECT_GT(toward_bag, 60);
  EXPECT_GT(toward_sphere, 60);
}

TEST(Push, Deterministic) {
  const SceneState s = scene_for("push_inside_ff_soft", 3);
  const PushPlan a = plan_push(s, ActionParams{}, 10);
  const PushPlan b = plan_push(s, ActionParams{}, 10);
  EXPECT_EQ(a.trajectory, b.trajectory);
  EXPECT_EQ(a.sphere, b.sphere);
}

TEST(Push, ConstantSpeedInRange) {
  const ActionParams p;
  const SceneState s = scene_for("push_empty_ff_soft", 1);
  const auto w = plan_push(s, p, 1).trajectory.waypoints;
  const double stride = (w[1] - w[0]).norm();
  EXPECT_GE(stride, p.speed_min * p.recorded_dt - 1e-12);
  EXPECT_LE(stride, p.speed_max * p.recorded_dt + 1e-12);
  for (std::size_t k = 1; k < w.size(); ++k) EXPECT_NEAR((w[k] - w[k - 1]).norm(), stride, 1e-12);
}

TEST(Circular, AnchoredAtCentroidAndClosed) {
  ActionParams p;
  p.steps = 400;
  int planes[3] = {0, 0, 0};
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const SceneState s = scene_for("circular_empty_mf_soft", seed);
    const ActionTrajectory t = plan_circular(s, p, seed);
    const auto& w = t.waypoints;
    EXPECT_EQ(w[0], grasp_centroid(s, HandleSide::kLeft));
    EXPECT_EQ(t.r_a, p.handle_marker_radius);

    int constant_axis = -1;
    for (int axis = 0; axis < 3; ++axis) {
      bool flat = true;
      for (const Vec3& x : w) flat &= std::abs(x[axis] - w[0][axis]) < 1e-12;
      if (flat) constant_axis = axis;
    }
    ASSERT_GE(constant_axis, 0) << seed;
    ++planes[constant_axis];

    std::size_t closing = 0;
    for (std::size_t k = 2; k < w.size() && closing == 0; ++k) {
      if ((w[k] - w[0]).norm() <= 1e-9) closing = k;
    }
    ASSERT_GT(closing, 0u) << seed;
    for (std::size_t k = 1; k < closing; ++k) EXPECT_GT((w[k] - w[0]).norm(), 1e-9);
    // Chord at index 1 equals chord at closing-1 for a closed uniform circle.
    EXPECT_NEAR((w[1] - w[0]).norm(), (w[closing - 1] - w[0]).norm(), 1e-9);
  }
  for (int c : planes) EXPECT_GT(c, 0);
}

TEST(Circular, CenterNotBelowStart) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const SceneState s = scene_for("circular_inside_mf_stiff", seed);
    ActionParams p;
    p.steps = 400;
    const auto w = plan_circular(s, p, seed).waypoints;
    std::size_t period = 0;
    for (std::size_t k = 2; k < w.size() && period == 0; ++k)
      if ((w[k] - w[0]).norm() <= 1e-9) period = k;
    ASSERT_GT(period, 2u) << seed;
    // Uniform samples over one period average to the centre.
    Vec3 centre = Vec3::Zero();
    for (std::size_t k = 0; k < period; ++k) centre += w[k];
    centre /= static_cast<double>(period);
    EXPECT_GE(centre.z(), w[0].z() - 1e-9) << seed;
    for (std::size_t k = 0; k < period; ++k)
      EXPECT_NEAR((w[k] - centre).norm(), (w[0] - centre).norm(), 1e-9);
  }
}

TEST(Open, DirectionAwayWithinDeflection) {
  const ActionParams p;
  const double theta_max = p.theta_max_deg * std::numbers::pi / 180.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SceneState s = scene_for("open_inside_mf_soft", seed);
    const auto w = plan_open(s, p, seed).waypoints;
    const Vec3 moving = grasp_centroid(s, HandleSide::kLeft);
    const Vec3 fixed = grasp_centroid(s, HandleSide::kRight);
    EXPECT_EQ(w[0], moving);
    const Vec3 dir = (w[1] - w[0]).normalized();
    EXPECT_NEAR(dir.z(), 0.0, 1e-15);
    EXPECT_LT(dir.dot(fixed - moving), 0.0);
    const double angle = std::acos(std::clamp(dir.dot(horizontal_unit(moving - fixed)), -1.0, 1.0));
    EXPECT_LE(angle, theta_max + 1e-9);
  }
}

TEST(Open, ZeroDeflectionIsBaseDirection) {
  ActionParams p;
  p.theta_max_deg = 0.0;
  const SceneState s = scene_for("open_empty_mf_stiff", 4);
  const auto w = plan_open(s, p, 4).waypoints;
  const Vec3 base = horizontal_unit(grasp_centroid(s, HandleSide::kLeft) -
                                    grasp_centroid(s, HandleSide::kRight));
  EXPECT_NEAR(((w[1] - w[0]).normalized() - base).norm(), 0.0, 1e-12);
}

TEST(Open, RequiresFixedRightHandle) {
  const SceneState s = scene_for("circular_inside_mr_soft", 1);
  EXPECT_THROW(plan_open(s, ActionParams{}, 1), Error);
  EXPECT_THROW(plan_lift(scene_for("push_inside_ff_soft", 1), ActionParams{}, 1), Error);
}

TEST(Lift, VerticalConstantSpeed) {
  const ActionParams p;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SceneState s = scene_for("lift_empty_mr_stiff", seed);
    const auto w = plan_lift(s, p, seed).waypoints;
    EXPECT_EQ(w[0], grasp_centroid(s, HandleSide::kLeft));
    const double c = w[1].z() - w[0].z();
    EXPECT_GE(c, p.speed_min * p.recorded_dt - 1e-12);
    EXPECT_LE(c, p.speed_max * p.recorded_dt + 1e-12);
    for (std::size_t k = 1; k < w.size(); ++k) {
      EXPECT_EQ(w[k].x(), w[0].x());
      EXPECT_EQ(w[k].y(), w[0].y());
      EXPECT_NEAR(w[k].z() - w[k - 1].z(), c, 1e-12);
    }
    EXPECT_NEAR(w.back().z() - w[0].z(), c * p.steps, 1e-12);
  }
}

TEST(Window, Lookup) {
  ActionTrajectory t;
  t.r_a = 0.02;
  for (int k = 0; k <= 59; ++k) t.waypoints.push_back(Vec3(k, 2 * k, 0));
  ActionWindow w = action_window(t, 0, 5);
  EXPECT_EQ(w.p_start, t.waypoints[0]);
  EXPECT_EQ(w.p_end, t.waypoints[5]);
  EXPECT_EQ(w.r_a, 0.02);
  w = action_window(t, 59, 1);
  EXPECT_EQ(w.p_start, t.waypoints[59]);
  EXPECT_EQ(w.p_end, t.waypoints[59]);
  w = action_window(t, 57, 5);
  EXPECT_EQ(w.p_end, t.waypoints[59]);
  w = action_window(t, 80, 5);
  EXPECT_EQ(w.p_start, t.waypoints[59]);

  ActionTrajectory still;
  still.waypoints.assign(10, Vec3(1, 1, 1));
  w = action_window(still, 2, 5);
  EXPECT_EQ(w.p_end - w.p_start, Vec3::Zero());
  EXPECT_THROW(action_window(ActionTrajectory{}, 0, 1), Error);
}

TEST(PlanAction, PushAddsControlledSphere) {
  SceneState s = scene_for("push_inside_ff_soft", 6);
  const std::size_t before = s.spheres.size();
  const ActionTrajectory t = plan_action(testing::task("push_inside_ff_soft"), s, ActionParams{}, 6);
  ASSERT_EQ(s.spheres.size(), before + 1);
  EXPECT_TRUE(s.spheres.back().controlled);
  EXPECT_EQ(t.target.index, before);
}

}  // namespace
}  // namespace bagdyn
