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
#include "bagdyn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace bagdyn {
namespace {

bool InUnitInterval(double x) { return x > 0.0 && x <= 1.0; }

// Scratch state shared by the substep phases.
struct Workspace {
  std::vector<double> w;          // particle inverse masses, grasps pinned
  std::vector<Vec3> start;        // particle positions at frame start
  std::vector<Vec3> target;       // kinematic particle targets
  std::vector<Vec3> predicted;
  std::vector<Vec3> sphere_start;
  std::vector<Vec3> sphere_target;
  std::vector<Vec3> sphere_predicted;
  std::vector<char> touching_table;
  std::vector<char> sphere_touching_table;
};

void SolveContacts(const SolverConfig& cfg, const std::vector<RigidSphere>& spheres,
                   Workspace& ws) {
  const double offset = cfg.contact_offset;
  auto& p = ws.predicted;
  auto& c = ws.sphere_predicted;

  for (std::size_t i = 0; i < p.size(); ++i) {
    if (ws.w[i] == 0.0) continue;
    const Vec3 d = resolve_particle_table(p[i], offset);
    if (d.z() != 0.0) {
      p[i] += d;
      ws.touching_table[i] = 1;
    }
  }
  for (std::size_t s = 0; s < spheres.size(); ++s) {
    RigidSphere probe = spheres[s];
    const double ws_inv = probe.inverse_mass;
    for (std::size_t i = 0; i < p.size(); ++i) {
      probe.center = c[s];
      const Vec3 d = resolve_particle_sphere(p[i], probe, offset);
      if (d.isZero(0.0)) continue;
      const double sum = ws.w[i] + ws_inv;
      if (sum == 0.0) continue;
      p[i] += d * (ws.w[i] / sum);
      c[s] -= d * (ws_inv / sum);
    }
  }
  for (std::size_t s = 0; s < spheres.size(); ++s) {
    if (spheres[s].inverse_mass == 0.0) continue;
    if (c[s].z() < spheres[s].radius) {
      c[s].z() = spheres[s].radius;
      ws.sphere_touching_table[s] = 1;
    }
  }
  for (std::size_t a = 0; a < spheres.size(); ++a) {
    for (std::size_t b = a + 1; b < spheres.size(); ++b) {
      RigidSphere sa = spheres[a], sb = spheres[b];
      sa.center = c[a];
      sb.center = c[b];
      const CorrectionPair d = resolve_sphere_sphere(sa, sb);
      c[a] += d.first;
      c[b] += d.second;
    }
  }
}

// Contact cleanup after the constraint sweeps. Kinematic spheres and the
// table push particles out unconditionally. A particle that is pinned or was
// just pushed by one of those blocks dynamic spheres, which then move instead.
void FinalContactPass(const SolverConfig& cfg,
                      const std::vector<RigidSphere>& spheres, Workspace& ws) {
  const double offset = cfg.contact_offset;
  auto& p = ws.predicted;
  auto& c = ws.sphere_predicted;
  std::vector<char> blocked(p.size());
  for (int round = 0; round < 4; ++round) {
    bool clean = true;
    for (std::size_t s = 0; s < spheres.size(); ++s) {
      if (spheres[s].inverse_mass != 0.0 && c[s].z() < spheres[s].radius) {
        c[s].z() = spheres[s].radius;
        ws.sphere_touching_table[s] = 1;
      }
    }
    for (std::size_t a = 0; a < spheres.size(); ++a) {
      for (std::size_t b = a + 1; b < spheres.size(); ++b) {
        RigidSphere sa = spheres[a], sb = spheres[b];
        sa.center = c[a];
        sb.center = c[b];
        const CorrectionPair d = resolve_sphere_sphere(sa, sb);
        c[a] += d.first;
        c[b] += d.second;
      }
    }
    for (std::size_t i = 0; i < p.size(); ++i) blocked[i] = ws.w[i] == 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (ws.w[i] == 0.0) continue;
      const Vec3 d = resolve_particle_table(p[i], offset);
      if (d.z() != 0.0) {
        p[i] += d;
        clean = false;
      }
      if (p[i].z() <= offset) {
        ws.touching_table[i] = 1;
        blocked[i] = 1;
      }
    }
    for (std::size_t s = 0; s < spheres.size(); ++s) {
      if (spheres[s].inverse_mass != 0.0) continue;
      RigidSphere probe = spheres[s];
      probe.center = c[s];
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (ws.w[i] == 0.0) continue;
        const Vec3 d = resolve_particle_sphere(p[i], probe, offset);
        if (d.isZero(0.0)) continue;
        p[i] += d;
        blocked[i] = 1;
        clean = false;
      }
    }
    for (std::size_t s = 0; s < spheres.size(); ++s) {
      if (spheres[s].inverse_mass == 0.0) continue;
      RigidSphere probe = spheres[s];
      probe.center = c[s];
      for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec3 d = resolve_particle_sphere(p[i], probe, offset);
        if (d.isZero(0.0)) continue;
        clean = false;
        if (blocked[i]) {
          c[s] -= d;
          probe.center = c[s];
        } else {
          p[i] += d;
        }
      }
    }
    if (clean) break;
  }
}

}  // namespace

void validate(const SolverConfig& cfg) {
  const bool ok = cfg.recorded_dt > 0.0 && cfg.substeps >= 1 &&
                  cfg.iterations >= 1 && InUnitInterval(cfg.stretch_stiffness) &&
                  InUnitInterval(cfg.bend_stiffness_soft) &&
                  InUnitInterval(cfg.bend_stiffness_stiff) &&
                  InUnitInterval(cfg.velocity_damping) &&
                  cfg.table_friction >= 0.0 && cfg.table_friction <= 1.0 &&
                  cfg.contact_offset >= 0.0 && cfg.gravity.allFinite();
  if (!ok) throw Error(ErrorCode::kInvalidParameter, "invalid solver config");
}

CorrectionPair project_distance(const Vec3& p_i, const Vec3& p_j, double w_i,
                                double w_j, double rest, double k) {
  CorrectionPair out;
  const double w_sum = w_i + w_j;
  const Vec3 d = p_i - p_j;
  const double len = d.norm();
  if (w_sum == 0.0 || len == 0.0) return out;
  const Vec3 n = d / len;
  const double c = k * (len - rest);
  out.first = -(w_i / w_sum) * c * n;
  out.second = (w_j / w_sum) * c * n;
  return out;
}

CorrectionPair project_bend(const Vec3& p_i, const Vec3& p_j, double w_i,
                            double w_j, double rest, double k) {
  return project_distance(p_i, p_j, w_i, w_j, rest, k);
}

Vec3 resolve_particle_sphere(const Vec3& p, const RigidSphere& s, double offset) {
  const Vec3 d = p - s.center;
  const double dist = d.norm();
  const double surface = s.radius + offset;
  if (dist >= surface) return Vec3::Zero();
  if (dist == 0.0) return Vec3(0.0, 0.0, surface);
  return d * ((surface - dist) / dist);
}

Vec3 resolve_particle_table(const Vec3& p, double offset) {
  if (p.z() >= offset) return Vec3::Zero();
  return Vec3(0.0, 0.0, offset - p.z());
}

CorrectionPair resolve_sphere_sphere(const RigidSphere& a, const RigidSphere& b) {
  CorrectionPair out;
  const Vec3 d = b.center - a.center;
  const double dist = d.norm();
  const double overlap = a.radius + b.radius - dist;
  const double w_sum = a.inverse_mass + b.inverse_mass;
  if (overlap <= 0.0 || w_sum == 0.0) return out;
  const Vec3 n = dist == 0.0 ? Vec3::UnitX() : Vec3(d / dist);
  out.first = -n * (overlap * a.inverse_mass / w_sum);
  out.second = n * (overlap * b.inverse_mass / w_sum);
  return out;
}

SceneState step(const SceneState& state, const DeformableMesh& mesh,
                std::span<const ControlTarget> commanded, const TaskConfig& task,
                const SolverConfig& cfg) {
  validate(cfg);
  const std::size_t n = mesh.particle_count();
  if (state.positions.size() != n || state.velocities.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "step: state does not match mesh particle count");
  }

  Workspace ws;
  ws.w = effective_inverse_masses(mesh, state);
  ws.start = state.positions;
  ws.target = state.positions;
  ws.sphere_start.reserve(state.spheres.size());
  for (const RigidSphere& s : state.spheres) ws.sphere_start.push_back(s.center);
  ws.sphere_target = ws.sphere_start;

  for (const ControlTarget& cmd : commanded) {
    if (cmd.entity.kind == EntityRef::Kind::kHandle) {
      if (cmd.entity.index > 1) {
        throw Error(ErrorCode::kInvalidParameter, "step: bad handle index");
      }
      const auto side = static_cast<HandleSide>(cmd.entity.index);
      const Grasp& g = state.grasp(side);
      if (g.state != HandleState::kMoving) {
        throw Error(ErrorCode::kInvalidParameter,
                    std::string("step: ") + to_string(side) +
                        " handle is not moving");
      }
      const Vec3 c0 = grasp_centroid(state, side);
      for (Index v : g.vertices) ws.target[v] = cmd.position + (state.positions[v] - c0);
    } else {
      if (cmd.entity.index >= state.spheres.size() ||
          !state.spheres[cmd.entity.index].controlled) {
        throw Error(ErrorCode::kInvalidParameter,
                    "step: commanded sphere is not controlled");
      }
      ws.sphere_target[cmd.entity.index] = cmd.position;
    }
  }

  SceneState out = state;
  auto& x = out.positions;
  auto& v = out.velocities;
  const int substeps = cfg.substeps;
  const double dt = cfg.recorded_dt / substeps;
  const double k_stretch = cfg.stretch_stiffness;
  const double k_bend = cfg.bend_stiffness(task.stiffness);

  ws.predicted.resize(n);
  ws.sphere_predicted.resize(state.spheres.size());

  for (int sub = 1; sub <= substeps; ++sub) {
    const double alpha = static_cast<double>(sub) / substeps;
    const bool last = sub == substeps;
    for (std::size_t i = 0; i < n; ++i) {
      if (ws.w[i] > 0.0) {
        v[i] = (v[i] + cfg.gravity * dt) * cfg.velocity_damping;
        ws.predicted[i] = x[i] + v[i] * dt;
      } else {
        ws.predicted[i] =
            last ? ws.target[i]
                 : Vec3(ws.start[i] + (ws.target[i] - ws.start[i]) * alpha);
      }
    }
    for (std::size_t s = 0; s < out.spheres.size(); ++s) {
      RigidSphere& sp = out.spheres[s];
      if (sp.inverse_mass > 0.0) {
        sp.velocity = (sp.velocity + cfg.gravity * dt) * cfg.velocity_damping;
        ws.sphere_predicted[s] = sp.center + sp.velocity * dt;
      } else {
        const Vec3& a = ws.sphere_start[s];
        const Vec3& b = ws.sphere_target[s];
        ws.sphere_predicted[s] = last ? b : Vec3(a + (b - a) * alpha);
      }
    }
    ws.touching_table.assign(n, 0);
    ws.sphere_touching_table.assign(out.spheres.size(), 0);

    auto& p = ws.predicted;
    for (int it = 0; it < cfg.iterations; ++it) {
      for (const Link& e : mesh.stretch_edges) {
        const CorrectionPair d = project_distance(p[e.i], p[e.j], ws.w[e.i],
                                                  ws.w[e.j], e.rest_length, k_stretch);
        p[e.i] += d.first;
        p[e.j] += d.second;
      }
      for (const Link& e : mesh.bend_pairs) {
        const CorrectionPair d = project_bend(p[e.i], p[e.j], ws.w[e.i],
                                              ws.w[e.j], e.rest_length, k_bend);
        p[e.i] += d.first;
        p[e.j] += d.second;
      }
      SolveContacts(cfg, out.spheres, ws);
    }
    FinalContactPass(cfg, out.spheres, ws);

    const double keep = 1.0 - cfg.table_friction;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = (p[i] - x[i]) / dt;
      if (ws.touching_table[i]) {
        v[i].x() *= keep;
        v[i].y() *= keep;
      }
      x[i] = p[i];
    }
    for (std::size_t s = 0; s < out.spheres.size(); ++s) {
      RigidSphere& sp = out.spheres[s];
      sp.velocity = (ws.sphere_predicted[s] - sp.center) / dt;
      if (ws.sphere_touching_table[s]) {
        sp.velocity.x() *= keep;
        sp.velocity.y() *= keep;
      }
      sp.center = ws.sphere_predicted[s];
    }

    bool finite = true;
    for (std::size_t i = 0; i < n && finite; ++i) finite = x[i].allFinite() && v[i].allFinite();
    for (const RigidSphere& sp : out.spheres) finite = finite && sp.center.allFinite();
    if (!finite) {
      throw Error(ErrorCode::kSimulationDiverged,
                  "step: NaN detected at frame " +
                      std::to_string(state.frame_index + 1) + " substep " +
                      std::to_string(sub));
    }
  }
  ++out.frame_index;
  return out;
}

SceneState settle(const SceneState& state, const DeformableMesh& mesh,
                  const TaskConfig& task, const SolverConfig& cfg,
                  int max_frames) {
  if (max_frames < 1) {
    throw Error(ErrorCode::kInvalidParameter, "settle: max_frames must be >= 1");
  }
  SceneState current = state;
  for (int f = 0; f < max_frames; ++f) {
    SceneState next = step(current, mesh, {}, task, cfg);
    double moved = 0.0;
    for (std::size_t i = 0; i < next.positions.size(); ++i) {
      moved = std::max(moved, (next.positions[i] - current.positions[i]).norm());
    }
    for (std::size_t s = 0; s < next.spheres.size(); ++s) {
      moved = std::max(moved, (next.spheres[s].center - current.spheres[s].center).norm());
    }
    current = std::move(next);
    if (moved < kSettleThreshold) break;
  }
  return current;
}

}  // namespace bagdyn
