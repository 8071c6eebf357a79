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
#include "bagdyn/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <utility>

namespace bagdyn {
namespace {

std::pair<Index, Index> Key(Index a, Index b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

MeshCounts expected_mesh_counts(const MeshParams& p) {
  const std::size_t na = p.n_around, nh = p.n_height, hs = p.handle_segments;
  MeshCounts c;
  c.particles = na * nh + na + 1 + 4 * (hs - 1);
  c.triangles = 2 * na * (nh - 1) + 3 * na + 4 * (hs - 1);
  c.stretch_edges = na * (3 * nh - 2) + 4 * na + 2 * (4 * hs - 3);
  return c;
}

DeformableMesh build_bag_mesh(const MeshParams& p) {
  if (p.n_around < 8 || p.n_height < 4 || p.handle_segments < 3) {
    throw Error(ErrorCode::kInvalidParameter,
                "build_bag_mesh: need n_around >= 8, n_height >= 4, "
                "handle_segments >= 3");
  }
  if (!(p.scale.minCoeff() > 0.0) || !(p.particle_mass > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter,
                "build_bag_mesh: scale and particle mass must be positive");
  }

  const Index na = static_cast<Index>(p.n_around);
  const Index nh = static_cast<Index>(p.n_height);
  const Index hs = static_cast<Index>(p.handle_segments);
  const double rx = 0.5 * p.scale.x();
  const double ry = 0.5 * p.scale.y();
  const double height = p.scale.z();
  const double dtheta = 2.0 * std::numbers::pi / na;

  DeformableMesh mesh;
  auto& pos = mesh.rest_positions;

  auto body = [na](Index i, Index j) { return j * na + (i % na); };
  for (Index j = 0; j < nh; ++j) {
    const double z = height * j / (nh - 1);
    for (Index i = 0; i < na; ++i) {
      pos.emplace_back(rx * std::cos(i * dtheta), ry * std::sin(i * dtheta), z);
    }
  }
  const Index inner0 = na * nh;
  auto inner = [&](Index i) { return inner0 + (i % na); };
  for (Index i = 0; i < na; ++i) {
    pos.emplace_back(0.5 * rx * std::cos(i * dtheta),
                     0.5 * ry * std::sin(i * dtheta), 0.0);
  }
  mesh.bottom_center = inner0 + na;
  pos.emplace_back(0.0, 0.0, 0.0);

  auto& tris = mesh.triangles;
  for (Index j = 0; j + 1 < nh; ++j) {
    for (Index i = 0; i < na; ++i) {
      tris.push_back({body(i, j), body(i + 1, j), body(i + 1, j + 1)});
      tris.push_back({body(i, j), body(i + 1, j + 1), body(i, j + 1)});
    }
  }
  for (Index i = 0; i < na; ++i) {
    tris.push_back({inner(i), inner(i + 1), body(i + 1, 0)});
    tris.push_back({inner(i), body(i + 1, 0), body(i, 0)});
    tris.push_back({mesh.bottom_center, inner(i + 1), inner(i)});
  }

  // Handles: ribbons of (hs - 1) inner/outer vertex columns between two rim
  // vertices 2*span apart, centred at angle pi (left) and 0 (right).
  const Index span = std::max<Index>(1, na / 8);
  const double ribbon = 0.25 * std::min(rx, ry) * dtheta;
  const double arch = 0.3 * height;
  const Index columns = hs - 1;
  for (int side = 0; side < 2; ++side) {
    const Index centre = side == 0 ? na / 2 : 0;
    const Index a = body(centre + na - span, nh - 1);
    const Index b = body(centre + span, nh - 1);
    const Index base = static_cast<Index>(pos.size());
    for (Index k = 1; k <= columns; ++k) {
      const double s = static_cast<double>(k) / hs;
      const double phi = (centre + (2.0 * s - 1.0) * span) * dtheta;
      const double z = height + arch * std::sin(std::numbers::pi * s);
      for (double offset : {-0.5 * ribbon, 0.5 * ribbon}) {
        pos.emplace_back((rx + offset) * std::cos(phi),
                         (ry + offset) * std::sin(phi), z);
      }
    }
    auto in = [base](Index k) { return base + 2 * (k - 1); };
    auto out = [base](Index k) { return base + 2 * (k - 1) + 1; };
    tris.push_back({a, in(1), out(1)});
    for (Index k = 1; k < columns; ++k) {
      tris.push_back({in(k), in(k + 1), out(k + 1)});
      tris.push_back({in(k), out(k + 1), out(k)});
    }
    tris.push_back({b, out(columns), in(columns)});

    auto& grip = side == 0 ? mesh.left_handle_vertices
                           : mesh.right_handle_vertices;
    const Index first = columns % 2 == 1 ? (columns + 1) / 2 : columns / 2;
    const Index last = columns % 2 == 1 ? first : first + 1;
    for (Index k = first; k <= last; ++k) {
      grip.push_back(in(k));
      grip.push_back(out(k));
    }
  }

  for (Index i = 0; i < na; ++i) mesh.rim_vertices.push_back(body(i, nh - 1));

  mesh.inverse_masses.assign(pos.size(), 1.0 / p.particle_mass);

  // Stretch edges: every triangle side once, in first-seen order.
  std::set<std::pair<Index, Index>> seen;
  std::map<std::pair<Index, Index>, std::vector<Index>> opposite;
  for (const auto& t : tris) {
    for (int e = 0; e < 3; ++e) {
      const Index u = t[e], v = t[(e + 1) % 3], w = t[(e + 2) % 3];
      const auto key = Key(u, v);
      if (seen.insert(key).second) {
        mesh.stretch_edges.push_back(
            {key.first, key.second, (pos[key.first] - pos[key.second]).norm()});
      }
      opposite[key].push_back(w);
    }
  }

  // Bend pairs: opposite vertices of the two triangles sharing an edge, in
  // stretch-edge order so the constraint order is reproducible.
  std::set<std::pair<Index, Index>> bend_seen;
  for (const Link& e : mesh.stretch_edges) {
    const auto& opp = opposite[Key(e.i, e.j)];
    if (opp.size() != 2 || opp[0] == opp[1]) continue;
    const auto key = Key(opp[0], opp[1]);
    if (seen.count(key) || !bend_seen.insert(key).second) continue;
    mesh.bend_pairs.push_back(
        {key.first, key.second, (pos[key.first] - pos[key.second]).norm()});
  }
  return mesh;
}

std::vector<std::string> validate_mesh(const DeformableMesh& mesh) {
  std::vector<std::string> issues;
  const std::size_t n = mesh.particle_count();
  auto in_range = [n](Index i) { return static_cast<std::size_t>(i) < n; };

  if (n == 0) issues.emplace_back("mesh has no particles");
  if (mesh.inverse_masses.size() != n) {
    issues.emplace_back("inverse mass count differs from particle count");
  }
  for (double w : mesh.inverse_masses) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      issues.emplace_back("negative or non-finite inverse mass");
      break;
    }
  }
  for (const Vec3& x : mesh.rest_positions) {
    if (!x.allFinite()) {
      issues.emplace_back("non-finite rest position");
      break;
    }
  }

  auto check_links = [&](const std::vector<Link>& links, const char* what) {
    std::set<std::pair<Index, Index>> pairs;
    for (std::size_t k = 0; k < links.size(); ++k) {
      const Link& l = links[k];
      const std::string where =
          std::string(what) + " " + std::to_string(k) + ": ";
      if (!in_range(l.i) || !in_range(l.j)) {
        issues.push_back(where + "index out of range");
        continue;
      }
      if (l.i == l.j) issues.push_back(where + "self pair");
      if (!(l.rest_length > 0.0) || !std::isfinite(l.rest_length)) {
        issues.push_back(where + "non-positive rest length");
      }
      if (!pairs.insert(Key(l.i, l.j)).second) {
        issues.push_back(where + "duplicate pair");
      }
    }
  };
  check_links(mesh.stretch_edges, "stretch edge");
  check_links(mesh.bend_pairs, "bend pair");

  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    for (Index v : mesh.triangles[k]) {
      if (!in_range(v)) {
        issues.push_back("triangle " + std::to_string(k) +
                         ": index out of range");
        break;
      }
    }
  }

  auto check_set = [&](const std::vector<Index>& s, const char* what) {
    for (Index v : s) {
      if (!in_range(v)) {
        issues.push_back(std::string(what) + ": index out of range");
        return;
      }
    }
  };
  check_set(mesh.left_handle_vertices, "left handle");
  check_set(mesh.right_handle_vertices, "right handle");
  check_set(mesh.rim_vertices, "rim");
  if (!in_range(mesh.bottom_center)) {
    issues.emplace_back("bottom centre: index out of range");
  }
  if (mesh.left_handle_vertices.empty() || mesh.right_handle_vertices.empty()) {
    issues.emplace_back("handle vertex set is empty");
  }
  std::set<Index> left(mesh.left_handle_vertices.begin(),
                       mesh.left_handle_vertices.end());
  for (Index v : mesh.right_handle_vertices) {
    if (left.count(v)) {
      issues.emplace_back("handle vertex sets overlap");
      break;
    }
  }
  return issues;
}

}  // namespace bagdyn
