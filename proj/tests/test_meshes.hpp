#pragma once

// Small analytic test conductors shared by the solver tests and the
// acceptance suite.

#include <cmath>
#include <map>

#include "iontrap/geometry.hpp"

namespace iontrap::testmesh {

// Icosphere; electrode id is arbitrary for single-conductor problems.
inline ElectrodeMesh icosphere(double radius, const Vec3& center,
                               int subdivisions, Electrode id) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]).normalized();
      verts.push_back(m);
      int idx = static_cast<int>(verts.size()) - 1;
      midpoint[key] = idx;
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (auto [a, b, c] : faces) {
      int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  ElectrodeMesh mesh;
  mesh.panels.reserve(faces.size());
  for (auto [a, b, c] : faces)
    mesh.panels.push_back(Panel{center + radius * verts[a],
                                center + radius * verts[b],
                                center + radius * verts[c], id});
  mesh.solids.push_back({id, 0, mesh.panels.size(), center});
  return mesh;
}

// Open rectangular sheet (zero thickness), n x n cells.
inline void add_plate(ElectrodeMesh& mesh, const Vec3& corner, const Vec3& uvec,
                      const Vec3& vvec, int nu, int nv, Electrode id) {
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i) {
      Vec3 p00 = corner + uvec * (double(i) / nu) + vvec * (double(j) / nv);
      Vec3 p10 = corner + uvec * (double(i + 1) / nu) + vvec * (double(j) / nv);
      Vec3 p11 =
          corner + uvec * (double(i + 1) / nu) + vvec * (double(j + 1) / nv);
      Vec3 p01 = corner + uvec * (double(i) / nu) + vvec * (double(j + 1) / nv);
      mesh.panels.push_back(Panel{p00, p10, p11, id});
      mesh.panels.push_back(Panel{p00, p11, p01, id});
    }
}

}  // namespace iontrap::testmesh
