#pragma once

#include "iontrap/geometry.hpp"

namespace iontrap {

// Precomputed per-panel frame for the analytic single-layer integrals.
struct PanelGeom {
  Vec3 v[3];
  Vec3 normal;       // unit, matches the stored winding
  Vec3 centroid;
  double area = 0.0;
  double diameter = 0.0;  // longest edge
  Vec3 edge_dir[3];       // unit edge directions v0->v1->v2->v0
  Vec3 edge_out[3];       // in-plane outward edge normals (s x n)
};

PanelGeom make_panel_geom(const Panel& p);

// I(p) = Int_T dA' / |p - r'| for a uniformly charged triangle, and its
// gradient with respect to p. Exact closed form (edge log + solid-angle
// terms). The potential of the panel with charge density sigma is
// sigma * I / (4 pi eps0); the field is -sigma * grad(I) / (4 pi eps0).
double panel_potential_integral(const PanelGeom& g, const Vec3& p);
void panel_integral(const PanelGeom& g, const Vec3& p, double* value,
                    Vec3* grad);

}  // namespace iontrap
