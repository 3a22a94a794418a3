#include "iontrap/panel_integral.hpp"

#include <cmath>

namespace iontrap {

PanelGeom make_panel_geom(const Panel& p) {
  PanelGeom g;
  g.v[0] = p.v0;
  g.v[1] = p.v1;
  g.v[2] = p.v2;
  Vec3 n = (p.v1 - p.v0).cross(p.v2 - p.v0);
  double n2 = n.norm();
  g.area = 0.5 * n2;
  g.normal = n / n2;
  g.centroid = (p.v0 + p.v1 + p.v2) / 3.0;
  g.diameter = 0.0;
  for (int i = 0; i < 3; ++i) {
    Vec3 e = g.v[(i + 1) % 3] - g.v[i];
    double len = e.norm();
    g.diameter = std::max(g.diameter, len);
    g.edge_dir[i] = e / len;
    g.edge_out[i] = g.edge_dir[i].cross(g.normal);
  }
  return g;
}

// Closed-form potential/gradient of a constant source layer on a triangle
// (Wilton et al. style edge decomposition). Vertices are CCW about the
// normal, edge_out points out of the triangle in its plane.
void panel_integral(const PanelGeom& g, const Vec3& p, double* value,
                    Vec3* grad) {
  const double w0 = (p - g.v[0]).dot(g.normal);
  const double aw0 = std::abs(w0);

  double sum_tf = 0.0;
  double sum_beta = 0.0;
  Vec3 sum_mf = Vec3::Zero();

  for (int i = 0; i < 3; ++i) {
    const Vec3& a = g.v[i];
    const Vec3& b = g.v[(i + 1) % 3];
    const Vec3& s_hat = g.edge_dir[i];
    const Vec3& m_hat = g.edge_out[i];

    const Vec3 pa = a - p;
    const Vec3 pb = b - p;
    const double sm = pa.dot(s_hat);
    const double sp = pb.dot(s_hat);
    const double t = pa.dot(m_hat);
    const double rm = pa.norm();
    const double rp = pb.norm();
    const double r0sq = t * t + w0 * w0;

    double f;
    if (sm + sp >= 0.0) {
      const double den = rm + sm;
      f = (den > 0.0) ? std::log((rp + sp) / den) : 0.0;
    } else {
      const double den = rp - sp;
      f = (den > 0.0) ? std::log((rm - sm) / den) : 0.0;
    }

    double beta = 0.0;
    if (std::abs(t) > 0.0 && r0sq > 0.0) {
      beta = std::atan(t * sp / (r0sq + aw0 * rp)) -
             std::atan(t * sm / (r0sq + aw0 * rm));
    }

    sum_tf += t * f;
    sum_beta += beta;
    if (grad) sum_mf += m_hat * f;
  }

  if (value) *value = sum_tf - aw0 * sum_beta;
  if (grad) {
    double sgn = (w0 > 0.0) ? 1.0 : ((w0 < 0.0) ? -1.0 : 0.0);
    *grad = -sum_mf - g.normal * (sgn * sum_beta);
  }
}

double panel_potential_integral(const PanelGeom& g, const Vec3& p) {
  double v;
  panel_integral(g, p, &v, nullptr);
  return v;
}

}  // namespace iontrap
