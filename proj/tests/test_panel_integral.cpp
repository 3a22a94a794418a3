#include <cmath>
#include <random>

#include "doctest.h"
#include "iontrap/panel_integral.hpp"

using namespace iontrap;

namespace {

// Brute-force oracle: degree-5 quadrature on recursively subdivided
// triangles, splitting while a sub-triangle is large compared to its
// distance from the field point. Independent of the closed-form path.
struct QuadOracle {
  double value = 0.0;
  Vec3 grad = Vec3::Zero();
};

void quad_recurse(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p,
                  int depth, QuadOracle& acc) {
  Vec3 centroid = (a + b + c) / 3.0;
  double size = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
  double dist = (p - centroid).norm();
  if (depth > 0 && size > 0.15 * dist) {
    Vec3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    quad_recurse(a, ab, ca, p, depth - 1, acc);
    quad_recurse(ab, b, bc, p, depth - 1, acc);
    quad_recurse(ca, bc, c, p, depth - 1, acc);
    quad_recurse(ab, bc, ca, p, depth - 1, acc);
    return;
  }
  // 7-point degree-5 rule (barycentric).
  static const double w[7] = {0.225,
                              0.13239415278850619,
                              0.13239415278850619,
                              0.13239415278850619,
                              0.12593918054482713,
                              0.12593918054482713,
                              0.12593918054482713};
  static const double l1[7] = {1.0 / 3.0, 0.05971587178976981,
                               0.47014206410511505, 0.47014206410511505,
                               0.7974269853530872, 0.10128650732345633,
                               0.10128650732345633};
  static const double l2[7] = {1.0 / 3.0, 0.47014206410511505,
                               0.05971587178976981, 0.47014206410511505,
                               0.10128650732345633, 0.7974269853530872,
                               0.10128650732345633};
  double area = 0.5 * (b - a).cross(c - a).norm();
  for (int k = 0; k < 7; ++k) {
    Vec3 q = l1[k] * a + l2[k] * b + (1.0 - l1[k] - l2[k]) * c;
    Vec3 d = p - q;
    double r = d.norm();
    acc.value += w[k] * area / r;
    acc.grad -= w[k] * area / (r * r * r) * d;
  }
}

QuadOracle quadrature_integral(const Panel& panel, const Vec3& p) {
  QuadOracle acc;
  quad_recurse(panel.v0, panel.v1, panel.v2, p, 14, acc);
  return acc;
}

// For points strictly inside the triangle plane region: I = integral of the
// radial boundary distance over angle (the 1/r weight cancels exactly).
double in_plane_interior_integral(const Panel& panel, const Vec3& p) {
  // Work in the plane spanned by the triangle.
  Vec3 n = panel.raw_normal().normalized();
  Vec3 u = (panel.v1 - panel.v0).normalized();
  Vec3 v = n.cross(u);
  auto to2d = [&](const Vec3& q) {
    return Vec2((q - p).dot(u), (q - p).dot(v));
  };
  Vec2 t0 = to2d(panel.v0), t1 = to2d(panel.v1), t2 = to2d(panel.v2);
  const Vec2 verts[3] = {t0, t1, t2};
  const int n_samples = 3'000'000;
  double sum = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    double th = 2.0 * M_PI * (i + 0.5) / n_samples;
    Vec2 dir(std::cos(th), std::sin(th));
    // Distance from origin to the triangle boundary along dir.
    double best = 0.0;
    for (int e = 0; e < 3; ++e) {
      Vec2 a = verts[e], b = verts[(e + 1) % 3];
      Vec2 ab = b - a;
      double denom = dir.x() * (-ab.y()) + dir.y() * ab.x();
      if (std::abs(denom) < 1e-300) continue;
      double t = (a.x() * (-ab.y()) + a.y() * ab.x()) / denom;
      if (t <= 0.0) continue;
      Vec2 hit = t * dir;
      double s = ab.dot(hit - a) / ab.squaredNorm();
      if (s >= -1e-12 && s <= 1.0 + 1e-12) best = std::max(best, t);
    }
    sum += best;
  }
  return sum * 2.0 * M_PI / n_samples;
}

Panel random_panel(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    Panel p{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)),
            Vec3(u(rng), u(rng), u(rng)), Electrode::RfBlade1};
    if (p.area() > 0.05) return p;
  }
}

}  // namespace

TEST_CASE("panel integral matches adaptive quadrature off the surface") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  int checked = 0;
  while (checked < 40) {
    Panel panel = random_panel(rng);
    Vec3 p(u(rng), u(rng), u(rng));
    PanelGeom g = make_panel_geom(panel);
    // Oracle accuracy degrades very close to the surface; keep a margin.
    if ((p - g.centroid).norm() < 0.4 * g.diameter) continue;
    ++checked;
    auto oracle = quadrature_integral(panel, p);
    double val;
    Vec3 grad;
    panel_integral(g, p, &val, &grad);
    CHECK(val == doctest::Approx(oracle.value).epsilon(5e-6));
    for (int k = 0; k < 3; ++k)
      CHECK(grad[k] == doctest::Approx(oracle.grad[k]).epsilon(2e-4).scale(
                           oracle.grad.norm()));
  }
}

TEST_CASE("panel integral far field approaches the monopole") {
  std::mt19937 rng(11);
  Panel panel = random_panel(rng);
  PanelGeom g = make_panel_geom(panel);
  Vec3 dir = Vec3(0.3, -0.8, 0.52).normalized();
  Vec3 p = g.centroid + 500.0 * g.diameter * dir;
  double val = panel_potential_integral(g, p);
  double mono = g.area / (p - g.centroid).norm();
  CHECK(val == doctest::Approx(mono).epsilon(1e-5));
}

TEST_CASE("panel integral at in-plane interior points (self-term path)") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 3; ++trial) {
    Panel panel = random_panel(rng);
    PanelGeom g = make_panel_geom(panel);
    double val = panel_potential_integral(g, g.centroid);
    double oracle = in_plane_interior_integral(panel, g.centroid);
    CHECK(val == doctest::Approx(oracle).epsilon(2e-5));
  }
}

TEST_CASE("panel gradient is consistent with finite differences") {
  std::mt19937 rng(37);
  Panel panel = random_panel(rng);
  PanelGeom g = make_panel_geom(panel);
  Vec3 p = g.centroid + 1.7 * g.diameter * Vec3(0.2, 0.9, 0.4).normalized();
  Vec3 grad;
  panel_integral(g, p, nullptr, &grad);
  double h = 1e-6;
  for (int k = 0; k < 3; ++k) {
    Vec3 dp = Vec3::Zero();
    dp[k] = h;
    double fd = (panel_potential_integral(g, p + dp) -
                 panel_potential_integral(g, p - dp)) /
                (2.0 * h);
    CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-6).scale(grad.norm()));
  }
}

TEST_CASE("normal gradient jump across the sheet is -2*pi*sign(w)") {
  std::mt19937 rng(41);
  Panel panel = random_panel(rng);
  PanelGeom g = make_panel_geom(panel);
  double eps = 1e-7 * g.diameter;
  Vec3 grad_up, grad_dn;
  panel_integral(g, g.centroid + eps * g.normal, nullptr, &grad_up);
  panel_integral(g, g.centroid - eps * g.normal, nullptr, &grad_dn);
  CHECK(grad_up.dot(g.normal) == doctest::Approx(-2.0 * M_PI).epsilon(1e-3));
  CHECK(grad_dn.dot(g.normal) == doctest::Approx(2.0 * M_PI).epsilon(1e-3));
}
