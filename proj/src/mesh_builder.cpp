#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "iontrap/constants.hpp"
#include "iontrap/geometry.hpp"
#include "profile.hpp"

namespace iontrap {

namespace {

using SizeFn = std::function<double(double)>;

// Boundary positions over [0, len] with local cell size ~ size(s), marching
// from s = 0 and rescaling so the cells tile the interval exactly.
std::vector<double> graded_cells(double len, const SizeFn& size) {
  std::vector<double> widths;
  double s = 0.0;
  const double min_h = 1e-9;
  while (s < len) {
    double h = std::max(size(s), min_h);
    h = std::max(size(std::min(s + 0.5 * h, len)), min_h);
    if (s + 1.5 * h >= len) {
      double rest = len - s;
      if (rest > 1.3 * h && !widths.empty()) {
        widths.push_back(rest / 2.0);
        widths.push_back(rest / 2.0);
      } else {
        widths.push_back(rest);
      }
      break;
    }
    widths.push_back(h);
    s += h;
  }
  if (widths.empty()) widths.push_back(len);
  std::vector<double> bounds;
  bounds.reserve(widths.size() + 1);
  bounds.push_back(0.0);
  double acc = 0.0;
  for (double w : widths) {
    acc += w;
    bounds.push_back(acc);
  }
  double scale = len / acc;
  for (double& b : bounds) b *= scale;
  bounds.back() = len;
  return bounds;
}

// Divisions of [a, b], marching from the finer end so mirrored intervals
// produce mirrored divisions. `from_a` lets callers pin the direction in a
// mirror-invariant way.
std::vector<double> graded_interval_dir(double a, double b,
                                        const SizeFn& size_at, bool from_a) {
  double len = b - a;
  std::vector<double> cells;
  if (from_a) {
    cells = graded_cells(len, [&](double s) { return size_at(a + s); });
    for (double& c : cells) c += a;
    cells.front() = a;
    cells.back() = b;
  } else {
    cells = graded_cells(len, [&](double s) { return size_at(b - s); });
    std::vector<double> rev(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      rev[cells.size() - 1 - i] = b - cells[i];
    cells = std::move(rev);
    cells.front() = a;
    cells.back() = b;
  }
  return cells;
}

std::vector<double> graded_interval(double a, double b, const SizeFn& size_at) {
  return graded_interval_dir(a, b, size_at,
                             size_at(a) <= size_at(b) * (1.0 + 1e-12));
}

// Divisions of [-half, half] mirror-symmetric about zero.
std::vector<double> graded_symmetric(double half, const SizeFn& size_abs) {
  auto pos = graded_interval(0.0, half, [&](double s) { return size_abs(s); });
  std::vector<double> out;
  out.reserve(2 * pos.size() - 1);
  for (std::size_t i = pos.size(); i-- > 1;) out.push_back(-pos[i]);
  for (double p : pos) out.push_back(p);
  return out;
}

struct MeshSink {
  std::vector<Panel>* panels;
  std::size_t max_panels;

  void add(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& outward,
           Electrode e) {
    Vec3 n = (b - a).cross(c - a);
    double area2 = n.norm();
    if (area2 <= 0.0) return;  // collapsed cell (e.g. polar cap center)
    if (panels->size() >= max_panels)
      throw std::runtime_error(
          "mesh exceeds the panel budget; coarsen the density policy");
    if (n.dot(outward) >= 0.0)
      panels->push_back({a, b, c, e});
    else
      panels->push_back({a, c, b, e});
  }

  // Grid of points p(u, v); u/v index the division vectors. Splits along the
  // shorter diagonal; ties (planar rectangles) split by the sign of the cell's
  // z center so the triangulation is exactly mirror-symmetric under z -> -z.
  void add_grid(const std::function<Vec3(double, double)>& point,
                const std::vector<double>& us, const std::vector<double>& vs,
                const Vec3& outward, Electrode e) {
    for (std::size_t j = 0; j + 1 < vs.size(); ++j) {
      for (std::size_t i = 0; i + 1 < us.size(); ++i) {
        Vec3 p00 = point(us[i], vs[j]);
        Vec3 p10 = point(us[i + 1], vs[j]);
        Vec3 p11 = point(us[i + 1], vs[j + 1]);
        Vec3 p01 = point(us[i], vs[j + 1]);
        double d1 = (p11 - p00).squaredNorm();
        double d2 = (p10 - p01).squaredNorm();
        double zmin = std::min({p00.z(), p10.z(), p11.z(), p01.z()});
        double zmax = std::max({p00.z(), p10.z(), p11.z(), p01.z()});
        bool flat_in_z = (zmax - zmin) <= 1e-12 * (1.0 + std::abs(zmax));
        bool first_diagonal;
        if (std::abs(d1 - d2) <= 1e-12 * (d1 + d2))
          // Tie (planar rectangle): flat cells keep a fixed in-plane split so
          // caps at +-z mirror; z-extruded cells split by the z sign.
          first_diagonal = flat_in_z || (p00 + p10 + p11 + p01).z() >= 0.0;
        else
          first_diagonal = d1 < d2;
        if (first_diagonal) {
          add(p00, p10, p11, outward, e);
          add(p00, p11, p01, outward, e);
        } else {
          add(p00, p10, p01, outward, e);
          add(p10, p11, p01, outward, e);
        }
      }
    }
  }
};

struct BladeMesher {
  const TrapSpec& spec;
  const MeshDensity& density;
  MeshSink& sink;
  RigidTransform world_from_local;
  std::vector<Vec2> profile;

  Vec3 world(const Vec2& rw, double z) const {
    return world_from_local.apply(Vec3(rw.x(), rw.y(), z));
  }

  // Axial cell size for a strip whose closest in-plane radius is rho_min.
  // Fine near the piece walls (grooves), relaxed on z-uniform stretches.
  double axial_size(double z, double rho_min, double z0, double z1) const {
    double r3 = std::hypot(rho_min, z);
    double base = density.axial_near *
                  std::max(1.0, std::pow(r3 / (2.0 * density.fine_radius), 1.3));
    double h = base;
    for (double zf : {z0, z1}) {
      double rf = std::hypot(rho_min, zf);
      double h0 = std::clamp(0.12 * rf, density.edge_fine, density.edge_max);
      h = std::min(h, density.axial_edge(h0, std::abs(z - zf)) / density.scale);
    }
    return std::clamp(h, 0.8 * density.edge_fine, density.edge_max * 1.6) *
           density.scale;
  }

  std::vector<double> axial_divisions(double z0, double z1,
                                      double rho_min) const {
    auto size = [&](double z) { return axial_size(z, rho_min, z0, z1); };
    if (std::abs(z0 + z1) < 1e-12 * spec.blade_length)
      return graded_symmetric(z1, [&](double s) { return size(s); });
    // March from the end nearer the trap center (mirror-invariant; the size
    // model never shrinks away from z = 0 at fixed feature distance).
    return graded_interval_dir(z0, z1, size, std::abs(z0) <= std::abs(z1));
  }

  // z-band boundaries so profile grading can coarsen away from the center.
  std::vector<double> band_edges(double z0, double z1) const {
    std::vector<double> cuts = {z0};
    for (double c : {-3.5e-3, -1.2e-3, 1.2e-3, 3.5e-3})
      if (c > z0 + 1e-9 && c < z1 - 1e-9) cuts.push_back(c);
    cuts.push_back(z1);
    std::sort(cuts.begin(), cuts.end());
    return cuts;
  }

  void strip(const Vec2& a, const Vec2& b, double z0, double z1, Electrode e) {
    Vec2 edge = b - a;
    double elen = edge.norm();
    Vec2 n2(edge.y(), -edge.x());  // outward for CCW profile
    n2.normalize();
    Vec3 outward = world_from_local.apply_vector(Vec3(n2.x(), n2.y(), 0.0));
    double rho_min = std::min(a.norm(), b.norm());

    auto bands = band_edges(z0, z1);
    for (std::size_t bi = 0; bi + 1 < bands.size(); ++bi) {
      double b0 = bands[bi], b1 = bands[bi + 1];
      double z_ref = (b0 <= 0.0 && b1 >= 0.0) ? 0.0
                                              : std::min(std::abs(b0), std::abs(b1));
      auto us = graded_interval(0.0, 1.0, [&](double u) {
        Vec2 p = a + u * edge;
        return density.profile_edge(std::hypot(p.norm(), z_ref)) / elen;
      });
      auto vs = axial_divisions(b0, b1, rho_min);
      sink.add_grid(
          [&](double u, double v) { return world(a + u * edge, v); }, us, vs,
          outward, e);
    }
  }

  // End wall (cap) of a piece at fixed z: tip/taper quad + body quad.
  void cap(double z, double orient, Electrode e) {
    Vec3 outward = world_from_local.apply_vector(Vec3(0, 0, orient));
    auto quad = [&](const Vec2& q00, const Vec2& q10, const Vec2& q11,
                    const Vec2& q01) {
      auto point = [&](double u, double v) {
        Vec2 lo = q00 + u * (q10 - q00);
        Vec2 hi = q01 + u * (q11 - q01);
        return world(lo + v * (hi - lo), z);
      };
      double du = std::max((q10 - q00).norm(), (q11 - q01).norm());
      double dv = std::max((q01 - q00).norm(), (q11 - q10).norm());
      auto us = graded_interval(0.0, 1.0, [&](double u) {
        Vec2 p = q00 + u * (q10 - q00);
        return density.profile_edge(std::hypot(p.norm(), z)) / du;
      });
      Vec2 mid = 0.25 * (q00 + q10 + q11 + q01);
      int nv = std::max(
          1, static_cast<int>(std::ceil(
                 dv / density.profile_edge(std::hypot(mid.norm(), z)))));
      std::vector<double> vsv(nv + 1);
      for (int i = 0; i <= nv; ++i) vsv[i] = static_cast<double>(i) / nv;
      sink.add_grid(point, us, vsv, outward, e);
    };
    // profile: 0=(r0,-t/2) 1=(r1,-T/2) 2=(r2,-T/2) 3=(r2,T/2) 4=(r1,T/2) 5=(r0,t/2)
    quad(profile[0], profile[1], profile[4], profile[5]);
    quad(profile[1], profile[2], profile[3], profile[4]);
  }

  void piece(double z0, double z1, Electrode e) {
    std::size_t n = profile.size();
    for (std::size_t i = 0; i < n; ++i)
      strip(profile[i], profile[(i + 1) % n], z0, z1, e);
    cap(z0, -1.0, e);
    cap(z1, 1.0, e);
  }
};

void mesh_rod(const TrapSpec& spec, const MeshDensity& density, int rod_index,
              MeshSink& sink) {
  const Vec2 c = spec.rod_centers[rod_index];
  const double r = spec.rod_diameter / 2.0;
  const double zh = spec.rod_length / 2.0;
  const Electrode e = rod_index == 0 ? Electrode::Rod1 : Electrode::Rod2;
  const double near_dist = std::max(c.norm() - r, spec.blade_distance);

  // Keep the facet sagitta r*(1-cos(pi/n)) small so the polygonal rod stays
  // close to the true cylinder.
  int n_theta = std::max(
      24, static_cast<int>(std::ceil(2.0 * constants::pi * r /
                                     density.profile_edge(near_dist))));
  auto ring_point = [&](double k, double z) {
    double th = 2.0 * constants::pi * k / n_theta;
    return Vec3(c.x() + r * std::cos(th), c.y() + r * std::sin(th), z);
  };
  auto zs = graded_symmetric(zh, [&](double z) {
    double base = density.profile_edge(std::hypot(near_dist, z)) * 2.0;
    double end = density.profile_edge(std::hypot(near_dist, zh)) +
                 density.axial_slope * std::abs(zh - z);
    return std::min({base, end, density.edge_max * 1.6 * density.scale});
  });
  for (int k = 0; k < n_theta; ++k) {
    double th_mid = 2.0 * constants::pi * (k + 0.5) / n_theta;
    Vec3 outward(std::cos(th_mid), std::sin(th_mid), 0.0);
    std::vector<double> us = {static_cast<double>(k),
                              static_cast<double>(k + 1)};
    sink.add_grid([&](double u, double z) { return ring_point(u, z); }, us, zs,
                  outward, e);
  }
  // End caps: polar fans with shared rim vertices.
  for (double orient : {-1.0, 1.0}) {
    double z = orient * zh;
    Vec3 outward(0, 0, orient);
    double h_cap = density.profile_edge(std::hypot(near_dist, zh));
    int n_ring = std::max(1, static_cast<int>(std::ceil(r / h_cap)));
    for (int ring = 0; ring < n_ring; ++ring) {
      double ra = r * ring / n_ring, rb = r * (ring + 1) / n_ring;
      for (int k = 0; k < n_theta; ++k) {
        double t0 = 2.0 * constants::pi * k / n_theta;
        double t1 = 2.0 * constants::pi * (k + 1) / n_theta;
        Vec3 a(c.x() + ra * std::cos(t0), c.y() + ra * std::sin(t0), z);
        Vec3 b(c.x() + rb * std::cos(t0), c.y() + rb * std::sin(t0), z);
        Vec3 d(c.x() + rb * std::cos(t1), c.y() + rb * std::sin(t1), z);
        Vec3 f(c.x() + ra * std::cos(t1), c.y() + ra * std::sin(t1), z);
        sink.add(a, b, d, outward, e);
        if (ring > 0) sink.add(a, d, f, outward, e);
      }
    }
  }
}

}  // namespace

ElectrodeMesh build_trap(const TrapSpec& spec, const MeshDensity& density) {
  spec.validate();
  ElectrodeMesh mesh;
  MeshSink sink{&mesh.panels, density.max_panels};

  auto profile = detail::blade_profile_ccw(spec);
  Vec2 centroid2(0.0, 0.0);
  {
    // Area centroid of the profile polygon (interior-point anchor).
    double a2 = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
      const Vec2& p = profile[i];
      const Vec2& q = profile[(i + 1) % profile.size()];
      double cr = p.x() * q.y() - q.x() * p.y();
      a2 += cr;
      centroid2 += cr * (p + q);
    }
    centroid2 /= 3.0 * a2;
  }

  for (int bi = 0; bi < 4; ++bi) {
    Blade blade = static_cast<Blade>(bi);
    BladeMesher bm{spec, density, sink,
                   detail::blade_world_from_local(spec, blade), profile};
    auto ids = detail::blade_piece_electrodes(blade);
    for (int si = 0; si < 5; ++si) {
      std::size_t first = mesh.panels.size();
      double z0 = spec.segment_bounds[si].z0, z1 = spec.segment_bounds[si].z1;
      bm.piece(z0, z1, ids[si]);
      mesh.solids.push_back(
          {ids[si], first, mesh.panels.size() - first,
           bm.world(centroid2, 0.5 * (z0 + z1))});
    }
  }
  if (spec.include_rods) {
    for (int i = 0; i < 2; ++i) {
      std::size_t first = mesh.panels.size();
      mesh_rod(spec, density, i, sink);
      mesh.solids.push_back(
          {i == 0 ? Electrode::Rod1 : Electrode::Rod2, first,
           mesh.panels.size() - first,
           Vec3(spec.rod_centers[i].x(), spec.rod_centers[i].y(), 0.0)});
    }
  }

  check_no_cross_intersections(mesh);
  return mesh;
}

}  // namespace iontrap
