#include "iontrap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "iontrap/constants.hpp"
#include "iontrap/hash.hpp"
#include "iontrap/units.hpp"
#include "profile.hpp"

namespace iontrap {

using constants::pi;

// Segment layout used by default. The interior segment lengths are not given
// in the source material; these values reproduce the reported axial
// confinement (see README, "Geometry assumptions").
namespace {
constexpr double kDefaultCenterSegment = 1.0e-3;
constexpr double kDefaultInnerSegment = 2.0e-3;
}  // namespace

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

const char* electrode_name(Electrode e) {
  static const char* names[kElectrodeCount] = {
      "RF_BLADE_1", "RF_BLADE_2", "DC_1A", "DC_1B", "DC_1C", "DC_1D", "DC_1E",
      "DC_2A",      "DC_2B",      "DC_2C", "DC_2D", "DC_2E", "ROD_1", "ROD_2"};
  return names[electrode_index(e)];
}

std::optional<Electrode> electrode_from_name(std::string_view name) {
  for (int i = 0; i < kElectrodeCount; ++i) {
    Electrode e = static_cast<Electrode>(i);
    if (name == electrode_name(e)) return e;
  }
  return std::nullopt;
}

const char* blade_name(Blade b) {
  static const char* names[4] = {"RF_BLADE_1", "DC_BLADE_1", "RF_BLADE_2",
                                 "DC_BLADE_2"};
  return names[static_cast<int>(b)];
}

std::optional<Blade> blade_from_name(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    Blade b = static_cast<Blade>(i);
    if (name == blade_name(b)) return b;
  }
  // Accept the electrode name of an rf blade as well.
  if (name == "RF_BLADE_1") return Blade::Rf1;
  if (name == "RF_BLADE_2") return Blade::Rf2;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// RigidTransform
// ---------------------------------------------------------------------------

RigidTransform RigidTransform::translate(const Vec3& t) {
  RigidTransform r;
  r.translation = t;
  return r;
}

RigidTransform RigidTransform::about_axis(const Vec3& point, const Vec3& axis,
                                          double angle_rad) {
  RigidTransform r;
  r.rotation = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
  r.translation = point - r.rotation * point;
  return r;
}

RigidTransform RigidTransform::then(const RigidTransform& second) const {
  RigidTransform r;
  r.rotation = second.rotation * rotation;
  r.translation = second.rotation * translation + second.translation;
  return r;
}

bool RigidTransform::is_identity(double tol) const {
  return (rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
         translation.cwiseAbs().maxCoeff() <= tol;
}

bool RigidTransform::is_rigid(double tol) const {
  Eigen::Matrix3d rtr = rotation.transpose() * rotation;
  if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
    return false;
  return rotation.determinant() > 0.0;
}

// ---------------------------------------------------------------------------
// MeshDensity
// ---------------------------------------------------------------------------

double MeshDensity::profile_edge(double r_dist) const {
  double r = std::max(r_dist, fine_radius);
  double h = edge_fine * std::pow(r / fine_radius, growth);
  return std::clamp(h, edge_fine, edge_max) * scale;
}

double MeshDensity::axial_edge(double base, double feature_dist) const {
  double h = base + axial_slope * feature_dist;
  return std::min(h, edge_max * 1.6) * scale;
}

// ---------------------------------------------------------------------------
// TrapSpec
// ---------------------------------------------------------------------------

std::array<SegmentBounds, 5> equal_segment_bounds(double blade_length,
                                                  double groove_width) {
  double len = (blade_length - 4.0 * groove_width) / 5.0;
  std::array<SegmentBounds, 5> out;
  double z = -blade_length / 2.0;
  for (int i = 0; i < 5; ++i) {
    out[i] = {z, z + len};
    z += len + groove_width;
  }
  return out;
}

std::array<SegmentBounds, 5> segment_bounds_from_lengths(double blade_length,
                                                         double groove_width,
                                                         double center_length,
                                                         double inner_length) {
  double outer =
      (blade_length - 4.0 * groove_width - center_length - 2.0 * inner_length) /
      2.0;
  if (outer <= 0.0)
    throw std::invalid_argument("segment lengths exceed blade length");
  std::array<SegmentBounds, 5> out;
  double z = -blade_length / 2.0;
  const double lens[5] = {outer, inner_length, center_length, inner_length,
                          outer};
  for (int i = 0; i < 5; ++i) {
    out[i] = {z, z + lens[i]};
    z += lens[i] + groove_width;
  }
  return out;
}

TrapSpec::TrapSpec() {
  segment_bounds = segment_bounds_from_lengths(
      blade_length, tip_width, kDefaultCenterSegment, kDefaultInnerSegment);
}

double TrapSpec::blade_azimuth(Blade b) const {
  double half = blade_angle / 2.0;
  switch (b) {
    case Blade::Dc1: return half;
    case Blade::Rf1: return pi - half;
    case Blade::Dc2: return pi + half;
    case Blade::Rf2: return -half;
  }
  return 0.0;
}

Vec3 TrapSpec::blade_direction(Blade b) const {
  double a = blade_azimuth(b);
  return Vec3(std::cos(a), std::sin(a), 0.0);
}

Vec3 TrapSpec::blade_centroid(Blade b) const {
  // Area centroid of the profile hexagon; w and z average to zero.
  double r0 = blade_distance / 2.0;
  double r1 = r0 + taper_length;
  double r2 = r0 + blade_height;
  double t = tip_width, T = blade_thickness;
  // Trapezoid (tip..taper) + rectangle (body).
  double a_trap = 0.5 * (t + T) * taper_length;
  double c_trap = r0 + taper_length * (t + 2.0 * T) / (3.0 * (t + T));
  double a_body = (r2 - r1) * T;
  double c_body = 0.5 * (r1 + r2);
  double r_c = (a_trap * c_trap + a_body * c_body) / (a_trap + a_body);
  return r_c * blade_direction(b);
}

void TrapSpec::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("invalid TrapSpec: " + msg);
  };
  if (!(blade_thickness > tip_width && tip_width > 0.0))
    fail("requires T > t > 0");
  if (!(taper_length > 0.0)) fail("requires taper length l > 0");
  if (!(blade_distance > 0.0)) fail("requires blade distance d > 0");
  if (!(blade_angle > 0.0 && blade_angle < pi))
    fail("requires 0 < theta < 180 deg");
  if (!(blade_height > taper_length))
    fail("blade height must exceed the taper length");
  if (!(blade_length > 0.0)) fail("requires blade length L > 0");

  const double eps = 1e-9 * blade_length;
  double half = blade_length / 2.0;
  if (std::abs(segment_bounds[0].z0 + half) > eps ||
      std::abs(segment_bounds[4].z1 - half) > eps)
    fail("segments must cover the blade length");
  for (int i = 0; i < 5; ++i) {
    if (!(segment_bounds[i].length() > 0.0)) fail("segment with length <= 0");
    if (i > 0) {
      double gap = segment_bounds[i].z0 - segment_bounds[i - 1].z1;
      if (std::abs(gap - tip_width) > eps)
        fail("groove gaps must equal the groove width t");
    }
  }
  for (int i = 0; i < 5; ++i) {
    if (std::abs(segment_bounds[i].z0 + segment_bounds[4 - i].z1) > eps)
      fail("segments must be symmetric about z = 0");
  }

  if (include_rods) {
    if (!(rod_diameter > 0.0)) fail("rod diameter must be positive");
    if (!(rod_length > 0.0)) fail("rod length must be positive");
    // Cheap cross-section overlap test for the untransformed geometry; the
    // meshed geometry is checked panel-by-panel in build_trap().
    for (const auto& c : rod_centers) {
      for (Blade b : {Blade::Rf1, Blade::Dc1, Blade::Rf2, Blade::Dc2}) {
        double a = blade_azimuth(b);
        Vec2 u(std::cos(a), std::sin(a)), w(-std::sin(a), std::cos(a));
        double r = c.dot(u), s = std::abs(c.dot(w));
        double r0 = blade_distance / 2.0, r1 = r0 + taper_length;
        double r2 = r0 + blade_height;
        double half_w;
        if (r < r0 || r > r2) continue;
        if (r < r1)
          half_w = 0.5 * (tip_width + (blade_thickness - tip_width) *
                                          (r - r0) / taper_length);
        else
          half_w = 0.5 * blade_thickness;
        if (s < half_w + rod_diameter / 2.0)
          fail("rod overlaps blade " + std::string(blade_name(b)) +
               " in cross-section");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// ElectrodeMesh
// ---------------------------------------------------------------------------

std::array<std::vector<int>, kElectrodeCount> ElectrodeMesh::by_electrode()
    const {
  std::array<std::vector<int>, kElectrodeCount> out;
  for (int i = 0; i < static_cast<int>(panels.size()); ++i)
    out[electrode_index(panels[i].electrode)].push_back(i);
  return out;
}

double ElectrodeMesh::total_area() const {
  double a = 0.0;
  for (const auto& p : panels) a += p.area();
  return a;
}

uint64_t ElectrodeMesh::content_hash() const {
  Fnv1a64 h;
  uint64_t n = panels.size();
  h.update_value(n);
  for (const auto& p : panels) {
    for (const Vec3* v : {&p.v0, &p.v1, &p.v2}) {
      h.update_value((*v)[0]);
      h.update_value((*v)[1]);
      h.update_value((*v)[2]);
    }
    h.update_value(static_cast<int32_t>(p.electrode));
  }
  return h.digest();
}

// ---------------------------------------------------------------------------
// Watertightness: total solid angle from an interior point equals 4*pi.
// ---------------------------------------------------------------------------

namespace {
double triangle_solid_angle(const Panel& p, const Vec3& q) {
  Vec3 a = p.v0 - q, b = p.v1 - q, c = p.v2 - q;
  double la = a.norm(), lb = b.norm(), lc = c.norm();
  double num = a.cross(b).dot(c);
  double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
  return 2.0 * std::atan2(num, den);
}
}  // namespace

bool mesh_is_watertight(const ElectrodeMesh& mesh, double tol,
                        std::string* message) {
  for (const auto& solid : mesh.solids) {
    double omega = 0.0;
    for (std::size_t i = solid.first; i < solid.first + solid.count; ++i)
      omega += triangle_solid_angle(mesh.panels[i], solid.interior_point);
    if (std::abs(std::abs(omega) - 4.0 * pi) > tol * 4.0 * pi) {
      if (message) {
        std::ostringstream os;
        os << "solid of " << electrode_name(solid.electrode)
           << " has solid angle " << omega << " (expected 4*pi)";
        *message = os.str();
      }
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Triangle-triangle intersection (segment-vs-triangle both ways; coplanar
// exact-contact pairs are not flagged, which is fine for collision checks).
// ---------------------------------------------------------------------------

namespace {

bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a,
                           const Vec3& b, const Vec3& c) {
  Vec3 ab = b - a, ac = c - a, d = q - p;
  Vec3 n = ab.cross(ac);
  double denom = n.dot(d);
  double scale = n.norm() * (d.norm() + 1e-300);
  if (std::abs(denom) < 1e-14 * scale) return false;  // parallel
  double t = n.dot(a - p) / denom;
  if (t < -1e-12 || t > 1.0 + 1e-12) return false;
  Vec3 x = p + t * d;
  // Barycentric inside test.
  Vec3 v0 = ab, v1 = ac, v2 = x - a;
  double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  double d20 = v2.dot(v0), d21 = v2.dot(v1);
  double den2 = d00 * d11 - d01 * d01;
  if (den2 <= 0.0) return false;
  double v = (d11 * d20 - d01 * d21) / den2;
  double w = (d00 * d21 - d01 * d20) / den2;
  return v >= -1e-10 && w >= -1e-10 && v + w <= 1.0 + 1e-10;
}

}  // namespace

bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                         const Vec3& b0, const Vec3& b1, const Vec3& b2) {
  return segment_hits_triangle(a0, a1, b0, b1, b2) ||
         segment_hits_triangle(a1, a2, b0, b1, b2) ||
         segment_hits_triangle(a2, a0, b0, b1, b2) ||
         segment_hits_triangle(b0, b1, a0, a1, a2) ||
         segment_hits_triangle(b1, b2, a0, a1, a2) ||
         segment_hits_triangle(b2, b0, a0, a1, a2);
}

void check_no_cross_intersections(const ElectrodeMesh& mesh) {
  // Uniform grid over panel bounding boxes.
  const auto& panels = mesh.panels;
  if (panels.empty()) return;
  Vec3 lo = panels[0].v0, hi = panels[0].v0;
  double max_edge = 0.0;
  std::vector<std::pair<Vec3, Vec3>> boxes(panels.size());
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const auto& p = panels[i];
    Vec3 bl = p.v0.cwiseMin(p.v1).cwiseMin(p.v2);
    Vec3 bh = p.v0.cwiseMax(p.v1).cwiseMax(p.v2);
    boxes[i] = {bl, bh};
    lo = lo.cwiseMin(bl);
    hi = hi.cwiseMax(bh);
    max_edge = std::max(max_edge, (bh - bl).maxCoeff());
  }
  double cell = std::max(max_edge, 1e-6);
  auto key = [&](int ix, int iy, int iz) {
    return (static_cast<int64_t>(ix) * 73856093) ^
           (static_cast<int64_t>(iy) * 19349663) ^
           (static_cast<int64_t>(iz) * 83492791);
  };
  std::unordered_map<int64_t, std::vector<int>> grid;
  auto cell_range = [&](const std::pair<Vec3, Vec3>& b) {
    Eigen::Vector3i a, c;
    for (int k = 0; k < 3; ++k) {
      a[k] = static_cast<int>(std::floor((b.first[k] - lo[k]) / cell));
      c[k] = static_cast<int>(std::floor((b.second[k] - lo[k]) / cell));
    }
    return std::make_pair(a, c);
  };
  for (std::size_t i = 0; i < panels.size(); ++i) {
    auto [a, c] = cell_range(boxes[i]);
    for (int ix = a[0]; ix <= c[0]; ++ix)
      for (int iy = a[1]; iy <= c[1]; ++iy)
        for (int iz = a[2]; iz <= c[2]; ++iz) {
          auto& bucket = grid[key(ix, iy, iz)];
          for (int j : bucket) {
            if (panels[j].electrode == panels[i].electrode) continue;
            const auto& bi = boxes[i];
            const auto& bj = boxes[j];
            bool overlap = true;
            for (int k = 0; k < 3; ++k)
              overlap = overlap && bi.first[k] <= bj.second[k] &&
                        bj.first[k] <= bi.second[k];
            if (!overlap) continue;
            const auto& p = panels[i];
            const auto& q = panels[j];
            if (triangles_intersect(p.v0, p.v1, p.v2, q.v0, q.v1, q.v2)) {
              throw std::runtime_error(
                  std::string("conductor surfaces intersect: ") +
                  electrode_name(p.electrode) + " and " +
                  electrode_name(q.electrode));
            }
          }
          bucket.push_back(static_cast<int>(i));
        }
  }
}

// ---------------------------------------------------------------------------
// apply_misalignment
// ---------------------------------------------------------------------------

ElectrodeMesh apply_misalignment(const ElectrodeMesh& mesh, Electrode electrode,
                                 const RigidTransform& transform) {
  if (!transform.is_rigid())
    throw std::invalid_argument("misalignment transform is not a proper rigid motion");
  bool found = false;
  for (const auto& p : mesh.panels)
    if (p.electrode == electrode) {
      found = true;
      break;
    }
  if (!found)
    throw std::invalid_argument(std::string("unknown or empty electrode: ") +
                                electrode_name(electrode));
  ElectrodeMesh out = mesh;
  for (auto& p : out.panels) {
    if (p.electrode != electrode) continue;
    p.v0 = transform.apply(p.v0);
    p.v1 = transform.apply(p.v1);
    p.v2 = transform.apply(p.v2);
  }
  for (auto& s : out.solids)
    if (s.electrode == electrode)
      s.interior_point = transform.apply(s.interior_point);
  check_no_cross_intersections(out);
  return out;
}

// ---------------------------------------------------------------------------
// Triangle soup export/import
// ---------------------------------------------------------------------------

void export_triangle_soup(const ElectrodeMesh& mesh, std::ostream& out) {
  out << "# iontrap-mesh v1\n";
  out << "# columns: x0 y0 z0 x1 y1 z1 x2 y2 z2 electrode\n";
  for (const auto& p : mesh.panels) {
    for (const Vec3* v : {&p.v0, &p.v1, &p.v2})
      out << format_double((*v)[0]) << ' ' << format_double((*v)[1]) << ' '
          << format_double((*v)[2]) << ' ';
    out << electrode_name(p.electrode) << '\n';
  }
}

ElectrodeMesh import_triangle_soup(std::istream& in) {
  ElectrodeMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::istringstream ls(s);
    double c[9];
    std::string name;
    for (double& x : c)
      if (!(ls >> x))
        throw std::runtime_error("triangle soup: bad line " +
                                 std::to_string(lineno));
    if (!(ls >> name))
      throw std::runtime_error("triangle soup: missing electrode on line " +
                               std::to_string(lineno));
    auto e = electrode_from_name(name);
    if (!e)
      throw std::runtime_error("triangle soup: unknown electrode '" + name +
                               "' on line " + std::to_string(lineno));
    mesh.panels.push_back(Panel{Vec3(c[0], c[1], c[2]), Vec3(c[3], c[4], c[5]),
                                Vec3(c[6], c[7], c[8]), *e});
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// TrapSolids
// ---------------------------------------------------------------------------

namespace detail {

std::vector<Vec2> blade_profile_ccw(const TrapSpec& spec) {
  double r0 = spec.blade_distance / 2.0;
  double r1 = r0 + spec.taper_length;
  double r2 = r0 + spec.blade_height;
  double t = spec.tip_width, T = spec.blade_thickness;
  // CCW in the (radial, width) plane.
  return {Vec2(r0, -t / 2), Vec2(r1, -T / 2), Vec2(r2, -T / 2),
          Vec2(r2, T / 2),  Vec2(r1, T / 2),  Vec2(r0, t / 2)};
}

RigidTransform blade_world_from_local(const TrapSpec& spec, Blade b) {
  RigidTransform frame;
  frame.rotation =
      Eigen::AngleAxisd(spec.blade_azimuth(b), Vec3::UnitZ()).toRotationMatrix();
  return frame.then(spec.misalignments[static_cast<int>(b)]);
}

RigidTransform inverse(const RigidTransform& t) {
  RigidTransform inv;
  inv.rotation = t.rotation.transpose();
  inv.translation = -(inv.rotation * t.translation);
  return inv;
}

std::array<Electrode, 5> blade_piece_electrodes(Blade b) {
  switch (b) {
    case Blade::Rf1:
      return {Electrode::RfBlade1, Electrode::RfBlade1, Electrode::RfBlade1,
              Electrode::RfBlade1, Electrode::RfBlade1};
    case Blade::Dc1:
      return {Electrode::Dc1A, Electrode::Dc1B, Electrode::Dc1C,
              Electrode::Dc1D, Electrode::Dc1E};
    case Blade::Rf2:
      return {Electrode::RfBlade2, Electrode::RfBlade2, Electrode::RfBlade2,
              Electrode::RfBlade2, Electrode::RfBlade2};
    case Blade::Dc2:
      return {Electrode::Dc2A, Electrode::Dc2B, Electrode::Dc2C,
              Electrode::Dc2D, Electrode::Dc2E};
  }
  return {};
}

}  // namespace detail

namespace {

double convex_polygon_signed_distance(const std::vector<Vec2>& poly,
                                      const Vec2& p) {
  // Positive outside. Convex CCW polygon.
  double inside_margin = -std::numeric_limits<double>::infinity();
  bool outside = false;
  double best_out = std::numeric_limits<double>::infinity();
  std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % n];
    Vec2 e = b - a;
    Vec2 nrm(e.y(), -e.x());  // outward for CCW
    nrm.normalize();
    double d = nrm.dot(p - a);
    inside_margin = std::max(inside_margin, d);
    if (d > 0.0) {
      outside = true;
      // Distance to the edge segment.
      double tpar = std::clamp(e.dot(p - a) / e.squaredNorm(), 0.0, 1.0);
      best_out = std::min(best_out, (p - (a + tpar * e)).norm());
    }
  }
  return outside ? best_out : inside_margin;
}

}  // namespace

TrapSolids::TrapSolids(const TrapSpec& spec) {
  auto profile = detail::blade_profile_ccw(spec);
  lo_ = Vec3(1e30, 1e30, 1e30);
  hi_ = -lo_;
  auto account = [&](const Vec3& p) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  };

  for (int bi = 0; bi < 4; ++bi) {
    Blade blade = static_cast<Blade>(bi);
    RigidTransform world_from_local = detail::blade_world_from_local(spec, blade);
    RigidTransform local_from_world = detail::inverse(world_from_local);
    auto piece_ids = detail::blade_piece_electrodes(blade);
    for (int si = 0; si < 5; ++si) {
      Prism pr;
      pr.world_from_local = world_from_local;
      pr.local_from_world = local_from_world;
      pr.profile = profile;
      pr.z0 = spec.segment_bounds[si].z0;
      pr.z1 = spec.segment_bounds[si].z1;
      pr.electrode = piece_ids[si];
      prisms_.push_back(pr);
      for (const auto& v : profile)
        for (double z : {pr.z0, pr.z1})
          account(world_from_local.apply(Vec3(v.x(), v.y(), z)));
    }
  }
  if (spec.include_rods) {
    Electrode ids[2] = {Electrode::Rod1, Electrode::Rod2};
    for (int i = 0; i < 2; ++i) {
      Cylinder c;
      c.center = spec.rod_centers[i];
      c.radius = spec.rod_diameter / 2.0;
      c.z0 = -spec.rod_length / 2.0;
      c.z1 = spec.rod_length / 2.0;
      c.electrode = ids[i];
      cylinders_.push_back(c);
      account(Vec3(c.center.x() - c.radius, c.center.y() - c.radius, c.z0));
      account(Vec3(c.center.x() + c.radius, c.center.y() + c.radius, c.z1));
    }
  }
}

std::optional<Electrode> TrapSolids::contains(const Vec3& p) const {
  for (const auto& pr : prisms_) {
    Vec3 q = pr.local_from_world.apply(p);
    if (q.z() < pr.z0 || q.z() > pr.z1) continue;
    if (convex_polygon_signed_distance(pr.profile, Vec2(q.x(), q.y())) <= 0.0)
      return pr.electrode;
  }
  for (const auto& c : cylinders_) {
    if (p.z() < c.z0 || p.z() > c.z1) continue;
    if ((Vec2(p.x(), p.y()) - c.center).norm() <= c.radius) return c.electrode;
  }
  return std::nullopt;
}

double TrapSolids::signed_distance(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pr : prisms_) {
    Vec3 q = pr.local_from_world.apply(p);
    double dxy = convex_polygon_signed_distance(pr.profile, Vec2(q.x(), q.y()));
    double dz = std::max(pr.z0 - q.z(), q.z() - pr.z1);
    double d;
    if (dxy <= 0.0 && dz <= 0.0)
      d = std::max(dxy, dz);
    else
      d = std::hypot(std::max(dxy, 0.0), std::max(dz, 0.0));
    best = std::min(best, d);
  }
  for (const auto& c : cylinders_) {
    double dxy = (Vec2(p.x(), p.y()) - c.center).norm() - c.radius;
    double dz = std::max(c.z0 - p.z(), p.z() - c.z1);
    double d;
    if (dxy <= 0.0 && dz <= 0.0)
      d = std::max(dxy, dz);
    else
      d = std::hypot(std::max(dxy, 0.0), std::max(dz, 0.0));
    best = std::min(best, d);
  }
  return best;
}

}  // namespace iontrap
