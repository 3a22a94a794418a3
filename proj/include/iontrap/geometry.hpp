#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace iontrap {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Electrode identities. Two rf blades, two dc blades with five segments each
// (A..E ordered along +z), two biasing rods.
// ---------------------------------------------------------------------------
enum class Electrode : int {
  RfBlade1 = 0,  // azimuth 180deg - theta/2 (x<0, y>0 for theta=120deg)
  RfBlade2,      // azimuth -theta/2 (x>0, y<0)
  Dc1A, Dc1B, Dc1C, Dc1D, Dc1E,  // dc blade at +theta/2 (x>0, y>0)
  Dc2A, Dc2B, Dc2C, Dc2D, Dc2E,  // dc blade at 180deg + theta/2 (x<0, y<0)
  Rod1,          // (x<0, y>0)
  Rod2,          // (x<0, y<0)
};
inline constexpr int kElectrodeCount = 14;

const char* electrode_name(Electrode e);
std::optional<Electrode> electrode_from_name(std::string_view name);
inline int electrode_index(Electrode e) { return static_cast<int>(e); }

// The four mechanical blades (a dc blade carries five electrodes).
enum class Blade : int { Rf1 = 0, Dc1, Rf2, Dc2 };
const char* blade_name(Blade b);
std::optional<Blade> blade_from_name(std::string_view name);

// ---------------------------------------------------------------------------
// Rigid transforms for misalignment studies.
// ---------------------------------------------------------------------------
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform translate(const Vec3& t);
  // Rotation by angle_rad about the line through `point` along `axis`.
  static RigidTransform about_axis(const Vec3& point, const Vec3& axis,
                                   double angle_rad);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_vector(const Vec3& v) const { return rotation * v; }
  RigidTransform then(const RigidTransform& second) const;

  bool is_identity(double tol = 0.0) const;
  // Proper rigid motion: orthonormal rotation with det +1.
  bool is_rigid(double tol = 1e-9) const;
};

struct SegmentBounds {
  double z0 = 0.0;
  double z1 = 0.0;
  double length() const { return z1 - z0; }
};

// ---------------------------------------------------------------------------
// Mesh density policy. Panel edge targets grow with distance from the trap
// center; axial resolution is driven by distance to geometric features
// (groove walls, blade ends) so the long z-uniform stretches stay cheap.
// ---------------------------------------------------------------------------
struct MeshDensity {
  double edge_fine = 25e-6;    // profile-direction edge in the fine zone
  double edge_max = 900e-6;
  double fine_radius = 0.40e-3;  // fine zone radius around the trap center
  double growth = 2.4;           // power-law exponent of edge vs distance
  double axial_near = 180e-6;    // axial edge near z=0 on z-uniform parts
  double axial_slope = 0.8;      // axial edge growth per unit feature distance
  double scale = 1.0;            // multiplies every edge target
  std::size_t max_panels = 80000;

  // Factor on panels-per-area; doubling density halves panel area.
  MeshDensity scaled(double panel_factor) const {
    MeshDensity d = *this;
    d.scale = scale / std::sqrt(panel_factor);
    return d;
  }
  double profile_edge(double r_dist) const;
  double axial_edge(double base, double feature_dist) const;
};

// ---------------------------------------------------------------------------
// Parametric trap description (SI units).
// ---------------------------------------------------------------------------
struct TrapSpec {
  double blade_length = 25.2e-3;    // L
  double blade_thickness = 300e-6;  // T
  double tip_width = 50e-6;         // t: tapered end and groove width
  double taper_length = 1e-3;       // l
  double blade_angle = 120.0 * 3.14159265358979323846 / 180.0;  // theta
  double blade_distance = 500e-6;   // d: diagonal tip-to-tip distance
  double blade_height = 8e-3;       // radial extent of a blade past the tip
  std::array<SegmentBounds, 5> segment_bounds;  // A..E along z
  bool include_rods = true;
  double rod_diameter = 1e-3;
  double rod_length = 25.2e-3;
  std::array<Vec2, 2> rod_centers = {Vec2(-2.37e-3, 1.81e-3),
                                     Vec2(-2.37e-3, -1.81e-3)};
  std::array<RigidTransform, 4> misalignments;  // indexed by Blade

  TrapSpec();

  // Blade azimuth around the z axis; the x axis bisects the rf/dc angle.
  double blade_azimuth(Blade b) const;
  Vec3 blade_direction(Blade b) const;  // unit vector toward the blade
  // Centroid of the ideal (untransformed) blade solid.
  Vec3 blade_centroid(Blade b) const;

  // Throws std::invalid_argument naming the violated invariant.
  void validate() const;
};

// Five equal segments of (L - 4t)/5 separated by grooves of width t.
std::array<SegmentBounds, 5> equal_segment_bounds(double blade_length,
                                                  double groove_width);
// Symmetric layout from explicit center (C) and inner (B=D) lengths; A and E
// take the remainder out to +-L/2.
std::array<SegmentBounds, 5> segment_bounds_from_lengths(double blade_length,
                                                         double groove_width,
                                                         double center_length,
                                                         double inner_length);

// ---------------------------------------------------------------------------
// Triangulated conductor surfaces.
// ---------------------------------------------------------------------------
struct Panel {
  Vec3 v0, v1, v2;
  Electrode electrode;

  Vec3 centroid() const { return (v0 + v1 + v2) / 3.0; }
  Vec3 raw_normal() const { return (v1 - v0).cross(v2 - v0); }  // 2*area*n
  double area() const { return 0.5 * raw_normal().norm(); }
};

struct ElectrodeMesh {
  std::vector<Panel> panels;
  // Index ranges per watertight solid (a dc blade is five solids; an rf
  // blade is five mechanically grooved pieces sharing one electrode).
  struct Solid {
    Electrode electrode;
    std::size_t first = 0, count = 0;
    Vec3 interior_point = Vec3::Zero();
  };
  std::vector<Solid> solids;

  std::array<std::vector<int>, kElectrodeCount> by_electrode() const;
  double total_area() const;
  uint64_t content_hash() const;
};

ElectrodeMesh build_trap(const TrapSpec& spec, const MeshDensity& density);

// Moves the panels of one electrode by a rigid transform. Checks rigidity,
// electrode existence and conductor-conductor intersection.
ElectrodeMesh apply_misalignment(const ElectrodeMesh& mesh, Electrode electrode,
                                 const RigidTransform& transform);

// 4*pi solid-angle closure test from each solid's interior point.
bool mesh_is_watertight(const ElectrodeMesh& mesh, double tol = 1e-6,
                        std::string* message = nullptr);
// Throws on panel-panel intersection between different electrodes.
void check_no_cross_intersections(const ElectrodeMesh& mesh);

// Plain-text triangle soup: one panel per line, "x0 y0 z0 x1 y1 z1 x2 y2 z2
// electrode_name", '#' comments allowed. Grammar documented in README.
void export_triangle_soup(const ElectrodeMesh& mesh, std::ostream& out);
ElectrodeMesh import_triangle_soup(std::istream& in);

// ---------------------------------------------------------------------------
// Analytic solids for point classification (FDM voxelization, grid masking,
// near-surface guards). Misalignments are applied.
// ---------------------------------------------------------------------------
class TrapSolids {
 public:
  explicit TrapSolids(const TrapSpec& spec);
  TrapSolids() = default;

  std::optional<Electrode> contains(const Vec3& p) const;
  // Positive outside, negative inside; exact for these convex solids.
  double signed_distance(const Vec3& p) const;
  Vec3 bounding_lo() const { return lo_; }
  Vec3 bounding_hi() const { return hi_; }

 private:
  struct Prism {
    RigidTransform world_from_local;  // local: x radial, y thickness, z axial
    RigidTransform local_from_world;
    std::vector<Vec2> profile;        // convex CCW polygon in (x, y)
    double z0, z1;
    Electrode electrode;
  };
  struct Cylinder {
    Vec2 center;
    double radius, z0, z1;
    Electrode electrode;
  };
  std::vector<Prism> prisms_;
  std::vector<Cylinder> cylinders_;
  Vec3 lo_ = Vec3::Zero(), hi_ = Vec3::Zero();
};

bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                         const Vec3& b0, const Vec3& b1, const Vec3& b2);

}  // namespace iontrap
