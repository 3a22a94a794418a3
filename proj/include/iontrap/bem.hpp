#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iontrap/geometry.hpp"
#include "iontrap/panel_integral.hpp"

namespace iontrap {

// ---------------------------------------------------------------------------
// Voltage assignment: rf amplitude on both rf blades, per-segment dc, rods.
// ---------------------------------------------------------------------------
struct VoltageSet {
  double v_rf = 0.0;                                 // amplitude, V
  double drive_omega = 2.0 * 3.14159265358979323846 * 22.5e6;  // rad/s
  std::array<double, 10> dc{};                       // Dc1A..Dc1E, Dc2A..Dc2E
  std::array<double, 2> rod{};

  double& dc_voltage(Electrode e);
  double dc_voltage(Electrode e) const;
  // Static (non-rf) voltage on an electrode; rf blades count as 0 here.
  double static_voltage(Electrode e) const;

  void set_rods(double v) { rod[0] = rod[1] = v; }
  // dc set of the reference operating point: A=E=15, B=D=3, C=-10 on both
  // dc blades, rods grounded.
  static VoltageSet operating_point(double v_rf = 600.0, double v_outer = 15.0,
                                    double v_inner = 3.0,
                                    double v_center = -10.0);
  void validate() const;
};

enum class PotentialPart { RfOnly, DcOnly, RodOnly, AllStatic };

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------
struct SolverOptions {
  double tolerance = 1e-8;       // target relative boundary residual
  std::size_t dense_limit = 20000;
  double far_assembly = 12.0;    // panel diameters; monopole beyond
  double far_eval = 35.0;
  int gmres_restart = 60;
  int gmres_max_outer = 40;
};

struct SolverDiagnostics {
  double max_residual = 0.0;     // max boundary-condition error over checked rows
  double rcond = 0.0;            // reciprocal condition estimate (1-norm), dense path
  bool iterative = false;
  int iterations = 0;
  int residual_rows_checked = 0;
};

// Per-electrode unit-voltage surface-charge solutions.
struct BasisSet {
  std::shared_ptr<const ElectrodeMesh> mesh;
  std::vector<PanelGeom> geom;            // aligned with mesh->panels
  Eigen::MatrixXd sigma;                  // n_panels x kElectrodeCount, C/m^2
  std::array<bool, kElectrodeCount> electrode_present{};
  SolverDiagnostics diagnostics;
  SolverOptions options;
  uint64_t mesh_hash = 0;
  std::optional<TrapSolids> solids;       // enables masking / strict checks

  int panel_count() const { return static_cast<int>(geom.size()); }
};

BasisSet solve_basis(std::shared_ptr<const ElectrodeMesh> mesh,
                     const SolverOptions& options = {});
inline BasisSet solve_basis(std::shared_ptr<const ElectrodeMesh> mesh,
                            double tolerance) {
  SolverOptions o;
  o.tolerance = tolerance;
  return solve_basis(std::move(mesh), o);
}

// ---------------------------------------------------------------------------
// Evaluation. A weight vector is a per-panel charge density obtained by
// superposing basis columns; evaluation is a single pass over panels.
// ---------------------------------------------------------------------------
Eigen::VectorXd combine_charges(const BasisSet& basis, const VoltageSet& v,
                                PotentialPart part);
// Unit-amplitude rf charge (both rf blades at 1 V).
Eigen::VectorXd rf_unit_charges(const BasisSet& basis);

class ChargeEvaluator {
 public:
  ChargeEvaluator(const BasisSet& basis, Eigen::VectorXd weights);

  double potential(const Vec3& p) const;
  Vec3 field(const Vec3& p) const;  // E = -grad(phi), V/m
  void potential_and_field(const Vec3& p, double* phi, Vec3* e) const;

 private:
  const BasisSet* basis_;
  Eigen::VectorXd w_;
};

// Spec-level wrappers. With strict=true, evaluation throws if p lies inside a
// conductor or within one local panel edge of a surface.
double potential_at(const BasisSet& basis, const VoltageSet& v, const Vec3& p,
                    PotentialPart part, bool strict = false);
Vec3 field_at(const BasisSet& basis, const VoltageSet& v, const Vec3& p,
              PotentialPart part, bool strict = false);
// RF field amplitude (v_rf applied to both rf blades).
Vec3 rf_field_amplitude(const BasisSet& basis, const VoltageSet& v,
                        const Vec3& p);

// Distance from p to the nearest conductor surface (solids when available,
// otherwise brute force over panels); negative inside.
double distance_to_conductors(const BasisSet& basis, const Vec3& p);

// C[e][f] = total charge on electrode e with f at 1 V, others grounded.
Eigen::MatrixXd capacitance_matrix(const BasisSet& basis);

// ---------------------------------------------------------------------------
// Binary cache (little-endian f64 payload; see README for the layout).
// ---------------------------------------------------------------------------
void save_basis(const std::string& path, const BasisSet& basis);
// Reattaches geometry from `mesh`; throws if the stored mesh hash differs.
BasisSet load_basis(const std::string& path,
                    std::shared_ptr<const ElectrodeMesh> mesh);
bool basis_cache_matches(const std::string& path, uint64_t mesh_hash);

}  // namespace iontrap
