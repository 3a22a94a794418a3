#pragma once

#include <iosfwd>
#include <string>

#include "iontrap/bem.hpp"

namespace iontrap {

struct IonSpecies {
  double mass = 0.0;    // kg
  double charge = 0.0;  // C
  static IonSpecies yb171();
};

// q^2 E^2 / (4 m Omega^2), in eV, from the rf field amplitude.
double pseudopotential_ev(double e_amp_squared, const IonSpecies& ion,
                          double omega);

double pseudopotential_at(const BasisSet& basis, const VoltageSet& v,
                          const IonSpecies& ion, const Vec3& r);
double total_potential_at(const BasisSet& basis, const VoltageSet& v,
                          const IonSpecies& ion, const Vec3& r);

// Bound evaluator for analysis loops: one pass over panels serves both the
// rf field and the static potential.
class TotalPotential {
 public:
  TotalPotential(const BasisSet& basis, const VoltageSet& v,
                 const IonSpecies& ion);

  double operator()(const Vec3& r) const { return total_ev(r); }
  double total_ev(const Vec3& r) const;
  double pseudo_ev(const Vec3& r) const;
  double static_ev(const Vec3& r) const;   // q * phi_static in eV
  Vec3 rf_field(const Vec3& r) const;      // amplitude, V/m
  const IonSpecies& ion() const { return ion_; }
  double drive_omega() const { return omega_; }
  const BasisSet& basis() const { return *basis_; }

 private:
  const BasisSet* basis_;
  IonSpecies ion_;
  double omega_;
  Eigen::VectorXd w_rf_;      // charge at rf amplitude
  Eigen::VectorXd w_static_;  // dc + rod superposition
  bool has_static_ = false;
};

// ---------------------------------------------------------------------------
// Sampled grids
// ---------------------------------------------------------------------------
enum class GridKind { Pseudo, DcStatic, Total };
const char* grid_kind_name(GridKind k);

struct PotentialGrid {
  Vec3 origin = Vec3::Zero();   // sample (0,0,0) position
  Vec3 spacing = Vec3::Zero();  // per-axis step
  int nx = 0, ny = 0, nz = 0;
  GridKind kind = GridKind::Total;
  std::string voltage_note;     // serialized VoltageSet, for the header
  std::vector<double> values;   // row-major x-fastest; NaN marks masked

  double& at(int i, int j, int k) {
    return values[static_cast<std::size_t>((k * ny + j)) * nx + i];
  }
  double at(int i, int j, int k) const {
    return values[static_cast<std::size_t>((k * ny + j)) * nx + i];
  }
  Vec3 position(int i, int j, int k) const {
    return origin + Vec3(i * spacing.x(), j * spacing.y(), k * spacing.z());
  }
};

// Deterministic row-major sampling; points inside conductors (when the basis
// carries solids) are NaN. Throws if the sample count exceeds max_samples.
PotentialGrid sample_grid(const BasisSet& basis, const VoltageSet& v,
                          const IonSpecies& ion, const Vec3& lo, const Vec3& hi,
                          double spacing, GridKind kind,
                          std::size_t max_samples = 20'000'000);

std::string voltage_note(const VoltageSet& v);

// Plain-text dump, bit-exact round trip (shortest round-trip decimals).
void write_grid(const PotentialGrid& grid, std::ostream& out);
PotentialGrid read_grid(std::istream& in);

}  // namespace iontrap
