#include "iontrap/potentials.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "iontrap/constants.hpp"
#include "iontrap/units.hpp"

namespace iontrap {

using namespace constants;

IonSpecies IonSpecies::yb171() {
  return {yb171_mass_u * atomic_mass_unit, elementary_charge};
}

double pseudopotential_ev(double e_amp_squared, const IonSpecies& ion,
                          double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("drive frequency must be > 0");
  double joule = ion.charge * ion.charge * e_amp_squared /
                 (4.0 * ion.mass * omega * omega);
  return joule / elementary_charge;
}

double pseudopotential_at(const BasisSet& basis, const VoltageSet& v,
                          const IonSpecies& ion, const Vec3& r) {
  Vec3 e = rf_field_amplitude(basis, v, r);
  return pseudopotential_ev(e.squaredNorm(), ion, v.drive_omega);
}

double total_potential_at(const BasisSet& basis, const VoltageSet& v,
                          const IonSpecies& ion, const Vec3& r) {
  return TotalPotential(basis, v, ion).total_ev(r);
}

TotalPotential::TotalPotential(const BasisSet& basis, const VoltageSet& v,
                               const IonSpecies& ion)
    : basis_(&basis), ion_(ion), omega_(v.drive_omega) {
  v.validate();
  w_rf_ = v.v_rf * rf_unit_charges(basis);
  w_static_ = combine_charges(basis, v, PotentialPart::AllStatic);
  has_static_ = w_static_.cwiseAbs().maxCoeff() > 0.0;
}

double TotalPotential::pseudo_ev(const Vec3& r) const {
  return pseudopotential_ev(rf_field(r).squaredNorm(), ion_, omega_);
}

Vec3 TotalPotential::rf_field(const Vec3& r) const {
  return ChargeEvaluator(*basis_, w_rf_).field(r);
}

double TotalPotential::static_ev(const Vec3& r) const {
  if (!has_static_) return 0.0;
  double phi = ChargeEvaluator(*basis_, w_static_).potential(r);
  return phi * ion_.charge / elementary_charge;
}

double TotalPotential::total_ev(const Vec3& r) const {
  // One panel pass for both contributions.
  const auto& geom = basis_->geom;
  const double far = basis_->options.far_eval;
  const double coulomb = 1.0 / (4.0 * pi * vacuum_permittivity);
  double acc_static = 0.0;
  Vec3 acc_grad = Vec3::Zero();
  const int n = static_cast<int>(geom.size());
  for (int j = 0; j < n; ++j) {
    const double wr = w_rf_(j);
    const double ws = has_static_ ? w_static_(j) : 0.0;
    if (wr == 0.0 && ws == 0.0) continue;
    const PanelGeom& g = geom[j];
    Vec3 d = r - g.centroid;
    double r2 = d.squaredNorm();
    double cutoff = far * g.diameter;
    double val;
    Vec3 grad;
    if (r2 > cutoff * cutoff) {
      double inv_r = 1.0 / std::sqrt(r2);
      val = g.area * inv_r;
      grad = (-g.area * inv_r * inv_r * inv_r) * d;
    } else {
      panel_integral(g, r, &val, &grad);
    }
    acc_static += ws * val;
    acc_grad += wr * grad;
  }
  Vec3 e_rf = -coulomb * acc_grad;
  double pseudo = pseudopotential_ev(e_rf.squaredNorm(), ion_, omega_);
  return pseudo + coulomb * acc_static * ion_.charge / elementary_charge;
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

const char* grid_kind_name(GridKind k) {
  switch (k) {
    case GridKind::Pseudo: return "PSEUDO";
    case GridKind::DcStatic: return "DC_STATIC";
    case GridKind::Total: return "TOTAL";
  }
  return "?";
}

std::string voltage_note(const VoltageSet& v) {
  std::ostringstream os;
  os << "V_rf=" << format_double(v.v_rf)
     << " drive_hz=" << format_double(v.drive_omega / (2.0 * pi));
  os << " dc=";
  for (int i = 0; i < 10; ++i) os << (i ? "," : "") << format_double(v.dc[i]);
  os << " rod=" << format_double(v.rod[0]) << "," << format_double(v.rod[1]);
  return os.str();
}

PotentialGrid sample_grid(const BasisSet& basis, const VoltageSet& v,
                          const IonSpecies& ion, const Vec3& lo, const Vec3& hi,
                          double spacing, GridKind kind,
                          std::size_t max_samples) {
  if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be > 0");
  PotentialGrid grid;
  grid.origin = lo;
  grid.spacing = Vec3(spacing, spacing, spacing);
  grid.kind = kind;
  grid.voltage_note = voltage_note(v);
  auto count = [&](double a, double b) {
    return std::max(1, static_cast<int>(std::floor((b - a) / spacing + 1.5)));
  };
  grid.nx = count(lo.x(), hi.x());
  grid.ny = count(lo.y(), hi.y());
  grid.nz = count(lo.z(), hi.z());
  std::size_t total = static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz;
  if (total > max_samples)
    throw std::runtime_error(
        "grid exceeds the sample budget; use a coarser spacing");
  grid.values.assign(total, 0.0);

  TotalPotential pot(basis, v, ion);
  const TrapSolids* solids = basis.solids ? &*basis.solids : nullptr;

#pragma omp parallel for collapse(2) schedule(dynamic, 1)
  for (int k = 0; k < grid.nz; ++k) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        Vec3 p = grid.position(i, j, k);
        double& out = grid.at(i, j, k);
        if (solids && solids->contains(p)) {
          out = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        switch (kind) {
          case GridKind::Pseudo: out = pot.pseudo_ev(p); break;
          case GridKind::DcStatic: out = pot.static_ev(p); break;
          case GridKind::Total: out = pot.total_ev(p); break;
        }
      }
    }
  }
  return grid;
}

void write_grid(const PotentialGrid& grid, std::ostream& out) {
  out << "# iontrap-grid v1\n";
  out << "# kind: " << grid_kind_name(grid.kind) << '\n';
  out << "# origin: " << format_double(grid.origin.x()) << ' '
      << format_double(grid.origin.y()) << ' ' << format_double(grid.origin.z())
      << '\n';
  out << "# spacing: " << format_double(grid.spacing.x()) << ' '
      << format_double(grid.spacing.y()) << ' '
      << format_double(grid.spacing.z()) << '\n';
  out << "# dims: " << grid.nx << ' ' << grid.ny << ' ' << grid.nz << '\n';
  out << "# voltages: " << grid.voltage_note << '\n';
  out << "# columns: x y z value\n";
  for (int k = 0; k < grid.nz; ++k)
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        Vec3 p = grid.position(i, j, k);
        out << format_double(p.x()) << ' ' << format_double(p.y()) << ' '
            << format_double(p.z()) << ' ' << format_double(grid.at(i, j, k))
            << '\n';
      }
}

PotentialGrid read_grid(std::istream& in) {
  PotentialGrid grid;
  std::string line;
  std::vector<double> values;
  bool have_dims = false;
  while (std::getline(in, line)) {
    std::string s = trim(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      std::istringstream hs(s.substr(1));
      std::string key;
      hs >> key;
      if (key == "kind:") {
        std::string name;
        hs >> name;
        for (GridKind k :
             {GridKind::Pseudo, GridKind::DcStatic, GridKind::Total})
          if (name == grid_kind_name(k)) grid.kind = k;
      } else if (key == "origin:") {
        hs >> grid.origin.x() >> grid.origin.y() >> grid.origin.z();
      } else if (key == "spacing:") {
        hs >> grid.spacing.x() >> grid.spacing.y() >> grid.spacing.z();
      } else if (key == "dims:") {
        hs >> grid.nx >> grid.ny >> grid.nz;
        have_dims = true;
      } else if (key == "voltages:") {
        std::string rest;
        std::getline(hs, rest);
        grid.voltage_note = trim(rest);
      }
      continue;
    }
    std::istringstream ls(s);
    double x, y, z, val;
    if (!(ls >> x >> y >> z >> val))
      throw std::runtime_error("grid file: bad data line: " + s);
    values.push_back(val);
  }
  if (!have_dims) throw std::runtime_error("grid file: missing dims header");
  std::size_t expect = static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz;
  if (values.size() != expect)
    throw std::runtime_error("grid file: sample count mismatch");
  grid.values = std::move(values);
  return grid;
}

}  // namespace iontrap
