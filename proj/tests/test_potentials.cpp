#include <cmath>
#include <sstream>

#include "doctest.h"
#include "iontrap/constants.hpp"
#include "iontrap/potentials.hpp"

using namespace iontrap;
using namespace iontrap::constants;

namespace {

// Coarse full trap (rods included), shared across the cases in this file.
const BasisSet& coarse_trap_basis() {
  static BasisSet basis = [] {
    TrapSpec spec;
    auto mesh = std::make_shared<const ElectrodeMesh>(
        build_trap(spec, MeshDensity{}.scaled(0.06)));
    BasisSet b = solve_basis(mesh);
    b.solids = TrapSolids(spec);
    return b;
  }();
  return basis;
}

}  // namespace

TEST_CASE("pseudopotential formula closure: 59.8 V/m -> 25.2 neV, 585 uK") {
  IonSpecies yb = IonSpecies::yb171();
  double omega = 2.0 * pi * 22.5e6;
  double e = 59.8;
  double u_ev = pseudopotential_ev(e * e, yb, omega);
  CHECK(u_ev == doctest::Approx(25.2e-9).epsilon(0.005));
  double t_axial = 2.0 * u_ev * elementary_charge / boltzmann;
  CHECK(t_axial == doctest::Approx(585e-6).epsilon(0.005));
}

TEST_CASE("pseudopotential scaling and sign invariance") {
  const BasisSet& basis = coarse_trap_basis();
  IonSpecies yb = IonSpecies::yb171();
  Vec3 p(3e-6, -2e-6, 1e-6);

  VoltageSet off;
  CHECK(pseudopotential_at(basis, off, yb, p) == 0.0);

  VoltageSet v1;
  v1.v_rf = 300.0;
  VoltageSet v2 = v1;
  v2.v_rf = 600.0;
  VoltageSet vneg = v1;
  vneg.v_rf = -300.0;
  double u1 = pseudopotential_at(basis, v1, yb, p);
  double u2 = pseudopotential_at(basis, v2, yb, p);
  double uneg = pseudopotential_at(basis, vneg, yb, p);
  CHECK(u2 == doctest::Approx(4.0 * u1).epsilon(1e-12));
  CHECK(uneg == doctest::Approx(u1).epsilon(1e-12));
}

TEST_CASE("total potential: additivity and affinity in dc voltages") {
  const BasisSet& basis = coarse_trap_basis();
  IonSpecies yb = IonSpecies::yb171();
  Vec3 p(5e-6, 4e-6, -2e-6);

  VoltageSet rf_only;
  rf_only.v_rf = 600.0;
  CHECK(total_potential_at(basis, rf_only, yb, p) ==
        doctest::Approx(pseudopotential_at(basis, rf_only, yb, p))
            .epsilon(1e-14));

  // Affine in each dc voltage: phi(a) + phi(c) == 2 phi(b) for b=(a+c)/2.
  auto with_dc = [&](double v) {
    VoltageSet vs = rf_only;
    vs.dc[2] = v;  // Dc1C
    return total_potential_at(basis, vs, yb, p);
  };
  double f0 = with_dc(0.0), f1 = with_dc(5.0), f2 = with_dc(10.0);
  CHECK(f0 + f2 == doctest::Approx(2.0 * f1).epsilon(1e-10));
}

TEST_CASE("TotalPotential evaluator matches the wrapper functions") {
  const BasisSet& basis = coarse_trap_basis();
  IonSpecies yb = IonSpecies::yb171();
  VoltageSet v = VoltageSet::operating_point();
  v.rod[0] = 3.0;
  v.rod[1] = -1.0;
  TotalPotential pot(basis, v, yb);
  for (Vec3 p : {Vec3(2e-6, 1e-6, 0), Vec3(-40e-6, 25e-6, 80e-6)}) {
    CHECK(pot.total_ev(p) ==
          doctest::Approx(total_potential_at(basis, v, yb, p)).epsilon(1e-12));
    CHECK(pot.pseudo_ev(p) ==
          doctest::Approx(pseudopotential_at(basis, v, yb, p)).epsilon(1e-12));
  }
}

TEST_CASE("grids: single sample, masking, bit-exact round trip") {
  const BasisSet& basis = coarse_trap_basis();
  IonSpecies yb = IonSpecies::yb171();
  VoltageSet v = VoltageSet::operating_point();

  SUBCASE("1x1x1 grid equals the point evaluation") {
    PotentialGrid g = sample_grid(basis, v, yb, Vec3::Zero(), Vec3::Zero(),
                                  1e-6, GridKind::Total);
    REQUIRE(g.values.size() == 1);
    CHECK(g.values[0] ==
          doctest::Approx(total_potential_at(basis, v, yb, Vec3::Zero()))
              .epsilon(1e-12));
  }

  SUBCASE("rod-interior samples are masked invalid") {
    TrapSpec spec;
    Vec3 rod_center(spec.rod_centers[0].x(), spec.rod_centers[0].y(), 0.0);
    PotentialGrid g =
        sample_grid(basis, v, yb, rod_center - Vec3(0.8e-3, 0.8e-3, 0),
                    rod_center + Vec3(0.8e-3, 0.8e-3, 0), 0.2e-3,
                    GridKind::DcStatic);
    int masked = 0, valid = 0;
    for (double x : g.values) (std::isnan(x) ? masked : valid)++;
    CHECK(masked > 0);
    CHECK(valid > 0);
    // The center of the rod is masked.
    CHECK(std::isnan(g.at(g.nx / 2, g.ny / 2, 0)));
  }

  SUBCASE("dump/read round trip is bit-exact") {
    PotentialGrid g = sample_grid(basis, v, yb, Vec3(-4e-6, -4e-6, 0),
                                  Vec3(4e-6, 4e-6, 0), 2e-6, GridKind::Pseudo);
    std::stringstream ss;
    write_grid(g, ss);
    PotentialGrid back = read_grid(ss);
    REQUIRE(back.values.size() == g.values.size());
    for (std::size_t i = 0; i < g.values.size(); ++i)
      CHECK(back.values[i] == g.values[i]);
    std::stringstream ss2;
    write_grid(back, ss2);
    CHECK(ss2.str() == ss.str());
  }

  SUBCASE("oversized grids are rejected with guidance") {
    CHECK_THROWS_WITH_AS(
        sample_grid(basis, v, yb, Vec3(-1e-3, -1e-3, -1e-3),
                    Vec3(1e-3, 1e-3, 1e-3), 1e-9, GridKind::Total),
        doctest::Contains("coarser"), std::runtime_error);
  }
}
