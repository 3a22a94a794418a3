#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "iontrap/bem.hpp"
#include "iontrap/constants.hpp"
#include "iontrap/fdm.hpp"
#include "test_meshes.hpp"

using namespace iontrap;
using constants::pi;
using constants::vacuum_permittivity;

namespace {

std::shared_ptr<const ElectrodeMesh> make_sphere(double radius, int subdiv) {
  return std::make_shared<ElectrodeMesh>(
      testmesh::icosphere(radius, Vec3::Zero(), subdiv, Electrode::Rod1));
}

double total_charge(const BasisSet& basis, Electrode e) {
  double q = 0.0;
  int col = electrode_index(e);
  for (int i = 0; i < basis.panel_count(); ++i)
    q += basis.sigma(i, col) * basis.geom[i].area;
  return q;
}

}  // namespace

TEST_CASE("isolated sphere capacitance within 1%") {
  const double a = 10e-3;
  auto mesh = make_sphere(a, 3);  // 1280 panels
  BasisSet basis = solve_basis(mesh);
  CHECK(basis.diagnostics.max_residual < 1e-6);
  double q = total_charge(basis, Electrode::Rod1);
  double exact = 4.0 * pi * vacuum_permittivity * a;
  CHECK(q == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("parallel plates: interior field V/gap within 2%") {
  const double side = 10e-3, gap = 1e-3;
  ElectrodeMesh plates;
  Vec3 u(side, 0, 0), v(0, side, 0);
  Vec3 c0(-side / 2, -side / 2, gap / 2), c1(-side / 2, -side / 2, -gap / 2);
  testmesh::add_plate(plates, c0, u, v, 24, 24, Electrode::RfBlade1);
  testmesh::add_plate(plates, c1, u, v, 24, 24, Electrode::RfBlade2);
  auto mesh = std::make_shared<const ElectrodeMesh>(std::move(plates));
  BasisSet basis = solve_basis(mesh);

  VoltageSet volts;
  volts.v_rf = 0.0;
  // Drive the two plates independently through the basis columns.
  Eigen::VectorXd w =
      1.0 * basis.sigma.col(electrode_index(Electrode::RfBlade1)) +
      0.0 * basis.sigma.col(electrode_index(Electrode::RfBlade2));
  ChargeEvaluator eval(basis, w);
  Vec3 e = eval.field(Vec3::Zero());
  CHECK(std::abs(e.z()) == doctest::Approx(1.0 / gap).epsilon(0.02));
  CHECK(std::abs(e.x()) < 0.02 / gap);
  CHECK(std::abs(e.y()) < 0.02 / gap);
  // Potential midway between the plates is V/2 by symmetry.
  CHECK(eval.potential(Vec3::Zero()) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("superposition: linearity in applied voltages") {
  auto mesh = make_sphere(5e-3, 2);
  BasisSet basis = solve_basis(mesh);
  VoltageSet zero;
  Vec3 p(12e-3, 3e-3, -4e-3);
  CHECK(potential_at(basis, zero, p, PotentialPart::AllStatic) == 0.0);

  VoltageSet one;
  one.rod[0] = 3.7;
  VoltageSet two = one;
  two.rod[0] *= 2.0;
  double phi1 = potential_at(basis, one, p, PotentialPart::AllStatic);
  double phi2 = potential_at(basis, two, p, PotentialPart::AllStatic);
  CHECK(phi2 == doctest::Approx(2.0 * phi1).epsilon(1e-12));
}

TEST_CASE("field equals central difference of potential to 1e-4") {
  auto mesh = make_sphere(5e-3, 2);
  BasisSet basis = solve_basis(mesh);
  Eigen::VectorXd w = basis.sigma.col(electrode_index(Electrode::Rod1));
  ChargeEvaluator eval(basis, w);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 10e-9;
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 p = Vec3(u(rng), u(rng), u(rng)).normalized() * (7e-3 + 2e-3 * u(rng));
    Vec3 e = eval.field(p);
    for (int k = 0; k < 3; ++k) {
      Vec3 dp = Vec3::Zero();
      dp[k] = h;
      double fd = -(eval.potential(p + dp) - eval.potential(p - dp)) / (2 * h);
      CHECK(e[k] == doctest::Approx(fd).epsilon(1e-4).scale(e.norm()));
    }
  }
}

TEST_CASE("harmonicity: discrete Laplacian vanishes off the conductors") {
  auto mesh = make_sphere(5e-3, 2);
  BasisSet basis = solve_basis(mesh);
  ChargeEvaluator eval(basis,
                       basis.sigma.col(electrode_index(Electrode::Rod1)));
  const double h = 1e-6;
  for (Vec3 p : {Vec3(8e-3, 0, 0), Vec3(0, -9e-3, 2e-3), Vec3(4e-3, 4e-3, 4e-3)}) {
    double lap = -6.0 * eval.potential(p);
    for (int k = 0; k < 3; ++k) {
      Vec3 dp = Vec3::Zero();
      dp[k] = h;
      lap += eval.potential(p + dp) + eval.potential(p - dp);
    }
    lap /= h * h;
    double scale = std::abs(eval.potential(p)) / (1e-6 * 1e-6);
    CHECK(std::abs(lap) <= 1e-3 * scale);
  }
}

TEST_CASE("two-sphere capacitance matrix is symmetric within 1%") {
  ElectrodeMesh pair = testmesh::icosphere(3e-3, Vec3(-5e-3, 0, 0), 2,
                                           Electrode::Rod1);
  ElectrodeMesh s2 =
      testmesh::icosphere(2e-3, Vec3(6e-3, 1e-3, 0), 2, Electrode::Rod2);
  for (auto& p : s2.panels) pair.panels.push_back(p);
  pair.solids.push_back(s2.solids[0]);
  pair.solids[1].first = pair.panels.size() - s2.panels.size();
  auto mesh = std::make_shared<const ElectrodeMesh>(std::move(pair));
  BasisSet basis = solve_basis(mesh);
  Eigen::MatrixXd c = capacitance_matrix(basis);
  int r1 = electrode_index(Electrode::Rod1), r2 = electrode_index(Electrode::Rod2);
  CHECK(c(r1, r2) == doctest::Approx(c(r2, r1)).epsilon(0.01));
  CHECK(c(r1, r2) < 0.0);  // induced charge opposes
  CHECK(c(r1, r1) > 0.0);
}

TEST_CASE("GMRES path reproduces the dense solution") {
  auto mesh = make_sphere(4e-3, 2);
  BasisSet dense = solve_basis(mesh);
  SolverOptions opt;
  opt.dense_limit = 10;  // force the iterative path
  BasisSet iter = solve_basis(mesh, opt);
  CHECK(iter.diagnostics.iterative);
  double rel = (iter.sigma.col(electrode_index(Electrode::Rod1)) -
                dense.sigma.col(electrode_index(Electrode::Rod1)))
                   .norm() /
               dense.sigma.col(electrode_index(Electrode::Rod1)).norm();
  CHECK(rel < 1e-6);
  CHECK(iter.diagnostics.max_residual < 1e-6);
}

TEST_CASE("basis cache round-trips bit-exactly") {
  auto mesh = make_sphere(4e-3, 1);
  BasisSet basis = solve_basis(mesh);
  std::string path = "basis_cache_test.bin";
  save_basis(path, basis);
  CHECK(basis_cache_matches(path, mesh->content_hash()));
  CHECK(!basis_cache_matches(path, mesh->content_hash() + 1));
  BasisSet loaded = load_basis(path, mesh);
  CHECK(loaded.sigma == basis.sigma);
  std::remove(path.c_str());
}

TEST_CASE("strict evaluation rejects points at and inside conductors") {
  TrapSpec spec = simplified_trap_spec();
  auto mesh = std::make_shared<const ElectrodeMesh>(
      build_trap(spec, MeshDensity{}.scaled(0.1)));
  BasisSet basis = solve_basis(mesh);
  basis.solids = TrapSolids(spec);
  VoltageSet v;
  v.dc.fill(1.0);
  Vec3 inside = spec.blade_direction(Blade::Dc1) * (spec.blade_distance / 2 + 50e-6);
  CHECK_THROWS_AS(potential_at(basis, v, inside, PotentialPart::AllStatic, true),
                  std::domain_error);
  // Just off the tip face: inside one panel edge.
  Vec3 skim = spec.blade_direction(Blade::Dc1) * (spec.blade_distance / 2 - 5e-6);
  CHECK_THROWS_AS(potential_at(basis, v, skim, PotentialPart::AllStatic, true),
                  std::domain_error);
  // Trap center is fine.
  CHECK_NOTHROW(potential_at(basis, v, Vec3::Zero(), PotentialPart::AllStatic, true));
}
