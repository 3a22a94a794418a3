#include "iontrap/bem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "iontrap/constants.hpp"

#ifdef IONTRAP_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace iontrap {

using constants::pi;
using constants::vacuum_permittivity;

namespace {
constexpr double kCoulomb = 1.0 / (4.0 * pi * vacuum_permittivity);

bool is_rf(Electrode e) {
  return e == Electrode::RfBlade1 || e == Electrode::RfBlade2;
}
bool is_rod(Electrode e) {
  return e == Electrode::Rod1 || e == Electrode::Rod2;
}
}  // namespace

// ---------------------------------------------------------------------------
// VoltageSet
// ---------------------------------------------------------------------------

double& VoltageSet::dc_voltage(Electrode e) {
  int i = electrode_index(e) - electrode_index(Electrode::Dc1A);
  if (i < 0 || i >= 10)
    throw std::invalid_argument("not a dc segment electrode");
  return dc[i];
}

double VoltageSet::dc_voltage(Electrode e) const {
  return const_cast<VoltageSet*>(this)->dc_voltage(e);
}

double VoltageSet::static_voltage(Electrode e) const {
  if (is_rf(e)) return 0.0;
  if (e == Electrode::Rod1) return rod[0];
  if (e == Electrode::Rod2) return rod[1];
  return dc_voltage(e);
}

VoltageSet VoltageSet::operating_point(double v_rf, double v_outer,
                                       double v_inner, double v_center) {
  VoltageSet v;
  v.v_rf = v_rf;
  const double seg[5] = {v_outer, v_inner, v_center, v_inner, v_outer};
  for (int blade = 0; blade < 2; ++blade)
    for (int s = 0; s < 5; ++s) v.dc[5 * blade + s] = seg[s];
  return v;
}

void VoltageSet::validate() const {
  if (!(drive_omega > 0.0))
    throw std::invalid_argument("drive frequency must be positive");
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(v_rf)) throw std::invalid_argument("non-finite rf voltage");
  for (double x : dc)
    if (!finite(x)) throw std::invalid_argument("non-finite dc voltage");
  for (double x : rod)
    if (!finite(x)) throw std::invalid_argument("non-finite rod voltage");
}

// ---------------------------------------------------------------------------
// Assembly + dense solve
// ---------------------------------------------------------------------------

namespace {

// Potential-integral kernel with the far-field monopole shortcut.
inline double kernel_value(const PanelGeom& g, const Vec3& p, double far_mult) {
  Vec3 d = p - g.centroid;
  double r2 = d.squaredNorm();
  double far = far_mult * g.diameter;
  if (r2 > far * far) return g.area / std::sqrt(r2);
  return panel_potential_integral(g, p);
}

struct DenseSolveResult {
  Eigen::MatrixXd x;
  double rcond = 0.0;
};

DenseSolveResult dense_solve(Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  DenseSolveResult out;
  const int n = static_cast<int>(a.rows());
#ifdef IONTRAP_HAVE_LAPACKE
  out.x = b;
  std::vector<lapack_int> ipiv(n);
  double anorm = LAPACKE_dlange(LAPACK_COL_MAJOR, '1', n, n, a.data(), n);
  lapack_int info =
      LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, a.data(), n, ipiv.data());
  if (info != 0)
    throw std::runtime_error("BEM system is singular (dgetrf info=" +
                             std::to_string(info) + "); check for duplicate or degenerate panels");
  LAPACKE_dgecon(LAPACK_COL_MAJOR, '1', n, a.data(), n, anorm, &out.rcond);
  info = LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', n,
                        static_cast<lapack_int>(b.cols()), a.data(), n,
                        ipiv.data(), out.x.data(), n);
  if (info != 0) throw std::runtime_error("dgetrs failed");
#else
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  out.x = lu.solve(b);
  out.rcond = 1.0 / (a.cwiseAbs().colwise().sum().maxCoeff() *
                     lu.inverse().cwiseAbs().colwise().sum().maxCoeff());
#endif
  return out;
}

// Restarted GMRES with a block-Jacobi (per-solid) preconditioner. Used past
// the dense factorization limit; the matrix is still stored.
Eigen::VectorXd gmres_solve(const Eigen::MatrixXd& a,
                            const std::vector<ElectrodeMesh::Solid>& solids,
                            const Eigen::VectorXd& b, double tol, int restart,
                            int max_outer, int* iters) {
  const int n = static_cast<int>(a.rows());
  // Block LU factors (per-solid diagonal blocks); plain Jacobi where the
  // solid list does not cover the panels.
  std::size_t covered = 0;
  for (const auto& s : solids) covered += s.count;
  const bool block_precond = covered == static_cast<std::size_t>(n);
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> blocks;
  if (block_precond) {
    blocks.reserve(solids.size());
    for (const auto& s : solids)
      blocks.emplace_back(a.block(s.first, s.first, s.count, s.count));
  }
  auto precond = [&](const Eigen::VectorXd& r) {
    Eigen::VectorXd z(n);
    if (block_precond) {
      for (std::size_t k = 0; k < solids.size(); ++k) {
        const auto& s = solids[k];
        z.segment(s.first, s.count) =
            blocks[k].solve(r.segment(s.first, s.count));
      }
    } else {
      z = r.cwiseQuotient(a.diagonal());
    }
    return z;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  double bnorm = b.norm();
  if (bnorm == 0.0) return x;
  int total_iters = 0;
  for (int outer = 0; outer < max_outer; ++outer) {
    Eigen::VectorXd r = b - a * x;
    double beta = r.norm();
    if (beta / bnorm < tol) break;
    int m = restart;
    Eigen::MatrixXd v(n, m + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
    std::vector<double> cs(m), sn(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    v.col(0) = r / beta;
    g(0) = beta;
    int k = 0;
    for (; k < m; ++k) {
      ++total_iters;
      Eigen::VectorXd w = a * precond(v.col(k));
      for (int j = 0; j <= k; ++j) {
        h(j, k) = w.dot(v.col(j));
        w -= h(j, k) * v.col(j);
      }
      h(k + 1, k) = w.norm();
      if (h(k + 1, k) > 0.0) v.col(k + 1) = w / h(k + 1, k);
      for (int j = 0; j < k; ++j) {
        double t = cs[j] * h(j, k) + sn[j] * h(j + 1, k);
        h(j + 1, k) = -sn[j] * h(j, k) + cs[j] * h(j + 1, k);
        h(j, k) = t;
      }
      double denom = std::hypot(h(k, k), h(k + 1, k));
      cs[k] = h(k, k) / denom;
      sn[k] = h(k + 1, k) / denom;
      h(k, k) = denom;
      h(k + 1, k) = 0.0;
      g(k + 1) = -sn[k] * g(k);
      g(k) = cs[k] * g(k);
      if (std::abs(g(k + 1)) / bnorm < tol) {
        ++k;
        break;
      }
    }
    Eigen::VectorXd y =
        h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < k; ++j) dx += y(j) * v.col(j);
    x += precond(dx);
    if (std::abs(g(k)) / bnorm < tol) break;
  }
  if (iters) *iters = total_iters;
  return x;
}

}  // namespace

BasisSet solve_basis(std::shared_ptr<const ElectrodeMesh> mesh,
                     const SolverOptions& options) {
  if (!mesh || mesh->panels.empty())
    throw std::invalid_argument("solve_basis: empty mesh");
  BasisSet basis;
  basis.mesh = mesh;
  basis.options = options;
  basis.mesh_hash = mesh->content_hash();

  const int n = static_cast<int>(mesh->panels.size());
  basis.geom.resize(n);
  for (int i = 0; i < n; ++i) {
    basis.geom[i] = make_panel_geom(mesh->panels[i]);
    if (!(basis.geom[i].area > 0.0))
      throw std::invalid_argument("solve_basis: degenerate panel " +
                                  std::to_string(i));
  }
  for (const auto& p : mesh->panels)
    basis.electrode_present[electrode_index(p.electrode)] = true;

  // Assemble the collocation matrix: potential at centroid i from unit
  // charge density on panel j.
  Eigen::MatrixXd a(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (int j = 0; j < n; ++j) {
    const PanelGeom& g = basis.geom[j];
    for (int i = 0; i < n; ++i) {
      a(i, j) = kCoulomb *
                kernel_value(g, basis.geom[i].centroid, options.far_assembly);
    }
  }

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, kElectrodeCount);
  for (int i = 0; i < n; ++i)
    b(i, electrode_index(mesh->panels[i].electrode)) = 1.0;

  if (static_cast<std::size_t>(n) <= options.dense_limit) {
    // Keep a copy only for the residual check when memory is modest.
    auto solved = dense_solve(a, b);
    basis.sigma = std::move(solved.x);
    basis.diagnostics.rcond = solved.rcond;
  } else {
    basis.sigma.resize(n, kElectrodeCount);
    basis.diagnostics.iterative = true;
    int iters_total = 0;
    for (int e = 0; e < kElectrodeCount; ++e) {
      if (!basis.electrode_present[e]) {
        basis.sigma.col(e).setZero();
        continue;
      }
      int iters = 0;
      basis.sigma.col(e) =
          gmres_solve(a, mesh->solids, b.col(e), options.tolerance,
                      options.gmres_restart, options.gmres_max_outer, &iters);
      iters_total += iters;
    }
    basis.diagnostics.iterations = iters_total;
  }

  // Boundary-condition residual, recomputed from the kernel on a sample of
  // collocation rows (all rows for small systems).
  {
    std::vector<int> rows;
    if (n <= 4000) {
      rows.resize(n);
      for (int i = 0; i < n; ++i) rows[i] = i;
    } else {
      std::mt19937 rng(12345);
      std::uniform_int_distribution<int> pick(0, n - 1);
      rows.resize(500);
      for (int& r : rows) r = pick(rng);
    }
    double max_res = 0.0;
#pragma omp parallel for reduction(max : max_res) schedule(dynamic, 8)
    for (std::size_t k = 0; k < rows.size(); ++k) {
      int i = rows[k];
      Eigen::RowVectorXd arow(n);
      for (int j = 0; j < n; ++j)
        arow(j) = kCoulomb * kernel_value(basis.geom[j],
                                          basis.geom[i].centroid,
                                          options.far_assembly);
      for (int e = 0; e < kElectrodeCount; ++e) {
        if (!basis.electrode_present[e]) continue;
        double phi = arow * basis.sigma.col(e);
        double res = std::abs(phi - b(i, e));
        max_res = std::max(max_res, res);
      }
    }
    basis.diagnostics.max_residual = max_res;
    basis.diagnostics.residual_rows_checked = static_cast<int>(rows.size());
  }
  return basis;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Eigen::VectorXd combine_charges(const BasisSet& basis, const VoltageSet& v,
                                PotentialPart part) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(basis.panel_count());
  for (int e = 0; e < kElectrodeCount; ++e) {
    Electrode el = static_cast<Electrode>(e);
    double volt = 0.0;
    switch (part) {
      case PotentialPart::RfOnly:
        volt = is_rf(el) ? v.v_rf : 0.0;
        break;
      case PotentialPart::DcOnly:
        volt = (!is_rf(el) && !is_rod(el)) ? v.dc_voltage(el) : 0.0;
        break;
      case PotentialPart::RodOnly:
        volt = is_rod(el) ? (el == Electrode::Rod1 ? v.rod[0] : v.rod[1]) : 0.0;
        break;
      case PotentialPart::AllStatic:
        volt = v.static_voltage(el);
        break;
    }
    if (volt != 0.0) w += volt * basis.sigma.col(e);
  }
  return w;
}

Eigen::VectorXd rf_unit_charges(const BasisSet& basis) {
  return basis.sigma.col(electrode_index(Electrode::RfBlade1)) +
         basis.sigma.col(electrode_index(Electrode::RfBlade2));
}

ChargeEvaluator::ChargeEvaluator(const BasisSet& basis, Eigen::VectorXd weights)
    : basis_(&basis), w_(std::move(weights)) {
  if (w_.size() != basis.panel_count())
    throw std::invalid_argument("weight vector size mismatch");
}

void ChargeEvaluator::potential_and_field(const Vec3& p, double* phi,
                                          Vec3* e_out) const {
  const auto& geom = basis_->geom;
  const double far = basis_->options.far_eval;
  double acc_phi = 0.0;
  Vec3 acc_grad = Vec3::Zero();
  const int n = static_cast<int>(geom.size());
  for (int j = 0; j < n; ++j) {
    const double wj = w_(j);
    if (wj == 0.0) continue;
    const PanelGeom& g = geom[j];
    Vec3 d = p - g.centroid;
    double r2 = d.squaredNorm();
    double cutoff = far * g.diameter;
    if (r2 > cutoff * cutoff) {
      double inv_r = 1.0 / std::sqrt(r2);
      if (phi) acc_phi += wj * g.area * inv_r;
      if (e_out) acc_grad += (-wj * g.area * inv_r * inv_r * inv_r) * d;
    } else {
      double val;
      Vec3 grad;
      panel_integral(g, p, phi ? &val : nullptr, e_out ? &grad : nullptr);
      if (phi) acc_phi += wj * val;
      if (e_out) acc_grad += wj * grad;
    }
  }
  if (phi) *phi = kCoulomb * acc_phi;
  if (e_out) *e_out = -kCoulomb * acc_grad;
}

double ChargeEvaluator::potential(const Vec3& p) const {
  double phi;
  potential_and_field(p, &phi, nullptr);
  return phi;
}

Vec3 ChargeEvaluator::field(const Vec3& p) const {
  Vec3 e;
  potential_and_field(p, nullptr, &e);
  return e;
}

double distance_to_conductors(const BasisSet& basis, const Vec3& p) {
  if (basis.solids) return basis.solids->signed_distance(p);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : basis.geom) {
    // Conservative: distance to panel centroid minus its radius.
    best = std::min(best, (p - g.centroid).norm() - g.diameter);
  }
  return best;
}

namespace {
void strict_check(const BasisSet& basis, const Vec3& p) {
  double d = distance_to_conductors(basis, p);
  if (d < 0.0)
    throw std::domain_error("evaluation point inside a conductor");
  // local panel scale: nearest panel diameter
  double near_diam = 0.0;
  double near_dist = std::numeric_limits<double>::infinity();
  for (const auto& g : basis.geom) {
    double dist = (p - g.centroid).norm();
    if (dist < near_dist) {
      near_dist = dist;
      near_diam = g.diameter;
    }
  }
  if (d < near_diam)
    throw std::domain_error(
        "evaluation point within one panel edge of a conductor surface");
}
}  // namespace

double potential_at(const BasisSet& basis, const VoltageSet& v, const Vec3& p,
                    PotentialPart part, bool strict) {
  if (strict) strict_check(basis, p);
  return ChargeEvaluator(basis, combine_charges(basis, v, part)).potential(p);
}

Vec3 field_at(const BasisSet& basis, const VoltageSet& v, const Vec3& p,
              PotentialPart part, bool strict) {
  if (strict) strict_check(basis, p);
  return ChargeEvaluator(basis, combine_charges(basis, v, part)).field(p);
}

Vec3 rf_field_amplitude(const BasisSet& basis, const VoltageSet& v,
                        const Vec3& p) {
  return ChargeEvaluator(basis, v.v_rf * rf_unit_charges(basis)).field(p);
}

Eigen::MatrixXd capacitance_matrix(const BasisSet& basis) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(kElectrodeCount, kElectrodeCount);
  const auto& panels = basis.mesh->panels;
  for (int i = 0; i < basis.panel_count(); ++i) {
    int e = electrode_index(panels[i].electrode);
    double area = basis.geom[i].area;
    for (int f = 0; f < kElectrodeCount; ++f)
      c(e, f) += basis.sigma(i, f) * area;
  }
  return c;
}

}  // namespace iontrap
