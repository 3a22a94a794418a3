#include "iontrap/fdm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iontrap/constants.hpp"

namespace iontrap {

double FdmResult::sample(const Vec3& p) const {
  Vec3 f = (p - lo) / h;
  int i = std::clamp(static_cast<int>(std::floor(f.x())), 0, nx - 2);
  int j = std::clamp(static_cast<int>(std::floor(f.y())), 0, ny - 2);
  int k = std::clamp(static_cast<int>(std::floor(f.z())), 0, nz - 2);
  double ax = std::clamp(f.x() - i, 0.0, 1.0);
  double ay = std::clamp(f.y() - j, 0.0, 1.0);
  double az = std::clamp(f.z() - k, 0.0, 1.0);
  auto v = [&](int di, int dj, int dk) { return at(i + di, j + dj, k + dk); };
  double c00 = v(0, 0, 0) * (1 - ax) + v(1, 0, 0) * ax;
  double c10 = v(0, 1, 0) * (1 - ax) + v(1, 1, 0) * ax;
  double c01 = v(0, 0, 1) * (1 - ax) + v(1, 0, 1) * ax;
  double c11 = v(0, 1, 1) * (1 - ax) + v(1, 1, 1) * ax;
  return (c00 * (1 - ay) + c10 * ay) * (1 - az) +
         (c01 * (1 - ay) + c11 * ay) * az;
}

FdmResult fdm_solve(const VoxelProblem& problem,
                    const std::function<double(Electrode)>& voltages,
                    const FdmOptions& options) {
  if (!(problem.h > 0.0)) throw std::invalid_argument("fdm: h must be > 0");
  if (!problem.classify) throw std::invalid_argument("fdm: missing classifier");

  FdmResult g;
  g.lo = problem.lo;
  g.h = problem.h;
  g.nx = static_cast<int>(std::round((problem.hi.x() - problem.lo.x()) / g.h)) + 1;
  g.ny = static_cast<int>(std::round((problem.hi.y() - problem.lo.y()) / g.h)) + 1;
  g.nz = static_cast<int>(std::round((problem.hi.z() - problem.lo.z()) / g.h)) + 1;
  if (g.nx < 3 || g.ny < 3 || g.nz < 3)
    throw std::invalid_argument("fdm: box too small for the grid spacing");
  std::size_t total = static_cast<std::size_t>(g.nx) * g.ny * g.nz;
  g.phi.assign(total, 0.0);
  g.electrode.assign(total, -1);

  double vmax = 0.0;
  bool conductor_on_boundary = false;
  // Classify nodes; fix conductor and boundary potentials.
#pragma omp parallel for collapse(2) schedule(dynamic, 1) \
    reduction(max : vmax) reduction(|| : conductor_on_boundary)
  for (int k = 0; k < g.nz; ++k) {
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        Vec3 p = g.position(i, j, k);
        std::size_t idx = (static_cast<std::size_t>(k) * g.ny + j) * g.nx + i;
        auto id = problem.classify(p);
        bool on_boundary = i == 0 || j == 0 || k == 0 || i == g.nx - 1 ||
                           j == g.ny - 1 || k == g.nz - 1;
        if (id) {
          conductor_on_boundary = conductor_on_boundary || on_boundary;
          double v = voltages(*id);
          g.electrode[idx] = static_cast<int8_t>(electrode_index(*id));
          g.phi[idx] = v;
          vmax = std::max(vmax, std::abs(v));
        } else if (on_boundary) {
          g.electrode[idx] = 100;  // fixed boundary node
          g.phi[idx] = problem.boundary ? problem.boundary(p) : 0.0;
          vmax = std::max(vmax, std::abs(g.phi[idx]));
        }
      }
    }
  }
  if (conductor_on_boundary)
    throw std::invalid_argument("fdm: conductor touches the box boundary");
  if (vmax == 0.0) vmax = 1.0;

  const double omega =
      2.0 / (1.0 + std::sin(constants::pi / std::max({g.nx, g.ny, g.nz})));
  const double target = options.tol_factor * vmax;
  const auto stride_j = static_cast<std::size_t>(g.nx);
  const auto stride_k = static_cast<std::size_t>(g.nx) * g.ny;

  int sweep = 0;
  for (; sweep < options.max_sweeps; ++sweep) {
    for (int color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(static)
      for (int k = 1; k < g.nz - 1; ++k) {
        for (int j = 1; j < g.ny - 1; ++j) {
          std::size_t row = static_cast<std::size_t>(k) * stride_k +
                            static_cast<std::size_t>(j) * stride_j;
          int istart = 1 + ((k + j + 1 + color) & 1);
          for (int i = istart; i < g.nx - 1; i += 2) {
            std::size_t idx = row + i;
            if (g.electrode[idx] >= 0) continue;
            double nb = g.phi[idx - 1] + g.phi[idx + 1] + g.phi[idx - stride_j] +
                        g.phi[idx + stride_j] + g.phi[idx - stride_k] +
                        g.phi[idx + stride_k];
            g.phi[idx] += omega * (nb / 6.0 - g.phi[idx]);
          }
        }
      }
    }
    if ((sweep + 1) % options.check_every == 0) {
      double res = 0.0;
#pragma omp parallel for schedule(static) reduction(max : res)
      for (int k = 1; k < g.nz - 1; ++k) {
        for (int j = 1; j < g.ny - 1; ++j) {
          std::size_t row = static_cast<std::size_t>(k) * stride_k +
                            static_cast<std::size_t>(j) * stride_j;
          for (int i = 1; i < g.nx - 1; ++i) {
            std::size_t idx = row + i;
            if (g.electrode[idx] >= 0) continue;
            double nb = g.phi[idx - 1] + g.phi[idx + 1] + g.phi[idx - stride_j] +
                        g.phi[idx + stride_j] + g.phi[idx - stride_k] +
                        g.phi[idx + stride_k];
            res = std::max(res, std::abs(nb / 6.0 - g.phi[idx]));
          }
        }
      }
      g.residual = res;
      if (res <= target) {
        g.iterations = sweep + 1;
        return g;
      }
    }
  }
  throw std::runtime_error("fdm: SOR did not converge within the sweep budget");
}

ErrorStats compare_solvers(const SampleSet& reference, const SampleSet& other) {
  if (reference.points.size() != other.points.size() ||
      reference.points.size() != reference.values.size() ||
      other.points.size() != other.values.size())
    throw std::invalid_argument("compare_solvers: mismatched sample sets");
  const std::size_t n = reference.points.size();
  if (n == 0) throw std::invalid_argument("compare_solvers: empty sample sets");
  Vec3 centroid = Vec3::Zero();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((reference.points[i] - other.points[i]).norm() >
        1e-12 * (1.0 + reference.points[i].norm()))
      throw std::invalid_argument("compare_solvers: probe points differ");
    centroid += reference.points[i];
  }
  centroid /= static_cast<double>(n);

  double sum_sq_ref = 0.0, sum_sq_err = 0.0, max_err = 0.0;
  std::array<double, 3> axis_sq{}, axis_ref_sq{};
  std::array<int, 3> axis_n{};
  for (std::size_t i = 0; i < n; ++i) {
    double err = reference.values[i] - other.values[i];
    sum_sq_ref += reference.values[i] * reference.values[i];
    sum_sq_err += err * err;
    max_err = std::max(max_err, std::abs(err));
    scale = std::max(scale, (reference.points[i] - centroid).cwiseAbs().maxCoeff());
    for (int ax = 0; ax < 3; ++ax) {
      Vec3 off = reference.points[i] - centroid;
      off[ax] = 0.0;
      if (off.cwiseAbs().maxCoeff() <= 1e-9 + 1e-9 * scale) {
        axis_sq[ax] += err * err;
        axis_ref_sq[ax] += reference.values[i] * reference.values[i];
        axis_n[ax] += 1;
      }
    }
  }
  double rms_ref = std::sqrt(sum_sq_ref / n);
  if (rms_ref == 0.0) rms_ref = 1.0;
  ErrorStats stats;
  stats.count = static_cast<int>(n);
  stats.rms_rel = std::sqrt(sum_sq_err / n) / rms_ref;
  stats.max_rel = max_err / rms_ref;
  for (int ax = 0; ax < 3; ++ax)
    stats.axis_rms_rel[ax] =
        axis_n[ax] ? std::sqrt(axis_sq[ax] / axis_n[ax]) / rms_ref
                   : std::numeric_limits<double>::quiet_NaN();
  return stats;
}

TrapSpec simplified_trap_spec() {
  TrapSpec spec;
  spec.blade_length = 2e-3;
  spec.taper_length = 0.75e-3;
  spec.blade_height = 1.0e-3;
  spec.include_rods = false;
  spec.segment_bounds =
      equal_segment_bounds(spec.blade_length, spec.tip_width);
  return spec;
}

}  // namespace iontrap
