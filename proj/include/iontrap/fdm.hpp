#pragma once

#include <array>
#include <functional>
#include <optional>

#include "iontrap/geometry.hpp"

namespace iontrap {

// Voxelized Dirichlet Laplace problem. Conductors are classified per node;
// the box faces are held at `boundary` (zero by default — the documented
// far-box approximation, normally with a box ~10x the conductor extent).
struct VoxelProblem {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  double h = 0.0;
  std::function<std::optional<Electrode>(const Vec3&)> classify;
  std::function<double(const Vec3&)> boundary;  // null -> 0 V
};

struct FdmResult {
  Vec3 lo = Vec3::Zero();
  double h = 0.0;
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> phi;        // node-centered
  std::vector<int8_t> electrode;  // -1 vacuum, else electrode index
  double residual = 0.0;          // max |mean(neighbors) - phi| on vacuum
  int iterations = 0;

  double& at(int i, int j, int k) {
    return phi[(static_cast<std::size_t>(k) * ny + j) * nx + i];
  }
  double at(int i, int j, int k) const {
    return phi[(static_cast<std::size_t>(k) * ny + j) * nx + i];
  }
  Vec3 position(int i, int j, int k) const {
    return lo + h * Vec3(i, j, k);
  }
  // Trilinear interpolation; p must lie within the box.
  double sample(const Vec3& p) const;
};

struct FdmOptions {
  double tol_factor = 1e-6;  // residual target relative to max |V|
  int max_sweeps = 40000;
  int check_every = 25;
};

FdmResult fdm_solve(const VoxelProblem& problem,
                    const std::function<double(Electrode)>& voltages,
                    const FdmOptions& options = {});

// Probe samples for cross-solver comparison.
struct SampleSet {
  std::vector<Vec3> points;
  std::vector<double> values;
};

struct ErrorStats {
  double rms_rel = 0.0;  // rms(a-b) / rms(a)
  double max_rel = 0.0;  // max|a-b| / rms(a)
  std::array<double, 3> axis_rms_rel{};  // over center lines along x,y,z
  int count = 0;
};

// Throws if the point sets differ.
ErrorStats compare_solvers(const SampleSet& reference, const SampleSet& other);

// Reduced rod-less trap used by the cross-solver checks: short blades at the
// default gap and taper so the central field structure is preserved.
TrapSpec simplified_trap_spec();

}  // namespace iontrap
