#pragma once

// Internal helpers shared by the mesh builder and the analytic solids. The
// two must agree exactly on the blade geometry.

#include <array>
#include <vector>

#include "iontrap/geometry.hpp"

namespace iontrap::detail {

// Blade cross-section in the local (radial, width) plane, CCW:
// flat tip of width t at r = d/2, symmetric taper to thickness T over l,
// constant-thickness body out to d/2 + height.
std::vector<Vec2> blade_profile_ccw(const TrapSpec& spec);

// Local blade frame -> world: rotation about z by the blade azimuth followed
// by the blade's misalignment transform.
RigidTransform blade_world_from_local(const TrapSpec& spec, Blade b);
RigidTransform inverse(const RigidTransform& t);

std::array<Electrode, 5> blade_piece_electrodes(Blade b);

}  // namespace iontrap::detail
