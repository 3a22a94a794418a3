#pragma once

namespace iontrap::constants {

inline constexpr double pi = 3.14159265358979323846;

// CODATA 2018, SI
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double elementary_charge = 1.602176634e-19;     // C
inline constexpr double atomic_mass_unit = 1.66053906660e-27;    // kg
inline constexpr double boltzmann = 1.380649e-23;                // J/K

// 171Yb+ (electron-mass correction below 2e-5 relative, neglected)
inline constexpr double yb171_mass_u = 170.9363;

inline constexpr double deg = pi / 180.0;

}  // namespace iontrap::constants
