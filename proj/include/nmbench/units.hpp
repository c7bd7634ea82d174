// units.hpp — Physical constants and spectroscopic unit conversions
//
// Internally every energy is carried as an angular frequency in rad/fs with
// hbar = 1. Inputs arrive in cm^-1, kelvin and femtoseconds.

#pragma once

#include <cmath>
#include <numbers>

namespace nmbench::units {

// Speed of light in cm/fs (exact SI value 299792458 m/s).
inline constexpr double speed_of_light_cm_per_fs = 2.99792458e-5;

// Boltzmann constant in cm^-1 per kelvin (CODATA 2018).
inline constexpr double boltzmann_wavenumber_per_kelvin = 0.695034800;

// 1 cm^-1 expressed in rad/fs.
inline constexpr double rad_per_fs_per_wavenumber =
    2.0 * std::numbers::pi * speed_of_light_cm_per_fs;

constexpr double wavenumber_to_angular(double wavenumber) {
    return rad_per_fs_per_wavenumber * wavenumber;
}

constexpr double angular_to_wavenumber(double angular) {
    return angular / rad_per_fs_per_wavenumber;
}

// k_B T in rad/fs.
constexpr double thermal_energy_angular(double temperature_kelvin) {
    return wavenumber_to_angular(boltzmann_wavenumber_per_kelvin * temperature_kelvin);
}

// Relaxation time 1/gamma in fs for a rate given in cm^-1.
inline double inverse_rate_fs(double rate_wavenumber) {
    return 1.0 / wavenumber_to_angular(rate_wavenumber);
}

} // namespace nmbench::units
