#pragma once

#include <string>

#include "wgmgyro/errors.hpp"

namespace wgmgyro {

// Conversion between mechanical rotation and the resulting resonance shift of
// the spinning resonator. This is the only module that touches SI units;
// everything downstream works in kappa_b = 1 units.

struct SagnacConfig {
    double n = 1.44;             // refractive index at the pump wavelength
    double radius_m = 1.1e-3;    // resonator radius [m]
    double lambda_m = 1.55e-6;   // pump wavelength [m]
    double dn_dlambda = 0.0;     // material dispersion dn/dlambda [1/m]
    double omega_a_rad_s = 0.0;  // optical angular frequency [rad/s]; 0 = derive from lambda
    double kappa_b_si = 6.283185307179586e7;  // reference linewidth [rad/s] (2*pi * 10 MHz)
};

inline constexpr double kSpeedOfLight = 299792458.0;  // [m/s]

// 1 - 1/n^2 - (lambda/n) dn/dlambda. The relativistic drag correction; the
// shift is proportional to it, so it must stay away from zero for inversion.
double dispersion_factor(const SagnacConfig& cfg);

double optical_omega(const SagnacConfig& cfg);  // cfg value, or 2*pi*c/lambda

// Shift is linear in the rotation rate:
//   shift = n * R * Omega * omega_a / c * dispersion_factor
struct SagnacShift {
    double rad_s;     // shift in SI angular frequency
    double kappa_b;   // same shift in kappa_b units
};

SagnacShift shift_from_rotation(const SagnacConfig& cfg, double omega_rot_rad_s);

// Inverse map; DegenerateDispersionError when |dispersion_factor| < 1e-15
// (the shift carries no rotation information there).
double rotation_from_shift(const SagnacConfig& cfg, double shift_rad_s);

inline double rotation_from_shift_kappa_b(const SagnacConfig& cfg, double shift_kappa_b) {
    return rotation_from_shift(cfg, shift_kappa_b * cfg.kappa_b_si);
}

// JSON object with keys {n, R_m, lambda_m, dn_dlambda, omega_a_rad_s, kappa_b_SI}.
SagnacConfig load_sagnac_config(const std::string& path);
SagnacConfig parse_sagnac_json(const std::string& text);
std::string sagnac_to_json(const SagnacConfig& cfg);

} // namespace wgmgyro
