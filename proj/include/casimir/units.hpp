#pragma once

// Unit system: lengths in nm, energies and (imaginary) frequencies in eV.
// A frequency xi is always stored as the photon energy hbar*xi.

#include <numbers>

namespace casimir::units {

inline constexpr double pi = std::numbers::pi;

/// hbar*c in eV nm (CODATA).
inline constexpr double hbar_c = 197.3269804;

/// Boltzmann constant in eV/K (CODATA).
inline constexpr double k_boltzmann = 8.617333e-5;

inline constexpr double zeta3 = 1.2020569031595942;

/// Wave number kappa = xi/c in 1/nm for a frequency given in eV.
constexpr double wave_number(double xi_ev) { return xi_ev / hbar_c; }

/// Thermal wavelength hbar c/(k_B T) in nm.
constexpr double thermal_wavelength(double kelvin) {
    return hbar_c / (k_boltzmann * kelvin);
}

/// n-th Matsubara frequency 2 pi n k_B T in eV.
constexpr double matsubara_frequency(int n, double kelvin) {
    return 2.0 * pi * n * k_boltzmann * kelvin;
}

}  // namespace casimir::units
