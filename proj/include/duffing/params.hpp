// params.hpp — dimensionless oscillator parameters and presets.
//
// Units: hbar = Omega = 1, positions in sqrt(hbar/(m Omega)), energies in
// hbar*Omega, times in 1/Omega.  The drive enters as 2 f0 cos(nu t) x with
// nu = 1 - delta.

#pragma once

#include <numbers>

namespace duffing {

struct OscillatorParams {
    double aleph{12.0};             // m Omega / hbar
    double gamma_tilde{1.0 / 24.0}; // gamma / (m Omega^2)
    double delta{0.06};             // 1 - nu/Omega
    double f0{0.0};                 // F0 / sqrt(hbar m Omega^3)
    double kappa{0.01};             // friction / Omega
    double theta{0.0};              // k_B T / (hbar Omega)
    double omega_c{10.0};           // bath cutoff / Omega
    int n_basis{40};

    double nu() const noexcept { return 1.0 - delta; }
    double drive_period() const noexcept { return 2.0 * std::numbers::pi / nu(); }

    // Coefficient of x^4 in the dimensionless Hamiltonian.
    double quartic() const noexcept { return gamma_tilde / aleph; }

    // Coefficient of x^2 added by the bath counterterm, kappa*omega_c/pi.
    double counterterm() const noexcept { return kappa * omega_c / std::numbers::pi; }

    // V0 / (hbar Omega) = aleph / (16 gamma_tilde).
    double bound_state_estimate() const noexcept { return aleph / (16.0 * gamma_tilde); }

    // Position of the quartic barrier maximum, sqrt(aleph / (4 gamma_tilde)).
    double barrier_position() const noexcept;
};

// Throws ConfigError (or TruncationError) when an invariant is violated.
// gamma_tilde = 0 is accepted as the harmonic limit.
void validate(const OscillatorParams& params);

// Junction-derived parameters.  critical_current in A, capacitance in F,
// temperature in K; kappa_ratio = kappa/Omega, omega_c_ratio = omega_c/Omega.
// gamma_tilde is fixed to 1/24 (cosine expansion of the Josephson energy).
OscillatorParams dimensionless_from_si(double critical_current, double capacitance,
                                       double kappa_ratio, double omega_c_ratio,
                                       double temperature);

// hbar*Omega/k_B in kelvin for a junction.
double plasma_temperature(double critical_current, double capacitance);

// Junction used throughout: I_c = 39 nA, C = 0.91 pF.
inline constexpr double kReferenceCriticalCurrent = 39e-9;
inline constexpr double kReferenceCapacitance = 0.91e-12;

// Dimensionless temperature of the reference junction at T (kelvin).
double reference_theta(double temperature);

// aleph = 12, gamma_tilde = 1/24, kappa = 0.01, omega_c = 10, delta = 0.06,
// theta at 5 mK for the reference junction, n_basis = 40, drive off.
OscillatorParams paper_mesoscopic();

} // namespace duffing
