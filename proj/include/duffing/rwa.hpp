// rwa.hpp — rotating-frame (RWA) analysis and the classical Duffing ODE.
//
// In the frame rotating at nu the slow Hamiltonian is
//   H = d e - (3/2) g e^2 + f x,   e = (x^2 + p^2)/2,
// with d = m~ W~^2 the detuning and g the quartic coefficient, so the
// extrema sit at p = 0 on the roots of x^3 - (2d/3g) x - 2f/(3g) = 0.

#pragma once

#include "duffing/operators.hpp"
#include "duffing/params.hpp"

#include <span>
#include <vector>

namespace duffing {

struct RwaFrame {
    double mass_tilde{1.0};  // m/delta (m = 1)
    double omega_tilde{0.0}; // Omega*delta
    double quartic{0.0};     // g
    double drive{0.0};       // f
    // Oscillator-unit position of a frame coordinate x is x * coordinate_scale.
    double coordinate_scale{1.0};
    // Frame drive f corresponds to lab drive f * drive_scale.
    double drive_scale{1.0};

    double detuning() const noexcept { return mass_tilde * omega_tilde * omega_tilde; }
    double linear_coefficient() const noexcept { return 2.0 * detuning() / (3.0 * quartic); }
    double constant_coefficient() const noexcept { return 2.0 * drive / (3.0 * quartic); }
    // (b/2)^2 - (a/3)^3 for x^3 - a x - b
    double discriminant() const noexcept;
    // Drive at which the discriminant vanishes, in frame units.
    double critical_drive() const noexcept;
    double quasienergy(double x, double p) const noexcept;
};

// delta, gamma_tilde/aleph and f0 exactly as given.
RwaFrame nominal_frame(const OscillatorParams& params);

// Frame of the simulated Hamiltonian: the counterterm raises the linear
// frequency to w' = sqrt(1 + 2 kappa omega_c/pi), so d = w' - nu,
// g = gamma/w'^2, f = f0/sqrt(w') in the coordinates of the w' oscillator.
// Identical to nominal_frame when kappa = 0.
RwaFrame renormalized_frame(const OscillatorParams& params);

RwaFrame with_drive(RwaFrame frame, double lab_drive);

// f_c = (2 sqrt2 / 9) sqrt(aleph/gamma_tilde) delta^(3/2); with gamma_tilde = 1/24
// this is (8 sqrt3/9) sqrt(aleph) delta^(3/2).
double critical_drive(const OscillatorParams& params);

enum class Attractor { Small, Unstable, Large, Single };

struct FixedPoint {
    double x;  // oscillator units, p = 0
    Attractor label;
};

struct FixedPoints {
    std::vector<FixedPoint> roots; // ascending in x
    double discriminant{0.0};

    const FixedPoint* find(Attractor label) const noexcept;
};

// Trigonometric solution when the discriminant is negative, Cardano otherwise.
// With three roots: smallest |x| is the SAS, largest |x| the LAS, the middle
// one the saddle.
FixedPoints fixed_points(const RwaFrame& frame);
FixedPoints fixed_points(const OscillatorParams& params);

// 2 (F_c/3g)^(1/3) cos(theta/3), theta = arctan sqrt((F_c/F_0)^2 - 1); frame units.
double largest_root_closed_form(const RwaFrame& frame);

struct DetuningWindow {
    double delta_min;
    double delta_max;
    bool contains(double delta) const noexcept { return delta > delta_min && delta < delta_max; }
};

// delta_min = sqrt3/(2Q), delta_max = 9/(64 (3 gamma_tilde)^(1/3)).  Throws
// ConfigError when the window is empty.
DetuningWindow detuning_window(const OscillatorParams& params, double quality);

// delta e - (3/2) g e^2 + f x in the Fock basis with e = a^dag a + 1/2.
ComplexMatrix rwa_quasienergy(const OperatorTable& ops, const RwaFrame& frame);
ComplexMatrix rwa_quasienergy(const OperatorTable& ops, const OscillatorParams& params);

// Classical counterpart:
//   x'' = -(1 + 2c) x + 4 g x^3 - kappa x' - 2 f0 cos(nu t),
// c the counterterm coefficient when enabled.
struct ClassicalOptions {
    int steps_per_period{200};
    int settle_periods{400};
    int measure_periods{20};
    bool include_counterterm{false};
};

struct ClassicalState {
    double x{0.0};
    double v{0.0};
};

struct ClassicalRun {
    ClassicalState end;
    double amplitude{0.0};      // first harmonic over the measurement window
    double peak{0.0};           // max |x| over the measurement window
};

// Integrates settle_periods + measure_periods drive periods starting at t = 0.
// Throws DivergenceError if |x| passes the barrier position.
ClassicalRun integrate_classical(const OscillatorParams& params, ClassicalState start,
                                 const ClassicalOptions& options = {});

enum class SweepDirection { Up, Down };

struct AmplitudePoint {
    double f0;
    double amplitude;
    double peak;
    bool diverged{false};
};

// Adiabatic continuation over f0_grid (any order in, traversed ascending for
// Up and descending for Down); each point starts from the previous end state.
// Points after a divergence are reported with diverged = true.
std::vector<AmplitudePoint> classical_sweep(const OscillatorParams& params,
                                            std::span<const double> f0_grid,
                                            SweepDirection direction,
                                            const ClassicalOptions& options = {});

} // namespace duffing
