// bath.hpp — Ohmic bath correlators and the dissipative part of the master equation.

#pragma once

#include "duffing/operators.hpp"

#include <string>
#include <vector>

namespace duffing {

enum class DissipatorMode { EigenbasisRedfield, LindbladThermal };

struct BathSpec {
    double kappa{0.01};
    double omega_c{10.0};
    double theta{0.0};
    DissipatorMode mode{DissipatorMode::EigenbasisRedfield};
};

BathSpec bath_spec(const OscillatorParams& params,
                   DissipatorMode mode = DissipatorMode::EigenbasisRedfield);

// J(w) = kappa w exp(-|w|/omega_c), odd in w.
double spectral_density(const BathSpec& spec, double omega);

// Bose occupation extended to negative frequency by n(-w) = -(n(w) + 1).
// theta = 0 gives n(w > 0) = 0.  Undefined at w = 0.
double bose_occupation(double omega, double theta);

struct Correlators {
    double c;       // 2 J(w) n(w)
    double c_tilde; // 2 J(w) (n(w) + 1)
};

// Fourier transforms of <b^dag(t) b> and <b(t) b^dag>.  Both are continuous at
// w = 0 with the limit 2 kappa theta.  For theta > 0, C(w) = exp(-w/theta) C~(w).
Correlators correlator_transforms(const BathSpec& spec, double omega);

// Spectral weight of a transition that lowers the system energy by `omega`
// (omega < 0 raises it): emission 2J(n+1) for omega > 0, absorption 2J n for
// omega < 0.  Equals C~(omega) and C(-omega) under the extension above.
double transition_spectrum(const BathSpec& spec, double omega);

// Which end of a transition is treated as the emitting one.  `Emission` is the
// physical assignment; `Reversed` exists so tests can show it breaks the Gibbs
// fixed point.
enum class TransitionSign { Emission, Reversed };

struct LindbladChannel {
    double rate;
    ComplexMatrix op;
};

// Immutable after construction.
struct DissipatorTable {
    DissipatorMode mode{DissipatorMode::EigenbasisRedfield};
    ComplexMatrix x_op;                 // coupling operator, Fock basis
    ComplexMatrix q_op;                 // Fock basis; Redfield mode only
    std::vector<LindbladChannel> channels; // Lindblad mode only
    int degenerate_pairs{0};            // a != b with |w_ab| < 1e-9
    std::vector<std::string> warnings;

    // rho -> -([x, Q rho] + h.c.)  or the Lindblad sum; Fock basis.
    ComplexMatrix apply(const ComplexMatrix& rho) const;
};

// Q_ab = 1/2 S(w_ba) x_ab in the eigenbasis of h_static, w_ba = E_b - E_a,
// rotated back to the Fock basis.
DissipatorTable build_q_operator(const OperatorTable& ops, const BathSpec& spec,
                                 TransitionSign sign = TransitionSign::Emission);

// Thermal Lindblad dissipator: rate kappa(n+1) on a, kappa n on a^dag, n = n_B(1).
DissipatorTable build_lindblad_thermal(const OperatorTable& ops, const BathSpec& spec);

// Dispatches on spec.mode.
DissipatorTable build_dissipator(const OperatorTable& ops, const BathSpec& spec);

} // namespace duffing
