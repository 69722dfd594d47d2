// operators.hpp — truncated Fock-basis operators and the static Hamiltonian.

#pragma once

#include "duffing/params.hpp"

#include <Eigen/Dense>

namespace duffing {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Immutable after construction; safe to share read-only between threads.
struct OperatorTable {
    int dim{0};
    ComplexMatrix a;
    ComplexMatrix a_dag;
    ComplexMatrix x; // (a + a^dag)/sqrt(2)
    ComplexMatrix p; // i(a^dag - a)/sqrt(2)
    // (p^2 + x^2)/2 - (gamma_tilde/aleph) x^4 + (kappa omega_c/pi) x^2
    ComplexMatrix h_static;
    RealVector eigvals;  // ascending
    RealMatrix eigvecs;  // columns; real orthogonal because h_static is real symmetric

    ComplexMatrix to_eigen(const ComplexMatrix& fock) const;
    ComplexMatrix to_fock(const ComplexMatrix& eigen) const;
};

// Matrix of x^k in the first `dim` Fock states, computed in a larger basis so
// the top rows are exact matrix elements rather than artefacts of truncation.
RealMatrix position_power(int dim, int power);

// Validates params (TruncationError when n_basis < 1.5 N_bound) and builds the
// table including the spectral decomposition of h_static.
OperatorTable build_operator_table(const OscillatorParams& params);

// 2 f0 cos(nu t) x.
ComplexMatrix drive_term(const OperatorTable& ops, const OscillatorParams& params, double t);

} // namespace duffing
