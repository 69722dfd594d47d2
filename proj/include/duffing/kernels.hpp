// kernels.hpp — hot loops of the propagator and the Wigner transform.
//
// Each kernel has a serial reference implementation that follows the defining
// formula literally and is kept for tests and benchmarks, next to the
// production version that restructures the arithmetic and parallelizes with
// OpenMP where the work is large enough.

#pragma once

#include "duffing/bath.hpp"
#include "duffing/operators.hpp"

#include <span>
#include <vector>

namespace duffing::kernels {

// Density matrix stored as separate real and imaginary parts.
struct SplitMatrix {
    RealMatrix re;
    RealMatrix im;

    SplitMatrix() = default;
    explicit SplitMatrix(int n) : re(RealMatrix::Zero(n, n)), im(RealMatrix::Zero(n, n)) {}
    explicit SplitMatrix(const ComplexMatrix& m) : re(m.real()), im(m.imag()) {}

    int dim() const noexcept { return static_cast<int>(re.rows()); }
    ComplexMatrix complex() const;
};

// -i[H_s + g x, rho] + D(rho) evaluated directly in the Fock basis with complex
// products.  `drive` is the instantaneous coefficient g = 2 f0 cos(nu t).
ComplexMatrix master_rhs_reference(const OperatorTable& ops, const DissipatorTable& diss,
                                   double drive, const ComplexMatrix& rho);

// Master-equation generator in the eigenbasis of h_static.  The static part is
// diagonal there and, for the Redfield form, the drive and dissipator fold into
// a single commutator with x:
//   d rho/dt = -i(E_a - E_b) rho_ab + x N + (x N)^dag,
//   N = -i g rho - (Q rho - (Q rho)^dag),
// so one step costs four real GEMMs.  Requires Hermitian rho.
class EigenLiouvillian {
public:
    EigenLiouvillian(const OperatorTable& ops, const DissipatorTable& diss);

    int dim() const noexcept { return static_cast<int>(energies_.size()); }

    // out = L(rho); `out` must not alias `rho`.  With with_static = false the
    // diagonal -i(E_a - E_b) term is left out, for integrators that treat it
    // exactly.
    void apply(double drive, const SplitMatrix& rho, SplitMatrix& out, bool with_static = true) const;

    const RealVector& energies() const noexcept { return energies_; }

private:
    struct Scratch {
        RealMatrix t0, t1, t2, t3;
    };

    void apply_redfield(double drive, const SplitMatrix& rho, SplitMatrix& out, double stat) const;
    void apply_lindblad(double drive, const SplitMatrix& rho, SplitMatrix& out, double stat) const;

    DissipatorMode mode_;
    RealVector energies_;
    RealMatrix x_;
    RealMatrix q_;
    std::vector<LindbladChannel> channels_; // eigenbasis
    ComplexMatrix lindblad_drain_;          // -1/2 sum rate L^dag L, eigenbasis
    mutable Scratch scratch_;
};

// W(x_i, p_j) of a Fock-basis density matrix, written row-major into
// out[i * ps.size() + j].  Closed-form kernel
//   W_{|m><n|} = (-1)^m/pi sqrt(m!/n!) (sqrt2 (x+ip))^(n-m) e^{-r^2} L_m^(n-m)(2 r^2)
// with std::assoc_laguerre, one point at a time.
void wigner_grid_reference(const ComplexMatrix& rho, std::span<const double> xs,
                           std::span<const double> ps, std::span<double> out);

// Same field from the stable two-term recurrence of the Fock kernels,
// OpenMP-parallel over grid points.
void wigner_grid(const ComplexMatrix& rho, std::span<const double> xs,
                 std::span<const double> ps, std::span<double> out);

} // namespace duffing::kernels
