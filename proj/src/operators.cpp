#include "duffing/operators.hpp"

#include "duffing/errors.hpp"

#include <cmath>

namespace duffing {

namespace {

RealMatrix ladder(int dim) {
    RealMatrix a = RealMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

} // namespace

RealMatrix position_power(int dim, int power) {
    const int big = dim + power;
    const RealMatrix a = ladder(big);
    const RealMatrix x = (a + a.transpose()) / std::sqrt(2.0);
    RealMatrix acc = RealMatrix::Identity(big, big);
    for (int k = 0; k < power; ++k) acc = acc * x;
    return acc.topLeftCorner(dim, dim);
}

ComplexMatrix OperatorTable::to_eigen(const ComplexMatrix& fock) const {
    return eigvecs.transpose() * fock * eigvecs;
}

ComplexMatrix OperatorTable::to_fock(const ComplexMatrix& eigen) const {
    return eigvecs * eigen * eigvecs.transpose();
}

OperatorTable build_operator_table(const OscillatorParams& params) {
    validate(params);
    const int n = params.n_basis;

    OperatorTable t;
    t.dim = n;
    const RealMatrix a = ladder(n);
    t.a = a.cast<std::complex<double>>();
    t.a_dag = t.a.adjoint();
    t.x = (t.a + t.a_dag) / std::sqrt(2.0);
    t.p = std::complex<double>(0.0, 1.0) * (t.a_dag - t.a) / std::sqrt(2.0);

    RealMatrix h = RealMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) h(k, k) = k + 0.5;
    if (params.gamma_tilde > 0.0) h -= params.quartic() * position_power(n, 4);
    if (params.counterterm() > 0.0) h += params.counterterm() * position_power(n, 2);
    t.h_static = h.cast<std::complex<double>>();

    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h);
    if (solver.info() != Eigen::Success) throw NumericalError("h_static diagonalization failed");
    t.eigvals = solver.eigenvalues();
    t.eigvecs = solver.eigenvectors();
    return t;
}

ComplexMatrix drive_term(const OperatorTable& ops, const OscillatorParams& params, double t) {
    return (2.0 * params.f0 * std::cos(params.nu() * t)) * ops.x;
}

} // namespace duffing
