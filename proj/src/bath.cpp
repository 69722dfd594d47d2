#include "duffing/bath.hpp"

#include <cmath>
#include <sstream>

namespace duffing {

namespace {

constexpr double kDegenerateGap = 1e-9;

} // namespace

BathSpec bath_spec(const OscillatorParams& params, DissipatorMode mode) {
    return BathSpec{params.kappa, params.omega_c, params.theta, mode};
}

double spectral_density(const BathSpec& spec, double omega) {
    return spec.kappa * omega * std::exp(-std::abs(omega) / spec.omega_c);
}

double bose_occupation(double omega, double theta) {
    const double w = std::abs(omega);
    const double n = theta > 0.0 ? 1.0 / std::expm1(w / theta) : 0.0;
    return omega > 0.0 ? n : -(n + 1.0);
}

Correlators correlator_transforms(const BathSpec& spec, double omega) {
    if (std::abs(omega) < kDegenerateGap) {
        // J(w) n(w) -> kappa theta as w -> 0
        const double limit = 2.0 * spec.kappa * spec.theta;
        return {limit, limit};
    }
    const double j = spectral_density(spec, omega);
    const double n = bose_occupation(omega, spec.theta);
    return {2.0 * j * n, 2.0 * j * (n + 1.0)};
}

double transition_spectrum(const BathSpec& spec, double omega) {
    return correlator_transforms(spec, omega).c_tilde;
}

ComplexMatrix DissipatorTable::apply(const ComplexMatrix& rho) const {
    if (mode == DissipatorMode::EigenbasisRedfield) {
        const ComplexMatrix qr = q_op * rho;
        const ComplexMatrix comm = x_op * qr - qr * x_op;
        return -(comm + comm.adjoint());
    }
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (const auto& ch : channels) {
        const ComplexMatrix ldl = ch.op.adjoint() * ch.op;
        out += ch.rate * (ch.op * rho * ch.op.adjoint() - 0.5 * (ldl * rho + rho * ldl));
    }
    return out;
}

DissipatorTable build_q_operator(const OperatorTable& ops, const BathSpec& spec,
                                 TransitionSign sign) {
    DissipatorTable table;
    table.mode = DissipatorMode::EigenbasisRedfield;
    table.x_op = ops.x;

    const int n = ops.dim;
    const RealMatrix x_eig = (ops.eigvecs.transpose() * ops.x.real() * ops.eigvecs);
    RealMatrix q_eig(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            double omega = ops.eigvals(b) - ops.eigvals(a);
            if (sign == TransitionSign::Reversed) omega = -omega;
            if (a != b && std::abs(omega) < kDegenerateGap) ++table.degenerate_pairs;
            q_eig(a, b) = 0.5 * transition_spectrum(spec, omega) * x_eig(a, b);
        }
    }
    if (table.degenerate_pairs > 0) {
        std::ostringstream os;
        os << table.degenerate_pairs
           << " near-degenerate eigenvalue pairs; correlator evaluated at its w->0 limit";
        table.warnings.push_back(os.str());
    }
    const RealMatrix q_fock = ops.eigvecs * q_eig * ops.eigvecs.transpose();
    table.q_op = q_fock.cast<std::complex<double>>();
    return table;
}

DissipatorTable build_lindblad_thermal(const OperatorTable& ops, const BathSpec& spec) {
    DissipatorTable table;
    table.mode = DissipatorMode::LindbladThermal;
    table.x_op = ops.x;
    table.q_op = ComplexMatrix::Zero(ops.dim, ops.dim);
    const double nbar = bose_occupation(1.0, spec.theta);
    table.channels.push_back({spec.kappa * (nbar + 1.0), ops.a});
    if (nbar > 0.0) table.channels.push_back({spec.kappa * nbar, ops.a_dag});
    return table;
}

DissipatorTable build_dissipator(const OperatorTable& ops, const BathSpec& spec) {
    return spec.mode == DissipatorMode::LindbladThermal ? build_lindblad_thermal(ops, spec)
                                                        : build_q_operator(ops, spec);
}

} // namespace duffing
