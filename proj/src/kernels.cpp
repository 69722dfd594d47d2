#include "duffing/kernels.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace duffing::kernels {

namespace {

// Below this dimension element-wise loops stay serial.
constexpr int kParallelDim = 96;

} // namespace

ComplexMatrix SplitMatrix::complex() const {
    ComplexMatrix m(re.rows(), re.cols());
    m.real() = re;
    m.imag() = im;
    return m;
}

ComplexMatrix master_rhs_reference(const OperatorTable& ops, const DissipatorTable& diss,
                                   double drive, const ComplexMatrix& rho) {
    const std::complex<double> i(0.0, 1.0);
    const ComplexMatrix h = ops.h_static + drive * ops.x;
    return -i * (h * rho - rho * h) + diss.apply(rho);
}

EigenLiouvillian::EigenLiouvillian(const OperatorTable& ops, const DissipatorTable& diss)
    : mode_(diss.mode), energies_(ops.eigvals) {
    const RealMatrix& u = ops.eigvecs;
    x_ = u.transpose() * ops.x.real() * u;
    q_ = u.transpose() * diss.q_op.real() * u;
    const int n = ops.dim;
    lindblad_drain_ = ComplexMatrix::Zero(n, n);
    for (const auto& ch : diss.channels) {
        LindbladChannel e{ch.rate, ops.to_eigen(ch.op)};
        lindblad_drain_ -= 0.5 * ch.rate * (e.op.adjoint() * e.op);
        channels_.push_back(std::move(e));
    }
    scratch_.t0.resize(n, n);
    scratch_.t1.resize(n, n);
    scratch_.t2.resize(n, n);
    scratch_.t3.resize(n, n);
}

void EigenLiouvillian::apply(double drive, const SplitMatrix& rho, SplitMatrix& out,
                             bool with_static) const {
    const double stat = with_static ? 1.0 : 0.0;
    if (mode_ == DissipatorMode::EigenbasisRedfield)
        apply_redfield(drive, rho, out, stat);
    else
        apply_lindblad(drive, rho, out, stat);
}

void EigenLiouvillian::apply_redfield(double drive, const SplitMatrix& rho, SplitMatrix& out,
                                      double stat) const {
    const int n = dim();
    auto& qr = scratch_.t0;
    auto& qi = scratch_.t1;
    auto& nre = scratch_.t2;
    auto& nim = scratch_.t3;

    qr.noalias() = q_ * rho.re;
    qi.noalias() = q_ * rho.im;

    // N = -i g rho - (Q rho - (Q rho)^dag)
#pragma omp parallel for if (n >= kParallelDim) schedule(static)
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) {
            const double m_re = qr(r, c) - qr(c, r);
            const double m_im = qi(r, c) + qi(c, r);
            nre(r, c) = drive * rho.im(r, c) - m_re;
            nim(r, c) = -drive * rho.re(r, c) - m_im;
        }
    }

    out.re.noalias() = x_ * nre;
    out.im.noalias() = x_ * nim;

    // x N + (x N)^dag - i (E_r - E_c) rho_rc, upper triangle then mirror.
#pragma omp parallel for if (n >= kParallelDim) schedule(static)
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r <= c; ++r) {
            const double gap = stat * (energies_(r) - energies_(c));
            const double re = out.re(r, c) + out.re(c, r) + gap * rho.im(r, c);
            const double im = out.im(r, c) - out.im(c, r) - gap * rho.re(r, c);
            out.re(r, c) = re;
            out.re(c, r) = re;
            out.im(r, c) = im;
            out.im(c, r) = -im;
        }
    }
}

void EigenLiouvillian::apply_lindblad(double drive, const SplitMatrix& rho, SplitMatrix& out,
                                      double stat) const {
    const std::complex<double> i(0.0, 1.0);
    const ComplexMatrix r = rho.complex();
    ComplexMatrix h = drive * x_.cast<std::complex<double>>();
    h.diagonal() += stat * energies_.cast<std::complex<double>>();
    const ComplexMatrix g = -i * h + lindblad_drain_;
    ComplexMatrix d = g * r;
    d += d.adjoint().eval();
    for (const auto& ch : channels_) d += ch.rate * (ch.op * r * ch.op.adjoint());
    out.re = d.real();
    out.im = d.imag();
}

namespace {

double wigner_point_reference(const ComplexMatrix& rho, double x, double p) {
    const int n = static_cast<int>(rho.rows());
    const double r2 = x * x + p * p;
    const double gauss = std::exp(-r2) / std::numbers::pi;
    const std::complex<double> z = std::sqrt(2.0) * std::complex<double>(x, p);
    double w = 0.0;
    for (int m = 0; m < n; ++m) {
        for (int k = m; k < n; ++k) {
            const std::complex<double> rho_mk = rho(m, k);
            if (rho_mk == 0.0) continue;
            const unsigned order = static_cast<unsigned>(k - m);
            const double norm = std::exp(0.5 * (std::lgamma(m + 1.0) - std::lgamma(k + 1.0)));
            const double lag = std::assoc_laguerre(static_cast<unsigned>(m), order, 2.0 * r2);
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            const std::complex<double> kernel = sign * norm * std::pow(z, static_cast<int>(order)) * lag;
            const double term = std::real(rho_mk * kernel);
            w += (k == m) ? term : 2.0 * term;
        }
    }
    return gauss * w;
}

// Fock kernels W_{|m><n|}(alpha) by the recurrence
//   W_{0n} = 2 alpha W_{0,n-1} / sqrt(n),
//   W_{mm} = (2 alpha* W_{m-1,m} - sqrt(m) W_{m-1,m-1}) / sqrt(m),
//   W_{mn} = (2 alpha W_{m,n-1} - sqrt(m) W_{m-1,n}) / sqrt(n),
// where alpha = (x + ip)/sqrt(2); `row` holds one m at a time.
double wigner_point_recurrence(const ComplexMatrix& rho, double x, double p,
                               std::vector<std::complex<double>>& row,
                               const std::vector<double>& sqrt_table) {
    const int n = static_cast<int>(rho.rows());
    const std::complex<double> two_alpha = std::sqrt(2.0) * std::complex<double>(x, p);
    const std::complex<double> two_alpha_conj = std::conj(two_alpha);

    row[0] = std::exp(-(x * x + p * p)) / std::numbers::pi;
    double w = std::real(rho(0, 0)) * std::real(row[0]);
    for (int k = 1; k < n; ++k) {
        row[k] = two_alpha * row[k - 1] / sqrt_table[k];
        w += 2.0 * std::real(rho(0, k) * row[k]);
    }
    for (int m = 1; m < n; ++m) {
        const double sm = sqrt_table[m];
        std::complex<double> prev = row[m]; // W_{m-1,m}
        row[m] = (two_alpha_conj * prev - sm * row[m - 1]) / sm;
        w += std::real(rho(m, m)) * std::real(row[m]);
        for (int k = m + 1; k < n; ++k) {
            const std::complex<double> next = (two_alpha * row[k - 1] - sm * prev) / sqrt_table[k];
            prev = row[k];
            row[k] = next;
            w += 2.0 * std::real(rho(m, k) * row[k]);
        }
    }
    return w;
}

} // namespace

void wigner_grid_reference(const ComplexMatrix& rho, std::span<const double> xs,
                           std::span<const double> ps, std::span<double> out) {
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < ps.size(); ++j)
            out[i * ps.size() + j] = wigner_point_reference(rho, xs[i], ps[j]);
}

void wigner_grid(const ComplexMatrix& rho, std::span<const double> xs,
                 std::span<const double> ps, std::span<double> out) {
    const int n = static_cast<int>(rho.rows());
    std::vector<double> sqrt_table(n);
    for (int k = 0; k < n; ++k) sqrt_table[k] = std::sqrt(static_cast<double>(k));
    const long nx = static_cast<long>(xs.size());
    const long np = static_cast<long>(ps.size());

#pragma omp parallel
    {
        std::vector<std::complex<double>> row(n);
#pragma omp for schedule(static)
        for (long idx = 0; idx < nx * np; ++idx) {
            const long i = idx / np;
            const long j = idx % np;
            out[idx] = wigner_point_recurrence(rho, xs[i], ps[j], row, sqrt_table);
        }
    }
}

} // namespace duffing::kernels
