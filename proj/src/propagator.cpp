#include "duffing/propagator.hpp"

#include "duffing/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace duffing {

namespace {

// Tr[A rho] for a complex A and a split rho.
std::complex<double> expectation(const ComplexMatrix& a, const kernels::SplitMatrix& rho) {
    const int n = rho.dim();
    double re = 0.0;
    double im = 0.0;
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) {
            // A_rc rho_cr
            const std::complex<double> av = a(r, c);
            const double pr = rho.re(c, r);
            const double pi = rho.im(c, r);
            re += av.real() * pr - av.imag() * pi;
            im += av.real() * pi + av.imag() * pr;
        }
    }
    return {re, im};
}

double trace_of(const kernels::SplitMatrix& rho) { return rho.re.trace(); }

double split_purity(const kernels::SplitMatrix& rho) {
    // Tr rho^2 = sum |rho_ab|^2 for Hermitian rho
    return rho.re.squaredNorm() + rho.im.squaredNorm();
}

void symmetrize(kernels::SplitMatrix& rho) {
    rho.re = 0.5 * (rho.re + rho.re.transpose()).eval();
    rho.im = 0.5 * (rho.im - rho.im.transpose()).eval();
}

double smallest_eigenvalue(const ComplexMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

} // namespace

DensityMatrix fock_state(int dim, int n) {
    if (n < 0 || n >= dim) throw ConfigError("Fock index outside the basis");
    DensityMatrix s;
    s.rho = ComplexMatrix::Zero(dim, dim);
    s.rho(n, n) = 1.0;
    return s;
}

DensityMatrix coherent_state(int dim, std::complex<double> alpha) {
    Eigen::VectorXcd v(dim);
    const double mod2 = std::norm(alpha);
    std::complex<double> term = std::exp(-0.5 * mod2);
    for (int n = 0; n < dim; ++n) {
        if (n > 0) term *= alpha / std::sqrt(static_cast<double>(n));
        v(n) = term;
    }
    const double tail = 1.0 - v.squaredNorm();
    if (tail > 1e-10) {
        std::ostringstream os;
        os << "coherent state |alpha|=" << std::abs(alpha) << " loses " << tail
           << " weight beyond n_basis=" << dim;
        throw TruncationError(os.str());
    }
    v.normalize();
    DensityMatrix s;
    s.rho = v * v.adjoint();
    return s;
}

DensityMatrix coherent_state_at(int dim, double x_center, double p_center) {
    return coherent_state(dim, std::complex<double>(x_center, p_center) / std::sqrt(2.0));
}

DensityMatrix thermal_state(int dim, double nbar) {
    DensityMatrix s;
    s.rho = ComplexMatrix::Zero(dim, dim);
    const double ratio = nbar / (1.0 + nbar);
    double w = 1.0;
    double total = 0.0;
    for (int n = 0; n < dim; ++n) {
        s.rho(n, n) = w;
        total += w;
        w *= ratio;
    }
    s.rho /= total;
    return s;
}

DensityMatrix gibbs_state(const OperatorTable& ops, double theta) {
    const int n = ops.dim;
    RealVector weights = RealVector::Zero(n);
    if (theta <= 0.0) {
        weights(0) = 1.0;
    } else {
        const double e0 = ops.eigvals(0);
        for (int k = 0; k < n; ++k) weights(k) = std::exp(-(ops.eigvals(k) - e0) / theta);
        weights /= weights.sum();
    }
    const RealMatrix rho = ops.eigvecs * weights.asDiagonal() * ops.eigvecs.transpose();
    DensityMatrix s;
    s.rho = rho.cast<std::complex<double>>();
    return s;
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    const ComplexMatrix d = a - b;
    const ComplexMatrix h = 0.5 * (d + d.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double purity(const DensityMatrix& state) {
    return (state.rho * state.rho).trace().real();
}

double Trajectory::steady_amplitude(double t_from) const {
    double acc = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] + 1e-12 < t_from) continue;
        acc += std::sqrt(2.0) * std::abs(a_mean[k]);
        ++count;
    }
    if (count == 0) throw ConfigError("steady_amplitude: no samples after t_from");
    return acc / count;
}

double Trajectory::peak_amplitude(double t_from) const {
    double peak = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] + 1e-12 < t_from) continue;
        peak = std::max(peak, std::abs(x_mean[k]));
        any = true;
    }
    if (!any) throw ConfigError("peak_amplitude: no samples after t_from");
    return peak;
}

Propagator::Propagator(const OscillatorParams& params, const OperatorTable& ops,
                       const DissipatorTable& diss, PropagatorTolerances tol)
    : params_(params), ops_(ops), liouvillian_(ops, diss), tol_(tol),
      k1_(ops.dim), k2_(ops.dim), k3_(ops.dim), k4_(ops.dim), tmp_(ops.dim), base_(ops.dim),
      rot_(ops.dim) {}

double Propagator::drive_coefficient(double t) const {
    return 2.0 * params_.f0 * std::cos(params_.nu() * t);
}

double Propagator::default_dt(int steps_per_period) const {
    return params_.drive_period() / steps_per_period;
}

void Propagator::set_phase_step(double h) const {
    if (h == phase_step_) return;
    const RealVector& e = liouvillian_.energies();
    const int n = static_cast<int>(e.size());
    phase_cos_.resize(n, n);
    phase_sin_.resize(n, n);
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) {
            const double angle = (e(r) - e(c)) * h;
            phase_cos_(r, c) = std::cos(angle);
            phase_sin_(r, c) = std::sin(angle);
        }
    }
    phase_step_ = h;
}

void Propagator::rotate(const kernels::SplitMatrix& in, kernels::SplitMatrix& out) const {
    // (re + i im)(cos - i sin)
    out.re = phase_cos_.cwiseProduct(in.re) + phase_sin_.cwiseProduct(in.im);
    out.im = phase_cos_.cwiseProduct(in.im) - phase_sin_.cwiseProduct(in.re);
}

void Propagator::rk4(kernels::SplitMatrix& rho, double t, double dt) const {
    const double half = 0.5 * dt;
    const double g0 = drive_coefficient(t);
    const double gh = drive_coefficient(t + half);
    const double g1 = drive_coefficient(t + dt);
    set_phase_step(half);

    // k_i are evaluated on the interaction-picture stages mapped back to the
    // lab frame; E = exp(-i(E_a - E_b) dt/2) element-wise.
    liouvillian_.apply(g0, rho, k1_, false);
    rotate(rho, base_);            // E rho
    rotate(k1_, rot_);             // E k1
    tmp_.re = base_.re + half * rot_.re;
    tmp_.im = base_.im + half * rot_.im;
    liouvillian_.apply(gh, tmp_, k2_, false);
    tmp_.re = base_.re + half * k2_.re;
    tmp_.im = base_.im + half * k2_.im;
    liouvillian_.apply(gh, tmp_, k3_, false);

    // accumulate E rho + dt/6 (E k1 + 2 k2 + 2 k3) before the second rotation
    const double w = dt / 6.0;
    tmp_.re = base_.re + w * (rot_.re + 2.0 * k2_.re + 2.0 * k3_.re);
    tmp_.im = base_.im + w * (rot_.im + 2.0 * k2_.im + 2.0 * k3_.im);

    rotate(base_, rho);            // E^2 rho, now free to reuse rho as stage storage
    rotate(k3_, rot_);             // E k3
    base_.re = rho.re + dt * rot_.re;
    base_.im = rho.im + dt * rot_.im;
    liouvillian_.apply(g1, base_, k4_, false);

    rotate(tmp_, rho);
    rho.re += w * k4_.re;
    rho.im += w * k4_.im;
}

DensityMatrix Propagator::step(const DensityMatrix& state, double dt) const {
    if (!(dt > 0.0)) throw ConfigError("step: dt must be > 0");
    kernels::SplitMatrix rho(ops_.to_eigen(0.5 * (state.rho + state.rho.adjoint())));
    rk4(rho, state.t, dt);
    symmetrize(rho);
    DensityMatrix next;
    next.rho = ops_.to_fock(rho.complex());
    next.t = state.t + dt;
    const double drift = std::abs(next.rho.trace().real() - 1.0);
    if (drift > tol_.trace) throw InstabilityError("trace drift " + std::to_string(drift), next.t);
    return next;
}

Trajectory Propagator::evolve(const DensityMatrix& initial, double t_end, const SamplingPlan& plan,
                              const std::vector<ComplexMatrix>& extra_observables) const {
    if (!(t_end > initial.t)) throw ConfigError("evolve: t_end must exceed the initial time");
    if (plan.steps_per_period <= 0 || plan.sample_stride <= 0)
        throw ConfigError("evolve: steps_per_period and sample_stride must be > 0");
    const int n = ops_.dim;
    const double dt = default_dt(plan.steps_per_period);

    std::vector<double> snaps = plan.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::remove_if(snaps.begin(), snaps.end(),
                               [&](double s) { return s < initial.t || s > t_end + 1e-12; }),
                snaps.end());

    const ComplexMatrix x_e = ops_.to_eigen(ops_.x);
    const ComplexMatrix p_e = ops_.to_eigen(ops_.p);
    const ComplexMatrix a_e = ops_.to_eigen(ops_.a);
    ComplexMatrix h_e = ComplexMatrix::Zero(n, n);
    h_e.diagonal() = ops_.eigvals.cast<std::complex<double>>();
    ComplexMatrix top = ComplexMatrix::Zero(n, n);
    const int levels = std::clamp(plan.leakage_levels, 0, n);
    for (int k = n - levels; k < n; ++k) top(k, k) = 1.0;
    const ComplexMatrix top_e = ops_.to_eigen(top);
    std::vector<ComplexMatrix> extra_e;
    for (const auto& op : extra_observables) extra_e.push_back(ops_.to_eigen(op));

    Trajectory traj;
    traj.extra.resize(extra_e.size());
    traj.min_eigenvalue = 1.0;

    kernels::SplitMatrix rho(ops_.to_eigen(0.5 * (initial.rho + initial.rho.adjoint())));
    double t = initial.t;

    auto record = [&]() {
        if (!traj.t.empty() && t <= traj.t.back()) return;
        traj.t.push_back(t);
        traj.x_mean.push_back(expectation(x_e, rho).real());
        traj.p_mean.push_back(expectation(p_e, rho).real());
        traj.a_mean.push_back(expectation(a_e, rho));
        traj.energy.push_back(expectation(h_e, rho).real());
        traj.purity.push_back(split_purity(rho));
        const double leak = expectation(top_e, rho).real();
        traj.leakage.push_back(leak);
        traj.max_leakage = std::max(traj.max_leakage, leak);
        for (std::size_t k = 0; k < extra_e.size(); ++k)
            traj.extra[k].push_back(expectation(extra_e[k], rho).real());
    };

    const double slip_end = initial.t + tol_.slip_periods * params_.drive_period();
    traj.min_eigenvalue_after_slip = 0.0;
    auto check_positivity = [&]() {
        const double lo = smallest_eigenvalue(rho.complex());
        traj.min_eigenvalue = std::min(traj.min_eigenvalue, lo);
        const bool in_slip = t < slip_end;
        if (!in_slip) traj.min_eigenvalue_after_slip = std::min(traj.min_eigenvalue_after_slip, lo);
        if (lo < -(in_slip ? tol_.slip_positivity : tol_.positivity))
            throw InstabilityError("negative eigenvalue " + std::to_string(lo), t);
    };

    record();
    check_positivity();

    const long monitor_stride = static_cast<long>(plan.steps_per_period) *
                                std::max(1, plan.monitor_every_periods);
    std::size_t next_snap = 0;
    long steps = 0;
    while (t < t_end - 1e-12) {
        double h = std::min(dt, t_end - t);
        bool landing = false;
        if (next_snap < snaps.size() && t + h >= snaps[next_snap] - 1e-12) {
            h = snaps[next_snap] - t;
            landing = true;
        }
        if (h > 1e-14) {
            rk4(rho, t, h);
            symmetrize(rho);
            t += h;
            ++steps;
        }
        if (landing) t = snaps[next_snap];

        const double drift = std::abs(trace_of(rho) - 1.0);
        traj.max_trace_drift = std::max(traj.max_trace_drift, drift);
        if (drift > tol_.trace) throw InstabilityError("trace drift " + std::to_string(drift), t);

        if (steps % plan.sample_stride == 0 || t >= t_end - 1e-12) record();
        if (steps % monitor_stride == 0) check_positivity();
        while (landing && next_snap < snaps.size() && snaps[next_snap] <= t + 1e-12) {
            DensityMatrix snap;
            snap.rho = ops_.to_fock(rho.complex());
            snap.t = t;
            traj.snapshots.push_back(std::move(snap));
            ++next_snap;
        }
    }
    check_positivity();
    if (traj.min_eigenvalue < -tol_.positivity) {
        std::ostringstream os;
        os << "initial-slip negativity " << traj.min_eigenvalue << " within the first "
           << tol_.slip_periods << " periods";
        traj.warnings.push_back(os.str());
    }
    if (traj.max_leakage > tol_.leakage_warn) {
        std::ostringstream os;
        os << "top-" << levels << " Fock population reached " << traj.max_leakage;
        traj.warnings.push_back(os.str());
    }
    return traj;
}

} // namespace duffing
