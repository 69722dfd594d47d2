// propagator.hpp — fixed-step RK4 integration of the master equation.

#pragma once

#include "duffing/bath.hpp"
#include "duffing/kernels.hpp"
#include "duffing/operators.hpp"
#include "duffing/params.hpp"

#include <complex>
#include <string>
#include <vector>

namespace duffing {

// Fock-basis density matrix at time t.
struct DensityMatrix {
    ComplexMatrix rho;
    double t{0.0};

    int dim() const noexcept { return static_cast<int>(rho.rows()); }
    std::complex<double> trace() const { return rho.trace(); }
};

DensityMatrix fock_state(int dim, int n);

// Truncated coherent state |alpha><alpha|, renormalized.  Throws
// TruncationError when the weight beyond the basis exceeds 1e-10.
DensityMatrix coherent_state(int dim, std::complex<double> alpha);

// Coherent state with <x> = x_center, <p> = p_center.
DensityMatrix coherent_state_at(int dim, double x_center, double p_center = 0.0);

// Thermal state of a harmonic oscillator with mean occupation nbar.
DensityMatrix thermal_state(int dim, double nbar);

// exp(-h_static/theta)/Z in the truncated basis; theta = 0 gives the ground state.
DensityMatrix gibbs_state(const OperatorTable& ops, double theta);

// sum |eigenvalues of (a - b)| / 2
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

// Tr rho^2
double purity(const DensityMatrix& state);

struct SamplingPlan {
    int steps_per_period{200};
    int sample_stride{10};               // record observables every this many steps
    std::vector<double> snapshot_times;  // landed on exactly
    int monitor_every_periods{1};        // positivity / hermiticity checks
    int leakage_levels{5};
};

// Observables along a trajectory; `extra` holds Tr[A rho] for the operators
// passed to Propagator::evolve, one column per operator.
struct Trajectory {
    std::vector<double> t;
    std::vector<double> x_mean;
    std::vector<double> p_mean;
    std::vector<std::complex<double>> a_mean;
    std::vector<double> energy;
    std::vector<double> purity;
    std::vector<double> leakage;
    std::vector<std::vector<double>> extra;
    std::vector<DensityMatrix> snapshots;

    double max_trace_drift{0.0};
    double max_leakage{0.0};
    double min_eigenvalue{0.0};
    double min_eigenvalue_after_slip{0.0}; // 0 when the run is shorter than the slip window
    std::vector<std::string> warnings;

    // First-harmonic oscillation amplitude sqrt2 |<a>| averaged over samples
    // with t >= t_from.
    double steady_amplitude(double t_from) const;
    // max |x_mean| over samples with t >= t_from.
    double peak_amplitude(double t_from) const;
};

struct PropagatorTolerances {
    double trace{1e-6};        // |Tr rho - 1| per step
    double hermiticity{1e-10};
    double positivity{1e-6};   // smallest eigenvalue >= -positivity
    // The non-secular Redfield generator is not completely positive: a pure
    // initial state picks up negative eigenvalues of order kappa during the
    // first few periods (initial slip), which then decay.  Within
    // slip_periods of the start the bound is slip_positivity instead.
    double slip_positivity{1e-3};
    double slip_periods{60.0};
    double leakage_warn{1e-4};
};

// Binds the operator and dissipator tables of one parameter set.  evolve()
// integrates in the eigenbasis of h_static; step() is the Fock-basis entry point.
class Propagator {
public:
    Propagator(const OscillatorParams& params, const OperatorTable& ops,
               const DissipatorTable& diss, PropagatorTolerances tol = {});

    const OscillatorParams& params() const noexcept { return params_; }
    double drive_coefficient(double t) const;
    double default_dt(int steps_per_period = 200) const;

    // One integrating-factor RK4 step of size dt followed by (rho + rho^dag)/2.
    // The diagonal static phase exp(-i(E_a - E_b)t) is applied exactly and the
    // drive and dissipator go through the classical RK4 tableau (Lawson's
    // scheme), so the fast eigenbasis coherences carry no step error.
    DensityMatrix step(const DensityMatrix& state, double dt) const;

    // Integrate from initial.t to t_end.  Throws InstabilityError on trace or
    // positivity violation.
    Trajectory evolve(const DensityMatrix& initial, double t_end, const SamplingPlan& plan,
                      const std::vector<ComplexMatrix>& extra_observables = {}) const;

private:
    void rk4(kernels::SplitMatrix& rho, double t, double dt) const;
    // out = exp(-i(E_a - E_b) h) o in for h = phase_step_
    void rotate(const kernels::SplitMatrix& in, kernels::SplitMatrix& out) const;
    void set_phase_step(double h) const;

    OscillatorParams params_;
    OperatorTable ops_;
    kernels::EigenLiouvillian liouvillian_;
    PropagatorTolerances tol_;
    mutable kernels::SplitMatrix k1_, k2_, k3_, k4_, tmp_, base_, rot_;
    mutable double phase_step_{-1.0};
    mutable RealMatrix phase_cos_, phase_sin_;
};

} // namespace duffing
