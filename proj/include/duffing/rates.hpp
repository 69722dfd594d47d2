// rates.hpp — SAS/LAS populations, escape-stage detection, three-point rate
// extraction and the scaling fit of the escape rate.

#pragma once

#include "duffing/params.hpp"
#include "duffing/propagator.hpp"
#include "duffing/wigner.hpp"

#include <span>
#include <string>
#include <vector>

namespace duffing {

// Disk of radius r_star about the origin of rotating-frame phase space; the
// inside is the SAS basin.
struct BasinPartition {
    double r_star{0.0};
    double r_sas{0.0};
    double r_las{0.0};
};

// Radii of the three roots of the renormalized frame (oscillator units).
// ConfigError when the drive leaves a single root.
BasinPartition basin_partition(const OscillatorParams& params);

struct Populations {
    double p1{1.0};
    double p2{0.0};
    double raw_p1{1.0};        // before clamping
    double ring_mass{0.0};     // Wigner mass with |r - r*| < 0.1 r*
    bool clamped{false};
};

// Integrates the rotating-frame Wigner field inside and outside r*.  Throws
// OverlapError when ring_mass exceeds max_ring_mass.
Populations populations(const DensityMatrix& state, const BasinPartition& partition, double nu,
                        const PhaseGrid& grid, double max_ring_mass = 0.1);

// w_n = (-1)^n int_0^{r^2} e^{-u} L_n(2u) du, the Wigner mass of |n><n| inside
// radius r.  A disk about the origin only sees the Fock diagonal, so
// P_inside = sum_n rho_nn w_n independent of frame.
std::vector<double> inner_weights(int dim, double radius);

// Same decomposition through inner_weights; no grid.
Populations radial_populations(const DensityMatrix& state, const BasinPartition& partition,
                               double max_ring_mass = 0.1);

// Precomputed weights for repeated radial_populations calls.
class RadialPartition {
public:
    RadialPartition(int dim, const BasinPartition& partition, double max_ring_mass = 0.1);
    Populations operator()(const ComplexMatrix& rho) const;
    const std::vector<double>& inside() const noexcept { return inside_; }
    const BasinPartition& partition() const noexcept { return partition_; }

private:
    BasinPartition partition_;
    double max_ring_mass_;
    std::vector<double> inside_, ring_outer_, ring_inner_;
};

struct PopulationSeries {
    std::vector<double> t;
    std::vector<double> p1;
    std::vector<double> p2;
    double t_q{0.0};

    // Linear interpolation of P2.
    double p2_at(double time) const;
    // Mean of the interpolated P2 over [time, time + window].
    double p2_mean(double time, double window) const;
};

struct StageOptions {
    double period{1.0};
    double smoothing_periods{5.0};
    double max_relative_variation{0.2}; // per period
    double noise_floor{1e-4};
};

// Quench end: earliest t after which the slope of P2 (least-squares over a
// window of smoothing_periods) stays positive and varies by less than
// max_relative_variation per period.  NoEscapeError when P2 never rises
// beyond the noise floor or the condition never settles.
double detect_stages(const PopulationSeries& series, const StageOptions& options);

struct RateRecord {
    double eta{0.0};
    double kappa1{0.0};
    double kappa2{0.0};
    double K{0.0};
    double residual{0.0};
    double theta{0.0};
    double f0{0.0};
    double fc{0.0};
    double t1{0.0};
    double dt{0.0};
    double shift_variation{0.0}; // relative change of kappa1 on re-extraction
    double ring_mass{0.0};       // largest Wigner mass near r* over the run
    bool excluded{false};
    std::string note;
};

// Three-point formulas on P2 values at t1, t1+dt, t1+2dt.  NonExponentialError
// unless 1 < K < 2.
RateRecord extract_rates(double p2_t1, double p2_t2, double p2_t3, double dt);

// Same on a series via interpolation; fills t1, dt and the RMS residual of the
// two-state solution over [t1, t1 + 2dt].  With window > 0 every P2 value is
// the mean over [t, t + window]; a two-state exponential stays a two-state
// exponential with the same rates under this averaging.
RateRecord extract_rates(const PopulationSeries& series, double t1, double dt, double window = 0.0);

// P2(t) of the two-state rate process.
double two_state_p2(double kappa1, double kappa2, double p2_initial, double t);

struct ScalingFit {
    double alpha{1.0};
    double slope{0.0};        // c/lambda of ln k1 = ln C - slope eta^alpha
    double ln_c{0.0};
    double r_squared{0.0};
    double linear_slope{0.0}; // alpha fixed to 1
    double linear_ln_c{0.0};
    double linear_r_squared{0.0};
    std::size_t points{0};
    std::vector<std::string> warnings;
};

// Least-squares fit of ln k1 = ln C - s eta^alpha: for each alpha the pair
// (ln C, s) is a linear problem, so alpha is found by a bracketed 1-D search of
// the profiled residual.  InsufficientSpanError below 4 usable records or an
// eta span under a factor of 2.
ScalingFit scaling_fit(std::span<const RateRecord> records);

struct ExponentialFit {
    double asymptote{0.0};
    double amplitude{0.0};
    double rate{0.0};
    double r_squared{0.0};
};

// y = A + B exp(-rate (t - t.front())) by the same profiling on rate.
ExponentialFit fit_single_exponential(std::span<const double> t, std::span<const double> y);

struct BasinComponent {
    DensityMatrix state; // normalized
    double weight{0.0};
};

// Splits rho over its eigenvectors, assigning each to the basin holding most of
// its Wigner mass; returns the normalized SAS part.
BasinComponent sas_component(const DensityMatrix& state, const BasinPartition& partition);
BasinComponent las_component(const DensityMatrix& state, const BasinPartition& partition);

} // namespace duffing
