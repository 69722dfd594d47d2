#include "duffing/params.hpp"

#include "duffing/errors.hpp"

#include <cmath>
#include <sstream>

namespace duffing {

namespace {

// CODATA 2018 exact values.
constexpr double kHbar = 1.054571817e-34;
constexpr double kElementaryCharge = 1.602176634e-19;
constexpr double kBoltzmann = 1.380649e-23;

void require(bool condition, const char* message) {
    if (!condition) throw ConfigError(message);
}

} // namespace

double OscillatorParams::barrier_position() const noexcept {
    return std::sqrt(aleph / (4.0 * gamma_tilde));
}

void validate(const OscillatorParams& p) {
    require(std::isfinite(p.aleph) && p.aleph > 0.0, "aleph must be > 0");
    require(std::isfinite(p.gamma_tilde) && p.gamma_tilde >= 0.0, "gamma_tilde must be >= 0");
    require(p.delta > 0.0 && p.delta < 1.0, "delta must lie in (0, 1)");
    require(std::isfinite(p.f0) && p.f0 >= 0.0, "f0 must be >= 0");
    require(std::isfinite(p.kappa) && p.kappa >= 0.0, "kappa must be >= 0");
    require(std::isfinite(p.theta) && p.theta >= 0.0, "theta must be >= 0");
    require(p.omega_c > 1.0, "omega_c must be > 1");
    require(p.n_basis >= 2, "n_basis must be >= 2");
    if (p.gamma_tilde > 0.0) {
        const double needed = 1.5 * p.bound_state_estimate();
        if (p.n_basis < needed) {
            std::ostringstream os;
            os << "n_basis=" << p.n_basis << " does not cover the well: need >= " << needed
               << " (1.5 x bound-state estimate " << p.bound_state_estimate() << ")";
            throw TruncationError(os.str());
        }
    }
}

double plasma_temperature(double critical_current, double capacitance) {
    const double omega = std::sqrt(2.0 * kElementaryCharge * critical_current / (kHbar * capacitance));
    return kHbar * omega / kBoltzmann;
}

OscillatorParams dimensionless_from_si(double critical_current, double capacitance,
                                       double kappa_ratio, double omega_c_ratio,
                                       double temperature) {
    require(critical_current > 0.0 && capacitance > 0.0, "junction parameters must be > 0");
    require(temperature >= 0.0, "temperature must be >= 0");
    const double flux = kHbar / (2.0 * kElementaryCharge);
    const double mass = flux * flux * capacitance;
    const double omega = std::sqrt(2.0 * kElementaryCharge * critical_current / (kHbar * capacitance));

    OscillatorParams p;
    p.aleph = mass * omega / kHbar;
    p.gamma_tilde = 1.0 / 24.0;
    p.kappa = kappa_ratio;
    p.omega_c = omega_c_ratio;
    p.theta = kBoltzmann * temperature / (kHbar * omega);
    return p;
}

double reference_theta(double temperature) {
    return temperature / plasma_temperature(kReferenceCriticalCurrent, kReferenceCapacitance);
}

OscillatorParams paper_mesoscopic() {
    OscillatorParams p;
    p.aleph = 12.0;
    p.gamma_tilde = 1.0 / 24.0;
    p.delta = 0.06;
    p.kappa = 0.01;
    p.omega_c = 10.0;
    p.theta = reference_theta(5e-3);
    p.n_basis = 40;
    p.f0 = 0.0;
    return p;
}

} // namespace duffing
