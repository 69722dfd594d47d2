#include "duffing/rwa.hpp"

#include "duffing/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

namespace duffing {

double RwaFrame::discriminant() const noexcept {
    const double a = linear_coefficient();
    const double b = constant_coefficient();
    return (b / 2.0) * (b / 2.0) - std::pow(a / 3.0, 3);
}

double RwaFrame::critical_drive() const noexcept {
    // (f/3g)^2 = (a/3)^3
    return 3.0 * quartic * std::pow(linear_coefficient() / 3.0, 1.5);
}

double RwaFrame::quasienergy(double x, double p) const noexcept {
    const double e = 0.5 * (x * x + p * p);
    return detuning() * e - 1.5 * quartic * e * e + drive * x;
}

RwaFrame nominal_frame(const OscillatorParams& params) {
    RwaFrame f;
    f.mass_tilde = 1.0 / params.delta;
    f.omega_tilde = params.delta;
    f.quartic = params.quartic();
    f.drive = params.f0;
    return f;
}

RwaFrame renormalized_frame(const OscillatorParams& params) {
    const double w = std::sqrt(1.0 + 2.0 * params.counterterm());
    const double d = w - params.nu();
    RwaFrame f;
    f.mass_tilde = 1.0 / d;
    f.omega_tilde = d;
    f.quartic = params.quartic() / (w * w);
    f.drive = params.f0 / std::sqrt(w);
    f.coordinate_scale = 1.0 / std::sqrt(w);
    f.drive_scale = std::sqrt(w);
    return f;
}

RwaFrame with_drive(RwaFrame frame, double lab_drive) {
    frame.drive = lab_drive / frame.drive_scale;
    return frame;
}

double critical_drive(const OscillatorParams& params) {
    return 2.0 * std::numbers::sqrt2 / 9.0 * std::sqrt(params.aleph / params.gamma_tilde) *
           std::pow(params.delta, 1.5);
}

const FixedPoint* FixedPoints::find(Attractor label) const noexcept {
    for (const auto& r : roots)
        if (r.label == label) return &r;
    return nullptr;
}

FixedPoints fixed_points(const RwaFrame& frame) {
    FixedPoints out;
    std::vector<double> xs;
    if (!(frame.quartic > 0.0)) {
        // harmonic limit: d x + f = 0
        out.discriminant = std::numeric_limits<double>::infinity();
        xs.push_back(-frame.drive / frame.detuning());
    } else {
        const double a = frame.linear_coefficient();
        const double b = frame.constant_coefficient();
        out.discriminant = frame.discriminant();
        if (out.discriminant < 0.0) {
            const double r = 2.0 * std::sqrt(a / 3.0);
            const double c = std::clamp((b / 2.0) / std::pow(a / 3.0, 1.5), -1.0, 1.0);
            const double phi = std::acos(c);
            for (int k = 0; k < 3; ++k)
                xs.push_back(r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0));
        } else {
            const double s = std::sqrt(out.discriminant);
            xs.push_back(std::cbrt(b / 2.0 + s) + std::cbrt(b / 2.0 - s));
        }
    }
    std::sort(xs.begin(), xs.end());
    for (double x : xs) out.roots.push_back({x * frame.coordinate_scale, Attractor::Single});
    if (out.roots.size() == 3) {
        std::vector<std::size_t> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return std::abs(out.roots[i].x) < std::abs(out.roots[j].x);
        });
        out.roots[order[0]].label = Attractor::Small;
        out.roots[order[1]].label = Attractor::Unstable;
        out.roots[order[2]].label = Attractor::Large;
    }
    return out;
}

FixedPoints fixed_points(const OscillatorParams& params) {
    return fixed_points(nominal_frame(params));
}

double largest_root_closed_form(const RwaFrame& frame) {
    const double fc = frame.critical_drive();
    const double theta = frame.drive > 0.0
                             ? std::atan(std::sqrt(std::max(0.0, (fc / frame.drive) * (fc / frame.drive) - 1.0)))
                             : 0.5 * std::numbers::pi;
    return 2.0 * std::cbrt(fc / (3.0 * frame.quartic)) * std::cos(theta / 3.0);
}

DetuningWindow detuning_window(const OscillatorParams& params, double quality) {
    if (!(quality > 0.0)) throw ConfigError("quality factor must be > 0");
    if (!(params.gamma_tilde > 0.0)) throw ConfigError("detuning window needs gamma_tilde > 0");
    DetuningWindow w;
    w.delta_min = std::sqrt(3.0) / (2.0 * quality);
    // extended precision so gamma_tilde = 1/24 gives 9/32 to the last bit
    const double root = static_cast<double>(std::cbrt(3.0L * static_cast<long double>(params.gamma_tilde)));
    w.delta_max = 9.0 / (64.0 * root);
    if (w.delta_min >= w.delta_max) {
        std::ostringstream os;
        os << "empty detuning window: delta_min=" << w.delta_min << " >= delta_max=" << w.delta_max;
        throw ConfigError(os.str());
    }
    return w;
}

ComplexMatrix rwa_quasienergy(const OperatorTable& ops, const RwaFrame& frame) {
    const int n = ops.dim;
    ComplexMatrix h = ComplexMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double e = k + 0.5;
        h(k, k) = frame.detuning() * e - 1.5 * frame.quartic * e * e;
    }
    h += frame.drive * ops.x;
    return h;
}

ComplexMatrix rwa_quasienergy(const OperatorTable& ops, const OscillatorParams& params) {
    return rwa_quasienergy(ops, nominal_frame(params));
}

namespace {

struct ClassicalRhs {
    double stiffness;
    double cubic;
    double kappa;
    double f0;
    double nu;

    void operator()(double t, double x, double v, double& dx, double& dv) const {
        dx = v;
        dv = -stiffness * x + cubic * x * x * x - kappa * v - 2.0 * f0 * std::cos(nu * t);
    }
};

} // namespace

ClassicalRun integrate_classical(const OscillatorParams& params, ClassicalState start,
                                 const ClassicalOptions& options) {
    if (options.steps_per_period <= 0 || options.measure_periods <= 0 || options.settle_periods < 0)
        throw ConfigError("classical integration needs positive step and period counts");
    const double c = options.include_counterterm ? params.counterterm() : 0.0;
    const ClassicalRhs rhs{1.0 + 2.0 * c, 4.0 * params.quartic(), params.kappa, params.f0, params.nu()};
    const double dt = params.drive_period() / options.steps_per_period;
    const double barrier = params.gamma_tilde > 0.0 ? params.barrier_position()
                                                    : std::numeric_limits<double>::infinity();
    const long settle = static_cast<long>(options.settle_periods) * options.steps_per_period;
    const long total = settle + static_cast<long>(options.measure_periods) * options.steps_per_period;

    double x = start.x;
    double v = start.v;
    std::complex<double> harmonic = 0.0;
    double peak = 0.0;
    for (long k = 0; k < total; ++k) {
        const double t = k * dt;
        if (k >= settle) {
            harmonic += x * std::exp(std::complex<double>(0.0, params.nu() * t));
            peak = std::max(peak, std::abs(x));
        }
        double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
        rhs(t, x, v, k1x, k1v);
        rhs(t + 0.5 * dt, x + 0.5 * dt * k1x, v + 0.5 * dt * k1v, k2x, k2v);
        rhs(t + 0.5 * dt, x + 0.5 * dt * k2x, v + 0.5 * dt * k2v, k3x, k3v);
        rhs(t + dt, x + dt * k3x, v + dt * k3v, k4x, k4v);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!std::isfinite(x) || std::abs(x) > barrier) {
            std::ostringstream os;
            os << "classical trajectory crossed the barrier at f0=" << params.f0 << " (t=" << t << ")";
            throw DivergenceError(os.str());
        }
    }
    const long measured = total - settle;
    ClassicalRun run;
    run.end = {x, v};
    run.amplitude = 2.0 * std::abs(harmonic) / static_cast<double>(measured);
    run.peak = peak;
    return run;
}

std::vector<AmplitudePoint> classical_sweep(const OscillatorParams& params,
                                            std::span<const double> f0_grid,
                                            SweepDirection direction,
                                            const ClassicalOptions& options) {
    std::vector<double> grid(f0_grid.begin(), f0_grid.end());
    std::sort(grid.begin(), grid.end());
    if (direction == SweepDirection::Down) std::reverse(grid.begin(), grid.end());

    std::vector<AmplitudePoint> out;
    ClassicalState state;
    bool diverged = false;
    for (double f0 : grid) {
        if (diverged) {
            out.push_back({f0, 0.0, 0.0, true});
            continue;
        }
        OscillatorParams p = params;
        p.f0 = f0;
        try {
            const ClassicalRun run = integrate_classical(p, state, options);
            state = run.end;
            out.push_back({f0, run.amplitude, run.peak, false});
        } catch (const DivergenceError&) {
            diverged = true;
            out.push_back({f0, 0.0, 0.0, true});
        }
    }
    return out;
}

} // namespace duffing
