#include "duffing/rates.hpp"

#include "duffing/errors.hpp"
#include "duffing/rwa.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace duffing {

BasinPartition basin_partition(const OscillatorParams& params) {
    const FixedPoints fp = fixed_points(renormalized_frame(params));
    const FixedPoint* sas = fp.find(Attractor::Small);
    const FixedPoint* mid = fp.find(Attractor::Unstable);
    const FixedPoint* las = fp.find(Attractor::Large);
    if (!sas || !mid || !las)
        throw ConfigError("basin partition needs three fixed points; drive is past the bifurcation");
    return BasinPartition{std::abs(mid->x), std::abs(sas->x), std::abs(las->x)};
}

Populations populations(const DensityMatrix& state, const BasinPartition& partition, double nu,
                        const PhaseGrid& grid, double max_ring_mass) {
    const WignerField field = wigner(state, grid, Frame::Rotating, nu, true);
    const double r2 = partition.r_star * partition.r_star;
    const double ring_lo = 0.81 * r2;
    const double ring_hi = 1.21 * r2;
    double inside = 0.0;
    double total = 0.0;
    double ring = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
        const double x = grid.x(i);
        for (int j = 0; j < grid.np; ++j) {
            const double p = grid.p(j);
            const double rr = x * x + p * p;
            const double w = field.at(i, j);
            total += w;
            if (rr < r2) inside += w;
            if (rr > ring_lo && rr < ring_hi) ring += w;
        }
    }
    const double area = grid.dx() * grid.dp();
    Populations out;
    out.raw_p1 = inside * area;
    out.ring_mass = ring * area;
    (void)total;
    if (out.ring_mass > max_ring_mass) {
        std::ostringstream os;
        os << "basins not separated: Wigner mass " << out.ring_mass << " near r* = "
           << partition.r_star;
        throw OverlapError(os.str());
    }
    out.clamped = out.raw_p1 < 0.0 || out.raw_p1 > 1.0;
    out.p1 = std::clamp(out.raw_p1, 0.0, 1.0);
    out.p2 = 1.0 - out.p1;
    return out;
}

std::vector<double> inner_weights(int dim, double radius) {
    std::vector<double> w(dim, 0.0);
    if (radius <= 0.0) return w;
    const double upper = radius * radius;
    const int intervals = std::max(4000, 400 * dim);
    const double h = upper / intervals;
    std::vector<double> lag(dim);
    for (int s = 0; s <= intervals; ++s) {
        const double u = s * h;
        const double x = 2.0 * u;
        const double weight = (s == 0 || s == intervals) ? 1.0 : (s % 2 ? 4.0 : 2.0);
        const double damp = std::exp(-u);
        lag[0] = 1.0;
        if (dim > 1) lag[1] = 1.0 - x;
        for (int k = 1; k + 1 < dim; ++k)
            lag[k + 1] = ((2.0 * k + 1.0 - x) * lag[k] - k * lag[k - 1]) / (k + 1.0);
        for (int n = 0; n < dim; ++n) w[n] += weight * damp * lag[n];
    }
    for (int n = 0; n < dim; ++n) w[n] *= (n % 2 ? -1.0 : 1.0) * h / 3.0;
    return w;
}

RadialPartition::RadialPartition(int dim, const BasinPartition& partition, double max_ring_mass)
    : partition_(partition),
      max_ring_mass_(max_ring_mass),
      inside_(inner_weights(dim, partition.r_star)),
      ring_outer_(inner_weights(dim, 1.1 * partition.r_star)),
      ring_inner_(inner_weights(dim, 0.9 * partition.r_star)) {}

Populations RadialPartition::operator()(const ComplexMatrix& rho) const {
    const int n = static_cast<int>(rho.rows());
    double inside = 0.0;
    double ring = 0.0;
    for (int k = 0; k < n; ++k) {
        const double d = rho(k, k).real();
        inside += d * inside_[k];
        ring += d * (ring_outer_[k] - ring_inner_[k]);
    }
    Populations out;
    out.raw_p1 = inside;
    out.ring_mass = ring;
    if (ring > max_ring_mass_) {
        std::ostringstream os;
        os << "basins not separated: Wigner mass " << ring << " near r* = " << partition_.r_star;
        throw OverlapError(os.str());
    }
    out.clamped = inside < 0.0 || inside > 1.0;
    out.p1 = std::clamp(inside, 0.0, 1.0);
    out.p2 = 1.0 - out.p1;
    return out;
}

Populations radial_populations(const DensityMatrix& state, const BasinPartition& partition,
                               double max_ring_mass) {
    return RadialPartition(state.dim(), partition, max_ring_mass)(state.rho);
}

double PopulationSeries::p2_at(double time) const {
    if (t.empty()) throw ConfigError("empty population series");
    if (time <= t.front()) return p2.front();
    if (time >= t.back()) return p2.back();
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const std::size_t hi = static_cast<std::size_t>(it - t.begin());
    const std::size_t lo = hi - 1;
    const double s = (time - t[lo]) / (t[hi] - t[lo]);
    return p2[lo] + s * (p2[hi] - p2[lo]);
}

double PopulationSeries::p2_mean(double time, double window) const {
    if (!(window > 0.0)) return p2_at(time);
    if (t.empty()) throw ConfigError("empty population series");
    const double a = time;
    const double b = time + window;
    // exact integral of the piecewise-linear interpolant, constant beyond the ends
    double sum = 0.0;
    auto segment = [&](double lo, double hi) {
        if (hi > lo) sum += 0.5 * (p2_at(lo) + p2_at(hi)) * (hi - lo);
    };
    double cursor = a;
    auto it = std::upper_bound(t.begin(), t.end(), a);
    for (; it != t.end() && *it < b; ++it) {
        segment(cursor, *it);
        cursor = *it;
    }
    segment(cursor, b);
    return sum / window;
}

double detect_stages(const PopulationSeries& series, const StageOptions& options) {
    const std::size_t n = series.t.size();
    if (n < 3 || series.p2.size() != n) throw ConfigError("population series too short");
    const double span = series.t.back() - series.t.front();
    if (span < 50.0 * options.period)
        throw ConfigError("population series must span at least 50 drive periods");

    // P2 breathes at twice the drive frequency; a one-period running mean over
    // [t_k, t_k + T) removes it before the slope is taken
    std::vector<double> mean;
    {
        std::size_t hi = 0;
        double sum = 0.0;
        for (std::size_t k = 0; k < n && series.t[k] + options.period <= series.t.back() + 1e-9; ++k) {
            if (k > 0) sum -= series.p2[k - 1];
            while (hi < n && series.t[hi] < series.t[k] + options.period - 1e-9) sum += series.p2[hi++];
            mean.push_back(sum / static_cast<double>(hi - k));
        }
    }
    const std::size_t na = mean.size();

    double running_min = mean.front();
    double growth = 0.0;
    for (double v : mean) {
        running_min = std::min(running_min, v);
        growth = std::max(growth, v - running_min);
    }
    if (growth < options.noise_floor)
        throw NoEscapeError("P2 never rises above the noise floor");

    // least-squares slope of the running mean over [t_k, t_k + w]
    const double w = options.smoothing_periods * options.period;
    std::vector<double> slope;
    std::size_t end = 0;
    for (std::size_t k = 0; k < na && series.t[k] + w <= series.t[na - 1] + 1e-12; ++k) {
        while (end < na && series.t[end] <= series.t[k] + w + 1e-12) ++end;
        double st = 0, sy = 0, stt = 0, sty = 0;
        const double m = static_cast<double>(end - k);
        for (std::size_t j = k; j < end; ++j) {
            const double tt = series.t[j] - series.t[k];
            st += tt;
            sy += mean[j];
            stt += tt * tt;
            sty += tt * mean[j];
        }
        const double den = m * stt - st * st;
        slope.push_back(den > 0 ? (m * sty - st * sy) / den : 0.0);
    }
    const double quiet = options.noise_floor * 1e-3 / w;

    auto condition = [&](std::size_t k) {
        std::size_t k2 = k;
        while (k2 < slope.size() && series.t[k2] < series.t[k] + options.period - 1e-12) ++k2;
        if (k2 >= slope.size()) return true;
        if (std::abs(slope[k]) < quiet && std::abs(slope[k2]) < quiet) return true;
        if (slope[k] <= 0.0) return false;
        return std::abs(slope[k2] - slope[k]) < options.max_relative_variation * slope[k];
    };

    std::size_t settled = slope.size();
    for (std::size_t k = slope.size(); k-- > 0;) {
        if (!condition(k)) break;
        settled = k;
    }
    if (settled >= slope.size() ||
        series.t[settled] + 2.0 * options.period > series.t.back())
        throw NoEscapeError("no sustained escape stage in the series");
    // quiet windows pass the slope test, so require real growth after t_q
    if (mean.back() - mean[settled] < options.noise_floor)
        throw NoEscapeError("P2 does not grow after the quench");
    return series.t[settled];
}

double two_state_p2(double kappa1, double kappa2, double p2_initial, double t) {
    const double gamma = kappa1 + kappa2;
    if (gamma <= 0.0) return p2_initial;
    const double inf = kappa1 / gamma;
    return inf + (p2_initial - inf) * std::exp(-gamma * t);
}

RateRecord extract_rates(double p2_t1, double p2_t2, double p2_t3, double dt) {
    if (!(dt > 0.0)) throw ConfigError("extract_rates needs dt > 0");
    const double denom = p2_t2 - p2_t1;
    if (denom == 0.0) throw NonExponentialError("P2(t2) equals P2(t1)");
    RateRecord r;
    r.dt = dt;
    r.K = (p2_t3 - p2_t1) / denom;
    if (!(r.K > 1.0 && r.K < 2.0)) {
        std::ostringstream os;
        os << "three-point ratio K = " << r.K << " outside (1, 2)";
        throw NonExponentialError(os.str());
    }
    // q = exp(-(k1 + k2) dt) from successive differences; 1 - q and 1 - P_inf
    // are formed directly so that slow or one-sided processes keep full precision
    const double q = (p2_t3 - p2_t2) / denom;
    const double one_minus_q = (2.0 * p2_t2 - p2_t1 - p2_t3) / denom;
    const double log_q = one_minus_q < 0.5 ? std::log1p(-one_minus_q) : std::log(q);
    const double one_minus_q2 = one_minus_q * (1.0 + q);
    const double p_inf = (p2_t3 - q * q * p2_t1) / one_minus_q2;
    const double p1_inf = ((1.0 - p2_t3) - q * q * (1.0 - p2_t1)) / one_minus_q2;
    r.kappa1 = -p_inf * log_q / dt;
    r.kappa2 = -p1_inf * log_q / dt;
    return r;
}

RateRecord extract_rates(const PopulationSeries& series, double t1, double dt, double window) {
    if (series.t.empty() || t1 < series.t.front() || t1 + 2.0 * dt + window > series.t.back() + 1e-9)
        throw ConfigError("three-point times fall outside the population series");
    auto value = [&](double time) { return series.p2_mean(time, window); };
    RateRecord r = extract_rates(value(t1), value(t1 + dt), value(t1 + 2 * dt), dt);
    r.t1 = t1;
    const double p_start = value(t1);
    double sse = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < series.t.size(); ++k) {
        const double tt = series.t[k];
        if (tt < t1 || tt > t1 + 2.0 * dt) continue;
        const double model = two_state_p2(r.kappa1, r.kappa2, p_start, tt - t1);
        const double v = value(tt);
        sse += (v - model) * (v - model);
        ++count;
    }
    r.residual = count ? std::sqrt(sse / count) : 0.0;
    return r;
}

namespace {

struct LinearFit {
    double intercept{0.0};
    double slope{0.0};
    double sse{0.0};
};

LinearFit linear_fit(std::span<const double> z, std::span<const double> y) {
    const double n = static_cast<double>(z.size());
    double mz = 0, my = 0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        mz += z[k];
        my += y[k];
    }
    mz /= n;
    my /= n;
    double szz = 0, szy = 0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        szz += (z[k] - mz) * (z[k] - mz);
        szy += (z[k] - mz) * (y[k] - my);
    }
    LinearFit f;
    f.slope = szz > 0 ? szy / szz : 0.0;
    f.intercept = my - f.slope * mz;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double e = y[k] - f.intercept - f.slope * z[k];
        f.sse += e * e;
    }
    return f;
}

double total_sum_squares(std::span<const double> y) {
    double m = 0;
    for (double v : y) m += v;
    m /= static_cast<double>(y.size());
    double s = 0;
    for (double v : y) s += (v - m) * (v - m);
    return s;
}

// Minimizes cost over [lo, hi] in log space: coarse scan, then golden section
// around the best cell.
template <class Cost>
double profile_minimum(Cost cost, double lo, double hi, int scan = 400) {
    const double a = std::log(lo);
    const double b = std::log(hi);
    int best = 0;
    double best_cost = INFINITY;
    for (int k = 0; k <= scan; ++k) {
        const double c = cost(std::exp(a + (b - a) * k / scan));
        if (c < best_cost) {
            best_cost = c;
            best = k;
        }
    }
    double left = a + (b - a) * std::max(best - 1, 0) / scan;
    double right = a + (b - a) * std::min(best + 1, scan) / scan;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = right - g * (right - left);
    double c2 = left + g * (right - left);
    double f1 = cost(std::exp(c1));
    double f2 = cost(std::exp(c2));
    for (int it = 0; it < 200 && right - left > 1e-14; ++it) {
        if (f1 < f2) {
            right = c2;
            c2 = c1;
            f2 = f1;
            c1 = right - g * (right - left);
            f1 = cost(std::exp(c1));
        } else {
            left = c1;
            c1 = c2;
            f1 = f2;
            c2 = left + g * (right - left);
            f2 = cost(std::exp(c2));
        }
    }
    return std::exp(0.5 * (left + right));
}

} // namespace

ScalingFit scaling_fit(std::span<const RateRecord> records) {
    std::vector<double> eta, y;
    for (const auto& r : records) {
        if (r.excluded || !(r.kappa1 > 0.0) || !(r.eta > 0.0)) continue;
        eta.push_back(r.eta);
        y.push_back(std::log(r.kappa1));
    }
    if (eta.size() < 4) throw InsufficientSpanError("scaling fit needs at least 4 usable records");
    const auto [lo, hi] = std::minmax_element(eta.begin(), eta.end());
    if (*hi < 2.0 * *lo) throw InsufficientSpanError("eta must span at least a factor of 2");

    // scale eta to O(1) so the profile is well conditioned; alpha is unchanged
    const double scale = *hi;
    std::vector<double> z(eta.size());
    auto fit_at = [&](double alpha) {
        for (std::size_t k = 0; k < eta.size(); ++k) z[k] = std::pow(eta[k] / scale, alpha);
        return linear_fit(z, y);
    };
    const double sst = total_sum_squares(y);

    ScalingFit out;
    out.points = eta.size();
    out.alpha = profile_minimum([&](double a) { return fit_at(a).sse; }, 0.05, 6.0);
    const LinearFit best = fit_at(out.alpha);
    out.slope = -best.slope / std::pow(scale, out.alpha);
    out.ln_c = best.intercept;
    out.r_squared = sst > 0 ? 1.0 - best.sse / sst : 1.0;

    const LinearFit lin = linear_fit(eta, y);
    out.linear_slope = -lin.slope;
    out.linear_ln_c = lin.intercept;
    out.linear_r_squared = sst > 0 ? 1.0 - lin.sse / sst : 1.0;

    if (out.r_squared < 0.98) out.warnings.push_back("poor fit: r^2 below 0.98");
    if (out.linear_r_squared < 0.98)
        out.warnings.push_back("poor linear fit of ln kappa1 against eta: r^2 below 0.98");
    return out;
}

ExponentialFit fit_single_exponential(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size() || t.size() < 4) throw ConfigError("exponential fit needs >= 4 points");
    const double span = t.back() - t.front();
    if (!(span > 0.0)) throw ConfigError("exponential fit needs increasing times");
    std::vector<double> z(t.size());
    auto fit_at = [&](double rate) {
        for (std::size_t k = 0; k < t.size(); ++k) z[k] = std::exp(-rate * (t[k] - t.front()));
        return linear_fit(z, y);
    };
    ExponentialFit out;
    out.rate = profile_minimum([&](double r) { return fit_at(r).sse; }, 1e-3 / span, 1e3 / span, 600);
    const LinearFit f = fit_at(out.rate);
    out.asymptote = f.intercept;
    out.amplitude = f.slope;
    const double sst = total_sum_squares(y);
    out.r_squared = sst > 0 ? 1.0 - f.sse / sst : 1.0;
    return out;
}

namespace {

BasinComponent basin_component(const DensityMatrix& state, const BasinPartition& partition,
                               bool inside) {
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (state.rho + state.rho.adjoint()));
    const std::vector<double> w = inner_weights(state.dim(), partition.r_star);
    const int n = state.dim();
    ComplexMatrix part = ComplexMatrix::Zero(n, n);
    double weight = 0.0;
    for (int k = 0; k < n; ++k) {
        const double lambda = es.eigenvalues()(k);
        if (lambda <= 0.0) continue;
        const auto v = es.eigenvectors().col(k);
        double mass = 0.0;
        for (int j = 0; j < n; ++j) mass += std::norm(v(j)) * w[j];
        if ((mass > 0.5) != inside) continue;
        part += lambda * v * v.adjoint();
        weight += lambda;
    }
    if (weight <= 0.0) throw OverlapError("no eigenvector of rho lies in the requested basin");
    return BasinComponent{DensityMatrix{part / weight, state.t}, weight};
}

} // namespace

BasinComponent sas_component(const DensityMatrix& state, const BasinPartition& partition) {
    return basin_component(state, partition, true);
}

BasinComponent las_component(const DensityMatrix& state, const BasinPartition& partition) {
    return basin_component(state, partition, false);
}

} // namespace duffing
