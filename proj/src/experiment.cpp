#include "duffing/experiment.hpp"

#include "duffing/csv.hpp"
#include "duffing/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace duffing {

using nlohmann::json;

namespace {

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string fmt(double v) { return format_double(v); }

const double kNaN = std::nan("");

json diagnostics_json(const RunDiagnostics& d) {
    return json{{"label", d.label},
                {"max_trace_drift", d.max_trace_drift},
                {"max_leakage", d.max_leakage},
                {"min_eigenvalue", d.min_eigenvalue},
                {"min_eigenvalue_after_slip", d.min_eigenvalue_after_slip},
                {"warnings", d.warnings},
                {"error", d.error}};
}

RunDiagnostics diagnostics_from_json(const json& j) {
    RunDiagnostics d;
    d.label = j.at("label");
    d.max_trace_drift = j.at("max_trace_drift");
    d.max_leakage = j.at("max_leakage");
    d.min_eigenvalue = j.at("min_eigenvalue");
    d.min_eigenvalue_after_slip = j.at("min_eigenvalue_after_slip");
    d.warnings = j.at("warnings").get<std::vector<std::string>>();
    d.error = j.at("error");
    return d;
}

// Deterministic fan-out: results land at their job index.
template <class Job>
void parallel_jobs(std::size_t count, int workers, Job job) {
    const int threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long k = 0; k < static_cast<long>(count); ++k) job(static_cast<std::size_t>(k));
}

struct Session {
    const Experiment& exp;
    RunManifest manifest;
    std::chrono::steady_clock::time_point started;

    explicit Session(const Experiment& e) : exp(e), started(std::chrono::steady_clock::now()) {
        manifest.config_hash = hash_hex(e.hash);
        manifest.scenario = scenario_name(e.config.scenario);
        manifest.config = e.doc;
        manifest.start_time = utc_now();
        std::filesystem::create_directories(e.config.out_dir);
    }

    std::filesystem::path path(const std::string& name) const { return exp.config.out_dir / name; }

    void csv(const std::string& name, const CsvTable& table) {
        write_csv(path(name), table);
        manifest.files.push_back(name);
    }

    void text(const std::string& name, const std::string& body) {
        std::ofstream out(path(name));
        if (!out) throw ConfigError("cannot write " + path(name).string());
        out << body;
        manifest.files.push_back(name);
    }

    RunManifest finish() {
        manifest.end_time = utc_now();
        manifest.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        manifest.write(path(kManifestName));
        return manifest;
    }
};

std::string gnuplot_header(const std::string& title) {
    return "# " + title + "\n"
           "# data files are RFC-4180 CSV with one header row\n"
           "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "set terminal pngcairo size 900,900\n";
}

PhaseGrid wigner_grid_for(const OscillatorParams& params, const WignerConfig& w) {
    if (w.extent > 0.0) return square_grid(w.extent, w.points);
    PhaseGrid g = default_grid(params);
    g.nx = g.np = w.points;
    return g;
}

} // namespace

RunDiagnostics diagnostics_from(const std::string& label, const Trajectory& traj) {
    RunDiagnostics d;
    d.label = label;
    d.max_trace_drift = traj.max_trace_drift;
    d.max_leakage = traj.max_leakage;
    d.min_eigenvalue = traj.min_eigenvalue;
    d.min_eigenvalue_after_slip = traj.min_eigenvalue_after_slip;
    d.warnings = traj.warnings;
    return d;
}

json RunManifest::to_json() const {
    json runs_json = json::array();
    for (const auto& r : runs) runs_json.push_back(diagnostics_json(r));
    return json{{"config_hash", config_hash},
                {"code_version", code_version},
                {"scenario", scenario},
                {"start_time", start_time},
                {"end_time", end_time},
                {"wall_seconds", wall_seconds},
                {"config", config},
                {"runs", runs_json},
                {"files", files},
                {"notes", notes},
                {"summary", summary},
                {"error", error},
                {"exit_code", exit_code}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.config_hash = j.at("config_hash");
    m.code_version = j.at("code_version");
    m.scenario = j.at("scenario");
    m.start_time = j.at("start_time");
    m.end_time = j.at("end_time");
    m.wall_seconds = j.at("wall_seconds");
    m.config = j.at("config");
    for (const auto& r : j.at("runs")) m.runs.push_back(diagnostics_from_json(r));
    m.files = j.at("files").get<std::vector<std::string>>();
    m.notes = j.at("notes").get<std::vector<std::string>>();
    m.summary = j.at("summary");
    m.error = j.at("error");
    m.exit_code = j.at("exit_code");
    return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest " + path.string());
    out << to_json().dump(2) << "\n";
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read manifest " + path.string());
    return from_json(json::parse(in));
}

Experiment make_experiment(json doc) {
    Experiment e;
    e.config = config_from_json(doc);
    e.hash = config_hash(doc);
    e.doc = std::move(doc);
    return e;
}

Simulation build_simulation(const OscillatorParams& params, DissipatorMode mode) {
    Simulation sim;
    sim.params = params;
    sim.ops = build_operator_table(params);
    sim.diss = build_dissipator(sim.ops, bath_spec(params, mode));
    return sim;
}

DensityMatrix initial_state(const InitialState& spec, const Simulation& sim) {
    const int dim = sim.ops.dim;
    if (spec.kind == "ground") return gibbs_state(sim.ops, 0.0);
    if (spec.kind == "gibbs") return gibbs_state(sim.ops, sim.params.theta);
    if (spec.kind == "fock") return fock_state(dim, spec.n);
    if (spec.kind == "thermal") return thermal_state(dim, spec.nbar);
    const double scale = spec.units == "phase" ? std::sqrt(sim.params.aleph) : 1.0;
    return coherent_state_at(dim, spec.x * scale, spec.p * scale);
}

TransientResult simulate_transient(const Simulation& sim, const DensityMatrix& start, double periods,
                                   const PropagationConfig& prop,
                                   const std::vector<double>& snapshot_periods) {
    TransientResult out;
    const double period = sim.params.drive_period();
    SamplingPlan plan;
    plan.steps_per_period = prop.steps_per_period;
    plan.sample_stride = prop.sample_stride;
    for (double s : snapshot_periods) plan.snapshot_times.push_back(start.t + s * period);

    std::vector<ComplexMatrix> extra;
    std::optional<RadialPartition> radial;
    try {
        out.partition = basin_partition(sim.params);
    } catch (const ConfigError&) {
        out.warnings.push_back("drive admits a single attractor; populations not recorded");
    }
    if (out.partition) {
        radial.emplace(sim.ops.dim, *out.partition);
        const auto ring_hi = inner_weights(sim.ops.dim, 1.1 * out.partition->r_star);
        const auto ring_lo = inner_weights(sim.ops.dim, 0.9 * out.partition->r_star);
        ComplexMatrix inside = ComplexMatrix::Zero(sim.ops.dim, sim.ops.dim);
        ComplexMatrix ring = ComplexMatrix::Zero(sim.ops.dim, sim.ops.dim);
        for (int k = 0; k < sim.ops.dim; ++k) {
            inside(k, k) = radial->inside()[k];
            ring(k, k) = ring_hi[k] - ring_lo[k];
        }
        extra = {inside, ring};
    }

    PropagatorTolerances tol;
    tol.slip_periods = prop.slip_periods;
    tol.positivity = prop.positivity;
    Propagator prop_engine(sim.params, sim.ops, sim.diss, tol);
    out.trajectory = prop_engine.evolve(start, start.t + periods * period, plan, extra);
    const Trajectory& tr = out.trajectory;

    if (out.partition) {
        out.populations.t = tr.t;
        bool clamped = false;
        for (std::size_t k = 0; k < tr.t.size(); ++k) {
            const double raw = tr.extra[0][k];
            clamped |= raw < 0.0 || raw > 1.0;
            const double p1 = std::clamp(raw, 0.0, 1.0);
            out.populations.p1.push_back(p1);
            out.populations.p2.push_back(1.0 - p1);
            out.max_ring_mass = std::max(out.max_ring_mass, tr.extra[1][k]);
        }
        if (clamped) out.warnings.push_back("populations clamped to [0, 1]");
        if (out.max_ring_mass > 0.1) {
            std::ostringstream os;
            os << "basins overlap: ring mass up to " << out.max_ring_mass;
            out.warnings.push_back(os.str());
        }
    }
    const double window = std::min(prop.average_periods, periods) * period;
    out.steady_amplitude = tr.steady_amplitude(tr.t.back() - window);
    return out;
}

std::vector<SweepPoint> quantum_sweep(const OscillatorParams& base, DissipatorMode mode,
                                      const std::vector<double>& ratios,
                                      const std::vector<InitialState>& branches,
                                      const PropagationConfig& prop, int workers) {
    std::vector<SweepPoint> points(ratios.size() * branches.size());
    const double fc = critical_drive(base);
    parallel_jobs(points.size(), workers, [&](std::size_t k) {
        SweepPoint& pt = points[k];
        pt.branch = k / ratios.size();
        pt.f0_over_fc = ratios[k % ratios.size()];
        pt.f0 = pt.f0_over_fc * fc;
        std::ostringstream label;
        label << "sweep branch=" << pt.branch << " f0/fc=" << pt.f0_over_fc;
        pt.diagnostics.label = label.str();
        try {
            OscillatorParams p = base;
            p.f0 = pt.f0;
            const Simulation sim = build_simulation(p, mode);
            const TransientResult res =
                simulate_transient(sim, initial_state(branches[pt.branch], sim), prop.periods, prop);
            pt.amplitude = res.steady_amplitude;
            const double period = p.drive_period();
            pt.peak = res.trajectory.peak_amplitude(res.trajectory.t.back() -
                                                    prop.average_periods * period);
            pt.diagnostics = diagnostics_from(label.str(), res.trajectory);
        } catch (const std::exception& e) {
            pt.amplitude = pt.peak = kNaN;
            pt.diagnostics.error = e.what();
        }
    });
    return points;
}

RatePoint rate_point(const OscillatorParams& params, DissipatorMode mode, const RatesConfig& rates,
                     const PropagationConfig& prop) {
    RatePoint out;
    RateRecord& rec = out.record;
    rec.theta = params.theta;
    rec.f0 = params.f0;
    rec.fc = critical_drive(params);
    rec.eta = rec.fc * rec.fc - rec.f0 * rec.f0;
    std::ostringstream label;
    label << "rates theta=" << params.theta << " f0/fc=" << params.f0 / rec.fc;
    out.diagnostics.label = label.str();

    const double period = params.drive_period();
    try {
        const Simulation sim = build_simulation(params, mode);
        const TransientResult res = simulate_transient(
            sim, initial_state(InitialState{}, sim), rates.periods, prop);
        out.diagnostics = diagnostics_from(label.str(), res.trajectory);
        for (const auto& w : res.warnings) out.diagnostics.warnings.push_back(w);
        if (!res.partition) throw ConfigError("no basin partition at this drive");
        out.series = res.populations;
        rec.ring_mass = res.max_ring_mass;

        StageOptions stages;
        stages.period = period;
        out.series.t_q = detect_stages(out.series, stages);
        const double t_end = out.series.t.back();
        const double t1 = rates.t1_override_periods >= 0.0 ? rates.t1_override_periods * period
                                                           : out.series.t_q + rates.t1_offset_periods * period;
        const double dt = rates.dt_override_periods > 0.0 ? rates.dt_override_periods * period
                                                          : rates.dt_fraction * (t_end - period - t1);
        RateRecord r = extract_rates(out.series, t1, dt, period);
        r.theta = rec.theta;
        r.f0 = rec.f0;
        r.fc = rec.fc;
        r.eta = rec.eta;
        r.ring_mass = rec.ring_mass;
        rec = r;

        std::vector<std::string> notes;
        const double shifted = t1 + rates.shift_periods * period;
        if (shifted + 2.0 * dt + period <= t_end) {
            try {
                const RateRecord again = extract_rates(out.series, shifted, dt, period);
                rec.shift_variation = std::abs(again.kappa1 - rec.kappa1) / rec.kappa1;
                if (rec.shift_variation > 0.1) {
                    std::ostringstream os;
                    os << "kappa1 varies by " << rec.shift_variation << " under a t1 shift";
                    notes.push_back(os.str());
                    rec.excluded = true;
                }
            } catch (const NumericalError& e) {
                notes.push_back(std::string("shifted re-extraction failed: ") + e.what());
                rec.excluded = true;
            }
        } else {
            rec.shift_variation = kNaN;
            notes.push_back("series too short for the shifted re-extraction");
        }
        // rates are still reported when the basins overlap, but kept out of the fit
        if (rec.ring_mass > rates.max_ring_mass) {
            std::ostringstream os;
            os << "basins not separated: ring mass " << rec.ring_mass;
            notes.push_back(os.str());
            rec.excluded = true;
        }
        for (std::size_t i = 0; i < notes.size(); ++i) rec.note += (i ? "; " : "") + notes[i];
        if (rec.excluded) out.diagnostics.warnings.push_back(rec.note);
    } catch (const Error& e) {
        rec.excluded = true;
        rec.note = e.what();
        out.diagnostics.error = e.what();
    }
    return out;
}

std::vector<RateCampaign> rate_campaigns(const OscillatorParams& base, DissipatorMode mode,
                                         const RatesConfig& rates, const PropagationConfig& prop,
                                         int workers) {
    std::vector<RateCampaign> campaigns(rates.temperatures_mK.size());
    const std::size_t per = rates.f0_over_fc.size();
    for (std::size_t c = 0; c < campaigns.size(); ++c) {
        campaigns[c].temperature_mK = rates.temperatures_mK[c];
        campaigns[c].theta = reference_theta(rates.temperatures_mK[c] * 1e-3);
        campaigns[c].points.resize(per);
    }
    parallel_jobs(campaigns.size() * per, workers, [&](std::size_t k) {
        RateCampaign& camp = campaigns[k / per];
        OscillatorParams p = base;
        p.theta = camp.theta;
        p.f0 = rates.f0_over_fc[k % per] * critical_drive(p);
        camp.points[k % per] = rate_point(p, mode, rates, prop);
    });
    for (auto& camp : campaigns) {
        std::vector<RateRecord> recs;
        for (const auto& pt : camp.points) recs.push_back(pt.record);
        try {
            camp.fit = scaling_fit(recs);
        } catch (const NumericalError& e) {
            camp.fit_error = e.what();
        }
    }
    return campaigns;
}

RunManifest run_transient(const Experiment& exp) {
    Session s(exp);
    const ExperimentConfig& c = exp.config;
    const Simulation sim = build_simulation(c.resolved_params(), c.dissipator);
    const TransientResult res =
        simulate_transient(sim, initial_state(c.initial, sim), c.propagation.periods, c.propagation);
    const Trajectory& tr = res.trajectory;
    const double period = sim.params.drive_period();

    CsvTable t;
    t.header = {"t", "period", "x_mean", "p_mean", "amplitude", "energy", "purity", "leakage", "P1", "P2"};
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        const bool pop = !res.populations.t.empty();
        t.rows.push_back({fmt(tr.t[k]), fmt(tr.t[k] / period), fmt(tr.x_mean[k]), fmt(tr.p_mean[k]),
                          fmt(std::sqrt(2.0) * std::abs(tr.a_mean[k])), fmt(tr.energy[k]),
                          fmt(tr.purity[k]), fmt(tr.leakage[k]),
                          fmt(pop ? res.populations.p1[k] : kNaN),
                          fmt(pop ? res.populations.p2[k] : kNaN)});
    }
    s.csv("transient.csv", t);
    s.text("transient.gp", gnuplot_header("transient: mean position, LAS population, purity") +
                               "set output 'transient.png'\n"
                               "set multiplot layout 3,1\n"
                               "set xlabel 'drive periods'\n"
                               "plot 'transient.csv' using 2:3 with lines\n"
                               "plot 'transient.csv' using 2:10 with lines\n"
                               "plot 'transient.csv' using 2:7 with lines\n"
                               "unset multiplot\n");

    RunDiagnostics d = diagnostics_from("transient", tr);
    for (const auto& w : res.warnings) d.warnings.push_back(w);
    s.manifest.runs.push_back(d);
    s.manifest.summary = json{{"f0", sim.params.f0},
                              {"fc", critical_drive(sim.params)},
                              {"theta", sim.params.theta},
                              {"steady_amplitude", res.steady_amplitude},
                              {"final_P2", res.populations.p2.empty() ? kNaN : res.populations.p2.back()}};
    return s.finish();
}

RunManifest run_sweep(const Experiment& exp) {
    Session s(exp);
    const ExperimentConfig& c = exp.config;
    const OscillatorParams base = c.resolved_params();
    const auto points = quantum_sweep(base, c.dissipator, c.sweep.f0_over_fc, c.sweep.branches,
                                      c.propagation, c.workers);
    CsvTable q;
    q.header = {"branch", "f0_over_fc", "f0", "amplitude", "peak", "error"};
    for (const auto& pt : points) {
        q.rows.push_back({std::to_string(pt.branch), fmt(pt.f0_over_fc), fmt(pt.f0), fmt(pt.amplitude),
                          fmt(pt.peak), pt.diagnostics.error});
        s.manifest.runs.push_back(pt.diagnostics);
        if (!pt.diagnostics.error.empty()) s.manifest.notes.push_back(pt.diagnostics.label + ": " + pt.diagnostics.error);
    }
    s.csv("sweep_quantum.csv", q);

    std::string plot = gnuplot_header("oscillation amplitude against drive") +
                       "set output 'sweep.png'\n"
                       "set xlabel 'f0/fc'\nset ylabel 'amplitude'\n"
                       "plot for [b=0:" + std::to_string(c.sweep.branches.size() - 1) +
                       "] 'sweep_quantum.csv' using 2:($1==b ? $4 : 1/0) with linespoints title sprintf('quantum branch %d', b)";
    if (c.sweep.classical) {
        ClassicalOptions opts;
        opts.settle_periods = c.classical.settle_periods;
        opts.measure_periods = c.classical.measure_periods;
        opts.include_counterterm = c.classical.include_counterterm;
        std::vector<double> grid;
        const double fc = critical_drive(base);
        for (double r : c.sweep.f0_over_fc) grid.push_back(r * fc);
        std::vector<std::vector<AmplitudePoint>> dirs(2);
        parallel_jobs(2, c.workers, [&](std::size_t k) {
            dirs[k] = classical_sweep(base, grid, k == 0 ? SweepDirection::Up : SweepDirection::Down, opts);
        });
        CsvTable cl;
        cl.header = {"direction", "f0_over_fc", "f0", "amplitude", "peak", "diverged"};
        for (std::size_t k = 0; k < 2; ++k)
            for (const auto& pt : dirs[k])
                cl.rows.push_back({k == 0 ? "up" : "down", fmt(pt.f0 / fc), fmt(pt.f0), fmt(pt.amplitude),
                                   fmt(pt.peak), pt.diverged ? "1" : "0"});
        s.csv("sweep_classical.csv", cl);
        plot += ", \\\n     'sweep_classical.csv' using 2:(strcol(1) eq 'up' ? $4 : 1/0) with lines title 'classical up'"
                ", \\\n     'sweep_classical.csv' using 2:(strcol(1) eq 'down' ? $4 : 1/0) with lines title 'classical down'";
    }
    s.text("sweep.gp", plot + "\n");
    s.manifest.summary = json{{"fc", critical_drive(base)}, {"points", points.size()}};
    return s.finish();
}

RunManifest run_wigner(const Experiment& exp) {
    Session s(exp);
    const ExperimentConfig& c = exp.config;
    const Simulation sim = build_simulation(c.resolved_params(), c.dissipator);
    const double last = *std::max_element(c.wigner.snapshot_periods.begin(), c.wigner.snapshot_periods.end());
    const TransientResult res = simulate_transient(sim, initial_state(c.initial, sim),
                                                   std::max(last, 1e-9), c.propagation,
                                                   c.wigner.snapshot_periods);
    const PhaseGrid grid = wigner_grid_for(sim.params, c.wigner);
    const double period = sim.params.drive_period();

    CsvTable summary;
    summary.header = {"file", "t", "period", "integral", "min", "max", "purity", "lobes",
                      "P1", "P2", "sas_purity", "sas_fidelity", "las_weight"};
    std::string plot = gnuplot_header("rotating-frame Wigner functions") +
                       "set view map\nset size ratio -1\nset xlabel 'x'\nset ylabel 'p'\n";
    int idx = 0;
    for (const auto& snap : res.trajectory.snapshots) {
        const WignerField field = wigner(snap, grid, Frame::Rotating, sim.params.nu());
        std::ostringstream name;
        name << "wigner_" << std::setw(3) << std::setfill('0') << idx++ << ".csv";
        write_wigner(field, s.path(name.str()), kManifestName);
        s.manifest.files.push_back(name.str());
        s.manifest.files.push_back(name.str() + ".json");

        double p1 = kNaN, p2 = kNaN, sas_p = kNaN, sas_f = kNaN, las_w = kNaN;
        if (res.partition) {
            const Populations pop = radial_populations(snap, *res.partition, 1.0);
            p1 = pop.p1;
            p2 = pop.p2;
            try {
                const BasinComponent sas = sas_component(snap, *res.partition);
                sas_p = purity(sas.state);
                sas_f = coherent_fidelity(sas.state).fidelity;
                las_w = 1.0 - sas.weight;
            } catch (const NumericalError& e) {
                s.manifest.notes.push_back(name.str() + ": " + e.what());
            }
        }
        summary.rows.push_back({name.str(), fmt(snap.t), fmt(snap.t / period), fmt(field.integral()),
                                fmt(field.min_value()), fmt(field.max_value()), fmt(purity(snap)),
                                std::to_string(count_lobes(field)), fmt(p1), fmt(p2), fmt(sas_p),
                                fmt(sas_f), fmt(las_w)});
        plot += "set output '" + name.str() + ".png'\n"
                "splot '" + name.str() + "' nonuniform matrix every ::1 with pm3d notitle\n";
    }
    s.csv("wigner_summary.csv", summary);
    s.text("wigner.gp", plot);
    RunDiagnostics d = diagnostics_from("wigner", res.trajectory);
    for (const auto& w : res.warnings) d.warnings.push_back(w);
    s.manifest.runs.push_back(d);
    return s.finish();
}

RunManifest run_rates(const Experiment& exp) {
    Session s(exp);
    const ExperimentConfig& c = exp.config;
    if (c.rates.f0_over_fc.size() < 4)
        throw InsufficientSpanError("rates campaign needs at least 4 drive points");
    std::vector<double> temps = c.rates.temperatures_mK;
    RatesConfig rates = c.rates;
    if (temps.empty()) rates.temperatures_mK = {c.temperature_mK.value_or(5.0)};
    const OscillatorParams base = c.resolved_params();
    auto campaigns = rate_campaigns(base, c.dissipator, rates, c.propagation, c.workers);

    CsvTable table;
    table.header = {"eta", "kappa1", "kappa2", "K", "residual", "theta", "f0", "fc",
                    "t1", "dt", "shift_variation", "ring_mass", "t_q", "excluded", "note"};
    CsvTable pops;
    pops.header = {"theta", "f0", "t", "P1", "P2"};
    CsvTable fits;
    fits.header = {"temperature_mK", "theta", "alpha", "slope", "ln_c", "r_squared",
                   "linear_slope", "linear_ln_c", "linear_r_squared", "points", "error"};
    std::string plot = gnuplot_header("ln kappa1 against eta") +
                       "set output 'rates.png'\nset xlabel 'eta'\nset ylabel 'ln kappa1'\nplot ";
    bool first = true;
    json summary = json::array();
    for (const auto& camp : campaigns) {
        for (const auto& pt : camp.points) {
            const RateRecord& r = pt.record;
            table.rows.push_back({fmt(r.eta), fmt(r.kappa1), fmt(r.kappa2), fmt(r.K), fmt(r.residual),
                                  fmt(r.theta), fmt(r.f0), fmt(r.fc), fmt(r.t1), fmt(r.dt),
                                  fmt(r.shift_variation), fmt(r.ring_mass), fmt(pt.series.t_q), r.excluded ? "1" : "0", r.note});
            for (std::size_t k = 0; k < pt.series.t.size(); ++k)
                pops.rows.push_back({fmt(r.theta), fmt(r.f0), fmt(pt.series.t[k]), fmt(pt.series.p1[k]),
                                     fmt(pt.series.p2[k])});
            s.manifest.runs.push_back(pt.diagnostics);
            if (r.excluded) s.manifest.notes.push_back(pt.diagnostics.label + " excluded: " + r.note);
        }
        json entry{{"temperature_mK", camp.temperature_mK}, {"theta", camp.theta}};
        if (camp.fit) {
            const ScalingFit& f = *camp.fit;
            fits.rows.push_back({fmt(camp.temperature_mK), fmt(camp.theta), fmt(f.alpha), fmt(f.slope),
                                 fmt(f.ln_c), fmt(f.r_squared), fmt(f.linear_slope), fmt(f.linear_ln_c),
                                 fmt(f.linear_r_squared), std::to_string(f.points), ""});
            entry["alpha"] = f.alpha;
            entry["r_squared"] = f.r_squared;
            entry["linear_r_squared"] = f.linear_r_squared;
            entry["warnings"] = f.warnings;
            const std::string th = fmt(camp.theta);
            plot += std::string(first ? "" : ", \\\n     ") + "'rates.csv' using 1:($6==" + th +
                    " && $14==0 ? log($2) : 1/0) with points title 'theta=" + th + "', \\\n     " +
                    fmt(f.linear_ln_c) + " - " + fmt(f.linear_slope) + "*x with lines title 'linear fit theta=" + th + "'";
            first = false;
        } else {
            fits.rows.push_back({fmt(camp.temperature_mK), fmt(camp.theta), "nan", "nan", "nan", "nan",
                                 "nan", "nan", "nan", "0", camp.fit_error});
            entry["error"] = camp.fit_error;
            s.manifest.notes.push_back("scaling fit at " + fmt(camp.temperature_mK) + " mK: " + camp.fit_error);
        }
        summary.push_back(entry);
    }
    s.csv("rates.csv", table);
    s.csv("populations.csv", pops);
    s.csv("scaling.csv", fits);
    s.text("rates.gp", plot + (first ? "NaN notitle" : "") + "\n");
    s.manifest.summary = json{{"campaigns", summary}};
    // outputs stay on disk for inspection, but a campaign set without any fit failed
    const bool any_fit = std::any_of(campaigns.begin(), campaigns.end(),
                                     [](const RateCampaign& camp) { return camp.fit.has_value(); });
    if (!any_fit) {
        s.manifest.error = "no campaign produced a scaling fit";
        s.manifest.exit_code = 3;
    }
    return s.finish();
}

std::string bifurcation_report(const OscillatorParams& params, const std::vector<double>& ratios) {
    std::ostringstream os;
    os << std::setprecision(10);
    const double fc = critical_drive(params);
    const RwaFrame eff = renormalized_frame(params);
    os << "aleph                       " << params.aleph << "\n"
       << "gamma_tilde                 " << params.gamma_tilde << "\n"
       << "delta                       " << params.delta << "\n"
       << "kappa                       " << params.kappa << "\n"
       << "critical drive f_c          " << fc << "\n"
       << "renormalized-frame f_c      " << eff.critical_drive() * eff.drive_scale << "\n"
       << "bound-state estimate        " << params.bound_state_estimate() << "\n"
       << "barrier position            " << params.barrier_position() << "\n";
    if (params.kappa > 0.0) {
        const double q = 1.0 / params.kappa;
        os << "quality factor Q            " << q << "\n";
        try {
            const DetuningWindow w = detuning_window(params, q);
            os << "detuning window             (" << w.delta_min << ", " << w.delta_max << ")"
               << (w.contains(params.delta) ? "  contains delta\n" : "  excludes delta\n");
        } catch (const ConfigError& e) {
            os << "detuning window             empty: " << e.what() << "\n";
        }
    }
    os << "\nfixed points (oscillator units, p = 0), nominal frame\n"
       << "f0/fc        f0            x_sas         x_unstable    x_las\n";
    for (double r : ratios) {
        OscillatorParams p = params;
        p.f0 = r * fc;
        const FixedPoints fp = fixed_points(p);
        auto col = [&](Attractor a) {
            const FixedPoint* f = fp.find(a);
            if (!f && a == Attractor::Small) f = fp.find(Attractor::Single);
            std::ostringstream c;
            c << std::setw(14) << (f ? f->x : kNaN);
            return c.str();
        };
        os << std::setw(13) << std::left << r << std::setw(14) << p.f0 << std::right
           << col(Attractor::Small) << col(Attractor::Unstable) << col(Attractor::Large) << "\n";
    }
    return os.str();
}

RunManifest run_bifurcation(const Experiment& exp) {
    Session s(exp);
    const ExperimentConfig& c = exp.config;
    const OscillatorParams params = c.resolved_params();
    std::vector<double> ratios = c.bifurcation.f0_over_fc;
    if (ratios.empty()) ratios = {0.0, 0.5, 0.8, 0.9, 0.95, 1.0, 1.1};
    const double fc = critical_drive(params);

    CsvTable t;
    t.header = {"frame", "f0_over_fc", "f0", "discriminant", "x_sas", "x_unstable", "x_las", "x_single"};
    for (int frame = 0; frame < 2; ++frame) {
        for (double r : ratios) {
            OscillatorParams p = params;
            p.f0 = r * fc;
            const FixedPoints fp = frame == 0 ? fixed_points(nominal_frame(p)) : fixed_points(renormalized_frame(p));
            auto x_of = [&](Attractor a) {
                const FixedPoint* f = fp.find(a);
                return fmt(f ? f->x : kNaN);
            };
            t.rows.push_back({frame == 0 ? "nominal" : "renormalized", fmt(r), fmt(p.f0),
                              fmt(fp.discriminant), x_of(Attractor::Small), x_of(Attractor::Unstable),
                              x_of(Attractor::Large), x_of(Attractor::Single)});
        }
    }
    s.csv("bifurcation.csv", t);
    const std::string report = bifurcation_report(params, ratios);
    s.text("bifurcation_report.txt", report);
    s.text("bifurcation.gp", gnuplot_header("fixed points against drive") +
                                 "set output 'bifurcation.png'\nset xlabel 'f0/fc'\nset ylabel 'x'\n"
                                 "plot for [col=5:8] 'bifurcation.csv' using 2:(strcol(1) eq 'nominal' ? column(col) : 1/0) with linespoints\n");
    json summary{{"fc", fc},
                 {"renormalized_fc", renormalized_frame(params).critical_drive() * renormalized_frame(params).drive_scale},
                 {"bound_state_estimate", params.bound_state_estimate()}};
    if (params.kappa > 0.0) {
        try {
            const DetuningWindow w = detuning_window(params, 1.0 / params.kappa);
            summary["delta_min"] = w.delta_min;
            summary["delta_max"] = w.delta_max;
        } catch (const ConfigError& e) {
            s.manifest.notes.push_back(e.what());
        }
    }
    s.manifest.summary = summary;
    return s.finish();
}

RunManifest run_classical(const Experiment& exp) {
    Session s(exp);
    const ExperimentConfig& c = exp.config;
    const OscillatorParams base = c.resolved_params();
    ClassicalOptions opts;
    opts.settle_periods = c.classical.settle_periods;
    opts.measure_periods = c.classical.measure_periods;
    opts.include_counterterm = c.classical.include_counterterm;
    opts.steps_per_period = c.propagation.steps_per_period;
    const double fc = critical_drive(base);
    std::vector<double> grid;
    for (double r : c.classical.f0_over_fc) grid.push_back(r * fc);
    std::vector<std::vector<AmplitudePoint>> dirs(2);
    parallel_jobs(2, c.workers, [&](std::size_t k) {
        dirs[k] = classical_sweep(base, grid, k == 0 ? SweepDirection::Up : SweepDirection::Down, opts);
    });
    CsvTable t;
    t.header = {"direction", "f0_over_fc", "f0", "amplitude", "peak", "diverged"};
    for (std::size_t k = 0; k < 2; ++k)
        for (const auto& pt : dirs[k])
            t.rows.push_back({k == 0 ? "up" : "down", fmt(pt.f0 / fc), fmt(pt.f0), fmt(pt.amplitude),
                              fmt(pt.peak), pt.diverged ? "1" : "0"});
    s.csv("classical.csv", t);
    s.text("classical.gp", gnuplot_header("classical hysteresis") +
                               "set output 'classical.png'\nset xlabel 'f0/fc'\nset ylabel 'amplitude'\n"
                               "plot 'classical.csv' using 2:(strcol(1) eq 'up' ? $4 : 1/0) with linespoints title 'up', \\\n"
                               "     'classical.csv' using 2:(strcol(1) eq 'down' ? $4 : 1/0) with linespoints title 'down'\n");
    s.manifest.summary = json{{"fc", fc}};
    return s.finish();
}

RunManifest run_scenario(const Experiment& exp) {
    RunManifest fail;
    fail.config_hash = hash_hex(exp.hash);
    fail.scenario = scenario_name(exp.config.scenario);
    fail.config = exp.doc;
    fail.start_time = utc_now();
    auto record_failure = [&](const std::exception& e, int code) {
        fail.error = e.what();
        fail.exit_code = code;
        fail.end_time = utc_now();
        try {
            std::filesystem::create_directories(exp.config.out_dir);
            fail.write(exp.config.out_dir / kManifestName);
        } catch (const std::exception&) {
        }
        return fail;
    };
    try {
        switch (exp.config.scenario) {
        case Scenario::Transient: return run_transient(exp);
        case Scenario::Sweep: return run_sweep(exp);
        case Scenario::Wigner: return run_wigner(exp);
        case Scenario::Rates: return run_rates(exp);
        case Scenario::Bifurcation: return run_bifurcation(exp);
        case Scenario::Classical: return run_classical(exp);
        }
        throw ConfigError("unhandled scenario");
    } catch (const ConfigError& e) {
        return record_failure(e, 2);
    } catch (const std::filesystem::filesystem_error& e) {
        return record_failure(e, 2);
    } catch (const std::exception& e) {
        return record_failure(e, 3);
    }
}

} // namespace duffing
