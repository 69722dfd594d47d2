// experiment.hpp — scenario orchestration, manifests and plot scripts.

#pragma once

#include "duffing/bath.hpp"
#include "duffing/config.hpp"
#include "duffing/operators.hpp"
#include "duffing/propagator.hpp"
#include "duffing/rates.hpp"
#include "duffing/rwa.hpp"
#include "duffing/wigner.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace duffing {

struct RunDiagnostics {
    std::string label;
    double max_trace_drift{0.0};
    double max_leakage{0.0};
    double min_eigenvalue{0.0};
    double min_eigenvalue_after_slip{0.0};
    std::vector<std::string> warnings;
    std::string error;
};

RunDiagnostics diagnostics_from(const std::string& label, const Trajectory& traj);

struct RunManifest {
    std::string config_hash;
    std::string code_version{DUFFING_VERSION};
    std::string scenario;
    std::string start_time;
    std::string end_time;
    double wall_seconds{0.0};
    nlohmann::json config;
    std::vector<RunDiagnostics> runs;
    std::vector<std::string> files;
    std::vector<std::string> notes;
    nlohmann::json summary = nlohmann::json::object();
    std::string error;
    int exit_code{0};

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
    void write(const std::filesystem::path& path) const;
    static RunManifest read(const std::filesystem::path& path);
};

inline constexpr const char* kManifestName = "manifest.json";

struct Experiment {
    nlohmann::json doc;
    ExperimentConfig config;
    std::uint64_t hash{0};
};

// Validates the document; ConfigError on any problem.
Experiment make_experiment(nlohmann::json doc);

// Everything a propagation needs for one parameter set.
struct Simulation {
    OscillatorParams params;
    OperatorTable ops;
    DissipatorTable diss;
};

Simulation build_simulation(const OscillatorParams& params,
                            DissipatorMode mode = DissipatorMode::EigenbasisRedfield);

// "ground" is the lowest eigenvector of h_static.
DensityMatrix initial_state(const InitialState& spec, const Simulation& sim);

struct TransientResult {
    Trajectory trajectory;
    std::optional<BasinPartition> partition;
    PopulationSeries populations; // empty without a partition
    double max_ring_mass{0.0};
    double steady_amplitude{0.0};
    std::vector<std::string> warnings;
};

// Propagates for `periods` drive periods, recording SAS/LAS populations through
// the radial weights when the drive admits a partition.
TransientResult simulate_transient(const Simulation& sim, const DensityMatrix& start, double periods,
                                   const PropagationConfig& prop,
                                   const std::vector<double>& snapshot_periods = {});

struct SweepPoint {
    std::size_t branch{0};
    double f0_over_fc{0.0};
    double f0{0.0};
    double amplitude{0.0};
    double peak{0.0};
    RunDiagnostics diagnostics;
};

// One transient per (branch, ratio), fanned out to `workers` threads and
// returned in (branch, ratio) order.
std::vector<SweepPoint> quantum_sweep(const OscillatorParams& base, DissipatorMode mode,
                                      const std::vector<double>& ratios,
                                      const std::vector<InitialState>& branches,
                                      const PropagationConfig& prop, int workers);

struct RatePoint {
    RateRecord record;
    PopulationSeries series;
    RunDiagnostics diagnostics;
};

// Ground start at f0, population series, stage detection and the three-point
// extraction.  Failures are recorded as excluded records.
RatePoint rate_point(const OscillatorParams& params, DissipatorMode mode, const RatesConfig& rates,
                     const PropagationConfig& prop);

struct RateCampaign {
    double temperature_mK{0.0};
    double theta{0.0};
    std::vector<RatePoint> points;
    std::optional<ScalingFit> fit;
    std::string fit_error;
};

std::vector<RateCampaign> rate_campaigns(const OscillatorParams& base, DissipatorMode mode,
                                         const RatesConfig& rates, const PropagationConfig& prop,
                                         int workers);

// Scenario runners write their CSVs, plot scripts and manifest into
// config.out_dir and return the manifest.  Errors propagate.
RunManifest run_transient(const Experiment& exp);
RunManifest run_sweep(const Experiment& exp);
RunManifest run_wigner(const Experiment& exp);
RunManifest run_rates(const Experiment& exp);
RunManifest run_bifurcation(const Experiment& exp);
RunManifest run_classical(const Experiment& exp);

// Dispatches on the scenario, converts library errors into the manifest's
// error field and exit code (2 configuration, 3 numerical), and always writes
// the manifest.
RunManifest run_scenario(const Experiment& exp);

// Plain-text bifurcation report.
std::string bifurcation_report(const OscillatorParams& params, const std::vector<double>& ratios);

} // namespace duffing
