// config.hpp — experiment configuration: JSON with comments, presets, overrides.

#pragma once

#include "duffing/bath.hpp"
#include "duffing/params.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace duffing {

enum class Scenario { Transient, Sweep, Wigner, Rates, Bifurcation, Classical };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

// "phase" positions are in units of the phase variable x/sqrt(aleph); the
// oscillator-unit coordinate is X = x sqrt(aleph).
struct InitialState {
    std::string kind{"ground"}; // ground | coherent | fock | thermal | gibbs
    double x{0.0};
    double p{0.0};
    std::string units{"phase"}; // phase | oscillator
    int n{0};
    double nbar{0.0};
};

struct PropagationConfig {
    double periods{160.0};
    int steps_per_period{200};
    int sample_stride{10};
    double average_periods{20.0}; // window for the steady amplitude
    double slip_periods{60.0};    // relaxed positivity bound before this time
    double positivity{1e-6};      // smallest eigenvalue allowed after the slip window
};

struct SweepConfig {
    std::vector<double> f0_over_fc;
    std::vector<InitialState> branches;
    bool classical{true};
};

struct RatesConfig {
    std::vector<double> f0_over_fc;
    std::vector<double> temperatures_mK;
    double periods{2000.0};
    double t1_offset_periods{10.0};
    double dt_fraction{0.1};
    double t1_override_periods{-1.0}; // < 0: t_q + offset
    double dt_override_periods{-1.0}; // < 0: fraction of the remaining span
    double shift_periods{50.0};       // robustness re-extraction
    double max_ring_mass{0.1};        // basin-overlap guard
};

struct WignerConfig {
    std::vector<double> snapshot_periods{160.0};
    int points{201};
    double extent{0.0}; // <= 0: default_grid
};

struct ClassicalConfig {
    std::vector<double> f0_over_fc;
    int settle_periods{400};
    int measure_periods{20};
    bool include_counterterm{false};
};

struct BifurcationConfig {
    std::vector<double> f0_over_fc;
};

struct ExperimentConfig {
    Scenario scenario{Scenario::Transient};
    OscillatorParams params;
    std::optional<double> f0_over_fc;    // sets f0 relative to critical_drive
    std::optional<double> temperature_mK; // sets theta for the reference junction
    DissipatorMode dissipator{DissipatorMode::EigenbasisRedfield};
    InitialState initial;
    PropagationConfig propagation;
    SweepConfig sweep;
    RatesConfig rates;
    WignerConfig wigner;
    ClassicalConfig classical;
    BifurcationConfig bifurcation;
    std::filesystem::path out_dir{"out"};
    int workers{1};

    // Parameters with f0_over_fc and temperature_mK applied.
    OscillatorParams resolved_params() const;
};

// Defaults of the named preset as JSON; ConfigError for unknown names.
nlohmann::json preset_json(const std::string& name);

// Parses JSON text with // and /* */ comments.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config_file(const std::filesystem::path& path);

// dotted.key=value; value parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Recursive merge, `patch` wins.
void merge_into(nlohmann::json& base, const nlohmann::json& patch);

// Typed view; rejects unknown keys and validates every module precondition.
ExperimentConfig config_from_json(const nlohmann::json& doc);

// Canonical JSON of everything that affects results (output section excluded).
nlohmann::json physics_json(const nlohmann::json& doc);

// 64-bit FNV-1a of physics_json(doc).dump().
std::uint64_t config_hash(const nlohmann::json& doc);
std::string hash_hex(std::uint64_t hash);

} // namespace duffing
