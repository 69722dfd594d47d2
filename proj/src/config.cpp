#include "duffing/config.hpp"

#include "duffing/errors.hpp"
#include "duffing/rwa.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace duffing {

using nlohmann::json;

Scenario parse_scenario(const std::string& name) {
    if (name == "transient") return Scenario::Transient;
    if (name == "sweep") return Scenario::Sweep;
    if (name == "wigner") return Scenario::Wigner;
    if (name == "rates") return Scenario::Rates;
    if (name == "bifurcation") return Scenario::Bifurcation;
    if (name == "classical") return Scenario::Classical;
    throw ConfigError("unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario s) {
    switch (s) {
    case Scenario::Transient: return "transient";
    case Scenario::Sweep: return "sweep";
    case Scenario::Wigner: return "wigner";
    case Scenario::Rates: return "rates";
    case Scenario::Bifurcation: return "bifurcation";
    case Scenario::Classical: return "classical";
    }
    return "transient";
}

OscillatorParams ExperimentConfig::resolved_params() const {
    OscillatorParams p = params;
    if (temperature_mK) p.theta = reference_theta(*temperature_mK * 1e-3);
    if (f0_over_fc) p.f0 = *f0_over_fc * critical_drive(p);
    return p;
}

json preset_json(const std::string& name) {
    if (name != "paper-mesoscopic") throw ConfigError("unknown preset '" + name + "'");
    return json{
        {"oscillator",
         {{"aleph", 12.0},
          {"gamma_tilde", 1.0 / 24.0},
          {"delta", 0.06},
          {"kappa", 0.01},
          {"omega_c", 10.0},
          {"temperature_mK", 5.0},
          {"n_basis", 40}}},
        {"sweep",
         {{"f0_over_fc", {0.0,  0.05, 0.1,  0.15, 0.2,  0.25, 0.3,  0.35, 0.4,  0.45, 0.5,
                          0.55, 0.6,  0.65, 0.7,  0.75, 0.8,  0.85, 0.9,  0.95, 1.0,  1.05,
                          1.1,  1.15, 1.2,  1.25, 1.3,  1.35, 1.4,  1.45, 1.5}},
          {"branches", json::array({json{{"kind", "ground"}},
                                    json{{"kind", "coherent"}, {"x", 1.0}, {"units", "phase"}}})}}},
        {"rates",
         {{"f0_over_fc", {0.80, 0.84, 0.88, 0.92, 0.96, 0.99}},
          {"temperatures_mK", {5.0, 50.0}},
          {"periods", 2000.0}}},
        {"classical", {{"f0_over_fc", {0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.98, 1.0, 1.02,
                                       1.05, 1.1, 1.2}}}},
        {"bifurcation", {{"f0_over_fc", {0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 1.0, 1.1}}}},
    };
}

json parse_config_text(const std::string& text) {
    try {
        return json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void merge_into(json& base, const json& patch) {
    if (!patch.is_object() || !base.is_object()) {
        base = patch;
        return;
    }
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object())
            merge_into(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like key.path=value: '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (part.empty()) throw ConfigError("empty key segment in '" + key + "'");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            break;
        }
        if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
        node = &(*node)[part];
        start = dot + 1;
    }
}

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + where + "." + it.key() + "'");
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad type for '" + where + "." + key + "'");
    }
}

InitialState initial_from_json(const json& j, const std::string& where) {
    check_keys(j, where, {"kind", "x", "p", "units", "n", "nbar"});
    InitialState s;
    read(j, "kind", s.kind, where);
    read(j, "x", s.x, where);
    read(j, "p", s.p, where);
    read(j, "units", s.units, where);
    read(j, "n", s.n, where);
    read(j, "nbar", s.nbar, where);
    static const std::set<std::string> kinds{"ground", "coherent", "fock", "thermal", "gibbs"};
    if (!kinds.count(s.kind)) throw ConfigError(where + ".kind: unknown initial state '" + s.kind + "'");
    if (s.units != "phase" && s.units != "oscillator")
        throw ConfigError(where + ".units must be 'phase' or 'oscillator'");
    if (s.n < 0 || s.nbar < 0) throw ConfigError(where + ": n and nbar must be >= 0");
    return s;
}

void require_ratios(const std::vector<double>& v, const std::string& where, bool nonempty) {
    if (nonempty && v.empty()) throw ConfigError(where + " must not be empty");
    for (double r : v)
        if (!(r >= 0.0)) throw ConfigError(where + " entries must be >= 0");
}

} // namespace

namespace {

ExperimentConfig config_from_json_impl(const json& doc) {
    check_keys(doc, "config",
               {"scenario", "oscillator", "bath", "initial", "propagation", "sweep", "rates",
                "wigner", "classical", "bifurcation", "output"});
    ExperimentConfig c;
    if (doc.contains("scenario")) c.scenario = parse_scenario(doc.at("scenario").get<std::string>());

    if (doc.contains("oscillator")) {
        const json& o = doc.at("oscillator");
        check_keys(o, "oscillator",
                   {"aleph", "gamma_tilde", "delta", "f0", "f0_over_fc", "kappa", "theta",
                    "temperature_mK", "omega_c", "n_basis"});
        read(o, "aleph", c.params.aleph, "oscillator");
        read(o, "gamma_tilde", c.params.gamma_tilde, "oscillator");
        read(o, "delta", c.params.delta, "oscillator");
        read(o, "f0", c.params.f0, "oscillator");
        read(o, "kappa", c.params.kappa, "oscillator");
        read(o, "theta", c.params.theta, "oscillator");
        read(o, "omega_c", c.params.omega_c, "oscillator");
        read(o, "n_basis", c.params.n_basis, "oscillator");
        if (o.contains("f0_over_fc")) c.f0_over_fc = o.at("f0_over_fc").get<double>();
        if (o.contains("temperature_mK")) c.temperature_mK = o.at("temperature_mK").get<double>();
        if (o.contains("f0") && o.contains("f0_over_fc"))
            throw ConfigError("give either oscillator.f0 or oscillator.f0_over_fc, not both");
        if (o.contains("theta") && o.contains("temperature_mK"))
            throw ConfigError("give either oscillator.theta or oscillator.temperature_mK, not both");
    }
    if (c.temperature_mK && !(*c.temperature_mK >= 0.0))
        throw ConfigError("oscillator.temperature_mK must be >= 0");
    if (c.f0_over_fc && !(*c.f0_over_fc >= 0.0)) throw ConfigError("oscillator.f0_over_fc must be >= 0");

    if (doc.contains("bath")) {
        const json& b = doc.at("bath");
        check_keys(b, "bath", {"mode"});
        std::string mode = "redfield";
        read(b, "mode", mode, "bath");
        if (mode == "redfield") c.dissipator = DissipatorMode::EigenbasisRedfield;
        else if (mode == "lindblad") c.dissipator = DissipatorMode::LindbladThermal;
        else throw ConfigError("bath.mode must be 'redfield' or 'lindblad'");
    }
    if (doc.contains("initial")) c.initial = initial_from_json(doc.at("initial"), "initial");

    if (doc.contains("propagation")) {
        const json& p = doc.at("propagation");
        check_keys(p, "propagation", {"periods", "steps_per_period", "sample_stride", "average_periods", "slip_periods",
                                          "positivity"});
        read(p, "periods", c.propagation.periods, "propagation");
        read(p, "steps_per_period", c.propagation.steps_per_period, "propagation");
        read(p, "sample_stride", c.propagation.sample_stride, "propagation");
        read(p, "average_periods", c.propagation.average_periods, "propagation");
        read(p, "slip_periods", c.propagation.slip_periods, "propagation");
        read(p, "positivity", c.propagation.positivity, "propagation");
    }
    if (!(c.propagation.periods > 0) || c.propagation.steps_per_period < 8 ||
        c.propagation.sample_stride < 1 || !(c.propagation.average_periods > 0) ||
        !(c.propagation.slip_periods >= 0) || !(c.propagation.positivity > 0))
        throw ConfigError("propagation: need periods > 0, steps_per_period >= 8, sample_stride >= 1, "
                          "slip_periods >= 0, positivity > 0");

    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        check_keys(s, "sweep", {"f0_over_fc", "branches", "classical"});
        read(s, "f0_over_fc", c.sweep.f0_over_fc, "sweep");
        read(s, "classical", c.sweep.classical, "sweep");
        if (s.contains("branches")) {
            int k = 0;
            for (const auto& b : s.at("branches"))
                c.sweep.branches.push_back(initial_from_json(b, "sweep.branches[" + std::to_string(k++) + "]"));
        }
    }
    if (doc.contains("rates")) {
        const json& r = doc.at("rates");
        check_keys(r, "rates",
                   {"f0_over_fc", "temperatures_mK", "periods", "t1_offset_periods", "dt_fraction",
                    "t1_override_periods", "dt_override_periods", "shift_periods", "max_ring_mass"});
        read(r, "f0_over_fc", c.rates.f0_over_fc, "rates");
        read(r, "temperatures_mK", c.rates.temperatures_mK, "rates");
        read(r, "periods", c.rates.periods, "rates");
        read(r, "t1_offset_periods", c.rates.t1_offset_periods, "rates");
        read(r, "dt_fraction", c.rates.dt_fraction, "rates");
        read(r, "t1_override_periods", c.rates.t1_override_periods, "rates");
        read(r, "dt_override_periods", c.rates.dt_override_periods, "rates");
        read(r, "shift_periods", c.rates.shift_periods, "rates");
        read(r, "max_ring_mass", c.rates.max_ring_mass, "rates");
        if (!(c.rates.dt_fraction > 0 && c.rates.dt_fraction < 0.5))
            throw ConfigError("rates.dt_fraction must lie in (0, 0.5)");
    }
    if (doc.contains("wigner")) {
        const json& w = doc.at("wigner");
        check_keys(w, "wigner", {"snapshot_periods", "points", "extent"});
        read(w, "snapshot_periods", c.wigner.snapshot_periods, "wigner");
        read(w, "points", c.wigner.points, "wigner");
        read(w, "extent", c.wigner.extent, "wigner");
        if (c.wigner.points < 3) throw ConfigError("wigner.points must be >= 3");
        for (double t : c.wigner.snapshot_periods)
            if (!(t >= 0)) throw ConfigError("wigner.snapshot_periods must be >= 0");
    }
    if (doc.contains("classical")) {
        const json& k = doc.at("classical");
        check_keys(k, "classical", {"f0_over_fc", "settle_periods", "measure_periods", "include_counterterm"});
        read(k, "f0_over_fc", c.classical.f0_over_fc, "classical");
        read(k, "settle_periods", c.classical.settle_periods, "classical");
        read(k, "measure_periods", c.classical.measure_periods, "classical");
        read(k, "include_counterterm", c.classical.include_counterterm, "classical");
        if (c.classical.settle_periods < 0 || c.classical.measure_periods < 1)
            throw ConfigError("classical: settle_periods >= 0 and measure_periods >= 1");
    }
    if (doc.contains("bifurcation")) {
        const json& b = doc.at("bifurcation");
        check_keys(b, "bifurcation", {"f0_over_fc"});
        read(b, "f0_over_fc", c.bifurcation.f0_over_fc, "bifurcation");
    }
    if (doc.contains("output")) {
        const json& o = doc.at("output");
        check_keys(o, "output", {"dir", "workers"});
        std::string dir = c.out_dir.string();
        read(o, "dir", dir, "output");
        c.out_dir = dir;
        read(o, "workers", c.workers, "output");
    }
    if (c.workers < 1) throw ConfigError("output.workers must be >= 1");

    require_ratios(c.sweep.f0_over_fc, "sweep.f0_over_fc", c.scenario == Scenario::Sweep);
    require_ratios(c.rates.f0_over_fc, "rates.f0_over_fc", c.scenario == Scenario::Rates);
    require_ratios(c.classical.f0_over_fc, "classical.f0_over_fc", c.scenario == Scenario::Classical);
    require_ratios(c.bifurcation.f0_over_fc, "bifurcation.f0_over_fc", false);
    if (c.scenario == Scenario::Sweep && c.sweep.branches.empty())
        throw ConfigError("sweep.branches must not be empty");
    if (c.scenario == Scenario::Rates) {
        for (double r : c.rates.f0_over_fc)
            if (!(r < 1.0)) throw ConfigError("rates.f0_over_fc entries must be below 1");
        for (double t : c.rates.temperatures_mK)
            if (!(t >= 0.0)) throw ConfigError("rates.temperatures_mK must be >= 0");
    }

    validate(c.resolved_params());
    return c;
}

} // namespace

ExperimentConfig config_from_json(const json& doc) {
    try {
        return config_from_json_impl(doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

json physics_json(const json& doc) {
    json copy = doc;
    copy.erase("output");
    return copy;
}

std::uint64_t config_hash(const json& doc) {
    const std::string text = physics_json(doc).dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace duffing
