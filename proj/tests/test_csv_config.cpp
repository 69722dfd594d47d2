// test_csv_config.cpp — CSV quoting and parsing, configuration documents and hashing.

#include "duffing/config.hpp"
#include "duffing/csv.hpp"
#include "duffing/errors.hpp"
#include "duffing/rwa.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

using namespace duffing;
using nlohmann::json;

TEST_CASE("field quoting") {
    CHECK(quote_field("plain") == "plain");
    CHECK(quote_field("a,b") == "\"a,b\"");
    CHECK(quote_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(quote_field("two\nlines") == "\"two\nlines\"");
    CHECK(quote_field("") == "");
}

TEST_CASE("table round trip with awkward fields") {
    CsvTable t;
    t.header = {"name", "value", "note"};
    t.rows = {{"a", "1.5", "has, comma"},
              {"b", "-2e-300", "quote \" inside"},
              {"c", "nan", "line\r\nbreak"},
              {"", "0", ""}};
    const std::string text = to_csv_string(t);
    CHECK(text.substr(0, 17) == "name,value,note\r\n");
    const CsvTable back = parse_csv(text);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    CHECK(back.column("note") == 2);
    CHECK_THROWS_AS(back.column("missing"), ConfigError);
}

TEST_CASE("numbers survive formatting exactly") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int k = 0; k < 1000; ++k) {
        const double v = std::ldexp(u(rng), static_cast<int>(u(rng) * 10));
        REQUIRE(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::isnan(parse_double(format_double(std::numeric_limits<double>::quiet_NaN()))));
    CHECK(parse_double(format_double(-std::numeric_limits<double>::infinity())) ==
          -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(parse_double("1.5x"), ConfigError);
}

TEST_CASE("parser accepts LF line ends and rejects ragged rows") {
    const CsvTable t = parse_csv("a,b\n1,2\n3,4\n");
    CHECK(t.rows.size() == 2);
    CHECK(t.numeric_column("b") == std::vector<double>{2.0, 4.0});
    CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("a,b\n\"open,2\n"), ConfigError);
}

TEST_CASE("file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "duffing_test_table.csv";
    CsvTable t;
    t.header = {"t", "x"};
    for (int k = 0; k < 10; ++k) t.rows.push_back({format_double(k * 0.1), format_double(std::sin(k))});
    write_csv(path, t);
    const CsvTable back = read_csv(path);
    CHECK(back.rows == t.rows);
    std::filesystem::remove(path);
}

TEST_CASE("config text with comments") {
    const json doc = parse_config_text(R"(// leading comment
    {
      "scenario": "transient", /* inline */
      "oscillator": { "f0_over_fc": 0.8 } // trailing
    })");
    const ExperimentConfig c = config_from_json(doc);
    CHECK(c.scenario == Scenario::Transient);
    CHECK(c.resolved_params().f0 == doctest::Approx(0.8 * critical_drive(c.params)));
    CHECK_THROWS_AS(parse_config_text("{ \"a\": }"), ConfigError);
}

TEST_CASE("preset carries the reference parameters") {
    const json preset = preset_json("paper-mesoscopic");
    const ExperimentConfig c = config_from_json(preset);
    CHECK(c.params.aleph == 12.0);
    CHECK(c.params.gamma_tilde == doctest::Approx(1.0 / 24.0));
    CHECK(c.params.delta == 0.06);
    CHECK(c.params.kappa == 0.01);
    CHECK(c.params.omega_c == 10.0);
    CHECK(c.rates.temperatures_mK.size() == 2);
    CHECK(c.rates.f0_over_fc.size() >= 6);
    CHECK(c.propagation.slip_periods == 60.0);
    CHECK(c.propagation.positivity == 1e-6);
    CHECK(c.sweep.f0_over_fc.size() == 31);
    CHECK_THROWS_AS(preset_json("nope"), ConfigError);
}

TEST_CASE("dotted overrides") {
    json doc = preset_json("paper-mesoscopic");
    apply_override(doc, "oscillator.delta=0.05");
    apply_override(doc, "bath.mode=lindblad");
    apply_override(doc, "rates.temperatures_mK=[5]");
    const ExperimentConfig c = config_from_json(doc);
    CHECK(c.params.delta == 0.05);
    CHECK(c.dissipator == DissipatorMode::LindbladThermal);
    CHECK(c.rates.temperatures_mK == std::vector<double>{5.0});
    CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
}

TEST_CASE("merge lets the patch win") {
    json base = json::parse(R"({"a": {"b": 1, "c": 2}, "d": 3})");
    merge_into(base, json::parse(R"({"a": {"c": 5}, "e": 6})"));
    CHECK(base == json::parse(R"({"a": {"b": 1, "c": 5}, "d": 3, "e": 6})"));
}

TEST_CASE("invalid documents raise config errors") {
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"oscilator": {}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"oscillator": {"aleph": -1}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"oscillator": {"delta": 2}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"oscillator": {"n_basis": "many"}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"scenario": "dance"})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"bath": {"mode": "exact"}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"oscillator": {"f0": 0.01, "f0_over_fc": 0.5}})")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"output": {"workers": 0}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"rates": {"dt_fraction": 0.7}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"propagation": {"slip_periods": -1}})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"propagation": {"positivity": 0}})")), ConfigError);
}

TEST_CASE("config hash ignores output settings and key order") {
    json a = json::parse(R"({"oscillator": {"delta": 0.06, "aleph": 12}, "output": {"dir": "x"}})");
    json b = json::parse(R"({"output": {"dir": "y", "workers": 4}, "oscillator": {"aleph": 12, "delta": 0.06}})");
    CHECK(config_hash(a) == config_hash(b));
    json c = a;
    c["oscillator"]["delta"] = 0.061;
    CHECK(config_hash(a) != config_hash(c));
    CHECK(hash_hex(config_hash(a)).size() == 16);
    CHECK(hash_hex(0xabcULL) == "0000000000000abc");
    // stable across runs: FNV-1a of the empty object text "{}"
    CHECK(config_hash(json::object()) == 0x08f44b07b5901a25ULL);
}

TEST_CASE("scenario names round trip") {
    for (Scenario s : {Scenario::Transient, Scenario::Sweep, Scenario::Wigner, Scenario::Rates,
                       Scenario::Bifurcation, Scenario::Classical})
        CHECK(parse_scenario(scenario_name(s)) == s);
}
