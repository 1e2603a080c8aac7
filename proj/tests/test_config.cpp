#include <catch2/catch_amalgamated.hpp>

#include <string>

#include <ddmag/config.hpp>

using namespace ddmag;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

bool mentions(const ConfigError& e, const std::string& needle) {
    for (const auto& d : e.details)
        if (d.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("empty text yields the default scenario") {
    const ScenarioConfig cfg = validate_config("");
    CHECK(cfg.scenario == "time-sweep");
    CHECK(cfg.seed == 0);
    CHECK(cfg.threads == 1);
    CHECK(cfg.field.amplitude == 0.74e-6);
    CHECK(cfg.field.frequency == 200e3);
    CHECK(cfg.field.phase_shift == 0.0);
    CHECK(cfg.family == Family::XY8);
    CHECK(cfg.repetitions == 1);
    CHECK(cfg.tau == 0.0);
    CHECK(cfg.pi_width == 124e-9);
    CHECK(cfg.n_tau_points == 381);
    CHECK(cfg.b_list.size() == 3);
    CHECK(cfg.n_list == std::vector<int>{2, 4, 8});
    CHECK_FALSE(cfg.mc_enabled);
    // unset tau resolves to the resonance spacing
    CHECK_THAT(cfg.resolved_tau(), WithinRel(2.376e-6, 1e-12));
    CHECK(cfg.sequence().family == Family::XY8);
}

TEST_CASE("full round trip through every section") {
    const std::string text = R"(
# comment line
scenario = coherence-decays   ; trailing comment
seed = 42
threads = 2
out_dir = /tmp/somewhere

[field]
amplitude_T = 1.0e-6
frequency_Hz = 250e3
initial_phase_rad = 0.25
phase_shift_rad = 0.03

[sequence]
family = CPMG
repetitions = 4
tau_s = 3.1e-6
pi_width_s = 50e-9

[sensor]
gamma_e = 1.761e11
n_nv = 80
r0 = 0.6
r1 = 0.5
coherence = 1:74e-6:0.95, 8:140e-6:1.3

[sweep]
n_tau_min_s = 1e-6
n_tau_max_s = 30e-6
n_tau_points = 41
dphi_list_rad = 0.1, -0.1
b_list_T = 0.37e-6, 0.74e-6, 1.48e-6
n_list = 4, 16
dphi_min_rad = 1e-2
dphi_max_rad = 1.0
dphi_points = 11
t_total_min_s = 0.1
t_total_max_s = 10
t_total_points = 5

[mc]
enabled = true
n_measurements = 5000
n_trials = 10
dphi_rad = 0.05
)";
    const ScenarioConfig cfg = validate_config(text);
    CHECK(cfg.scenario == "coherence-decays");
    CHECK(cfg.seed == 42);
    CHECK(cfg.threads == 2);
    CHECK(cfg.out_dir == "/tmp/somewhere");
    CHECK(cfg.field.amplitude == 1.0e-6);
    CHECK(cfg.field.frequency == 250e3);
    CHECK(cfg.field.initial_phase == 0.25);
    CHECK(cfg.field.phase_shift == 0.03);
    CHECK(cfg.family == Family::CPMG);
    CHECK(cfg.repetitions == 4);
    CHECK(cfg.tau == 3.1e-6);
    CHECK(cfg.resolved_tau() == 3.1e-6);
    CHECK(cfg.pi_width == 50e-9);
    CHECK(cfg.sensor.gamma_e == 1.761e11);
    CHECK(cfg.sensor.n_nv == 80);
    CHECK(cfg.sensor.r0 == 0.6);
    CHECK(cfg.sensor.r1 == 0.5);
    REQUIRE(cfg.sensor.coherence_table.size() == 2);
    CHECK(cfg.sensor.coherence_table.at(1).t2 == 74e-6);
    CHECK(cfg.sensor.coherence_table.at(8).p == 1.3);
    CHECK(cfg.n_tau_min == 1e-6);
    CHECK(cfg.n_tau_points == 41);
    CHECK(cfg.dphi_list == std::vector<double>{0.1, -0.1});
    CHECK(cfg.b_list == std::vector<double>{0.37e-6, 0.74e-6, 1.48e-6});
    CHECK(cfg.n_list == std::vector<int>{4, 16});
    CHECK(cfg.dphi_points == 11);
    CHECK(cfg.t_total_points == 5);
    CHECK(cfg.mc_enabled);
    CHECK(cfg.mc_n_measurements == 5000);
    CHECK(cfg.mc_n_trials == 10);
    CHECK(cfg.mc_dphi == 0.05);
}

TEST_CASE("explicit resonance keyword keeps tau unresolved") {
    const ScenarioConfig cfg = validate_config("[sequence]\ntau_s = resonance\n");
    CHECK(cfg.tau == 0.0);
    CHECK_THAT(cfg.resolved_tau(), WithinRel(2.376e-6, 1e-12));
}

TEST_CASE("rejections carry section-qualified paths") {
    try {
        validate_config("[field]\nfrequency_Hz = 0\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.details.size() == 1);
        CHECK_THAT(e.details[0], ContainsSubstring("[field] frequency_Hz"));
        CHECK_THAT(e.what(), ContainsSubstring("invalid configuration"));
    }

    try {
        validate_config("[sequence]\ntau_s = -2e-6\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "[sequence] tau_s"));
    }
}

TEST_CASE("all problems are reported in one pass") {
    const std::string text = R"(
scenario = no-such-thing
seed = -3
[field]
amplitude_T = -1e-6
frequency_Hz = nonsense
[sweep]
n_tau_points = 1
[typo_section]
foo = 1
)";
    try {
        validate_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.details.size() >= 5);
        CHECK(mentions(e, "unknown scenario id"));
        CHECK(mentions(e, "seed"));
        CHECK(mentions(e, "amplitude_T"));
        CHECK(mentions(e, "frequency_Hz"));
        CHECK(mentions(e, "n_tau_points"));
        CHECK(mentions(e, "[typo_section]"));
    }
}

TEST_CASE("unknown and duplicate keys are rejected") {
    try {
        validate_config("[field]\namplitud_T = 1e-6\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "unknown key"));
        CHECK(mentions(e, "amplitud_T"));
    }
    try {
        validate_config("seed = 1\nseed = 2\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "duplicate key"));
    }
    CHECK_THROWS_AS(validate_config("just some words\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[unterminated\n"), ConfigError);
}

TEST_CASE("sequence constraints") {
    // tau must leave room for the pulse
    CHECK_THROWS_AS(validate_config("[sequence]\ntau_s = 100e-9\npi_width_s = 124e-9\n"),
                    ConfigError);
    // a pulse longer than the half period leaves no resonance spacing
    CHECK_THROWS_AS(validate_config("[sequence]\npi_width_s = 3e-6\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[sequence]\nfamily = XY16\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[sequence]\nrepetitions = 0\n"), ConfigError);
}

TEST_CASE("sensor constraints") {
    CHECK_THROWS_AS(validate_config("[sensor]\nr0 = 0.4\nr1 = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[sensor]\nn_nv = 0\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[sensor]\ncoherence = 8:140e-6\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[sensor]\ncoherence = 0:140e-6:1.3\n"), ConfigError);
}

TEST_CASE("grid constraints") {
    CHECK_THROWS_AS(validate_config("[sweep]\nn_tau_min_s = 5e-6\nn_tau_max_s = 2e-6\n"),
                    ConfigError);
    CHECK_THROWS_AS(validate_config("[sweep]\nb_list_T = 0.74e-6, 0.37e-6\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[sweep]\nn_list = 8, 4\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[sweep]\ndphi_list_rad = 0.1, 0\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[sweep]\ndphi_list_rad =\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[mc]\nn_trials = 0\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("[mc]\nenabled = maybe\n"), ConfigError);
    CHECK_THROWS_AS(validate_config("threads = 9999\n"), ConfigError);
}
