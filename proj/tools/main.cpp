#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <ddmag/ddmag.hpp>

// ddmag: run one named scenario and drop CSV curves plus a manifest into the
// output directory.  Flags override values from an optional INI config file.
// On success a one-line JSON status goes to stdout; any failure produces a
// machine-readable error JSON and a nonzero exit code.

namespace {

using ddmag::json;

int emit_error(const std::string& type, const std::string& message,
               const std::vector<std::string>& details, int code) {
    json err;
    err["error"] = json{{"type", type}, {"message", message}, {"details", details}};
    std::cout << err.dump(2) << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamical-decoupling AC magnetometry scenario runner"};
    app.get_formatter()->column_width(30);

    std::string scenario, config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool have_seed = false, have_threads = false;

    app.add_option("--scenario", scenario,
                   "scenario id (time-sweep, phase-deviation-sweep, slope-vs-N, slope-vs-B, "
                   "limit-curves, coherence-decays, sensitivity-report, mc-validate)");
    app.add_option("--config", config_path, "INI config file");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides config)");
    app.add_option("--out-dir", out_dir, "output directory (overrides config)");
    auto* threads_opt =
        app.add_option("--threads", threads, "worker threads, 0 = hardware (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::ostringstream silent;
        app.exit(e, silent, silent);
        return emit_error("cli", e.what(), {}, 2);
    }
    have_seed = seed_opt->count() > 0;
    have_threads = threads_opt->count() > 0;

    ddmag::ScenarioConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path, std::ios::binary);
        if (!in)
            return emit_error("config", "cannot open config file: " + config_path, {}, 1);
        std::ostringstream buf;
        buf << in.rdbuf();
        try {
            cfg = ddmag::validate_config(buf.str());
        } catch (const ddmag::ConfigError& e) {
            return emit_error("config", "invalid config file: " + config_path, e.details, 1);
        }
    }
    if (!scenario.empty()) cfg.scenario = scenario;
    if (have_seed) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (have_threads) cfg.threads = threads;

    bool known = false;
    for (const auto& id : ddmag::scenario_ids())
        if (id == cfg.scenario) known = true;
    if (!known)
        return emit_error("config", "unknown scenario: " + cfg.scenario, ddmag::scenario_ids(), 1);
    if (cfg.threads < 0 || cfg.threads > 4096)
        return emit_error("config", "threads must be in [0, 4096]", {}, 1);

    try {
        const ddmag::ScenarioResult result = ddmag::run_scenario(cfg);
        json status;
        status["status"] = "ok";
        status["scenario"] = cfg.scenario;
        status["seed"] = cfg.seed;
        status["out_dir"] = result.out_dir.string();
        status["files"] = result.files;
        std::cout << status.dump(2) << '\n';
        return 0;
    } catch (const std::exception& e) {
        return emit_error("runtime", e.what(), {}, 1);
    }
}
