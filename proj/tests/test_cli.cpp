#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <ddmag/ddmag.hpp>

// Drives the installed binary end to end through a shell, the way a user would.

namespace fs = std::filesystem;
using ddmag::json;
using Catch::Matchers::ContainsSubstring;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string out;
};

CliRun run_cli(const std::string& args) {
    const std::string cmd = std::string(DDMAG_BIN) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliRun r;
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ddmag_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("ddmag_cli_" + name + ".ini");
    std::ofstream out(p, std::ios::binary);
    out << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string small_run = R"(
scenario = time-sweep
seed = 1
[sweep]
n_tau_points = 11
[mc]
enabled = true
n_measurements = 200
n_trials = 5
)";

}  // namespace

TEST_CASE("help text") {
    const CliRun r = run_cli("--help");
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("--scenario"));
    CHECK_THAT(r.out, ContainsSubstring("--seed"));
}

TEST_CASE("a full run reports status json and writes the manifest") {
    const fs::path cfg = write_config("run", small_run);
    const fs::path dir = fresh_dir("run");
    const CliRun r = run_cli("--config " + cfg.string() + " --out-dir " + dir.string() +
                             " --seed 3");
    REQUIRE(r.exit_code == 0);
    const json status = json::parse(r.out);
    CHECK(status.at("status") == "ok");
    CHECK(status.at("scenario") == "time-sweep");
    CHECK(status.at("seed") == 3);  // flag wins over the config file
    CHECK(status.at("files").back() == "manifest.json");

    const json manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest.at("seed") == 3);
    CHECK(manifest.at("tool") == "ddmag");
}

TEST_CASE("reruns are byte-identical across worker counts") {
    const fs::path cfg = write_config("det", small_run);
    const fs::path a = fresh_dir("det_a");
    const fs::path b = fresh_dir("det_b");
    REQUIRE(run_cli("--config " + cfg.string() + " --out-dir " + a.string() +
                    " --threads 1").exit_code == 0);
    REQUIRE(run_cli("--config " + cfg.string() + " --out-dir " + b.string() +
                    " --threads 4").exit_code == 0);
    CHECK(slurp(a / "time_sweep.csv") == slurp(b / "time_sweep.csv"));
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
}

TEST_CASE("config errors are machine readable") {
    const fs::path cfg = write_config("bad", "[field]\nfrequency_Hz = 0\n");
    const CliRun r = run_cli("--config " + cfg.string());
    CHECK(r.exit_code == 1);
    const json err = json::parse(r.out);
    CHECK(err.at("error").at("type") == "config");
    REQUIRE_FALSE(err.at("error").at("details").empty());
    CHECK_THAT(err.at("error").at("details")[0].get<std::string>(),
               ContainsSubstring("frequency_Hz"));
}

TEST_CASE("missing config file") {
    const CliRun r = run_cli("--config /nonexistent/nowhere.ini");
    CHECK(r.exit_code == 1);
    CHECK(json::parse(r.out).at("error").at("type") == "config");
}

TEST_CASE("unknown flag exits with a cli error") {
    const CliRun r = run_cli("--frobnicate 3");
    CHECK(r.exit_code == 2);
    CHECK(json::parse(r.out).at("error").at("type") == "cli");
}

TEST_CASE("unknown scenario lists the valid ids") {
    const CliRun r = run_cli("--scenario bogus");
    CHECK(r.exit_code == 1);
    const json err = json::parse(r.out);
    CHECK(err.at("error").at("type") == "config");
    CHECK(err.at("error").at("details").size() == 8);
}

TEST_CASE("scenario failures surface as runtime errors") {
    // grid leaves no room for the pi pulse, rejected at run time
    const fs::path cfg =
        write_config("rt", "scenario = time-sweep\n[sweep]\nn_tau_min_s = 0.5e-6\n");
    const fs::path dir = fresh_dir("rt");
    const CliRun r = run_cli("--config " + cfg.string() + " --out-dir " + dir.string());
    CHECK(r.exit_code == 1);
    const json err = json::parse(r.out);
    CHECK(err.at("error").at("type") == "runtime");
    CHECK_THAT(err.at("error").at("message").get<std::string>(),
               ContainsSubstring("invalid grid"));
}
