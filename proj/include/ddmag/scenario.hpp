#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ddmag/config.hpp"
#include "ddmag/core.hpp"
#include "ddmag/density_matrix.hpp"
#include "ddmag/fit.hpp"
#include "ddmag/monte_carlo.hpp"
#include "ddmag/phase.hpp"
#include "ddmag/signal.hpp"

// Scenario runner: maps a validated ScenarioConfig onto CSV curve files plus
// a JSON manifest carrying the fully resolved configuration, the seed, and
// derived constants.  Sweep points are evaluated by a worker pool but always
// written in grid order, and all randomness is counter-seeded per point, so
// output files are byte-identical for a given (config, seed) at any thread
// count.

namespace ddmag {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// deterministic grids and parallel evaluation

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = a + (b - a) * (static_cast<double>(i) / (n - 1));
    return out;
}

inline std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> out = linspace(std::log(a), std::log(b), n);
    for (double& v : out) v = std::exp(v);
    return out;
}

// Index-addressed parallel loop; workers pull indices from a shared counter
// and write into caller-owned slots, so results never depend on scheduling.
template <typename Fn>
inline void parallel_for(std::size_t n, int threads, Fn&& fn) {
    int t = threads <= 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads;
    if (t < 1) t = 1;
    if (static_cast<std::size_t>(t) > n) t = static_cast<int>(n == 0 ? 1 : n);
    if (t == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// CSV output, 17 significant digits, newline-terminated rows

namespace scenario_detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write output file: " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void row_numbers(const std::vector<double>& cells) {
        std::vector<std::string> text;
        text.reserve(cells.size());
        for (double v : cells) text.push_back(fmt17(v));
        row(text);
    }

  private:
    std::ofstream out_;
};

// N=1 -> Hahn, N=2k -> CPMG, multiples of 4/8 -> XY4/XY8 repetitions.
inline DecouplingSequence sequence_for_n(int n, double tau, double pi_width) {
    if (n == 1) return build_sequence(Family::Hahn, 1, tau, pi_width);
    if (n % 8 == 0) return build_sequence(Family::XY8, n / 8, tau, pi_width);
    if (n % 4 == 0) return build_sequence(Family::XY4, n / 4, tau, pi_width);
    return build_sequence(Family::CPMG, n, tau, pi_width);
}

inline json field_json(const AcField& f) {
    return json{{"amplitude_T", f.amplitude},
                {"frequency_Hz", f.frequency},
                {"initial_phase_rad", f.initial_phase},
                {"phase_shift_rad", f.phase_shift}};
}

inline json config_json(const ScenarioConfig& cfg) {
    json coherence = json::array();
    for (const auto& [n, env] : cfg.sensor.coherence_table)
        coherence.push_back(json{{"n", n}, {"t2_s", env.t2}, {"p", env.p}});
    // thread count and output paths are execution detail, not part of the
    // scientific record; leaving them out keeps reruns byte-identical
    return json{
        {"scenario", cfg.scenario},
        {"seed", cfg.seed},
        {"field", field_json(cfg.field)},
        {"sequence",
         {{"family", family_name(cfg.family)},
          {"repetitions", cfg.repetitions},
          {"tau_s", cfg.resolved_tau()},
          {"pi_width_s", cfg.pi_width},
          {"n_pulses", cfg.sequence().n_pulses}}},
        {"sensor",
         {{"gamma_e", cfg.sensor.gamma_e},
          {"n_nv", cfg.sensor.n_nv},
          {"r0", cfg.sensor.r0},
          {"r1", cfg.sensor.r1},
          {"coherence", coherence}}},
        {"sweep",
         {{"n_tau_min_s", cfg.n_tau_min},
          {"n_tau_max_s", cfg.n_tau_max},
          {"n_tau_points", cfg.n_tau_points},
          {"dphi_list_rad", cfg.dphi_list},
          {"b_list_T", cfg.b_list},
          {"n_list", cfg.n_list},
          {"dphi_min_rad", cfg.dphi_min},
          {"dphi_max_rad", cfg.dphi_max},
          {"dphi_points", cfg.dphi_points},
          {"t_total_min_s", cfg.t_total_min},
          {"t_total_max_s", cfg.t_total_max},
          {"t_total_points", cfg.t_total_points}}},
        {"mc",
         {{"enabled", cfg.mc_enabled},
          {"n_measurements", cfg.mc_n_measurements},
          {"n_trials", cfg.mc_n_trials},
          {"dphi_rad", cfg.mc_dphi}}}};
}

inline json derived_json(const ScenarioConfig& cfg) {
    const DecouplingSequence seq = cfg.sequence();
    json derived;
    derived["alpha"] = seq.alpha();
    derived["contrast"] = cfg.sensor.contrast();
    if (cfg.field.amplitude > 0.0)
        derived["delta_phi_L"] = phase_shift_limit(cfg.field, seq, cfg.sensor.gamma_e);
    else
        derived["delta_phi_L"] = nullptr;
    try {
        derived["eta_phi"] =
            phase_sensitivity(cfg.sensor, cfg.field.amplitude, seq.n_pulses);
    } catch (const std::exception&) {
        derived["eta_phi"] = nullptr;
    }
    return derived;
}

// Per-point Monte Carlo signal statistics over cfg.mc_n_trials experiments.
struct McPointStats {
    double mean = 0.0;
    double std = 0.0;
};

inline McPointStats mc_point_stats(const AcField& field, const DecouplingSequence& seq,
                                   const ScenarioConfig& cfg, std::uint64_t point_stream) {
    McConfig mc;
    mc.n_measurements = cfg.mc_n_measurements;
    mc.seed = cfg.seed;
    mc.n_trials = cfg.mc_n_trials;
    mc.stream = point_stream;
    const auto outcomes = run_trials(field, seq, cfg.sensor, mc);
    double sum = 0.0;
    for (const auto& o : outcomes) sum += o.signal;
    const double mean = sum / static_cast<double>(outcomes.size());
    double ss = 0.0;
    for (const auto& o : outcomes) ss += (o.signal - mean) * (o.signal - mean);
    const double var =
        outcomes.size() > 1 ? ss / static_cast<double>(outcomes.size() - 1) : 0.0;
    return {mean, std::sqrt(var)};
}

}  // namespace scenario_detail

struct ScenarioResult {
    std::filesystem::path out_dir;
    std::vector<std::string> files;  // relative to out_dir, manifest last
    json manifest;
};

// ---------------------------------------------------------------------------

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    using namespace scenario_detail;
    namespace fs = std::filesystem;

    cfg.field.validate();
    cfg.sensor.validate();
    const DecouplingSequence base_seq = cfg.sequence();

    const fs::path out_dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec && !fs::is_directory(out_dir))
        throw std::runtime_error("cannot create output directory: " + out_dir.string());

    ScenarioResult result;
    result.out_dir = out_dir;
    json manifest;
    manifest["tool"] = "ddmag";
    manifest["version"] = version_string;
    manifest["scenario"] = cfg.scenario;
    manifest["seed"] = cfg.seed;
    manifest["config"] = config_json(cfg);
    manifest["derived"] = derived_json(cfg);
    json outputs = json::array();

    auto add_file = [&](const std::string& name, json meta = json::object()) {
        meta["file"] = name;
        outputs.push_back(std::move(meta));
        result.files.push_back(name);
    };

    const int n_pulses = base_seq.n_pulses;

    if (cfg.scenario == "time-sweep") {
        // Signal vs free precession time N tau at fixed pulse count.
        const std::vector<double> grid = linspace(cfg.n_tau_min, cfg.n_tau_max, cfg.n_tau_points);
        if (!(grid.front() / n_pulses > cfg.pi_width))
            throw std::runtime_error(
                "time-sweep: invalid grid, n_tau_min_s/N must exceed the pulse width");
        struct Row {
            double n_tau = 0, tau = 0, phi = 0, signal = 0, oracle = 0, mc_mean = 0, mc_std = 0;
        };
        std::vector<Row> rows(grid.size());
        parallel_for(grid.size(), cfg.threads, [&](std::size_t i) {
            DecouplingSequence seq = base_seq;
            seq.tau = grid[i] / n_pulses;
            Row& r = rows[i];
            r.n_tau = grid[i];
            r.tau = seq.tau;
            r.phi = closed_form_phase(cfg.field, seq, cfg.sensor.gamma_e);
            r.signal = expected_signal(cfg.field, seq, cfg.sensor);
            r.oracle = simulate_signal(cfg.field, seq, cfg.sensor);
            if (cfg.mc_enabled) {
                const auto stats =
                    mc_point_stats(cfg.field, seq, cfg, static_cast<std::uint64_t>(i) << 32);
                r.mc_mean = stats.mean;
                r.mc_std = stats.std;
            }
        });
        std::vector<std::string> header = {"n_tau_s", "tau_s", "phi_rad", "signal",
                                           "signal_oracle"};
        if (cfg.mc_enabled) {
            header.push_back("mc_mean");
            header.push_back("mc_std");
        }
        CsvWriter csv(out_dir / "time_sweep.csv", header);
        for (const Row& r : rows) {
            std::vector<double> cells = {r.n_tau, r.tau, r.phi, r.signal, r.oracle};
            if (cfg.mc_enabled) {
                cells.push_back(r.mc_mean);
                cells.push_back(r.mc_std);
            }
            csv.row_numbers(cells);
        }
        add_file("time_sweep.csv");

    } else if (cfg.scenario == "phase-deviation-sweep") {
        // Deviation dS vs N tau, one curve per configured phase shift.
        const std::vector<double> grid = linspace(cfg.n_tau_min, cfg.n_tau_max, cfg.n_tau_points);
        if (!(grid.front() / n_pulses > cfg.pi_width))
            throw std::runtime_error(
                "phase-deviation-sweep: invalid grid, n_tau_min_s/N must exceed the pulse width");
        for (std::size_t c = 0; c < cfg.dphi_list.size(); ++c) {
            const double dphi = cfg.dphi_list[c];
            struct Row {
                double n_tau = 0, lin = 0, exact = 0, mc_mean = 0, mc_std = 0;
            };
            std::vector<Row> rows(grid.size());
            parallel_for(grid.size(), cfg.threads, [&](std::size_t i) {
                DecouplingSequence seq = base_seq;
                seq.tau = grid[i] / n_pulses;
                Row& r = rows[i];
                r.n_tau = grid[i];
                r.lin = signal_deviation_linear(cfg.field, seq, cfg.sensor, dphi);
                r.exact = signal_deviation_exact(cfg.field, seq, cfg.sensor, dphi);
                if (cfg.mc_enabled) {
                    const std::uint64_t stream =
                        (static_cast<std::uint64_t>(c) << 48) | (static_cast<std::uint64_t>(i) << 32);
                    McConfig mc;
                    mc.n_measurements = cfg.mc_n_measurements;
                    mc.seed = cfg.seed;
                    mc.n_trials = cfg.mc_n_trials;
                    mc.stream = stream;
                    AcField shifted = cfg.field;
                    shifted.phase_shift += dphi;
                    const auto base = run_trials(cfg.field, seq, cfg.sensor, mc);
                    McConfig mc2 = mc;
                    mc2.stream = stream | (1ULL << 63);
                    const auto shift = run_trials(shifted, seq, cfg.sensor, mc2);
                    double sum = 0.0, ss = 0.0;
                    for (std::size_t t = 0; t < base.size(); ++t) {
                        const double ds = shift[t].signal - base[t].signal;
                        sum += ds;
                        ss += ds * ds;
                    }
                    const double n_tr = static_cast<double>(base.size());
                    r.mc_mean = sum / n_tr;
                    r.mc_std = n_tr > 1.0 ? std::sqrt(std::max(0.0, (ss - n_tr * r.mc_mean * r.mc_mean) /
                                                                        (n_tr - 1.0)))
                                          : 0.0;
                }
            });
            std::vector<std::string> header = {"n_tau_s", "ds_linear", "ds_exact"};
            if (cfg.mc_enabled) {
                header.push_back("mc_mean");
                header.push_back("mc_std");
            }
            const std::string name = "deviation_sweep_" + std::to_string(c) + ".csv";
            CsvWriter csv(out_dir / name, header);
            for (const Row& r : rows) {
                std::vector<double> cells = {r.n_tau, r.lin, r.exact};
                if (cfg.mc_enabled) {
                    cells.push_back(r.mc_mean);
                    cells.push_back(r.mc_std);
                }
                csv.row_numbers(cells);
            }
            add_file(name, json{{"dphi_rad", dphi}});
        }

    } else if (cfg.scenario == "slope-vs-N" || cfg.scenario == "slope-vs-B") {
        // Resonant response slope against pulse number (fixed field) or field
        // amplitude (fixed sequence), each with its deviation-vs-dphi curve.
        struct Curve {
            int n;
            double b;
            std::string file;
        };
        std::vector<Curve> curves;
        if (cfg.scenario == "slope-vs-N") {
            for (int n : cfg.n_list)
                curves.push_back({n, cfg.field.amplitude, "deviation_vs_dphi_n" +
                                                              std::to_string(n) + ".csv"});
        } else {
            for (std::size_t i = 0; i < cfg.b_list.size(); ++i)
                curves.push_back({n_pulses, cfg.b_list[i],
                                  "deviation_vs_dphi_b" + std::to_string(i) + ".csv"});
        }
        double dphi_span = 0.0;
        for (double d : cfg.dphi_list) dphi_span = std::max(dphi_span, std::abs(d));
        if (dphi_span == 0.0) dphi_span = 0.05 * pi;
        const std::vector<double> dgrid = linspace(-dphi_span, dphi_span, 101);

        CsvWriter summary(out_dir / "slope_summary.csv",
                          {"n_pulses", "b_ac_T", "slope_exact_rad_per_rad",
                           "slope_approx_rad_per_rad", "relative_gap"});
        add_file("slope_summary.csv");
        for (const auto& curve : curves) {
            const double tau = resonance_tau(cfg.field.frequency, cfg.pi_width);
            const DecouplingSequence seq = sequence_for_n(curve.n, tau, cfg.pi_width);
            AcField field = cfg.field;
            field.amplitude = curve.b;
            const double slope_exact = phase_derivative(field, seq, cfg.sensor.gamma_e);
            const double slope_approx = resonant_slope_approx(field, seq, cfg.sensor.gamma_e);
            summary.row_numbers({static_cast<double>(curve.n), curve.b, slope_exact, slope_approx,
                                 slope_exact / slope_approx - 1.0});

            // coherence may be interpolated for pulse numbers off the table
            std::vector<std::array<double, 3>> rows(dgrid.size());
            parallel_for(dgrid.size(), cfg.threads, [&](std::size_t i) {
                rows[i] = {dgrid[i], signal_deviation_linear(field, seq, cfg.sensor, dgrid[i]),
                           signal_deviation_exact(field, seq, cfg.sensor, dgrid[i])};
            });
            CsvWriter csv(out_dir / curve.file, {"dphi_rad", "ds_linear", "ds_exact"});
            for (const auto& r : rows) csv.row_numbers({r[0], r[1], r[2]});
            add_file(curve.file, json{{"n_pulses", curve.n},
                                      {"b_ac_T", curve.b},
                                      {"slope_exact_rad_per_rad", slope_exact},
                                      {"slope_approx_rad_per_rad", slope_approx}});
        }

    } else if (cfg.scenario == "limit-curves") {
        // |dS| vs dphi with the linear-response saturation level |dS| = 1:
        // one family over pulse number, one over field amplitude.
        struct Curve {
            int n;
            double b;
        };
        std::vector<Curve> curves;
        for (int n : cfg.n_list) curves.push_back({n, cfg.field.amplitude});
        for (double b : cfg.b_list) curves.push_back({n_pulses, b});
        const std::vector<double> dgrid = logspace(cfg.dphi_min, cfg.dphi_max, cfg.dphi_points);
        for (std::size_t c = 0; c < curves.size(); ++c) {
            const double tau = resonance_tau(cfg.field.frequency, cfg.pi_width);
            const DecouplingSequence seq = sequence_for_n(curves[c].n, tau, cfg.pi_width);
            AcField field = cfg.field;
            field.amplitude = curves[c].b;
            std::vector<std::array<double, 3>> rows(dgrid.size());
            parallel_for(dgrid.size(), cfg.threads, [&](std::size_t i) {
                rows[i] = {dgrid[i],
                           std::abs(raw_deviation_linear(field, seq, dgrid[i], cfg.sensor.gamma_e)),
                           std::abs(raw_deviation_exact(field, seq, dgrid[i], cfg.sensor.gamma_e))};
            });
            const std::string name = "limit_curve_" + std::to_string(c) + ".csv";
            CsvWriter csv(out_dir / name, {"dphi_rad", "raw_linear_abs", "raw_exact_abs"});
            for (const auto& r : rows) csv.row_numbers({r[0], r[1], r[2]});
            add_file(name, json{{"n_pulses", curves[c].n},
                                {"b_ac_T", curves[c].b},
                                {"delta_phi_L",
                                 phase_shift_limit(field, seq, cfg.sensor.gamma_e)}});
        }

    } else if (cfg.scenario == "coherence-decays") {
        // Synthetic decay data per tabulated pulse number, refit with the
        // stretched-exponential model.
        json fits = json::array();
        std::size_t idx = 0;
        for (const auto& [n, env] : cfg.sensor.coherence_table) {
            const std::vector<double> grid = linspace(0.02 * env.t2, 2.2 * env.t2, 60);
            const double noise_sigma = 0.02;
            CounterRng rng(cfg.seed, static_cast<std::uint64_t>(idx) << 32);
            Dataset data;
            std::vector<double> envelope(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                envelope[i] = env.envelope(grid[i]);
                data.x.push_back(grid[i]);
                data.y.push_back(envelope[i] + noise_sigma * rng.normal());
                data.y_err.push_back(noise_sigma);
            }
            FitResult fit = fit_coherence(data, 1.0, grid[grid.size() / 2], 1.0);
            const std::string name = "coherence_n" + std::to_string(n) + ".csv";
            CsvWriter csv(out_dir / name, {"n_tau_s", "envelope", "synthetic", "fitted"});
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double fitted =
                    fit.parameters[0] *
                    std::exp(-std::pow(grid[i] / fit.parameters[1], fit.parameters[2]));
                csv.row_numbers({grid[i], envelope[i], data.y[i], fitted});
            }
            add_file(name, json{{"n_pulses", n}});
            fits.push_back(json{{"n_pulses", n},
                                {"t2_true_s", env.t2},
                                {"p_true", env.p},
                                {"noise_sigma", noise_sigma},
                                {"amplitude_fit", fit.parameters[0]},
                                {"t2_fit_s", fit.parameters[1]},
                                {"p_fit", fit.parameters[2]},
                                {"amplitude_err", fit.std_errors[0]},
                                {"t2_err_s", fit.std_errors[1]},
                                {"p_err", fit.std_errors[2]},
                                {"converged", fit.converged},
                                {"iterations", fit.iterations}});
            ++idx;
        }
        manifest["fits"] = fits;

    } else if (cfg.scenario == "sensitivity-report") {
        // Minimum detectable phase shift vs total measurement time.
        const std::vector<double> grid =
            logspace(cfg.t_total_min, cfg.t_total_max, cfg.t_total_points);
        const double eta = phase_sensitivity(cfg.sensor, cfg.field.amplitude, n_pulses);
        CsvWriter csv(out_dir / "sensitivity.csv", {"t_total_s", "dphi_min_rad"});
        for (double t : grid)
            csv.row_numbers({t, minimum_detectable_phase(cfg.sensor, cfg.field.amplitude,
                                                         n_pulses, t)});
        add_file("sensitivity.csv");
        manifest["eta_phi"] = eta;
        manifest["t2_s"] = cfg.sensor.coherence(n_pulses).t2;

    } else if (cfg.scenario == "mc-validate") {
        // Monte Carlo trial ensembles with and without the phase shift,
        // against the analytic variance and SNR.
        McConfig mc;
        mc.n_measurements = cfg.mc_n_measurements;
        mc.seed = cfg.seed;
        mc.n_trials = cfg.mc_n_trials;
        mc.stream = 0;
        const auto base = run_trials(cfg.field, base_seq, cfg.sensor, mc);
        McConfig mc_shift = mc;
        mc_shift.stream = static_cast<std::uint64_t>(mc.n_trials);
        AcField shifted = cfg.field;
        shifted.phase_shift += cfg.mc_dphi;
        const auto shift = run_trials(shifted, base_seq, cfg.sensor, mc_shift);

        auto write_trials = [&](const std::string& name, const std::vector<McOutcome>& set) {
            CsvWriter csv(out_dir / name, {"trial", "signal", "pair_mean", "pair_std"});
            for (std::size_t i = 0; i < set.size(); ++i)
                csv.row_numbers({static_cast<double>(i), set[i].signal, set[i].pair_mean,
                                 set[i].pair_std});
            add_file(name);
        };
        write_trials("mc_base.csv", base);
        write_trials("mc_shift.csv", shift);

        // pooled per-readout variance of branch A, per NV
        double sum = 0.0, sumsq = 0.0, count = 0.0;
        for (const auto& o : base) {
            sum += o.sum_a;
            sumsq += o.sumsq_a;
            count += static_cast<double>(o.n_pairs);
        }
        const double mean = sum / count;
        const double var = (sumsq - count * mean * mean) / (count - 1.0);
        const auto est = estimate_empirical_snr(shift, base);
        // each pair holds two readouts, so the analytic SNR is evaluated at
        // n_measurements = 2 * pairs
        const auto analytic =
            snr(cfg.field, base_seq, cfg.sensor, cfg.mc_dphi,
                2.0 * static_cast<double>(mc.n_measurements));
        manifest["mc_summary"] =
            json{{"n_pairs", mc.n_measurements},
                 {"n_trials", mc.n_trials},
                 {"dphi_rad", cfg.mc_dphi},
                 {"expected_signal", expected_signal(cfg.field, base_seq, cfg.sensor)},
                 {"empirical_variance_per_nv", var / cfg.sensor.n_nv},
                 {"analytic_variance", measurement_variance(cfg.field, base_seq, cfg.sensor)},
                 {"empirical_snr", est.snr},
                 {"empirical_delta_s", est.delta_s_mean},
                 {"empirical_signal_std", est.signal_std},
                 {"analytic_snr_full", analytic.full},
                 {"analytic_snr_approx", analytic.approx},
                 {"analytic_n_measurements", 2.0 * static_cast<double>(mc.n_measurements)}};

    } else {
        throw std::runtime_error("unknown scenario: " + cfg.scenario);
    }

    manifest["outputs"] = outputs;
    result.manifest = manifest;

    std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
    if (!mf) throw std::runtime_error("cannot write output file: " + (out_dir / "manifest.json").string());
    mf << manifest.dump(2) << '\n';
    result.files.push_back("manifest.json");
    return result;
}

}  // namespace ddmag
