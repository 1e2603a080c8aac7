#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddmag/core.hpp"

// Declarative scenario configuration: an INI-style text format (key = value
// with [section] blocks, '#' or ';' comments) mapped onto typed parameter
// blocks with defaults, full-field validation, and path-qualified rejection
// messages.

namespace ddmag {

struct ConfigError : std::runtime_error {
    std::vector<std::string> details;
    explicit ConfigError(std::vector<std::string> msgs)
        : std::runtime_error(join(msgs)), details(std::move(msgs)) {}

  private:
    static std::string join(const std::vector<std::string>& msgs) {
        std::string all = "invalid configuration:";
        for (const auto& m : msgs) all += "\n  " + m;
        return all;
    }
};

inline const std::vector<std::string>& scenario_ids() {
    static const std::vector<std::string> ids = {
        "time-sweep",  "phase-deviation-sweep", "slope-vs-N",         "slope-vs-B",
        "limit-curves", "coherence-decays",     "sensitivity-report", "mc-validate"};
    return ids;
}

struct ScenarioConfig {
    std::string scenario = "time-sweep";
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir = ".";

    AcField field{0.74e-6, 200e3, 0.5 * pi, 0.0};

    Family family = Family::XY8;
    int repetitions = 1;
    double tau = 0.0;           // resolved; <= 0 means "resonance"
    double pi_width = 124e-9;
    SensorEnsemble sensor = default_sensor();

    // sweep grids
    double n_tau_min = 2e-6, n_tau_max = 40e-6;
    int n_tau_points = 381;
    std::vector<double> dphi_list{0.05 * pi, -0.05 * pi, -0.02 * pi, 0.01 * pi};
    std::vector<double> b_list{0.37e-6, 0.74e-6, 1.48e-6};
    std::vector<int> n_list{2, 4, 8};
    double dphi_min = 1e-3, dphi_max = 2.0;
    int dphi_points = 181;
    double t_total_min = 1e-2, t_total_max = 1e4;
    int t_total_points = 61;

    // monte carlo
    bool mc_enabled = false;
    std::uint64_t mc_n_measurements = 100000;
    int mc_n_trials = 100;
    double mc_dphi = 0.01 * pi;

    double resolved_tau() const { return tau > 0.0 ? tau : resonance_tau(field.frequency, pi_width); }

    DecouplingSequence sequence() const {
        return build_sequence(family, repetitions, resolved_tau(), pi_width);
    }
};

namespace config_detail {

struct RawConfig {
    // section -> key -> value; top-level keys live in section ""
    std::map<std::string, std::map<std::string, std::string>> sections;
};

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline RawConfig parse_ini(const std::string& text, std::vector<std::string>& errors) {
    RawConfig raw;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(line_no) + ": unterminated section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            raw.sections[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            errors.push_back("line " + std::to_string(line_no) + ": empty key");
            continue;
        }
        auto& sec = raw.sections[section];
        if (sec.count(key))
            errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        sec[key] = value;
    }
    return raw;
}

inline std::string qualify(const std::string& section, const std::string& key) {
    return section.empty() ? key : "[" + section + "] " + key;
}

// Pulls typed values out of one section and tracks which keys were consumed.
class SectionReader {
  public:
    SectionReader(const RawConfig& raw, std::string section, std::vector<std::string>& errors)
        : raw_(raw), section_(std::move(section)), errors_(errors) {}

    bool has(const std::string& key) const {
        auto sec = raw_.sections.find(section_);
        return sec != raw_.sections.end() && sec->second.count(key) > 0;
    }

    const std::string* get(const std::string& key) {
        consumed_.insert(key);
        auto sec = raw_.sections.find(section_);
        if (sec == raw_.sections.end()) return nullptr;
        auto it = sec->second.find(key);
        return it == sec->second.end() ? nullptr : &it->second;
    }

    void number(const std::string& key, double& out) {
        if (const std::string* v = get(key)) {
            char* end = nullptr;
            const double parsed = std::strtod(v->c_str(), &end);
            if (end == v->c_str() || *end != '\0' || !std::isfinite(parsed))
                fail(key, "not a finite number: '" + *v + "'");
            else
                out = parsed;
        }
    }

    void integer(const std::string& key, long long& out) {
        if (const std::string* v = get(key)) {
            char* end = nullptr;
            const long long parsed = std::strtoll(v->c_str(), &end, 10);
            if (end == v->c_str() || *end != '\0')
                fail(key, "not an integer: '" + *v + "'");
            else
                out = parsed;
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const std::string* v = get(key)) {
            if (*v == "true" || *v == "1")
                out = true;
            else if (*v == "false" || *v == "0")
                out = false;
            else
                fail(key, "not a boolean (true/false): '" + *v + "'");
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const std::string* v = get(key)) out = *v;
    }

    void number_list(const std::string& key, std::vector<double>& out) {
        if (const std::string* v = get(key)) {
            std::vector<double> parsed;
            for (const std::string& item : split(*v)) {
                char* end = nullptr;
                const double d = std::strtod(item.c_str(), &end);
                if (end == item.c_str() || *end != '\0' || !std::isfinite(d)) {
                    fail(key, "not a finite number: '" + item + "'");
                    return;
                }
                parsed.push_back(d);
            }
            if (parsed.empty()) {
                fail(key, "list must be nonempty");
                return;
            }
            out = parsed;
        }
    }

    void fail(const std::string& key, const std::string& why) {
        errors_.push_back(qualify(section_, key) + ": " + why);
    }

    // every key in the section must have been consumed by now
    void finish() {
        auto sec = raw_.sections.find(section_);
        if (sec == raw_.sections.end()) return;
        for (const auto& [key, value] : sec->second)
            if (!consumed_.count(key)) errors_.push_back(qualify(section_, key) + ": unknown key");
    }

    static std::vector<std::string> split(const std::string& s) {
        std::vector<std::string> out;
        std::size_t pos = 0;
        while (pos <= s.size()) {
            const std::size_t comma = s.find(',', pos);
            const std::string item =
                trim(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (!item.empty()) out.push_back(item);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return out;
    }

  private:
    const RawConfig& raw_;
    std::string section_;
    std::vector<std::string>& errors_;
    std::set<std::string> consumed_;
};

}  // namespace config_detail

// Parses and validates a configuration text.  Unset fields keep the defaulted
// defaulted XY8-1 reference scenario; every invalid field is reported with its
// section-qualified path in a single ConfigError.
inline ScenarioConfig validate_config(const std::string& raw_text) {
    using namespace config_detail;
    std::vector<std::string> errors;
    const RawConfig raw = parse_ini(raw_text, errors);

    for (const auto& [name, keys] : raw.sections) {
        static const std::set<std::string> known = {"", "field", "sequence", "sensor",
                                                   "sweep", "mc"};
        if (!known.count(name)) errors.push_back("[" + name + "]: unknown section");
    }

    ScenarioConfig cfg;

    SectionReader top(raw, "", errors);
    top.text("scenario", cfg.scenario);
    {
        long long seed = static_cast<long long>(cfg.seed);
        top.integer("seed", seed);
        if (seed < 0)
            top.fail("seed", "must be >= 0");
        else
            cfg.seed = static_cast<std::uint64_t>(seed);
        long long threads = cfg.threads;
        top.integer("threads", threads);
        if (threads < 0 || threads > 4096)
            top.fail("threads", "must be in [0, 4096] (0 = hardware)");
        else
            cfg.threads = static_cast<int>(threads);
        top.text("out_dir", cfg.out_dir);
    }
    top.finish();
    {
        bool known_id = false;
        for (const auto& id : scenario_ids()) known_id = known_id || id == cfg.scenario;
        if (!known_id) errors.push_back("scenario: unknown scenario id '" + cfg.scenario + "'");
    }

    SectionReader field(raw, "field", errors);
    field.number("amplitude_T", cfg.field.amplitude);
    field.number("frequency_Hz", cfg.field.frequency);
    field.number("initial_phase_rad", cfg.field.initial_phase);
    field.number("phase_shift_rad", cfg.field.phase_shift);
    field.finish();
    if (!(cfg.field.amplitude >= 0.0)) field.fail("amplitude_T", "must be >= 0");
    if (!(cfg.field.frequency > 0.0)) field.fail("frequency_Hz", "must be > 0");

    SectionReader seqr(raw, "sequence", errors);
    if (const std::string* fam = seqr.get("family")) {
        if (*fam == "Hahn")
            cfg.family = Family::Hahn;
        else if (*fam == "CPMG")
            cfg.family = Family::CPMG;
        else if (*fam == "XY4")
            cfg.family = Family::XY4;
        else if (*fam == "XY8")
            cfg.family = Family::XY8;
        else
            seqr.fail("family", "must be one of Hahn, CPMG, XY4, XY8: '" + *fam + "'");
    }
    {
        long long reps = cfg.repetitions;
        seqr.integer("repetitions", reps);
        if (reps < 1)
            seqr.fail("repetitions", "must be >= 1");
        else
            cfg.repetitions = static_cast<int>(reps);
    }
    if (const std::string* tau = seqr.get("tau_s")) {
        if (*tau == "resonance") {
            cfg.tau = 0.0;
        } else {
            char* end = nullptr;
            const double parsed = std::strtod(tau->c_str(), &end);
            if (end == tau->c_str() || *end != '\0' || !(parsed > 0.0))
                seqr.fail("tau_s", "must be a positive number or 'resonance': '" + *tau + "'");
            else
                cfg.tau = parsed;
        }
    }
    seqr.number("pi_width_s", cfg.pi_width);
    seqr.finish();
    if (!(cfg.pi_width >= 0.0)) seqr.fail("pi_width_s", "must be >= 0");
    if (cfg.tau > 0.0 && !(cfg.tau > cfg.pi_width)) seqr.fail("tau_s", "must exceed pi_width_s");
    if (cfg.tau <= 0.0 && cfg.field.frequency > 0.0 &&
        !(1.0 / (2.0 * cfg.field.frequency) > cfg.pi_width))
        seqr.fail("pi_width_s", "pi pulse fills the half period; no resonance tau exists");

    SectionReader sensr(raw, "sensor", errors);
    sensr.number("gamma_e", cfg.sensor.gamma_e);
    sensr.number("n_nv", cfg.sensor.n_nv);
    sensr.number("r0", cfg.sensor.r0);
    sensr.number("r1", cfg.sensor.r1);
    if (const std::string* coh = sensr.get("coherence")) {
        std::map<int, CoherenceEnvelope> table;
        bool ok = true;
        for (const std::string& item : SectionReader::split(*coh)) {
            int n = 0;
            double t2 = 0.0, p = 0.0;
            char tail = '\0';
            if (std::sscanf(item.c_str(), "%d:%lf:%lf%c", &n, &t2, &p, &tail) != 3 || n < 1 ||
                !(t2 > 0.0) || !(p > 0.0)) {
                sensr.fail("coherence", "expected N:T2_s:p with N >= 1, T2 > 0, p > 0: '" + item + "'");
                ok = false;
                break;
            }
            table[n] = {t2, p, false};
        }
        if (ok && table.empty()) sensr.fail("coherence", "list must be nonempty");
        if (ok && !table.empty()) cfg.sensor.coherence_table = std::move(table);
    }
    sensr.finish();
    if (!(cfg.sensor.gamma_e > 0.0)) sensr.fail("gamma_e", "must be > 0");
    if (!(cfg.sensor.n_nv >= 1.0)) sensr.fail("n_nv", "must be >= 1");
    if (!(cfg.sensor.r1 >= 0.0) || !(cfg.sensor.r0 > cfg.sensor.r1))
        sensr.fail("r0", "need r0 > r1 >= 0");

    SectionReader sweep(raw, "sweep", errors);
    sweep.number("n_tau_min_s", cfg.n_tau_min);
    sweep.number("n_tau_max_s", cfg.n_tau_max);
    {
        long long pts = cfg.n_tau_points;
        sweep.integer("n_tau_points", pts);
        if (pts < 2 || pts > 10000000)
            sweep.fail("n_tau_points", "must be in [2, 1e7]");
        else
            cfg.n_tau_points = static_cast<int>(pts);
    }
    sweep.number_list("dphi_list_rad", cfg.dphi_list);
    sweep.number_list("b_list_T", cfg.b_list);
    if (const std::string* nl = sweep.get("n_list")) {
        std::vector<int> parsed;
        bool ok = true;
        for (const std::string& item : SectionReader::split(*nl)) {
            char* end = nullptr;
            const long long n = std::strtoll(item.c_str(), &end, 10);
            if (end == item.c_str() || *end != '\0' || n < 1) {
                sweep.fail("n_list", "entries must be integers >= 1: '" + item + "'");
                ok = false;
                break;
            }
            parsed.push_back(static_cast<int>(n));
        }
        if (ok && parsed.empty()) sweep.fail("n_list", "list must be nonempty");
        if (ok && !parsed.empty()) cfg.n_list = std::move(parsed);
    }
    sweep.number("dphi_min_rad", cfg.dphi_min);
    sweep.number("dphi_max_rad", cfg.dphi_max);
    {
        long long pts = cfg.dphi_points;
        sweep.integer("dphi_points", pts);
        if (pts < 2 || pts > 10000000)
            sweep.fail("dphi_points", "must be in [2, 1e7]");
        else
            cfg.dphi_points = static_cast<int>(pts);
    }
    sweep.number("t_total_min_s", cfg.t_total_min);
    sweep.number("t_total_max_s", cfg.t_total_max);
    {
        long long pts = cfg.t_total_points;
        sweep.integer("t_total_points", pts);
        if (pts < 2 || pts > 10000000)
            sweep.fail("t_total_points", "must be in [2, 1e7]");
        else
            cfg.t_total_points = static_cast<int>(pts);
    }
    sweep.finish();
    if (!(cfg.n_tau_min > 0.0) || !(cfg.n_tau_max > cfg.n_tau_min))
        sweep.fail("n_tau_min_s", "need 0 < n_tau_min_s < n_tau_max_s");
    if (!(cfg.dphi_min > 0.0) || !(cfg.dphi_max > cfg.dphi_min))
        sweep.fail("dphi_min_rad", "need 0 < dphi_min_rad < dphi_max_rad");
    if (!(cfg.t_total_min > 0.0) || !(cfg.t_total_max > cfg.t_total_min))
        sweep.fail("t_total_min_s", "need 0 < t_total_min_s < t_total_max_s");
    for (double d : cfg.dphi_list)
        if (d == 0.0 || !std::isfinite(d)) {
            sweep.fail("dphi_list_rad", "entries must be finite and nonzero");
            break;
        }
    for (std::size_t i = 0; i + 1 < cfg.b_list.size(); ++i)
        if (!(cfg.b_list[i] < cfg.b_list[i + 1])) {
            sweep.fail("b_list_T", "must be strictly increasing");
            break;
        }
    for (double b : cfg.b_list)
        if (!(b > 0.0)) {
            sweep.fail("b_list_T", "entries must be > 0");
            break;
        }
    for (std::size_t i = 0; i + 1 < cfg.n_list.size(); ++i)
        if (!(cfg.n_list[i] < cfg.n_list[i + 1])) {
            sweep.fail("n_list", "must be strictly increasing");
            break;
        }

    SectionReader mc(raw, "mc", errors);
    mc.boolean("enabled", cfg.mc_enabled);
    {
        long long nm = static_cast<long long>(cfg.mc_n_measurements);
        mc.integer("n_measurements", nm);
        if (nm < 1)
            mc.fail("n_measurements", "must be >= 1");
        else
            cfg.mc_n_measurements = static_cast<std::uint64_t>(nm);
        long long trials = cfg.mc_n_trials;
        mc.integer("n_trials", trials);
        if (trials < 1 || trials > 100000000)
            mc.fail("n_trials", "must be in [1, 1e8]");
        else
            cfg.mc_n_trials = static_cast<int>(trials);
    }
    mc.number("dphi_rad", cfg.mc_dphi);
    mc.finish();

    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

}  // namespace ddmag
