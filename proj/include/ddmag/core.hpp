#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types for AC magnetometry with a two-level spin sensor under
// multipulse dynamical decoupling.  All quantities are SI internally: tesla,
// seconds, hertz, radians.

namespace ddmag {

inline constexpr const char* version_string = "1.0.0";

// Free-electron gyromagnetic ratio, rad s^-1 T^-1.  The NV g-factor (~2.003)
// differs by ~0.1%; override per sensor if that matters.
inline constexpr double gamma_e_default = 1.760859644e11;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// ---------------------------------------------------------------------------
// AC field  B(t) = B_ac cos(2 pi f_ac t + phi_ac + dphi_ac)

struct AcField {
    double amplitude = 0.0;      // B_ac, tesla
    double frequency = 0.0;      // f_ac, hertz
    double initial_phase = 0.0;  // phi_ac, radians
    double phase_shift = 0.0;    // dphi_ac, radians (the quantity being sensed)

    double total_phase() const { return initial_phase + phase_shift; }

    void validate() const {
        if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
            throw std::invalid_argument("AcField.amplitude: must be finite and >= 0");
        if (!(frequency > 0.0) || !std::isfinite(frequency))
            throw std::invalid_argument("AcField.frequency: must be finite and > 0");
        if (!std::isfinite(initial_phase))
            throw std::invalid_argument("AcField.initial_phase: must be finite");
        if (!std::isfinite(phase_shift))
            throw std::invalid_argument("AcField.phase_shift: must be finite");
    }
};

// ---------------------------------------------------------------------------
// Decoupling sequences

enum class Family { Hahn, CPMG, XY4, XY8 };
enum class Axis : std::uint8_t { X, Y };
enum class Readout { InPhase, Quadrature };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Hahn: return "Hahn";
        case Family::CPMG: return "CPMG";
        case Family::XY4: return "XY4";
        case Family::XY8: return "XY8";
    }
    return "?";
}

// Pulse timeline convention: with s = tau*(1+alpha) = tau + tau_pi, the k-th
// pi-pulse center sits at (k + 1/2)*s after the initial pi/2 pulse.  Free
// evolution gaps are tau/2 at both ends and tau between adjacent pulses, the
// symmetric CP placement.  Total evolution time T = N*s.
struct DecouplingSequence {
    Family family = Family::XY8;
    int n_pulses = 0;                  // N
    double tau = 0.0;                  // inter-pulse interval, seconds
    double pi_width = 0.0;             // tau_pi, seconds
    std::vector<Axis> phase_pattern;   // per-pulse rotation axis, length N
    Readout readout = Readout::Quadrature;

    double alpha() const { return pi_width / tau; }
    double unit_spacing() const { return tau + pi_width; }           // s
    double total_time() const { return n_pulses * unit_spacing(); }  // T
    double free_precession_time() const { return n_pulses * tau; }   // N*tau
    double pulse_center(int k) const { return (k + 0.5) * unit_spacing(); }

    int n_y() const {
        return static_cast<int>(std::count(phase_pattern.begin(), phase_pattern.end(), Axis::Y));
    }
    int n_x() const { return n_pulses - n_y(); }

    void validate() const {
        if (n_pulses < 1)
            throw std::invalid_argument("DecouplingSequence.n_pulses: must be >= 1");
        if (!(tau > 0.0) || !std::isfinite(tau))
            throw std::invalid_argument("DecouplingSequence.tau: must be finite and > 0");
        if (!(pi_width >= 0.0) || !(tau > pi_width))
            throw std::invalid_argument("DecouplingSequence.pi_width: need tau > pi_width >= 0");
        if (phase_pattern.size() != static_cast<std::size_t>(n_pulses))
            throw std::invalid_argument("DecouplingSequence.phase_pattern: length must equal n_pulses");
    }
};

// tau such that tau + tau_pi = 1/(2 f_ac), the phase-accumulation resonance
// spacing.  No valid tau exists once the pulse fills the half period.
inline double resonance_tau(double f_ac, double pi_width) {
    if (!(f_ac > 0.0)) throw std::invalid_argument("resonance_tau: f_ac must be > 0");
    if (!(pi_width >= 0.0)) throw std::invalid_argument("resonance_tau: pi_width must be >= 0");
    const double half_period = 1.0 / (2.0 * f_ac);
    if (!(half_period > pi_width))
        throw std::invalid_argument("resonance_tau: half period 1/(2 f_ac) must exceed pi_width");
    return half_period - pi_width;
}

inline std::vector<Axis> family_unit_pattern(Family family) {
    using enum Axis;
    switch (family) {
        case Family::Hahn: return {Y};
        case Family::CPMG: return {Y};
        case Family::XY4: return {X, Y, X, Y};
        case Family::XY8: return {X, Y, X, Y, Y, X, Y, X};
    }
    throw std::invalid_argument("family_unit_pattern: unknown family");
}

inline DecouplingSequence build_sequence(Family family, int repetitions, double tau,
                                         double pi_width) {
    if (repetitions < 1)
        throw std::invalid_argument("build_sequence: repetitions must be >= 1");
    if (family == Family::Hahn && repetitions != 1)
        throw std::invalid_argument("build_sequence: Hahn takes exactly one repetition");
    DecouplingSequence seq;
    seq.family = family;
    seq.tau = tau;
    seq.pi_width = pi_width;
    const std::vector<Axis> unit = family_unit_pattern(family);
    seq.phase_pattern.reserve(unit.size() * repetitions);
    for (int r = 0; r < repetitions; ++r)
        seq.phase_pattern.insert(seq.phase_pattern.end(), unit.begin(), unit.end());
    seq.n_pulses = static_cast<int>(seq.phase_pattern.size());
    seq.validate();
    return seq;
}

// ---------------------------------------------------------------------------
// Stretched-exponential coherence envelope exp(-D), D = (t/T2)^p

struct CoherenceEnvelope {
    double t2 = 0.0;           // seconds
    double p = 1.0;            // stretch exponent
    bool interpolated = false; // true when synthesized between measured N

    double decay_exponent(double t) const {  // D(t)
        if (t <= 0.0) return 0.0;
        return std::pow(t / t2, p);
    }
    double envelope(double t) const { return std::exp(-decay_exponent(t)); }

    void validate() const {
        if (!(t2 > 0.0) || !std::isfinite(t2))
            throw std::invalid_argument("CoherenceEnvelope.t2: must be finite and > 0");
        if (!(p > 0.0) || !std::isfinite(p))
            throw std::invalid_argument("CoherenceEnvelope.p: must be finite and > 0");
    }
};

// ---------------------------------------------------------------------------
// Sensor ensemble

struct SensorEnsemble {
    double gamma_e = gamma_e_default;  // rad s^-1 T^-1
    double n_nv = 60.0;                // NV centers contributing
    double r0 = 0.50;                  // mean photons/readout, bright (|0>)
    double r1 = 0.46;                  // mean photons/readout, dark (|1>)
    std::map<int, CoherenceEnvelope> coherence_table;  // N -> (T2, p)

    double ratio() const { return r1 / r0; }  // r

    // C = [1 + 2(r0+r1)/(r0-r1)^2]^(-1/2), evaluated in the cancellation-free
    // form (r0-r1)/sqrt((r0-r1)^2 + 2(r0+r1)).
    double contrast() const {
        const double d = r0 - r1;
        if (!(d > 0.0))
            throw std::invalid_argument("SensorEnsemble.contrast: need r0 > r1");
        return d / std::sqrt(d * d + 2.0 * (r0 + r1));
    }

    // Coherence for a pulse number N.  Exact table hits are returned as-is;
    // otherwise T2 and p are interpolated linearly in ln N (T2 in log space,
    // preserving the power-law trend of measured coherence times) between the
    // bracketing entries, extrapolating from the end segments, and flagged.
    CoherenceEnvelope coherence(int n) const {
        auto it = coherence_table.find(n);
        if (it != coherence_table.end()) return it->second;
        if (coherence_table.size() < 2)
            throw std::out_of_range("SensorEnsemble.coherence: no entry for N=" +
                                    std::to_string(n) + " and too few entries to interpolate");
        if (n < 1) throw std::out_of_range("SensorEnsemble.coherence: N must be >= 1");
        auto hi = coherence_table.lower_bound(n);
        if (hi == coherence_table.begin()) ++hi;           // extrapolate below
        if (hi == coherence_table.end()) --hi;             // extrapolate above
        auto lo = std::prev(hi);
        const double x = std::log(static_cast<double>(n));
        const double x0 = std::log(static_cast<double>(lo->first));
        const double x1 = std::log(static_cast<double>(hi->first));
        const double w = (x - x0) / (x1 - x0);
        CoherenceEnvelope out;
        out.t2 = std::exp((1.0 - w) * std::log(lo->second.t2) + w * std::log(hi->second.t2));
        out.p = (1.0 - w) * lo->second.p + w * hi->second.p;
        out.interpolated = true;
        return out;
    }

    void validate() const {
        if (!(gamma_e > 0.0) || !std::isfinite(gamma_e))
            throw std::invalid_argument("SensorEnsemble.gamma_e: must be finite and > 0");
        if (!(n_nv >= 1.0))
            throw std::invalid_argument("SensorEnsemble.n_nv: must be >= 1");
        if (!(r1 >= 0.0) || !(r0 > r1))
            throw std::invalid_argument("SensorEnsemble.r0/r1: need r0 > r1 >= 0");
        for (const auto& [n, env] : coherence_table) {
            if (n < 1)
                throw std::invalid_argument("SensorEnsemble.coherence_table: N must be >= 1");
            env.validate();
        }
    }
};

inline double contrast(const SensorEnsemble& sensor) { return sensor.contrast(); }

// Measured coherence times (T2, p) per pulse number for the default sensor:
// Hahn echo plus CPMG-2, XY4-1, XY8-1 and the longer CPMG trains.
inline std::map<int, CoherenceEnvelope> default_coherence_table() {
    return {
        {1, {74e-6, 0.95}},  {2, {95e-6, 1.11}},  {4, {124e-6, 1.21}},
        {8, {140e-6, 0.97}}, {32, {340e-6, 1.3}}, {128, {650e-6, 1.2}},
        {256, {1.2e-3, 1.7}},
    };
}

inline SensorEnsemble default_sensor() {
    SensorEnsemble s;
    s.coherence_table = default_coherence_table();
    return s;
}

// ---------------------------------------------------------------------------
// Per-sweep-point results

struct SignalPoint {
    double free_precession_time = 0.0;  // N*tau, seconds
    double phi = 0.0;                   // accumulated phase, radians
    double signal = 0.0;                // S, dimensionless
    double deviation_linear = 0.0;      // linearized dS for the configured dphi
    double deviation_exact = 0.0;       // exact dS
    double variance = 0.0;              // dM^2, photons^2 (per NV per readout)
    double snr = 0.0;
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> parameters;
    std::vector<double> std_errors;
    std::vector<double> covariance;  // row-major n x n
    double residual_norm = 0.0;      // sqrt(chi^2) of weighted residuals
    double chi2 = 0.0;
    bool converged = false;
    int iterations = 0;

    std::size_t size() const { return parameters.size(); }
    double cov(std::size_t i, std::size_t j) const { return covariance[i * size() + j]; }
};

}  // namespace ddmag
