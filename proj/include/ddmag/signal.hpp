#pragma once

#include <cmath>
#include <stdexcept>

#include "ddmag/core.hpp"
#include "ddmag/phase.hpp"

// Observable magnetometry signals built on the accumulated phase: expected
// quadrature-readout signal, its linear/exact deviations under a small phase
// shift of the AC source, the per-readout measurement variance, shot-noise
// SNR, the phase sensitivity, and the linear-response phase-shift limit.

namespace ddmag {

// (-1)^(n_y + 1): sign picked up from commuting the pi_Y pulses through the
// readout quadrature.
inline double measurement_sign(const DecouplingSequence& seq) {
    return (seq.n_y() % 2 == 0) ? -1.0 : 1.0;
}

// <sigma_z> after the final pi/2_Y readout pulse (before optical detection):
// (-1)^(n_y+1) exp(-D) sin Phi.  The dark-state probability of readout branch
// A is (1 - this)/2; the 3 pi/2 branch gets the opposite sign.
inline double bloch_z_after_readout(const AcField& field, const DecouplingSequence& seq,
                                    const SensorEnsemble& sensor) {
    sensor.validate();
    const CoherenceEnvelope env = sensor.coherence(seq.n_pulses);
    const double d = env.decay_exponent(seq.free_precession_time());
    const double phi = closed_form_phase(field, seq, sensor.gamma_e);
    return measurement_sign(seq) * std::exp(-d) * std::sin(phi);
}

// S = (-1)^(n_y+1) [(1-r)/(1+r)] exp(-D) sin Phi, the normalized differential
// signal of the paired pi/2 vs 3 pi/2 quadrature readout.
inline double expected_signal(const AcField& field, const DecouplingSequence& seq,
                              const SensorEnsemble& sensor) {
    if (seq.readout != Readout::Quadrature)
        throw std::invalid_argument("expected_signal: requires quadrature readout");
    const double r = sensor.ratio();
    return (1.0 - r) / (1.0 + r) * bloch_z_after_readout(field, seq, sensor);
}

// Linearized deviation for a small extra phase shift dphi:
// dS = (-1)^(n_y+1) [(1-r)/(1+r)] exp(-D) cos(Phi) dPhi/dphi_ac dphi.
inline double signal_deviation_linear(const AcField& field, const DecouplingSequence& seq,
                                      const SensorEnsemble& sensor, double dphi) {
    if (seq.readout != Readout::Quadrature)
        throw std::invalid_argument("signal_deviation_linear: requires quadrature readout");
    sensor.validate();
    const CoherenceEnvelope env = sensor.coherence(seq.n_pulses);
    const double d = env.decay_exponent(seq.free_precession_time());
    const double r = sensor.ratio();
    const auto pr = accumulated_phase(field, seq, sensor.gamma_e);
    return measurement_sign(seq) * (1.0 - r) / (1.0 + r) * std::exp(-d) * std::cos(pr.phi) *
           pr.dphi_dphase * dphi;
}

// Exact deviation S(phi_ac + dphi) - S(phi_ac).
inline double signal_deviation_exact(const AcField& field, const DecouplingSequence& seq,
                                     const SensorEnsemble& sensor, double dphi) {
    AcField shifted = field;
    shifted.phase_shift += dphi;
    return expected_signal(shifted, seq, sensor) - expected_signal(field, seq, sensor);
}

// Un-prefactored deviations (proportionality factor and coherence envelope set
// to one), the quantity plotted against the saturation level |dS| = 1.
// The exact form is sin Phi(phi + dphi) - sin Phi(phi); the linear form uses
// the resonant approximate slope, so its unit root is exactly
// (pi/2)/(gamma B N tau (1+alpha)).
inline double raw_deviation_exact(const AcField& field, const DecouplingSequence& seq,
                                  double dphi, double gamma_e = gamma_e_default) {
    AcField shifted = field;
    shifted.phase_shift += dphi;
    return std::sin(closed_form_phase(shifted, seq, gamma_e)) -
           std::sin(closed_form_phase(field, seq, gamma_e));
}

inline double raw_deviation_linear(const AcField& field, const DecouplingSequence& seq,
                                   double dphi, double gamma_e = gamma_e_default) {
    const double phi = closed_form_phase(field, seq, gamma_e);
    return std::cos(phi) * resonant_slope_approx(field, seq, gamma_e) * dphi;
}

// dM^2 = (r0+r1)/2 + (-1)^(n_y+1) [(r0-r1)/2] exp(-D) sin Phi
//        + [(r0-r1)^2/4] [1 - exp(-2D) sin^2 Phi],
// the per-NV, per-readout variance of the optical measurement operator
// (photon shot noise plus spin projection noise).
inline double measurement_variance(const AcField& field, const DecouplingSequence& seq,
                                   const SensorEnsemble& sensor) {
    const double mid = 0.5 * (sensor.r0 + sensor.r1);
    const double half_diff = 0.5 * (sensor.r0 - sensor.r1);
    const double sz = bloch_z_after_readout(field, seq, sensor);  // carries exp(-D) sin Phi
    return mid + half_diff * sz + half_diff * half_diff * (1.0 - sz * sz);
}

struct SnrResult {
    double full = 0.0;    // sqrt(N_m N_nv) |dM| / sqrt(dM^2)
    double approx = 0.0;  // sqrt(N_m N_nv) C exp(-D) |cos Phi dPhi/dphi| |dphi|
};

inline SnrResult snr(const AcField& field, const DecouplingSequence& seq,
                     const SensorEnsemble& sensor, double dphi, double n_measurements) {
    if (!(n_measurements >= 1.0))
        throw std::invalid_argument("snr: n_measurements must be >= 1");
    sensor.validate();
    const CoherenceEnvelope env = sensor.coherence(seq.n_pulses);
    const double d = env.decay_exponent(seq.free_precession_time());
    const auto pr = accumulated_phase(field, seq, sensor.gamma_e);
    const double response = std::exp(-d) * std::abs(std::cos(pr.phi) * pr.dphi_dphase * dphi);
    const double scale = std::sqrt(n_measurements * sensor.n_nv);
    SnrResult out;
    const double half_diff = 0.5 * (sensor.r0 - sensor.r1);
    out.full = scale * half_diff * response / std::sqrt(measurement_variance(field, seq, sensor));
    out.approx = scale * sensor.contrast() * response;
    return out;
}

// eta_phi = (1/sqrt(N_nv)) pi e / (2 C gamma_e B_ac sqrt(T2(N))), the phase
// sensitivity per root hertz at the optimal interrogation time.
inline double phase_sensitivity(const SensorEnsemble& sensor, double b_ac, int n_pulses) {
    sensor.validate();
    if (!(b_ac > 0.0)) throw std::invalid_argument("phase_sensitivity: B_ac must be > 0");
    const CoherenceEnvelope env = sensor.coherence(n_pulses);
    constexpr double euler_e = 2.718281828459045235360287471352662498;
    return (1.0 / std::sqrt(sensor.n_nv)) * pi * euler_e /
           (2.0 * sensor.contrast() * sensor.gamma_e * b_ac * std::sqrt(env.t2));
}

// Minimum detectable phase shift after total measurement time t_total.
inline double minimum_detectable_phase(const SensorEnsemble& sensor, double b_ac, int n_pulses,
                                       double t_total) {
    if (!(t_total > 0.0))
        throw std::invalid_argument("minimum_detectable_phase: t_total must be > 0");
    return phase_sensitivity(sensor, b_ac, n_pulses) / std::sqrt(t_total);
}

// dphi_L = (pi/2)/(gamma_e B_ac N tau (1+alpha)): the shift at which the
// linear-response deviation saturates the full signal range.
inline double phase_shift_limit(const AcField& field, const DecouplingSequence& seq,
                                double gamma_e = gamma_e_default) {
    field.validate();
    seq.validate();
    if (!(field.amplitude > 0.0))
        throw std::invalid_argument("phase_shift_limit: B_ac must be > 0");
    return (0.5 * pi) / (gamma_e * field.amplitude * seq.total_time());
}

}  // namespace ddmag
