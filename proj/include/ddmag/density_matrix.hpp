#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "ddmag/core.hpp"
#include "ddmag/phase.hpp"

// Explicit two-level density-matrix propagation: optical initialization into
// |0><0|, ideal pulse rotations R_axis(theta) = exp(-i theta sigma_axis / 2),
// z-axis phase accrual gamma_e int B dt over each free segment, a single
// exp(-D) damping of the coherences, and the diagonal optical measurement
// operator.  Serves as an independent oracle for the closed-form signal chain.

namespace ddmag {

using Matrix2c = Eigen::Matrix2cd;

namespace pauli {
inline const Matrix2c& x() {
    static const Matrix2c m = (Matrix2c() << 0, 1, 1, 0).finished();
    return m;
}
inline const Matrix2c& y() {
    static const Matrix2c m =
        (Matrix2c() << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0).finished();
    return m;
}
inline const Matrix2c& z() {
    static const Matrix2c m = (Matrix2c() << 1, 0, 0, -1).finished();
    return m;
}
}  // namespace pauli

struct SpinState {
    Matrix2c rho;

    double expect(const Matrix2c& op) const { return (rho * op).trace().real(); }
    double purity() const { return (rho * rho).trace().real(); }

    void validate(double tol = 1e-12) const {
        if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol)
            throw std::runtime_error("SpinState: trace must be 1");
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
            throw std::runtime_error("SpinState: rho must be Hermitian");
        Eigen::SelfAdjointEigenSolver<Matrix2c> es(rho);
        if (es.eigenvalues().minCoeff() < -tol || es.eigenvalues().maxCoeff() > 1.0 + tol)
            throw std::runtime_error("SpinState: eigenvalues must lie in [0, 1]");
    }
};

// rho_i = |0><0| = (1 + sigma_z)/2
inline SpinState initialize() {
    SpinState s;
    s.rho = (Matrix2c() << 1, 0, 0, 0).finished();
    return s;
}

inline Matrix2c rotation_operator(const Matrix2c& sigma_axis, double angle) {
    return std::cos(0.5 * angle) * Matrix2c::Identity() -
           std::complex<double>(0, 1) * std::sin(0.5 * angle) * sigma_axis;
}

inline const Matrix2c& axis_sigma(Axis axis) {
    return axis == Axis::X ? pauli::x() : pauli::y();
}

inline SpinState apply_rotation(const SpinState& state, const Matrix2c& sigma_axis, double angle) {
    const Matrix2c u = rotation_operator(sigma_axis, angle);
    return {u * state.rho * u.adjoint()};
}

inline SpinState apply_half_pi(const SpinState& state, Axis axis) {
    return apply_rotation(state, axis_sigma(axis), 0.5 * pi);
}

inline SpinState apply_pi(const SpinState& state, Axis axis) {
    return apply_rotation(state, axis_sigma(axis), pi);
}

inline SpinState apply_z_rotation(const SpinState& state, double angle) {
    return apply_rotation(state, pauli::z(), angle);
}

// Damp the off-diagonal elements by exp(-d).
inline SpinState apply_decoherence(const SpinState& state, double d) {
    SpinState out = state;
    const double damp = std::exp(-d);
    out.rho(0, 1) *= damp;
    out.rho(1, 0) *= damp;
    return out;
}

// Propagate an equatorial state through the pulse train: exact z-rotation by
// gamma_e int B dt over each free segment, an ideal pi pulse about the
// pattern axis between segments, no field accrual inside pulse windows, and
// the exp(-D) envelope (D over the free precession time N tau) applied once
// at the end.
inline SpinState evolve_through_sequence(const SpinState& state, const AcField& field,
                                         const DecouplingSequence& seq,
                                         const CoherenceEnvelope& coherence,
                                         double gamma_e = gamma_e_default) {
    field.validate();
    seq.validate();
    coherence.validate();
    const double omega = 2.0 * pi * field.frequency;
    const double phase = field.total_phase();
    const auto segments = detail::modulation_segments(seq);
    SpinState s = state;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& seg = segments[k];
        const double theta = gamma_e * field.amplitude *
                             (std::sin(omega * seg.b + phase) - std::sin(omega * seg.a + phase)) /
                             omega;
        s = apply_z_rotation(s, theta);
        if (k + 1 < segments.size()) s = apply_pi(s, seq.phase_pattern[k]);
    }
    return apply_decoherence(s, coherence.decay_exponent(seq.free_precession_time()));
}

struct MeasurementOperator {
    double bright = 0.0;  // photons for |0>
    double dark = 0.0;    // photons for |1>

    double expectation(const SpinState& state) const {
        return bright * state.rho(0, 0).real() + dark * state.rho(1, 1).real();
    }
};

// <M> = r0 rho_00 + r1 rho_11 for the state after the final readout pulse.
inline double measure_expectation(const SpinState& state, const SensorEnsemble& sensor) {
    return MeasurementOperator{sensor.r0, sensor.r1}.expectation(state);
}

// Full pipeline for one readout branch: (pi/2)_X preparation, the decoupling
// sequence, a final Y rotation by final_angle (pi/2 for branch A, 3 pi/2 for
// branch B), then <M>.
inline double simulate_branch_expectation(const AcField& field, const DecouplingSequence& seq,
                                          const SensorEnsemble& sensor, double final_angle) {
    const CoherenceEnvelope env = sensor.coherence(seq.n_pulses);
    SpinState s = initialize();
    s = apply_half_pi(s, Axis::X);
    s = evolve_through_sequence(s, field, seq, env, sensor.gamma_e);
    s = apply_rotation(s, pauli::y(), final_angle);
    return measure_expectation(s, sensor);
}

// Normalized differential signal (<M>_A - <M>_B)/(<M>_A + <M>_B) from the
// paired pi/2 / 3 pi/2 readout; equals the closed-form expected signal.
inline double simulate_signal(const AcField& field, const DecouplingSequence& seq,
                              const SensorEnsemble& sensor) {
    const double a = simulate_branch_expectation(field, seq, sensor, 0.5 * pi);
    const double b = simulate_branch_expectation(field, seq, sensor, 1.5 * pi);
    return (a - b) / (a + b);
}

// Dark-state probability rho_11 after the final readout pulse; feeds the
// photon-counting Monte Carlo.
inline double simulate_branch_dark_probability(const AcField& field, const DecouplingSequence& seq,
                                               const SensorEnsemble& sensor, double final_angle) {
    const CoherenceEnvelope env = sensor.coherence(seq.n_pulses);
    SpinState s = initialize();
    s = apply_half_pi(s, Axis::X);
    s = evolve_through_sequence(s, field, seq, env, sensor.gamma_e);
    s = apply_rotation(s, pauli::y(), final_angle);
    return s.rho(1, 1).real();
}

}  // namespace ddmag
