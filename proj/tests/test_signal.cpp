#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <ddmag/core.hpp>
#include <ddmag/signal.hpp>

using namespace ddmag;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const AcField ref_field{0.74e-6, 200e3, 0.0, 0.0};
const DecouplingSequence xy8_res = build_sequence(Family::XY8, 1, 2.376e-6, 124e-9);
}  // namespace

TEST_CASE("readout sign bookkeeping") {
    CHECK(measurement_sign(xy8_res) == -1.0);  // n_y = 4
    CHECK(measurement_sign(build_sequence(Family::CPMG, 3, 1e-6, 0.0)) == 1.0);
    CHECK(measurement_sign(build_sequence(Family::Hahn, 1, 1e-6, 0.0)) == 1.0);
    CHECK(measurement_sign(build_sequence(Family::XY4, 1, 1e-6, 0.0)) == -1.0);  // n_y = 2
}

TEST_CASE("bloch z component after the readout pulse") {
    CHECK_THAT(bloch_z_after_readout(ref_field, xy8_res, default_sensor()),
               WithinRel(-0.86275694681474946, 1e-12));
}

TEST_CASE("expected signal at the resonance operating point") {
    CHECK_THAT(expected_signal(ref_field, xy8_res, default_sensor()),
               WithinRel(-0.035948206117281227, 1e-12));
    // sensor with r = 0.917 instead of 0.92
    SensorEnsemble s = default_sensor();
    s.r0 = 0.5;
    s.r1 = 0.917 * 0.5;
    CHECK_THAT(expected_signal(ref_field, xy8_res, s),
               WithinRel(-0.037354630456767973, 1e-12));
    // quadrature phase: no accumulation, no signal
    AcField q = ref_field;
    q.initial_phase = 0.5 * pi;
    CHECK_THAT(expected_signal(q, xy8_res, default_sensor()), WithinAbs(0.0, 1e-15));

    DecouplingSequence in_phase = xy8_res;
    in_phase.readout = Readout::InPhase;
    CHECK_THROWS_AS(expected_signal(ref_field, in_phase, default_sensor()),
                    std::invalid_argument);
}

TEST_CASE("linear deviation approaches the exact one for small shifts") {
    const auto seq = build_sequence(Family::XY8, 1, 3.0e-6, 124e-9);
    AcField f = ref_field;
    f.initial_phase = 0.9;
    const SensorEnsemble s = default_sensor();
    const double tiny = 1e-7;
    CHECK_THAT(signal_deviation_linear(f, seq, s, tiny),
               WithinRel(signal_deviation_exact(f, seq, s, tiny), 1e-5));
    // quadratic error decay: residual at dphi shrinks ~4x when dphi halves
    const double d1 = 0.02, d2 = 0.01;
    const double e1 = std::abs(signal_deviation_exact(f, seq, s, d1) -
                               signal_deviation_linear(f, seq, s, d1));
    const double e2 = std::abs(signal_deviation_exact(f, seq, s, d2) -
                               signal_deviation_linear(f, seq, s, d2));
    CHECK(e2 < 0.45 * e1);
}

TEST_CASE("raw linear deviation saturates exactly at the limit shift") {
    // at the quadrature point the |linearized deviation| = 1 root is the
    // closed-form limit phi_L
    AcField f{0.7e-6, 200e3, 0.5 * pi, 0.0};
    const double limit = phase_shift_limit(f, xy8_res);
    CHECK_THAT(limit, WithinRel(0.63718728525876138, 1e-13));
    CHECK_THAT(std::abs(raw_deviation_linear(f, xy8_res, limit)), WithinRel(1.0, 1e-12));
    const AcField f74{0.74e-6, 200e3, 0.5 * pi, 0.0};
    CHECK_THAT(phase_shift_limit(f74, xy8_res), WithinRel(0.60274472929882833, 1e-13));

    AcField zero = f;
    zero.amplitude = 0.0;
    CHECK_THROWS_AS(phase_shift_limit(zero, xy8_res), std::invalid_argument);
}

TEST_CASE("raw exact deviation is a sine difference") {
    AcField f{0.7e-6, 200e3, 0.5 * pi, 0.0};
    const double dphi = 0.3;
    AcField g = f;
    g.phase_shift += dphi;
    const double expected = std::sin(closed_form_phase(g, xy8_res)) -
                            std::sin(closed_form_phase(f, xy8_res));
    CHECK_THAT(raw_deviation_exact(f, xy8_res, dphi), WithinRel(expected, 1e-13));
}

TEST_CASE("measurement variance") {
    const SensorEnsemble s = default_sensor();
    // frozen at the resonance operating point (spin polarization -0.8628)
    CHECK_THAT(measurement_variance(ref_field, xy8_res, s),
               WithinRel(0.46284712124399417, 1e-12));
    // at the quadrature point sin Phi = 0: (r0+r1)/2 + (r0-r1)^2/4 = 0.4804
    AcField q = ref_field;
    q.initial_phase = 0.5 * pi;
    CHECK_THAT(measurement_variance(q, xy8_res, s), WithinRel(0.4804, 1e-14));
}

TEST_CASE("full and approximate SNR coincide at the quadrature point") {
    AcField q = ref_field;
    q.initial_phase = 0.5 * pi;
    const auto r = snr(q, xy8_res, default_sensor(), 0.01 * pi, 2e4);
    CHECK_THAT(r.full, WithinRel(1.4220379610442113, 1e-12));
    CHECK_THAT(r.approx, WithinRel(r.full, 1e-12));
    CHECK_THROWS_AS(snr(q, xy8_res, default_sensor(), 0.01 * pi, 0.0),
                    std::invalid_argument);
}

TEST_CASE("approximate SNR stays within 10% when N tau reaches T2") {
    // free precession time 8 * 17.5 us = T2(8) = 140 us
    const auto seq = build_sequence(Family::XY8, 1, 17.5e-6, 124e-9);
    const SensorEnsemble s = default_sensor();
    for (double phase : {0.0, 0.4, 0.9, 1.3, 2.2}) {
        AcField f = ref_field;
        f.initial_phase = phase;
        const auto r = snr(f, seq, s, 0.01 * pi, 1e4);
        if (r.full > 0.0)
            CHECK(std::abs(r.approx - r.full) <= 0.10 * r.full);
    }
}

TEST_CASE("SNR scales as the square root of the measurement count") {
    AcField q = ref_field;
    q.initial_phase = 0.5 * pi;
    const auto a = snr(q, xy8_res, default_sensor(), 0.01 * pi, 1e4);
    const auto b = snr(q, xy8_res, default_sensor(), 0.01 * pi, 4e4);
    CHECK_THAT(b.full, WithinRel(2.0 * a.full, 1e-13));
}

TEST_CASE("phase sensitivity for the high-contrast long-coherence sensor") {
    SensorEnsemble s;
    s.n_nv = 60.0;
    s.r0 = 0.50133667259453526;  // contrast 0.03 at r = 0.917
    s.r1 = 0.917 * s.r0;
    s.coherence_table = {{256, {1e-3, 1.7, false}}};
    CHECK_THAT(s.contrast(), WithinRel(0.03, 1e-12));
    CHECK_THAT(phase_sensitivity(s, 1e-6, 256), WithinRel(0.0032998389066212157, 1e-12));
    // after one second of averaging the minimum shift equals eta itself
    CHECK_THAT(minimum_detectable_phase(s, 1e-6, 256, 1.0),
               WithinRel(0.0032998389066212157, 1e-12));
    CHECK_THAT(minimum_detectable_phase(s, 1e-6, 256, 100.0),
               WithinRel(3.2998389066212157e-4, 1e-12));
    CHECK_THROWS_AS(phase_sensitivity(s, 0.0, 256), std::invalid_argument);
    CHECK_THROWS_AS(minimum_detectable_phase(s, 1e-6, 256, 0.0), std::invalid_argument);

    // default sensor at N = 8
    CHECK_THAT(phase_sensitivity(default_sensor(), 1e-6, 8),
               WithinRel(0.0091689895835099184, 1e-12));
}
