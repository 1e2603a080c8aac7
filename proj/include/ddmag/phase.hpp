#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ddmag/core.hpp"

// Accumulated phase under a CP-type pulse train in a single-tone AC field,
//
//   Phi = gamma_e B int_0^T y(t) cos(2 pi f t + phi) dt,
//
// where y(t) is the +/-1 sign-flip modulation of the sequence (0 during the
// pi-pulse windows; no phase accrues while the spin is being flipped).  The
// closed form evaluated here is
//
//   Phi = gamma_e B cos(pi f N s + phi) * N s
//         * [1 - cos(pi f tau_pi)/cos(pi f s)] * sin(pi f N s)/(pi f N s),
//
// with s = tau (1 + alpha) = tau + tau_pi.  It is exact for even N with
// symmetric pulse placement; for odd N it is still evaluated verbatim but the
// derivation behind it assumes an even pulse count, so odd-N results carry the
// formula's approximation (and genuinely diverge at resonance, which is
// rejected).  Resonances sit at f s = k + 1/2; there the singular factor
// [1 - cos(pi f tau_pi)/cos(pi f s)] * sin(pi f N s) has a removable limit for
// even N, evaluated via a reduced phase u = pi (f s - k - 1/2).

namespace ddmag {

// |cos(pi f s)| below this means "at resonance": inside the band, double
// precision can no longer evaluate the singular ratio directly and the
// analytic limit branch is used (even N only).
inline constexpr double resonance_epsilon = 1e-9;

// Half-width (in u) of the numerically stable reformulation around each
// resonance; well inside it the direct formula still works, so the switch is
// seamless, but the reduced form stays accurate arbitrarily close to u = 0.
inline constexpr double stable_window = 1e-2;

struct PhaseResult {
    double phi = 0.0;           // radians
    bool at_resonance = false;  // analytic limit branch taken
    double dphi_dphase = 0.0;   // d Phi / d phi_ac, radians per radian
};

namespace detail {

// Nearest resonance index k (f s ~ k + 1/2) and reduced phase u.  The
// subtraction fs - (k + 1/2) is exact near resonance (both operands within a
// factor of two), so u carries no cancellation error.
struct ReducedPhase {
    long long k;
    double u;        // pi (f s - k - 1/2), |u| <= pi/2 + eps
    double cos_thp;  // cos(pi f s) = -(-1)^k sin u, exact identity
};

inline ReducedPhase reduce_resonance_phase(double fs) {
    long long k = std::llround(fs - 0.5);
    if (k < 0) k = 0;
    const double u = pi * (fs - (static_cast<double>(k) + 0.5));
    const double parity = (k % 2 == 0) ? 1.0 : -1.0;
    return {k, u, -parity * std::sin(u)};
}

// sin(N u)/sin(u), continued to N at u = 0.
inline double dirichlet_ratio(int n, double u) {
    const double su = std::sin(u);
    if (su == 0.0) return static_cast<double>(n);
    return std::sin(n * u) / su;
}

struct PhaseEval {
    double phi;
    double dphi;
    bool at_resonance;
};

// Core evaluation shared by value and derivative paths.
inline PhaseEval eval_phase(const AcField& field, const DecouplingSequence& seq) {
    field.validate();
    seq.validate();
    const double b = field.amplitude;
    const double f = field.frequency;
    const double phase = field.total_phase();
    const int n = seq.n_pulses;
    const double s = seq.unit_spacing();
    const double t_total = seq.total_time();

    const double fs = f * s;
    const double theta_n = pi * f * t_total;               // N pi f s
    const double cos_a = std::cos(pi * f * seq.pi_width);  // cos(alpha pi f tau)
    const auto red = reduce_resonance_phase(fs);
    const bool even = (n % 2 == 0);
    const double parity_k = (red.k % 2 == 0) ? 1.0 : -1.0;

    if (std::abs(red.cos_thp) < resonance_epsilon && !even)
        throw std::domain_error(
            "closed_form_phase: odd-N formula diverges at the resonance f s = k + 1/2");

    if (even && std::abs(red.u) < stable_window) {
        // Reduced form: with Theta_N = m pi + N u (m integer for even N),
        // Phi = gamma B (T/Theta_N) cos(N u + phi)
        //        [sin(N u) + (-1)^k cos(pi f tau_pi) sin(N u)/sin(u)].
        const double bracket =
            std::sin(n * red.u) + parity_k * cos_a * dirichlet_ratio(n, red.u);
        const double common = b * (t_total / theta_n) * bracket;
        return {common * std::cos(n * red.u + phase), -common * std::sin(n * red.u + phase),
                std::abs(red.cos_thp) < resonance_epsilon};
    }

    // Direct evaluation; cos(pi f s) via the reduced identity (never worse,
    // strictly better near the band edges).
    const double bracket = (1.0 - cos_a / red.cos_thp) * std::sin(theta_n) / theta_n;
    const double common = b * t_total * bracket;
    return {common * std::cos(theta_n + phase), -common * std::sin(theta_n + phase), false};
}

}  // namespace detail

// Full result: phase, resonance flag, and the analytic derivative d Phi/d phi_ac
// (only the leading cos(Theta_N + phi) factor depends on phi_ac).
inline PhaseResult accumulated_phase(const AcField& field, const DecouplingSequence& seq,
                                     double gamma_e = gamma_e_default) {
    const auto ev = detail::eval_phase(field, seq);
    return {gamma_e * ev.phi, ev.at_resonance, gamma_e * ev.dphi};
}

inline double closed_form_phase(const AcField& field, const DecouplingSequence& seq,
                                double gamma_e = gamma_e_default) {
    return accumulated_phase(field, seq, gamma_e).phi;
}

inline double phase_derivative(const AcField& field, const DecouplingSequence& seq,
                               double gamma_e = gamma_e_default) {
    return accumulated_phase(field, seq, gamma_e).dphi_dphase;
}

// Idealized resonant slope (-1)^(N+1) (2/pi) gamma_e B N tau (1+alpha).
// Drops the cos(alpha pi f tau) finite-width factor present in the exact
// resonant limit; the two differ by ~0.3% at typical parameters.
inline double resonant_slope_approx(const AcField& field, const DecouplingSequence& seq,
                                 double gamma_e = gamma_e_default) {
    field.validate();
    seq.validate();
    const double fs = field.frequency * seq.unit_spacing();
    const auto red = detail::reduce_resonance_phase(fs);
    if (red.k != 0 || std::abs(red.cos_thp) >= resonance_epsilon)
        throw std::domain_error(
            "resonant_slope_approx: requires the fundamental resonance tau (1+alpha) = 1/(2 f_ac)");
    const double sign = (seq.n_pulses % 2 == 0) ? -1.0 : 1.0;  // (-1)^(N+1)
    return sign * (2.0 / pi) * gamma_e * field.amplitude * seq.total_time();
}

// Sequence sign-flip modulation y(t): +1 before the first pi pulse, sign flip
// after each pulse, 0 inside every pulse window [center - tau_pi/2, center + tau_pi/2].
inline int modulation_function(const DecouplingSequence& seq, double t) {
    seq.validate();
    const double t_total = seq.total_time();
    if (!(t >= 0.0) || !(t <= t_total))
        throw std::out_of_range("modulation_function: t outside [0, T]");
    const double s = seq.unit_spacing();
    long long j = std::llround(t / s - 0.5);  // nearest pulse center index
    if (j < 0) j = 0;
    if (j > seq.n_pulses - 1) j = seq.n_pulses - 1;
    const double center = (static_cast<double>(j) + 0.5) * s;
    if (std::abs(t - center) <= 0.5 * seq.pi_width) return 0;
    const long long flips = (t < center) ? j : j + 1;
    return (flips % 2 == 0) ? 1 : -1;
}

namespace detail {

struct Segment {
    double a, b;  // time span
    int sign;
};

// Constant-sign free-evolution segments of the modulation function.
inline std::vector<Segment> modulation_segments(const DecouplingSequence& seq) {
    const double s = seq.unit_spacing();
    const double w = seq.pi_width;
    const int n = seq.n_pulses;
    std::vector<Segment> segs;
    segs.reserve(n + 1);
    segs.push_back({0.0, 0.5 * s - 0.5 * w, +1});
    for (int k = 1; k < n; ++k) {
        const double a = (k - 0.5) * s + 0.5 * w;
        const double b = (k + 0.5) * s - 0.5 * w;
        segs.push_back({a, b, (k % 2 == 0) ? 1 : -1});
    }
    segs.push_back({(n - 0.5) * s + 0.5 * w, n * s, (n % 2 == 0) ? 1 : -1});
    return segs;
}

// Composite Simpson over one segment with Richardson extrapolation (one
// halving step), giving O(h^6) convergence on the smooth cosine integrand.
template <typename F>
inline double simpson_segment(F&& f, double a, double b, int intervals) {
    auto simpson = [&](int m) {
        const double h = (b - a) / m;
        double odd = 0.0, evn = 0.0;
        for (int i = 1; i < m; i += 2) odd += f(a + i * h);
        for (int i = 2; i < m; i += 2) evn += f(a + i * h);
        return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * evn);
    };
    const double s1 = simpson(intervals);
    const double s2 = simpson(2 * intervals);
    return (16.0 * s2 - s1) / 15.0;
}

}  // namespace detail

// Independent quadrature oracle for the closed form: integrates
// y(t) B cos(2 pi f t + phi) segment by segment with composite Simpson,
// interval count proportional to the number of field half-periods spanned.
inline double quadrature_phase_oracle(const AcField& field, const DecouplingSequence& seq,
                                      int nodes_per_half_period = 200,
                                      double gamma_e = gamma_e_default) {
    field.validate();
    seq.validate();
    if (nodes_per_half_period < 50)
        throw std::invalid_argument("quadrature_phase_oracle: nodes_per_half_period must be >= 50");
    const double omega = 2.0 * pi * field.frequency;
    const double phase = field.total_phase();
    auto integrand = [&](double t) { return std::cos(omega * t + phase); };
    double total = 0.0;
    for (const auto& seg : detail::modulation_segments(seq)) {
        const double half_periods = (seg.b - seg.a) * 2.0 * field.frequency;
        const int intervals =
            2 * std::max(1, static_cast<int>(std::ceil(0.5 * nodes_per_half_period * half_periods)));
        total += seg.sign * detail::simpson_segment(integrand, seg.a, seg.b, intervals);
    }
    return gamma_e * field.amplitude * total;
}

}  // namespace ddmag
