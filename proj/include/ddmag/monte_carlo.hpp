#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ddmag/core.hpp"
#include "ddmag/signal.hpp"

// Photon-counting Monte Carlo for the paired pi/2 / 3 pi/2 readout: each
// readout projects the N_nv spins (binomial on the dark-state probability)
// and the collected photons are Poisson on the resulting ensemble rate, so
// the empirical per-readout variance carries both shot noise and projection
// noise.  All randomness comes from a counter-based generator: outputs are a
// pure function of (seed, stream, counter), so any parallel execution order
// reproduces the same numbers.

namespace ddmag {

namespace rng_detail {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// ln k! via a fixed table, Stirling series beyond it.
inline double log_factorial(long k) {
    static const std::array<double, 1024> table = [] {
        std::array<double, 1024> t{};
        t[0] = 0.0;
        for (std::size_t i = 1; i < t.size(); ++i)
            t[i] = t[i - 1] + std::log(static_cast<double>(i));
        return t;
    }();
    if (k < 0) throw std::invalid_argument("log_factorial: negative argument");
    if (k < static_cast<long>(table.size())) return table[static_cast<std::size_t>(k)];
    const double n = static_cast<double>(k);
    const double inv = 1.0 / n;
    const double inv2 = inv * inv;
    return n * std::log(n) - n + 0.5 * std::log(2.0 * pi * n) +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0)));
}

}  // namespace rng_detail

// Counter-mode SplitMix64: the i-th output of stream (seed, stream) is
// mix64(key + i * gamma) with key itself a hash of (seed, stream).  Jumping
// to any counter is O(1) and substreams never share state.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(rng_detail::mix64(rng_detail::mix64(seed + rng_detail::golden_gamma) ^
                                 rng_detail::mix64(stream + 0xd6e8feb86659fd93ULL))) {}

    std::uint64_t next_u64() {
        ++counter_;
        return rng_detail::mix64(key_ + rng_detail::golden_gamma * counter_);
    }

    // [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double normal() {  // Box-Muller, cached spare
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        spare_ = rad * std::sin(2.0 * pi * u2);
        have_spare_ = true;
        return rad * std::cos(2.0 * pi * u2);
    }

    long poisson(double lambda) {
        if (!(lambda >= 0.0)) throw std::invalid_argument("poisson: lambda must be >= 0");
        if (lambda == 0.0) return 0;
        return lambda < 10.0 ? poisson_small(lambda) : poisson_ptrs(lambda);
    }

    // Exact inversion walking outward from the mode; O(sqrt(n q (1-q)))
    // expected steps and no underflow for any n.
    long binomial(long n, double q) {
        if (n < 0) throw std::invalid_argument("binomial: n must be >= 0");
        if (!(q >= 0.0) || !(q <= 1.0))
            throw std::invalid_argument("binomial: q must be in [0, 1]");
        if (n == 0 || q == 0.0) return 0;
        if (q == 1.0) return n;
        using rng_detail::log_factorial;
        const long mode = static_cast<long>(std::floor((n + 1) * q));
        const long m = std::min(mode, n);
        const double log_pm = log_factorial(n) - log_factorial(m) - log_factorial(n - m) +
                              m * std::log(q) + (n - m) * std::log1p(-q);
        const double pm = std::exp(log_pm);
        const double odds = q / (1.0 - q);
        const double u = uniform();
        double cum = pm;
        if (u < cum) return m;
        long lo = m, hi = m;
        double p_lo = pm, p_hi = pm;
        while (lo > 0 || hi < n) {
            if (hi < n) {
                p_hi *= odds * static_cast<double>(n - hi) / static_cast<double>(hi + 1);
                ++hi;
                cum += p_hi;
                if (u < cum) return hi;
            }
            if (lo > 0) {
                p_lo *= static_cast<double>(lo) / (odds * static_cast<double>(n - lo + 1));
                --lo;
                cum += p_lo;
                if (u < cum) return lo;
            }
        }
        return m;  // u landed in the ~1e-15 rounding slack; any in-range value is fine
    }

  private:
    long poisson_small(double lambda) {  // Knuth product method
        const double limit = std::exp(-lambda);
        long k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    long poisson_ptrs(double lambda) {  // Hormann transformed rejection
        using rng_detail::log_factorial;
        const double slam = std::sqrt(lambda);
        const double loglam = std::log(lambda);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::abs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            const long k = static_cast<long>(kf);
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
                k * loglam - lambda - log_factorial(k))
                return k;
        }
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---------------------------------------------------------------------------

struct McConfig {
    std::uint64_t n_measurements = 100000;  // readout pairs per experiment
    std::uint64_t seed = 0;
    int n_trials = 1;         // independent repetitions for distribution estimates
    std::uint64_t stream = 0; // substream base; trial i uses stream + i

    void validate() const {
        if (n_measurements < 1) throw std::invalid_argument("McConfig.n_measurements: must be >= 1");
        if (n_trials < 1) throw std::invalid_argument("McConfig.n_trials: must be >= 1");
        if (n_measurements > (1ULL << 40))
            throw std::invalid_argument("McConfig.n_measurements: exceeds supported range (2^40)");
    }
};

struct McOutcome {
    std::uint64_t n_pairs = 0;
    double sum_a = 0.0, sum_b = 0.0;      // total photon counts per branch
    double sumsq_a = 0.0, sumsq_b = 0.0;  // per-readout sums of squares
    double signal = 0.0;                  // (sum_a - sum_b)/(sum_a + sum_b)
    double pair_mean = 0.0;               // mean of per-pair normalized signals
    double pair_std = 0.0;                // sample std of per-pair normalized signals
};

// One paired readout.  Branch A projects with dark-state probability p_dark,
// branch B (3 pi/2 final pulse) with 1 - p_dark; each branch's photon count
// is Poisson on the rate of the projected ensemble, so the unconditional
// branch mean is N_nv [(1-p) r0 + p r1].
inline std::pair<long, long> simulate_readout_pair(double p_dark, const SensorEnsemble& sensor,
                                                   CounterRng& rng) {
    if (!(p_dark >= 0.0) || !(p_dark <= 1.0))
        throw std::invalid_argument("simulate_readout_pair: p_dark must be in [0, 1]");
    const long n_nv = std::lround(sensor.n_nv);
    const long dark_a = rng.binomial(n_nv, p_dark);
    const double lam_a = dark_a * sensor.r1 + (n_nv - dark_a) * sensor.r0;
    const long dark_b = rng.binomial(n_nv, 1.0 - p_dark);
    const double lam_b = dark_b * sensor.r1 + (n_nv - dark_b) * sensor.r0;
    return {rng.poisson(lam_a), rng.poisson(lam_b)};
}

// Aggregate n_measurements readout pairs at fixed parameters.
inline McOutcome run_experiment(const AcField& field, const DecouplingSequence& seq,
                                const SensorEnsemble& sensor, const McConfig& mc) {
    mc.validate();
    sensor.validate();
    const double sz = bloch_z_after_readout(field, seq, sensor);
    const double p_dark = std::min(1.0, std::max(0.0, 0.5 * (1.0 - sz)));
    CounterRng rng(mc.seed, mc.stream);
    McOutcome out;
    out.n_pairs = mc.n_measurements;
    double pair_sum = 0.0, pair_sumsq = 0.0;
    for (std::uint64_t i = 0; i < mc.n_measurements; ++i) {
        const auto [a, b] = simulate_readout_pair(p_dark, sensor, rng);
        const double da = static_cast<double>(a), db = static_cast<double>(b);
        out.sum_a += da;
        out.sum_b += db;
        out.sumsq_a += da * da;
        out.sumsq_b += db * db;
        const double tot = da + db;
        const double s = tot > 0.0 ? (da - db) / tot : 0.0;
        pair_sum += s;
        pair_sumsq += s * s;
    }
    const double n = static_cast<double>(mc.n_measurements);
    out.signal = (out.sum_a + out.sum_b) > 0.0
                     ? (out.sum_a - out.sum_b) / (out.sum_a + out.sum_b)
                     : 0.0;
    out.pair_mean = pair_sum / n;
    out.pair_std = n > 1.0
                       ? std::sqrt(std::max(0.0, (pair_sumsq - n * out.pair_mean * out.pair_mean) /
                                                     (n - 1.0)))
                       : 0.0;
    return out;
}

// n_trials independent repetitions; trial i draws from substream stream + i,
// so results do not depend on execution order or worker count.
inline std::vector<McOutcome> run_trials(const AcField& field, const DecouplingSequence& seq,
                                         const SensorEnsemble& sensor, const McConfig& mc) {
    mc.validate();
    std::vector<McOutcome> out(static_cast<std::size_t>(mc.n_trials));
    for (int i = 0; i < mc.n_trials; ++i) {
        McConfig one = mc;
        one.n_trials = 1;
        one.stream = mc.stream + static_cast<std::uint64_t>(i);
        out[static_cast<std::size_t>(i)] = run_experiment(field, seq, sensor, one);
    }
    return out;
}

struct SnrEstimate {
    double delta_s_mean = 0.0;  // mean empirical signal difference
    double signal_std = 0.0;    // per-experiment std from the no-shift set
    double snr = 0.0;
};

// |mean(S_shift) - mean(S_noshift)| / std(S_noshift) over trial ensembles.
inline SnrEstimate estimate_empirical_snr(const std::vector<McOutcome>& with_shift,
                                          const std::vector<McOutcome>& without_shift) {
    if (with_shift.empty() || without_shift.empty())
        throw std::invalid_argument("estimate_empirical_snr: outcome sets must be nonempty");
    auto mean_of = [](const std::vector<McOutcome>& v) {
        double s = 0.0;
        for (const auto& o : v) s += o.signal;
        return s / static_cast<double>(v.size());
    };
    const double m_shift = mean_of(with_shift);
    const double m_base = mean_of(without_shift);
    double ss = 0.0;
    for (const auto& o : without_shift) ss += (o.signal - m_base) * (o.signal - m_base);
    const double var = without_shift.size() > 1
                           ? ss / static_cast<double>(without_shift.size() - 1)
                           : 0.0;
    SnrEstimate est;
    est.delta_s_mean = m_shift - m_base;
    est.signal_std = std::sqrt(var);
    if (!(est.signal_std > 0.0))
        throw std::invalid_argument("estimate_empirical_snr: no-shift set has zero variance");
    est.snr = std::abs(est.delta_s_mean) / est.signal_std;
    return est;
}

}  // namespace ddmag
