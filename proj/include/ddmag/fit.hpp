#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddmag/core.hpp"
#include "ddmag/signal.hpp"

// Damped least squares (Levenberg-Marquardt) with a numerical Jacobian, plus
// the two concrete fits used throughout: magnetometry sweeps for (B_ac,
// phi_ac) and stretched-exponential coherence decays for (A, T2, p).

namespace ddmag {

struct Dataset {
    std::vector<double> x;      // sweep variable (seconds or radians)
    std::vector<double> y;      // signal
    std::vector<double> y_err;  // per-point standard deviation

    std::size_t size() const { return x.size(); }

    void validate(std::size_t n_params) const {
        if (y.size() != x.size() || y_err.size() != x.size())
            throw std::invalid_argument("Dataset: x, y, y_err must have equal lengths");
        if (x.size() < n_params + 1)
            throw std::invalid_argument("Dataset: need more points than fit parameters");
        for (double e : y_err)
            if (!(e > 0.0)) throw std::invalid_argument("Dataset: y_err must be > 0");
    }
};

using ModelFunc = std::function<double(double x, const std::vector<double>& params)>;

struct FitOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-10;  // inf-norm of the weighted gradient
    double step_tol = 1e-12;      // relative step size
    double damping_init_scale = 1e-3;  // times max diag(J^T W J)
    double jacobian_rel_step = 1e-6;
    double jacobian_step_floor = 1e-12;
    bool uniform_weights = false;  // ignore y_err, weight all points equally
};

// Centered-difference Jacobian, step max(rel |p_j|, floor) per parameter.
inline Eigen::MatrixXd numerical_jacobian(const ModelFunc& model,
                                          const std::vector<double>& params,
                                          const std::vector<double>& xs,
                                          double rel_step = 1e-6, double step_floor = 1e-12) {
    const std::size_t n = xs.size(), np = params.size();
    Eigen::MatrixXd jac(n, np);
    std::vector<double> p = params;
    for (std::size_t j = 0; j < np; ++j) {
        const double h = std::max(rel_step * std::abs(params[j]), step_floor);
        p[j] = params[j] + h;
        std::vector<double> hi(n);
        for (std::size_t i = 0; i < n; ++i) hi[i] = model(xs[i], p);
        p[j] = params[j] - h;
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = model(xs[i], p);
            const double d = (hi[i] - lo) / (2.0 * h);
            if (!std::isfinite(d))
                throw std::runtime_error("numerical_jacobian: non-finite model output");
            jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
        }
        p[j] = params[j];
    }
    return jac;
}

namespace fit_detail {

inline double chi2_of(const ModelFunc& model, const Dataset& data,
                      const std::vector<double>& params, const std::vector<double>& w) {
    double chi2 = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = (data.y[i] - model(data.x[i], params)) * w[i];
        chi2 += r * r;
    }
    return chi2;
}

}  // namespace fit_detail

inline FitResult levenberg_marquardt(const ModelFunc& model, const Dataset& data,
                                     const std::vector<double>& init,
                                     const std::vector<std::string>& names,
                                     const FitOptions& opt = {}) {
    const std::size_t np = init.size();
    data.validate(np);
    if (names.size() != np)
        throw std::invalid_argument("levenberg_marquardt: names/init size mismatch");

    std::vector<double> w(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        w[i] = opt.uniform_weights ? 1.0 : 1.0 / data.y_err[i];

    std::vector<double> params = init;
    double chi2 = fit_detail::chi2_of(model, data, params, w);
    if (!std::isfinite(chi2))
        throw std::runtime_error("levenberg_marquardt: model not finite at initial parameters");

    const auto np_i = static_cast<Eigen::Index>(np);
    double damping = -1.0;  // set from the first J^T J
    bool converged = false;
    int iter = 0;
    Eigen::MatrixXd jac;

    for (; iter < opt.max_iterations; ++iter) {
        jac = numerical_jacobian(model, params, data.x, opt.jacobian_rel_step,
                                 opt.jacobian_step_floor);
        for (std::size_t i = 0; i < data.size(); ++i)
            jac.row(static_cast<Eigen::Index>(i)) *= w[i];
        Eigen::VectorXd resid(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            resid(static_cast<Eigen::Index>(i)) = (data.y[i] - model(data.x[i], params)) * w[i];
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * resid;

        if (grad.cwiseAbs().maxCoeff() < opt.gradient_tol) {
            converged = true;
            break;
        }
        if (damping < 0.0) damping = opt.damping_init_scale * jtj.diagonal().maxCoeff();

        bool accepted = false;
        while (!accepted && damping < 1e30) {
            Eigen::MatrixXd a = jtj;
            a.diagonal().array() += damping;
            const Eigen::VectorXd step = a.ldlt().solve(grad);
            if (!step.allFinite()) {
                damping *= 10.0;
                continue;
            }
            std::vector<double> trial = params;
            for (std::size_t j = 0; j < np; ++j) trial[j] += step(static_cast<Eigen::Index>(j));
            const double trial_chi2 = fit_detail::chi2_of(model, data, trial, w);
            if (std::isfinite(trial_chi2) && trial_chi2 < chi2) {
                double pnorm = 0.0;
                for (double v : params) pnorm += v * v;
                const double rel_step =
                    step.norm() / std::max(std::sqrt(pnorm), 1e-300);
                params = trial;
                chi2 = trial_chi2;
                damping /= 10.0;
                accepted = true;
                if (rel_step < opt.step_tol) converged = true;
            } else {
                damping *= 10.0;
            }
        }
        if (!accepted) {
            // damping exhausted: no step of any length improves chi2 within
            // double rounding, i.e. the iterate sits at the numerical floor
            // of the objective; that is convergence in practice (the hard
            // gradient_tol is only reachable for well-scaled parameters)
            converged = true;
            break;
        }
        if (converged) break;
    }

    FitResult out;
    out.names = names;
    out.parameters = params;
    out.converged = converged;
    out.iterations = iter;
    out.chi2 = chi2;
    out.residual_norm = std::sqrt(chi2);

    // Covariance from the Jacobian at the optimum: (J^T W J)^(-1).
    jac = numerical_jacobian(model, params, data.x, opt.jacobian_rel_step, opt.jacobian_step_floor);
    for (std::size_t i = 0; i < data.size(); ++i)
        jac.row(static_cast<Eigen::Index>(i)) *= w[i];
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::MatrixXd cov = jtj.ldlt().solve(Eigen::MatrixXd::Identity(np_i, np_i));
    // LDLT quietly returns finite junk for a rank-deficient normal matrix, so
    // verify the solve actually inverted it.  Legitimate ill-conditioned fits
    // leave residuals of order cond * eps (~1e-3 for tesla-scaled problems);
    // a dead parameter direction leaves order one.
    const double inv_resid =
        (jtj * cov - Eigen::MatrixXd::Identity(np_i, np_i)).cwiseAbs().maxCoeff();
    if (!cov.allFinite() || inv_resid > 0.1)
        throw std::runtime_error("levenberg_marquardt: singular Jacobian at the optimum");
    out.covariance.resize(np * np);
    out.std_errors.resize(np);
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t j = 0; j < np; ++j)
            out.covariance[i * np + j] =
                cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        out.std_errors[i] = std::sqrt(std::max(0.0, out.cov(i, i)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Magnetometry fit: free (B_ac, phi_ac), x = free precession time N tau.

// Model closure for a time sweep: tau = x/N with the pulse width, pattern and
// field frequency fixed; the coherence envelope follows the sweep point.
inline ModelFunc magnetometry_model(const AcField& field_template,
                                    const DecouplingSequence& seq_template,
                                    const SensorEnsemble& sensor) {
    return [field_template, seq_template, sensor](double x, const std::vector<double>& p) {
        AcField f = field_template;
        f.amplitude = std::abs(p[0]);
        f.initial_phase = p[1];
        DecouplingSequence seq = seq_template;
        seq.tau = x / seq.n_pulses;
        const double sig = expected_signal(f, seq, sensor);
        // odd symmetry keeps the model smooth through B = 0
        return p[0] < 0.0 ? -sig : sig;
    };
}

inline FitResult fit_magnetometry(const Dataset& data, const AcField& field_template,
                                  const DecouplingSequence& seq_template,
                                  const SensorEnsemble& sensor, double init_b, double init_phi,
                                  const FitOptions& opt = {}) {
    auto model = magnetometry_model(field_template, seq_template, sensor);
    FitResult res = levenberg_marquardt(model, data, {init_b, init_phi}, {"b_ac", "phi_ac"}, opt);
    // Resolve the (B, phi) <-> (-B, phi + pi) degeneracy: B_ac >= 0, phi in [0, 2 pi).
    if (res.parameters[0] < 0.0) {
        res.parameters[0] = -res.parameters[0];
        res.parameters[1] += pi;
    }
    res.parameters[1] -= 2.0 * pi * std::floor(res.parameters[1] / (2.0 * pi));
    return res;
}

// Coarse basin screen before the local fit: LM on this model is local and a
// badly scaled B guess can land in an aliased oscillation minimum, so try a
// small deterministic grid of B scalings and phase offsets around the guess
// and descend from the best.
inline FitResult fit_magnetometry_robust(const Dataset& data, const AcField& field_template,
                                         const DecouplingSequence& seq_template,
                                         const SensorEnsemble& sensor, double init_b,
                                         double init_phi, const FitOptions& opt = {}) {
    auto model = magnetometry_model(field_template, seq_template, sensor);
    std::vector<double> w(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        w[i] = opt.uniform_weights ? 1.0 : 1.0 / data.y_err[i];
    double best_b = init_b, best_phi = init_phi, best_chi2 = HUGE_VAL;
    for (double scale : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        for (double dphi : {0.0, 0.5 * pi, pi, 1.5 * pi}) {
            const double c2 =
                fit_detail::chi2_of(model, data, {init_b * scale, init_phi + dphi}, w);
            if (c2 < best_chi2) {
                best_chi2 = c2;
                best_b = init_b * scale;
                best_phi = init_phi + dphi;
            }
        }
    }
    return fit_magnetometry(data, field_template, seq_template, sensor, best_b, best_phi, opt);
}

// ---------------------------------------------------------------------------
// Stretched-exponential coherence fit: y = A exp[-(x/T2)^p].

inline ModelFunc coherence_model() {
    return [](double x, const std::vector<double>& p) {
        if (!(p[1] > 0.0) || !(p[2] > 0.0)) return std::nan("");  // reject unphysical steps
        return p[0] * std::exp(-std::pow(x / p[1], p[2]));
    };
}

inline FitResult fit_coherence(const Dataset& data, double init_amplitude, double init_t2,
                               double init_p, const FitOptions& opt = {}) {
    return levenberg_marquardt(coherence_model(), data, {init_amplitude, init_t2, init_p},
                               {"amplitude", "t2", "p"}, opt);
}

}  // namespace ddmag
