#pragma once

// High-accuracy low-rank tensor completion (HaLRTC): ADMM on the weighted
// sum of trace norms of the three mode-n unfoldings. Every iteration runs an
// SVD on each full I_n x (product of other extents) unfolding, which is what
// the factor-matrix formulation in cpd_lrtc.hpp avoids.

#include <lrtc/completion.hpp>
#include <lrtc/svt.hpp>
#include <lrtc/tensor.hpp>

#include <algorithm>
#include <chrono>
#include <limits>
#include <string>

namespace lrtc {

struct HalrtcConfig {
    std::array<double, 3> alpha{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    PenaltySchedule penalty;
    /// Derive mu0 from the data instead of using penalty.mu0: the first
    /// thresholds alpha_n / mu0 are set to half the smallest leading singular
    /// value of the observed unfoldings. A fixed mu0 is scale dependent; when
    /// it is too small every unfolding thresholds to zero, X never moves and
    /// the residual rule stops at iteration 1.
    bool auto_mu0 = true;
    double epsilon = 1e-4;
    int max_iters  = 500;

    void validate() const {
        detail::check_weights(alpha);
        penalty.validate();
        detail::check_stopping(epsilon, max_iters);
    }
};

/// Initial penalty under `HalrtcConfig::auto_mu0`.
[[nodiscard]] inline double halrtc_initial_mu(const Tensor3 &observed,
                                              const std::array<double, 3> &alpha) {
    double smallest = std::numeric_limits<double>::infinity();
    for (int mode = 1; mode <= 3; ++mode) {
        Eigen::BDCSVD<Matrix> svd(unfold(observed, mode));
        smallest = std::min(smallest, svd.singularValues()(0));
    }
    const double heaviest = *std::max_element(alpha.begin(), alpha.end());
    if (!(smallest > 0.0) || !std::isfinite(smallest))
        return 1.0;
    return heaviest / (0.5 * smallest);
}

[[nodiscard]] inline CompletionReport
complete_halrtc(const Tensor3 &truth, const Mask &mask, const HalrtcConfig &cfg,
                const IterationObserver &observer = {}) {
    detail::check_problem(truth, mask);
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const Shape dims = truth.dims();
    const Index size = dims.size();

    CompletionReport report;
    Tensor3 x = project(truth, mask, true);
    const double scale = detail::residual_scale(x);
    std::array<std::vector<double>, 3> duals;
    for (auto &y : duals)
        y.assign(size, 0.0);
    std::array<std::vector<double>, 3> aux;
    double mu = cfg.auto_mu0 ? halrtc_initial_mu(x, cfg.alpha) : cfg.penalty.mu0;

    for (int k = 1; k <= cfg.max_iters; ++k) {
        for (int mode = 1; mode <= 3; ++mode) {
            auto &y = duals[mode - 1];
            std::vector<double> shifted(size);
            for (Index i = 0; i < size; ++i)
                shifted[i] = x[i] + y[i] / mu;
            if (!detail::all_finite(shifted))
                throw NumericalError("halrtc diverged at iteration " +
                                     std::to_string(k));
            const Matrix operand = unfold(Tensor3(dims, std::move(shifted)), mode);
            report.max_svd_operand.widen(static_cast<Index>(operand.rows()),
                                         static_cast<Index>(operand.cols()));
            aux[mode - 1] =
                std::move(fold(svt(operand, cfg.alpha[mode - 1] / mu), mode, dims))
                    .release();
        }

        std::vector<double> next(size);
        for (Index i = 0; i < size; ++i) {
            if (mask[i]) {
                next[i] = truth[i];
                continue;
            }
            double acc = 0.0;
            for (int n = 0; n < 3; ++n)
                acc += aux[n][i] - duals[n][i] / mu;
            next[i] = acc / 3.0;
        }
        if (!detail::all_finite(next))
            throw NumericalError("halrtc diverged at iteration " + std::to_string(k));
        Tensor3 x_next(dims, std::move(next));

        for (int n = 0; n < 3; ++n)
            for (Index i = 0; i < size; ++i)
                duals[n][i] -= mu * (aux[n][i] - x_next[i]);

        const double residual = fro_distance(x_next, x) / scale;
        x = std::move(x_next);
        report.residual_history.push_back(residual);
        report.iterations = k;
        if (observer)
            observer(k, x);
        if (residual <= cfg.epsilon) {
            report.converged = true;
            break;
        }
        mu = cfg.penalty.next(mu);
    }

    report.completed = std::move(x);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                     start).count();
    return report;
}

} // namespace lrtc
