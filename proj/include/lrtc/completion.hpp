#pragma once

#include <lrtc/errors.hpp>
#include <lrtc/tensor.hpp>

#include <algorithm>
#include <array>
#include <functional>
#include <string>
#include <vector>

namespace lrtc {

/// Rows x cols of a matrix handed to an SVD.
struct SvdOperand {
    Index rows = 0;
    Index cols = 0;

    [[nodiscard]] Index elements() const noexcept { return rows * cols; }

    /// Keeps the larger operand (by element count).
    void widen(Index r, Index c) noexcept {
        if (r * c > elements()) {
            rows = r;
            cols = c;
        }
    }
};

/// Outcome of one completion run.
struct CompletionReport {
    Tensor3 completed;
    int iterations = 0;
    bool converged = false;
    /// ||X^{k+1} - X^k||_F / ||X^0||_F, one entry per iteration.
    std::vector<double> residual_history;
    double wall_time = 0.0;
    /// Largest matrix decomposed by SVD during the run.
    SvdOperand max_svd_operand;
};

/// Called after each X update with the 1-based iteration number.
using IterationObserver = std::function<void(int, const Tensor3 &)>;

/// Geometric penalty growth mu <- min(rho * mu, mu_max).
struct PenaltySchedule {
    double mu0    = 1e-4;
    double rho    = 1.05;
    double mu_max = 1e10;

    void validate() const {
        if (!(mu0 > 0.0) || !std::isfinite(mu0))
            throw UsageError("mu0 must be positive");
        if (!(rho >= 1.0) || !std::isfinite(rho))
            throw UsageError("rho must be >= 1");
        if (!(mu_max > 0.0) || !std::isfinite(mu_max))
            throw UsageError("mu_max must be positive");
    }

    [[nodiscard]] double next(double mu) const noexcept {
        return std::min(rho * mu, mu_max);
    }
};

namespace detail {

inline void check_weights(const std::array<double, 3> &alpha) {
    double sum = 0.0;
    for (double a : alpha) {
        if (!(a >= 0.0) || !std::isfinite(a))
            throw UsageError("alpha weights must be finite and nonnegative");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw UsageError("alpha weights must sum to 1, got " +
                         std::to_string(sum));
}

inline void check_stopping(double epsilon, int max_iters) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw UsageError("epsilon must lie in (0, 1)");
    if (max_iters < 1)
        throw UsageError("max_iters must be positive");
}

inline void check_problem(const Tensor3 &truth, const Mask &mask) {
    check_same_shape(truth.dims(), mask.dims(), "complete");
    if (mask.count_observed() == 0)
        throw UsageError("complete: observation set is empty");
}

/// ||X^0||_F with the all-zero guard.
[[nodiscard]] inline double residual_scale(const Tensor3 &x0) {
    const double n = fro_norm(x0);
    return n > 0.0 ? n : 1.0;
}

} // namespace detail

} // namespace lrtc
