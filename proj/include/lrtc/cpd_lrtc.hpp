#pragma once

// Low-rank tensor completion over CP factor matrices, solved by ADMM.
//
// The trace norm is placed on the I_n x R factor matrices instead of the
// mode-n unfoldings, so every SVD is on a thin I_n x R matrix. Per iteration:
//
//   U_n <- (lambda X_(n) B_n^T + mu M_n + Y_n)(lambda B_n B_n^T + mu I)^-1
//   M_n <- SVT_{alpha_n / mu}(U_n - Y_n / mu)
//   X   <- P_Omega(T) + P_Omega^c(U_1 o U_2 o U_3)
//   Y_n <- Y_n + mu (M_n - U_n)
//   mu  <- min(rho mu, mu_max)
//
// with B_n^T the Khatri-Rao product of the other two factors, U updates in
// Gauss-Seidel order, and termination once ||X^{k+1} - X^k|| / ||X^0|| <= eps.

#include <lrtc/completion.hpp>
#include <lrtc/svt.hpp>
#include <lrtc/tensor.hpp>

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace lrtc {

struct SolverConfig {
    /// Rank bound R; unset means min(20, min(I1, I2, I3)).
    std::optional<int> rank;
    std::array<double, 3> alpha{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double lambda = 1.0;
    PenaltySchedule penalty;
    double epsilon = 1e-4;
    int max_iters  = 500;
    std::uint64_t seed = 0;
    /// Threshold U_n + Y_n/mu instead of U_n - Y_n/mu in the M step.
    bool flip_m_step_sign = false;

    void validate() const {
        if (rank && *rank < 1)
            throw UsageError("rank must be >= 1");
        detail::check_weights(alpha);
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw UsageError("lambda must be positive");
        penalty.validate();
        detail::check_stopping(epsilon, max_iters);
    }

    [[nodiscard]] int resolved_rank(const Shape &dims) const {
        if (rank)
            return *rank;
        const Index smallest = std::min({dims.i1, dims.i2, dims.i3});
        return static_cast<int>(std::min<Index>(20, smallest));
    }
};

/// Factor matrices U_n, auxiliaries M_n and multipliers Y_n.
struct FactorSet {
    Factors U;
    Factors M;
    Factors Y;

    [[nodiscard]] Eigen::Index rank() const noexcept { return U[0].cols(); }

    void validate(const Shape &dims) const {
        const std::array<Index, 3> rows{dims.i1, dims.i2, dims.i3};
        for (const Factors *group : {&U, &M, &Y})
            for (int n = 0; n < 3; ++n) {
                const Matrix &m = (*group)[n];
                if (m.cols() != rank() || static_cast<Index>(m.rows()) != rows[n])
                    throw UsageError("FactorSet: matrix " + std::to_string(n + 1) +
                                     " is " + std::to_string(m.rows()) + "x" +
                                     std::to_string(m.cols()) + ", expected " +
                                     std::to_string(rows[n]) + "x" +
                                     std::to_string(rank()));
            }
        if (rank() < 1)
            throw UsageError("FactorSet: rank must be >= 1");
    }
};

/// U_n ~ N(0, 1/R) entrywise, M_n = U_n, Y_n = 0.
[[nodiscard]] inline FactorSet initialize_factors(const Shape &dims, int rank,
                                                  std::uint64_t seed) {
    if (rank < 1)
        throw UsageError("rank must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(rank)));
    FactorSet s;
    const std::array<Index, 3> rows{dims.i1, dims.i2, dims.i3};
    for (int n = 0; n < 3; ++n) {
        Matrix u(static_cast<Eigen::Index>(rows[n]), rank);
        for (Eigen::Index c = 0; c < u.cols(); ++c)
            for (Eigen::Index r = 0; r < u.rows(); ++r)
                u(r, c) = normal(rng);
        s.U[n] = u;
        s.M[n] = u;
        s.Y[n] = Matrix::Zero(u.rows(), u.cols());
    }
    return s;
}

/// B_n^T: Khatri-Rao product of the two factors other than `mode`, ordered
/// to match the column layout of `unfold(x, mode)`.
[[nodiscard]] inline Matrix khatri_rao_except(const Factors &U, int mode) {
    switch (mode) {
    case 1: return khatri_rao(U[2], U[1]);
    case 2: return khatri_rao(U[2], U[0]);
    case 3: return khatri_rao(U[1], U[0]);
    default: detail::check_mode(mode); return {};
    }
}

/// Exact minimizer of the U_n subproblem with the other factors held fixed.
[[nodiscard]] inline FactorSet update_factor(FactorSet state, int mode,
                                             const Tensor3 &x, double lambda,
                                             double mu) {
    detail::check_mode(mode);
    state.validate(x.dims());
    const int n   = mode - 1;
    const auto R  = state.rank();
    const Matrix kr = khatri_rao_except(state.U, mode);

    Matrix normal = lambda * (kr.transpose() * kr);
    normal.diagonal().array() += mu;
    const Matrix rhs = lambda * (unfold(x, mode) * kr) + mu * state.M[n] + state.Y[n];

    Eigen::LLT<Matrix> llt(normal);
    if (llt.info() != Eigen::Success)
        throw NumericalError("update_U: normal matrix is not positive definite (mode " +
                             std::to_string(mode) + ", R=" + std::to_string(R) + ")");
    Matrix u = llt.solve(rhs.transpose()).transpose();
    if (!u.allFinite())
        throw NumericalError("update_U: non-finite factor for mode " +
                             std::to_string(mode));
    state.U[n] = std::move(u);
    return state;
}

/// U update for all three modes in Gauss-Seidel order.
[[nodiscard]] inline FactorSet update_U(FactorSet state, const Tensor3 &x,
                                        const SolverConfig &cfg, double mu) {
    for (int mode = 1; mode <= 3; ++mode)
        state = update_factor(std::move(state), mode, x, cfg.lambda, mu);
    return state;
}

/// The operand the M step thresholds for factor `n` (0-based).
[[nodiscard]] inline Matrix m_step_argument(const FactorSet &state, int n,
                                            const SolverConfig &cfg, double mu) {
    return cfg.flip_m_step_sign ? Matrix(state.U[n] + state.Y[n] / mu)
                                : Matrix(state.U[n] - state.Y[n] / mu);
}

[[nodiscard]] inline FactorSet update_M(FactorSet state, const SolverConfig &cfg,
                                        double mu) {
    if (!(mu > 0.0))
        throw UsageError("update_M: mu must be positive");
    for (int n = 0; n < 3; ++n)
        state.M[n] = svt(m_step_argument(state, n, cfg, mu), cfg.alpha[n] / mu);
    return state;
}

/// Observed entries from `truth`, the rest from the CP reconstruction.
[[nodiscard]] inline Tensor3 update_X(const Factors &U, const Tensor3 &truth,
                                      const Mask &mask) {
    detail::check_same_shape(truth.dims(), mask.dims(), "update_X");
    const Tensor3 recon = cp_reconstruct(U);
    detail::check_same_shape(truth.dims(), recon.dims(), "update_X");
    std::vector<double> values(truth.size());
    for (Index n = 0; n < truth.size(); ++n)
        values[n] = mask[n] ? truth[n] : recon[n];
    return Tensor3(truth.dims(), std::move(values));
}

[[nodiscard]] inline FactorSet update_Y(FactorSet state, double mu) {
    for (int n = 0; n < 3; ++n)
        state.Y[n] += mu * (state.M[n] - state.U[n]);
    return state;
}

/// Completes `truth` from its entries on `mask`. Unobserved entries of
/// `truth` are never read.
[[nodiscard]] inline CompletionReport complete(const Tensor3 &truth, const Mask &mask,
                                               const SolverConfig &cfg,
                                               const IterationObserver &observer = {}) {
    detail::check_problem(truth, mask);
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const Shape dims = truth.dims();
    const int R      = cfg.resolved_rank(dims);

    CompletionReport report;
    FactorSet state = initialize_factors(dims, R, cfg.seed);
    Tensor3 x       = project(truth, mask, true);
    const double scale = detail::residual_scale(x);
    double mu = cfg.penalty.mu0;

    for (int k = 1; k <= cfg.max_iters; ++k) {
        try {
            state = update_U(std::move(state), x, cfg, mu);
            state = update_M(std::move(state), cfg, mu);
            for (int n = 0; n < 3; ++n)
                report.max_svd_operand.widen(static_cast<Index>(state.U[n].rows()),
                                             static_cast<Index>(state.U[n].cols()));
            Tensor3 next = update_X(state.U, truth, mask);
            state = update_Y(std::move(state), mu);
            const double residual = fro_distance(next, x) / scale;
            x = std::move(next);
            report.residual_history.push_back(residual);
            report.iterations = k;
            if (observer)
                observer(k, x);
            if (!std::isfinite(residual))
                throw NumericalError("non-finite residual");
            if (residual <= cfg.epsilon) {
                report.converged = true;
                break;
            }
        } catch (const NumericalError &e) {
            throw NumericalError(std::string("cpd_lrtc diverged at iteration ") +
                                 std::to_string(k) + ": " + e.what());
        } catch (const UsageError &e) {
            // A non-finite reconstruction surfaces as a Tensor3 constructor error.
            throw NumericalError(std::string("cpd_lrtc diverged at iteration ") +
                                 std::to_string(k) + ": " + e.what());
        }
        mu = cfg.penalty.next(mu);
    }

    report.completed = std::move(x);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                     start).count();
    return report;
}

} // namespace lrtc
