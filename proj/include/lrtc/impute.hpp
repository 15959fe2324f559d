#pragma once

// End-to-end imputation of a TensorDataset with any of the four methods.
// Multi-measurement datasets are pre-filled from the power identity and
// standardized per channel before solving; the result is mapped back and
// every observed entry is restored exactly.

#include <lrtc/cpd_lrtc.hpp>
#include <lrtc/data.hpp>
#include <lrtc/halrtc.hpp>
#include <lrtc/metrics.hpp>

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace lrtc {

enum class Method { cpd_lrtc, halrtc, mean, interp };

[[nodiscard]] inline std::string_view to_string(Method m) noexcept {
    switch (m) {
    case Method::cpd_lrtc: return "cpd_lrtc";
    case Method::halrtc: return "halrtc";
    case Method::mean: return "mean";
    case Method::interp: return "interp";
    }
    return "?";
}

[[nodiscard]] inline Method parse_method(std::string_view text) {
    for (Method m : {Method::cpd_lrtc, Method::halrtc, Method::mean, Method::interp})
        if (text == to_string(m))
            return m;
    throw UsageError("unknown method '" + std::string(text) +
                     "' (expected cpd_lrtc, halrtc, mean or interp)");
}

struct ImputeOptions {
    SolverConfig cpd;
    HalrtcConfig halrtc;
    /// Power-identity pre-fill; multi-measurement layout only. Pre-filled
    /// entries are treated as observed by the solver.
    bool prefill = true;
    /// Per-channel standardization; multi-measurement layout only.
    bool standardize = true;
};

struct ImputeResult {
    /// `completed` is in data units with observed entries restored exactly.
    CompletionReport report;
    /// Observation mask the solver saw (after pre-fill).
    Mask solved_mask;
    std::optional<PrefillStats> prefill;
};

[[nodiscard]] inline ImputeResult impute(const TensorDataset &ds, Method method,
                                         const ImputeOptions &opts,
                                         const IterationObserver &observer = {}) {
    const bool multi = ds.layout == Layout::single_user_multi_measurement;
    ImputeResult result;
    TensorDataset working = ds;
    if (multi && opts.prefill) {
        auto pr        = prefill_electrical(ds);
        working        = std::move(pr.dataset);
        result.prefill = pr.stats;
    }

    std::optional<ChannelScaling> scaling;
    TensorDataset solve_in = working;
    if (multi && opts.standardize) {
        auto [scaled, s] = standardize(working);
        solve_in         = std::move(scaled);
        scaling          = std::move(s);
    }

    CompletionReport report;
    switch (method) {
    case Method::cpd_lrtc:
        report = complete(solve_in.tensor, solve_in.mask, opts.cpd, observer);
        break;
    case Method::halrtc:
        report = complete_halrtc(solve_in.tensor, solve_in.mask, opts.halrtc, observer);
        break;
    case Method::mean:
    case Method::interp: {
        const auto start = std::chrono::steady_clock::now();
        report.completed = method == Method::mean ? baseline_mean_fill(solve_in)
                                                  : baseline_linear_interp(solve_in);
        report.wall_time = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start).count();
        report.converged = true;
        break;
    }
    }

    Tensor3 completed = scaling ? destandardize(report.completed, *scaling)
                                : std::move(report.completed);
    std::vector<double> values = std::move(completed).release();
    for (Index n = 0; n < values.size(); ++n)
        if (working.mask[n])
            values[n] = working.tensor[n];
    report.completed   = Tensor3(ds.dims(), std::move(values));
    result.report      = std::move(report);
    result.solved_mask = std::move(working.mask);
    return result;
}

} // namespace lrtc
