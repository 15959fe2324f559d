#pragma once

// Missing-rate sweep: every method at a given rate sees the same simulated
// mask; results are scored against the retained ground truth.

#include <lrtc/csv.hpp>
#include <lrtc/impute.hpp>
#include <lrtc/metrics.hpp>
#include <lrtc/seed.hpp>

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace lrtc {

struct BenchResult {
    std::string method;
    double missing_rate      = 0.0;
    double rse_percent       = 0.0;
    double wall_time_seconds = 0.0;
    int iterations           = 0;
    bool converged           = false;
    /// Solver settings used for this row.
    std::string config;
};

struct BenchConfig {
    ImputeOptions options;
    RseScope scope = RseScope::missing_only;
};

namespace detail {

[[nodiscard]] inline std::string config_snapshot(Method m, const BenchConfig &cfg,
                                                 const Shape &dims) {
    std::ostringstream s;
    s << "scope=" << to_string(cfg.scope);
    auto alpha = [&](const std::array<double, 3> &a) {
        s << ";alpha=" << format_double(a[0]) << ',' << format_double(a[1]) << ','
          << format_double(a[2]);
    };
    if (m == Method::cpd_lrtc) {
        const auto &c = cfg.options.cpd;
        s << ";R=" << c.resolved_rank(dims) << ";lambda=" << format_double(c.lambda);
        alpha(c.alpha);
        s << ";mu0=" << format_double(c.penalty.mu0) << ";rho=" << format_double(c.penalty.rho)
          << ";mu_max=" << format_double(c.penalty.mu_max)
          << ";epsilon=" << format_double(c.epsilon) << ";max_iters=" << c.max_iters;
    } else if (m == Method::halrtc) {
        const auto &c = cfg.options.halrtc;
        alpha(c.alpha);
        s << ";mu0=" << (c.auto_mu0 ? std::string("auto") : format_double(c.penalty.mu0))
          << ";rho=" << format_double(c.penalty.rho)
          << ";mu_max=" << format_double(c.penalty.mu_max)
          << ";epsilon=" << format_double(c.epsilon) << ";max_iters=" << c.max_iters;
    }
    return s.str();
}

} // namespace detail

/// Seed of the simulated mask at `rate`; independent of the method list.
[[nodiscard]] inline std::uint64_t mask_seed(std::uint64_t seed, double rate) {
    return derive_seed(seed, "mask/rate=" + format_double(rate));
}

[[nodiscard]] inline std::vector<BenchResult>
run_benchmark(const TensorDataset &ds, std::span<const double> rates,
              std::span<const Method> methods, const BenchConfig &cfg,
              std::uint64_t seed) {
    if (rates.empty())
        throw UsageError("benchmark needs at least one missing rate");
    if (methods.empty())
        throw UsageError("benchmark needs at least one method");
    for (double r : rates)
        if (!(r > 0.0 && r < 1.0))
            throw UsageError("benchmark rates must lie in (0, 1); rate " +
                             format_double(r) + " leaves RSE undefined or is out of range");
    if (ds.mask.count_missing() != 0)
        throw UsageError("benchmark needs a fully observed dataset as ground truth");

    std::vector<BenchResult> out;
    for (double rate : rates) {
        const TensorDataset masked = simulate_missing(ds, rate, mask_seed(seed, rate));
        for (Method m : methods) {
            BenchConfig local = cfg;
            local.options.cpd.seed = derive_seed(
                seed, "init/" + std::string(to_string(m)) + "/rate=" + format_double(rate));
            const ImputeResult r = impute(masked, m, local.options);
            out.push_back(BenchResult{std::string(to_string(m)), rate,
                                      rse(r.report.completed, ds.tensor, masked.mask, cfg.scope),
                                      r.report.wall_time, r.report.iterations,
                                      r.report.converged,
                                      detail::config_snapshot(m, local, ds.dims())});
        }
    }
    return out;
}

inline constexpr std::string_view bench_csv_header =
    "method,missing_rate,rse_percent,time_s,iterations";

inline void write_bench_csv(std::span<const BenchResult> results, std::ostream &out) {
    out << bench_csv_header << '\n';
    char time_buf[32];
    for (const auto &r : results) {
        std::snprintf(time_buf, sizeof time_buf, "%.6f", r.wall_time_seconds);
        out << r.method << ',' << format_double(r.missing_rate) << ','
            << format_double(r.rse_percent) << ',' << time_buf << ',' << r.iterations
            << '\n';
    }
}

/// Aligned text table: one row per missing rate, an RSE/% and Time/s column
/// pair per method, methods in first-appearance order.
[[nodiscard]] inline std::string format_bench_table(std::span<const BenchResult> results,
                                                    RseScope scope) {
    std::vector<std::string> methods;
    std::vector<double> rates;
    for (const auto &r : results) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);
        if (std::find(rates.begin(), rates.end(), r.missing_rate) == rates.end())
            rates.push_back(r.missing_rate);
    }
    std::ostringstream s;
    s << std::left << std::setw(16) << "Method";
    for (const auto &m : methods)
        s << std::setw(22) << m;
    s << '\n' << std::setw(16) << "Missing rate/%";
    for (std::size_t i = 0; i < methods.size(); ++i)
        s << std::setw(11) << "RSE/%" << std::setw(11) << "Time/s";
    s << '\n' << std::fixed;
    for (double rate : rates) {
        s << std::setw(16) << std::setprecision(0) << rate * 100.0;
        for (const auto &m : methods) {
            auto it = std::find_if(results.begin(), results.end(), [&](const BenchResult &r) {
                return r.method == m && r.missing_rate == rate;
            });
            if (it == results.end()) {
                s << std::setw(11) << "-" << std::setw(11) << "-";
                continue;
            }
            s << std::setw(11) << std::setprecision(2) << it->rse_percent << std::setw(11)
              << std::setprecision(3) << it->wall_time_seconds;
        }
        s << '\n';
    }
    s << "RSE over " << (scope == RseScope::missing_only ? "missing entries only" : "the whole tensor")
      << '\n';
    return s.str();
}

} // namespace lrtc
