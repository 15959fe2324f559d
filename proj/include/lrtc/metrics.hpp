#pragma once

#include <lrtc/data.hpp>
#include <lrtc/errors.hpp>
#include <lrtc/tensor.hpp>

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace lrtc {

/// Which entries the relative error is taken over.
enum class RseScope {
    /// Only the unobserved entries (default).
    missing_only,
    whole_tensor,
};

[[nodiscard]] inline std::string_view to_string(RseScope scope) noexcept {
    return scope == RseScope::missing_only ? "missing_only" : "whole_tensor";
}

[[nodiscard]] inline RseScope parse_rse_scope(std::string_view text) {
    if (text == "missing_only" || text == "missing")
        return RseScope::missing_only;
    if (text == "whole_tensor" || text == "whole")
        return RseScope::whole_tensor;
    throw UsageError("unknown RSE scope '" + std::string(text) + "'");
}

/// Relative squared error in percent:
/// 100 * ||P(completed - truth)||_F / ||P(truth)||_F, with P projecting onto
/// the unobserved entries (or the identity for `whole_tensor`).
[[nodiscard]] inline double rse(const Tensor3 &completed, const Tensor3 &truth,
                                const Mask &mask,
                                RseScope scope = RseScope::missing_only) {
    detail::check_same_shape(completed.dims(), truth.dims(), "rse");
    detail::check_same_shape(truth.dims(), mask.dims(), "rse");
    double err = 0.0, ref = 0.0;
    for (Index n = 0; n < truth.size(); ++n) {
        if (scope == RseScope::missing_only && mask[n])
            continue;
        const double d = completed[n] - truth[n];
        err += d * d;
        ref += truth[n] * truth[n];
    }
    if (ref == 0.0)
        throw MetricError(scope == RseScope::missing_only && mask.count_missing() == 0
                              ? "rse: no unobserved entries to score"
                              : "rse: reference norm is zero");
    return 100.0 * std::sqrt(err / ref);
}

/// Fills each unobserved entry with the observed mean of its channel.
[[nodiscard]] inline Tensor3 baseline_mean_fill(const TensorDataset &ds) {
    const Shape &d = ds.dims();
    std::vector<double> sum(d.i3, 0.0);
    std::vector<Index> count(d.i3, 0);
    for (Index n = 0; n < d.size(); ++n)
        if (ds.mask[n]) {
            sum[n % d.i3] += ds.tensor[n];
            ++count[n % d.i3];
        }
    for (Index k = 0; k < d.i3; ++k)
        if (count[k] == 0)
            throw DataError("mean fill: channel '" + ds.labels.channels[k] +
                            "' has no observed entries");
    std::vector<double> values(d.size());
    for (Index n = 0; n < d.size(); ++n)
        values[n] = ds.mask[n] ? ds.tensor[n]
                               : sum[n % d.i3] / static_cast<double>(count[n % d.i3]);
    return Tensor3(d, std::move(values));
}

/// Linear interpolation along the slot axis of every (day, channel) series;
/// gaps before the first or after the last observation take the nearest
/// observed value.
[[nodiscard]] inline Tensor3 baseline_linear_interp(const TensorDataset &ds) {
    const Shape &d = ds.dims();
    std::vector<double> values(ds.tensor.values().begin(), ds.tensor.values().end());
    std::vector<Index> seen;
    for (Index i = 0; i < d.i1; ++i)
        for (Index k = 0; k < d.i3; ++k) {
            seen.clear();
            for (Index j = 0; j < d.i2; ++j)
                if (ds.mask(i, j, k))
                    seen.push_back(j);
            if (seen.empty())
                throw DataError("linear interp: day " + std::to_string(i + 1) +
                                ", channel '" + ds.labels.channels[k] +
                                "' has no observed slots");
            auto at = [&](Index j) -> double & { return values[(i * d.i2 + j) * d.i3 + k]; };
            for (Index j = 0; j < seen.front(); ++j)
                at(j) = ds.tensor(i, seen.front(), k);
            for (Index j = seen.back() + 1; j < d.i2; ++j)
                at(j) = ds.tensor(i, seen.back(), k);
            for (Index s = 0; s + 1 < seen.size(); ++s) {
                const Index lo = seen[s], hi = seen[s + 1];
                const double a = ds.tensor(i, lo, k), b = ds.tensor(i, hi, k);
                for (Index j = lo + 1; j < hi; ++j) {
                    const double t = static_cast<double>(j - lo) / static_cast<double>(hi - lo);
                    at(j) = a + t * (b - a);
                }
            }
        }
    return Tensor3(d, std::move(values));
}

} // namespace lrtc
