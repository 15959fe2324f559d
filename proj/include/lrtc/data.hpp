#pragma once

#include <lrtc/errors.hpp>
#include <lrtc/seed.hpp>
#include <lrtc/tensor.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace lrtc {

/// How the channel axis is populated.
enum class Layout {
    /// Channels are users, one measurement each (typically active power).
    multi_user_single_measurement,
    /// Channels are the four measurements P, U, I, cos(phi) of one user.
    single_user_multi_measurement,
};

[[nodiscard]] inline std::string_view to_string(Layout layout) noexcept {
    return layout == Layout::multi_user_single_measurement
               ? "multi_user_single_measurement"
               : "single_user_multi_measurement";
}

[[nodiscard]] inline Layout parse_layout(std::string_view text) {
    if (text == "multi_user_single_measurement" || text == "multi_user")
        return Layout::multi_user_single_measurement;
    if (text == "single_user_multi_measurement" || text == "multi_measurement")
        return Layout::single_user_multi_measurement;
    throw UsageError("unknown layout '" + std::string(text) + "'");
}

/// Channel order for the multi-measurement layout.
enum Measurement : Index { active_power = 0, voltage = 1, current = 2, power_factor = 3 };

inline constexpr std::array<std::string_view, 4> measurement_names{"P", "U", "I",
                                                                   "cosphi"};

[[nodiscard]] inline std::optional<Index> measurement_index(std::string_view name) {
    for (Index k = 0; k < measurement_names.size(); ++k)
        if (name == measurement_names[k])
            return k;
    if (name == "cosφ")
        return power_factor;
    return std::nullopt;
}

/// One smart-meter reading. An empty value marks a missing reading.
struct MeterRecord {
    std::string channel;
    int day  = 1;
    int slot = 1;
    std::optional<double> value;

    friend bool operator==(const MeterRecord &, const MeterRecord &) = default;
};

struct AxisLabels {
    std::vector<std::string> days;
    std::vector<std::string> slots;
    std::vector<std::string> channels;

    friend bool operator==(const AxisLabels &, const AxisLabels &) = default;
};

/// A measurement tensor with its observation mask. Entries off the mask are
/// placeholders and are never read by the solvers.
struct TensorDataset {
    Tensor3 tensor;
    Mask mask;
    AxisLabels labels;
    Layout layout = Layout::multi_user_single_measurement;

    [[nodiscard]] const Shape &dims() const noexcept { return tensor.dims(); }
};

namespace detail {

[[nodiscard]] inline std::vector<std::string> numbered(Index count,
                                                       std::string_view prefix = "") {
    std::vector<std::string> out;
    out.reserve(count);
    for (Index i = 1; i <= count; ++i)
        out.push_back(std::string(prefix) + std::to_string(i));
    return out;
}

[[nodiscard]] inline AxisLabels default_labels(const Shape &dims, Layout layout) {
    AxisLabels labels{numbered(dims.i1), numbered(dims.i2), {}};
    if (layout == Layout::single_user_multi_measurement)
        for (auto name : measurement_names)
            labels.channels.emplace_back(name);
    else
        labels.channels = numbered(dims.i3, "user");
    return labels;
}

inline void check_multi_measurement_shape(const Shape &dims) {
    if (dims.i3 != measurement_names.size())
        throw UsageError("multi-measurement layout needs 4 channels (P,U,I,cosphi), "
                         "got shape " + dims.to_string());
}

[[nodiscard]] inline std::string record_key(const MeterRecord &r) {
    return "(day=" + std::to_string(r.day) + ", slot=" + std::to_string(r.slot) +
           ", channel=" + r.channel + ")";
}

} // namespace detail

/// Smallest shape holding every record: max day, max slot, channel count.
[[nodiscard]] inline Shape infer_shape(const std::vector<MeterRecord> &records,
                                       Layout layout) {
    if (records.empty())
        throw DataError("cannot infer tensor shape from zero records");
    Shape dims{0, 0, 0};
    std::vector<std::string> channels;
    for (const auto &r : records) {
        if (r.day < 1 || r.slot < 1)
            throw DataError("record " + detail::record_key(r) +
                            ": day and slot are 1-based");
        dims.i1 = std::max<Index>(dims.i1, static_cast<Index>(r.day));
        dims.i2 = std::max<Index>(dims.i2, static_cast<Index>(r.slot));
        if (std::find(channels.begin(), channels.end(), r.channel) == channels.end())
            channels.push_back(r.channel);
    }
    dims.i3 = layout == Layout::single_user_multi_measurement ? measurement_names.size()
                                                              : channels.size();
    return dims;
}

/// Scatters records into a tensor: observed positions carry the record value,
/// everything else is 0 and unobserved. Multi-user channels are numbered in
/// order of first appearance.
[[nodiscard]] inline TensorDataset build_tensor(const std::vector<MeterRecord> &records,
                                                Layout layout, const Shape &dims) {
    detail::check_positive(dims);
    if (layout == Layout::single_user_multi_measurement)
        detail::check_multi_measurement_shape(dims);

    AxisLabels labels = detail::default_labels(dims, layout);
    std::vector<std::string> seen_channels;
    std::vector<double> values(dims.size(), 0.0);
    std::vector<std::uint8_t> observed(dims.size(), 0);
    std::vector<std::uint8_t> present(dims.size(), 0);

    for (const auto &r : records) {
        if (r.day < 1 || static_cast<Index>(r.day) > dims.i1 || r.slot < 1 ||
            static_cast<Index>(r.slot) > dims.i2)
            throw DataError("record " + detail::record_key(r) + " outside shape " +
                            dims.to_string());
        Index k = 0;
        if (layout == Layout::single_user_multi_measurement) {
            const auto idx = measurement_index(r.channel);
            if (!idx)
                throw DataError("record " + detail::record_key(r) +
                                ": channel must be one of P, U, I, cosphi");
            k = *idx;
        } else {
            auto it = std::find(seen_channels.begin(), seen_channels.end(), r.channel);
            if (it == seen_channels.end()) {
                if (seen_channels.size() == dims.i3)
                    throw DataError("record " + detail::record_key(r) +
                                    ": more distinct channels than shape " +
                                    dims.to_string() + " allows");
                seen_channels.push_back(r.channel);
                it = std::prev(seen_channels.end());
            }
            k = static_cast<Index>(it - seen_channels.begin());
        }
        const Index flat = (static_cast<Index>(r.day - 1) * dims.i2 +
                            static_cast<Index>(r.slot - 1)) * dims.i3 + k;
        if (present[flat])
            throw DataError("duplicate record " + detail::record_key(r));
        present[flat] = 1;
        if (!r.value)
            continue;
        const double v = *r.value;
        if (!std::isfinite(v))
            throw DataError("record " + detail::record_key(r) + ": non-finite value");
        if (layout == Layout::single_user_multi_measurement) {
            if (k == power_factor && (v < -1.0 || v > 1.0))
                throw DataError("record " + detail::record_key(r) +
                                ": cosphi outside [-1, 1]");
            if ((k == voltage || k == current) && v < 0.0)
                throw DataError("record " + detail::record_key(r) +
                                ": voltage and current must be nonnegative");
        }
        values[flat]   = v;
        observed[flat] = 1;
    }
    for (Index k = 0; k < seen_channels.size(); ++k)
        labels.channels[k] = seen_channels[k];

    return TensorDataset{Tensor3(dims, std::move(values)),
                         Mask(dims, std::move(observed)), std::move(labels), layout};
}

/// Flattens a dataset back to records in day, slot, channel order.
[[nodiscard]] inline std::vector<MeterRecord> to_records(const TensorDataset &ds) {
    const Shape &d = ds.dims();
    std::vector<MeterRecord> out;
    out.reserve(d.size());
    for (Index i = 0; i < d.i1; ++i)
        for (Index j = 0; j < d.i2; ++j)
            for (Index k = 0; k < d.i3; ++k) {
                MeterRecord r{ds.labels.channels[k], static_cast<int>(i + 1),
                              static_cast<int>(j + 1), std::nullopt};
                if (ds.mask(i, j, k))
                    r.value = ds.tensor(i, j, k);
                out.push_back(std::move(r));
            }
    return out;
}

/// Hides exactly round(rate * N) uniformly chosen positions. Only the mask
/// changes; the tensor keeps every original value as ground truth.
[[nodiscard]] inline TensorDataset simulate_missing(const TensorDataset &ds, double rate,
                                                    std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0))
        throw UsageError("missing rate must lie in [0, 1), got " + std::to_string(rate));
    if (ds.mask.count_missing() != 0)
        throw UsageError("simulate_missing needs a fully observed dataset");
    TensorDataset out = ds;
    const Index n      = ds.tensor.size();
    const auto removed = static_cast<Index>(std::llround(rate * static_cast<double>(n)));
    std::vector<Index> order(n);
    for (Index i = 0; i < n; ++i)
        order[i] = i;
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first `removed` slots are a uniform sample.
    for (Index i = 0; i < removed; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(order[i], order[pick(rng)]);
        out.mask.set(order[i], false);
    }
    return out;
}

struct PrefillStats {
    /// Slots where the one missing channel was recovered from P = U I cos(phi).
    Index filled = 0;
    /// Slots left missing because |divisor| < 1e-6.
    Index skipped_small_divisor = 0;
    /// Slots left missing because the recovered value was physically
    /// inconsistent (|cos(phi)| > 1 + 1e-6, negative U or I).
    Index skipped_inconsistent = 0;
};

struct PrefillResult {
    TensorDataset dataset;
    PrefillStats stats;
};

/// Recovers the single missing channel of each (day, slot) whose other
/// three channels are observed. Recovered positions become observed.
[[nodiscard]] inline PrefillResult prefill_electrical(const TensorDataset &ds) {
    if (ds.layout != Layout::single_user_multi_measurement)
        throw UsageError("prefill_electrical needs the single_user_multi_measurement layout");
    detail::check_multi_measurement_shape(ds.dims());
    constexpr double divisor_floor = 1e-6;
    constexpr double clamp_band    = 1e-6;

    const Shape &d = ds.dims();
    std::vector<double> values(ds.tensor.values().begin(), ds.tensor.values().end());
    Mask mask = ds.mask;
    PrefillStats stats;

    for (Index i = 0; i < d.i1; ++i)
        for (Index j = 0; j < d.i2; ++j) {
            const Index base = (i * d.i2 + j) * d.i3;
            int missing_count = 0;
            Index missing     = 0;
            for (Index k = 0; k < 4; ++k)
                if (!mask[base + k]) {
                    ++missing_count;
                    missing = k;
                }
            if (missing_count != 1)
                continue;
            const double P = values[base + active_power];
            const double U = values[base + voltage];
            const double I = values[base + current];
            const double c = values[base + power_factor];
            double recovered = 0.0;
            double divisor   = 1.0;
            switch (missing) {
            case active_power: recovered = U * I * c; break;
            case voltage: divisor = I * c; break;
            case current: divisor = U * c; break;
            default: divisor = U * I; break;
            }
            if (missing != active_power) {
                if (std::abs(divisor) < divisor_floor) {
                    ++stats.skipped_small_divisor;
                    continue;
                }
                recovered = P / divisor;
            }
            if (missing == power_factor && std::abs(recovered) > 1.0) {
                if (std::abs(recovered) > 1.0 + clamp_band) {
                    ++stats.skipped_inconsistent;
                    continue;
                }
                recovered = std::copysign(1.0, recovered);
            }
            if ((missing == voltage || missing == current) && recovered < 0.0) {
                ++stats.skipped_inconsistent;
                continue;
            }
            values[base + missing] = recovered;
            mask.set(base + missing, true);
            ++stats.filled;
        }

    return {TensorDataset{Tensor3(d, std::move(values)), std::move(mask), ds.labels,
                          ds.layout},
            stats};
}

/// Per-channel affine map applied before solving: x -> (x - mean) / scale.
struct ChannelScaling {
    std::vector<double> mean;
    std::vector<double> scale;
};

/// Mean and standard deviation of the observed entries of each channel.
/// Unobserved entries of the result are 0.
[[nodiscard]] inline std::pair<TensorDataset, ChannelScaling>
standardize(const TensorDataset &ds) {
    const Shape &d = ds.dims();
    ChannelScaling s{std::vector<double>(d.i3, 0.0), std::vector<double>(d.i3, 1.0)};
    std::vector<double> sum(d.i3, 0.0), sq(d.i3, 0.0);
    std::vector<Index> count(d.i3, 0);
    for (Index n = 0; n < d.size(); ++n)
        if (ds.mask[n]) {
            const Index k = n % d.i3;
            sum[k] += ds.tensor[n];
            ++count[k];
        }
    for (Index k = 0; k < d.i3; ++k)
        if (count[k] > 0)
            s.mean[k] = sum[k] / static_cast<double>(count[k]);
    for (Index n = 0; n < d.size(); ++n)
        if (ds.mask[n]) {
            const Index k = n % d.i3;
            const double dev = ds.tensor[n] - s.mean[k];
            sq[k] += dev * dev;
        }
    for (Index k = 0; k < d.i3; ++k)
        if (count[k] > 1) {
            const double sd = std::sqrt(sq[k] / static_cast<double>(count[k]));
            if (sd > 1e-12 * std::max(1.0, std::abs(s.mean[k])))
                s.scale[k] = sd;
        }
    std::vector<double> values(d.size(), 0.0);
    for (Index n = 0; n < d.size(); ++n)
        if (ds.mask[n]) {
            const Index k = n % d.i3;
            values[n] = (ds.tensor[n] - s.mean[k]) / s.scale[k];
        }
    TensorDataset out{Tensor3(d, std::move(values)), ds.mask, ds.labels, ds.layout};
    return {std::move(out), std::move(s)};
}

[[nodiscard]] inline Tensor3 destandardize(const Tensor3 &t, const ChannelScaling &s) {
    const Shape &d = t.dims();
    if (s.mean.size() != d.i3 || s.scale.size() != d.i3)
        throw UsageError("destandardize: scaling has wrong channel count");
    std::vector<double> values(d.size());
    for (Index n = 0; n < d.size(); ++n) {
        const Index k = n % d.i3;
        values[n] = t[n] * s.scale[k] + s.mean[k];
    }
    return Tensor3(d, std::move(values));
}

/// Parameters for synthetic load tensors.
struct SynthSpec {
    Shape dims{31, 48, 114};
    /// CP rank of the noiseless signal.
    int rank = 3;
    /// Gaussian noise standard deviation relative to the signal RMS.
    double noise = 0.0;
    /// Slot-mode factors are smooth daily load curves instead of i.i.d.
    bool periodic = false;
    Layout layout = Layout::multi_user_single_measurement;
};

struct SynthResult {
    /// Fully observed dataset.
    TensorDataset dataset;
    /// Noiseless signal.
    Tensor3 clean;
    /// Ground-truth CP factors of `clean` (multi-user layout only).
    std::optional<Factors> factors;
};

namespace detail {

/// Smooth 24-hour curve sampled at `slots` points: baseline plus Gaussian
/// bumps with circular (wrap-around midnight) distance.
[[nodiscard]] inline Eigen::VectorXd daily_curve(
    Index slots, double base, std::initializer_list<std::array<double, 3>> bumps) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(slots));
    for (Index s = 0; s < slots; ++s) {
        const double hour = 24.0 * (static_cast<double>(s) + 0.5) / static_cast<double>(slots);
        double value = base;
        for (const auto &[center, width, height] : bumps) {
            double dist = std::abs(hour - center);
            dist        = std::min(dist, 24.0 - dist);
            value += height * std::exp(-0.5 * (dist / width) * (dist / width));
        }
        v(static_cast<Eigen::Index>(s)) = value;
    }
    return v;
}

/// Slot-mode factor of nonnegative smooth daily profiles. Column 0 is a
/// residential morning/evening double peak.
[[nodiscard]] inline Matrix periodic_slot_factor(Index slots, int rank,
                                                 std::mt19937_64 &rng) {
    Matrix m(static_cast<Eigen::Index>(slots), rank);
    m.col(0) = daily_curve(slots, 0.25, {{{7.5, 1.2, 0.6}}, {{19.0, 2.0, 1.0}}});
    std::uniform_real_distribution<double> center(0.0, 24.0), width(1.0, 3.5),
        height(0.4, 1.0);
    for (int r = 1; r < rank; ++r)
        m.col(r) = daily_curve(slots, 0.1,
                               {{{center(rng), width(rng), height(rng)}},
                                {{center(rng), width(rng), height(rng)}}});
    return m;
}

[[nodiscard]] inline Matrix uniform_matrix(Index rows, int cols, double lo, double hi,
                                           std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(static_cast<Eigen::Index>(rows), cols);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            m(r, c) = u(rng);
    return m;
}

[[nodiscard]] inline double rms(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v)
        sum += x * x;
    return v.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(v.size()));
}

[[nodiscard]] inline SynthResult synth_multi_user(const SynthSpec &spec,
                                                  std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, "synth/factors"));
    Factors f;
    f[0] = uniform_matrix(spec.dims.i1, spec.rank, 0.5, 1.5, rng);
    f[1] = spec.periodic ? periodic_slot_factor(spec.dims.i2, spec.rank, rng)
                         : uniform_matrix(spec.dims.i2, spec.rank, 0.0, 1.0, rng);
    f[2] = uniform_matrix(spec.dims.i3, spec.rank, 0.0, 1.0, rng);
    Tensor3 clean = cp_reconstruct(f);

    std::vector<double> values(clean.values().begin(), clean.values().end());
    if (spec.noise > 0.0) {
        std::mt19937_64 noise_rng(derive_seed(seed, "synth/noise"));
        std::normal_distribution<double> normal(0.0, spec.noise * rms(clean.values()));
        for (double &v : values)
            v += normal(noise_rng);
    }
    TensorDataset ds{Tensor3(spec.dims, std::move(values)), Mask::full(spec.dims),
                     default_labels(spec.dims, spec.layout), spec.layout};
    return {std::move(ds), std::move(clean), std::move(f)};
}

/// P, U, I, cos(phi) of one user. Current follows a low-rank day x slot load
/// pattern; voltage sags and power factor drops as current rises; P is
/// computed from the other three so the power identity holds exactly.
[[nodiscard]] inline SynthResult synth_multi_measurement(const SynthSpec &spec,
                                                         std::uint64_t seed) {
    check_multi_measurement_shape(spec.dims);
    const Index days = spec.dims.i1, slots = spec.dims.i2;
    std::mt19937_64 rng(derive_seed(seed, "synth/factors"));
    const Matrix day_f  = uniform_matrix(days, spec.rank, 0.5, 1.5, rng);
    const Matrix slot_f = spec.periodic ? periodic_slot_factor(slots, spec.rank, rng)
                                        : uniform_matrix(slots, spec.rank, 0.0, 1.0, rng);
    const Matrix load = day_f * slot_f.transpose();
    const double lo = load.minCoeff(), hi = load.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    const Eigen::VectorXd day_level = uniform_matrix(days, 1, -1.0, 1.0, rng).col(0);

    auto make = [&](bool noisy) {
        std::mt19937_64 noise_rng(derive_seed(seed, "synth/noise"));
        std::normal_distribution<double> normal(0.0, 1.0);
        const double sigma = noisy ? spec.noise : 0.0;
        std::vector<double> values(spec.dims.size());
        for (Index i = 0; i < days; ++i)
            for (Index j = 0; j < slots; ++j) {
                const double level = (load(Eigen::Index(i), Eigen::Index(j)) - lo) / span;
                double I = 1.0 + 9.0 * level;
                double U = 230.0 * (1.0 + 0.02 * day_level(Eigen::Index(i)) - 0.03 * level);
                double c = 0.97 - 0.15 * level;
                if (sigma > 0.0) {
                    I = std::max(0.0, I * (1.0 + sigma * normal(noise_rng)));
                    U = std::max(0.0, U * (1.0 + 0.1 * sigma * normal(noise_rng)));
                    c = std::clamp(c * (1.0 + 0.1 * sigma * normal(noise_rng)), 0.0, 1.0);
                }
                const Index base = (i * slots + j) * 4;
                values[base + active_power] = U * I * c;
                values[base + voltage]      = U;
                values[base + current]      = I;
                values[base + power_factor] = c;
            }
        return Tensor3(spec.dims, std::move(values));
    };
    Tensor3 clean = make(false);
    Tensor3 noisy = spec.noise > 0.0 ? make(true) : clean;
    TensorDataset ds{std::move(noisy), Mask::full(spec.dims),
                     default_labels(spec.dims, spec.layout), spec.layout};
    return {std::move(ds), std::move(clean), std::nullopt};
}

} // namespace detail

/// Seeded synthetic load tensor with known low-rank structure.
[[nodiscard]] inline SynthResult synth_load_tensor(const SynthSpec &spec,
                                                   std::uint64_t seed) {
    detail::check_positive(spec.dims);
    if (spec.rank < 1)
        throw UsageError("synthetic rank must be >= 1");
    if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise))
        throw UsageError("noise level must be finite and nonnegative");
    return spec.layout == Layout::single_user_multi_measurement
               ? detail::synth_multi_measurement(spec, seed)
               : detail::synth_multi_user(spec, seed);
}

} // namespace lrtc
