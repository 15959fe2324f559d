#pragma once

#include <lrtc/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lrtc {

using Index  = std::size_t;
using Matrix = Eigen::MatrixXd;

/// Extents of an order-3 tensor: days x slots x channels.
struct Shape {
    Index i1 = 0;
    Index i2 = 0;
    Index i3 = 0;

    [[nodiscard]] constexpr Index size() const noexcept { return i1 * i2 * i3; }

    /// Extent of a 1-based mode.
    [[nodiscard]] Index extent(int mode) const {
        switch (mode) {
        case 1: return i1;
        case 2: return i2;
        case 3: return i3;
        default:
            throw UsageError("mode index must be 1, 2 or 3, got " +
                             std::to_string(mode));
        }
    }

    /// Product of the two extents other than `mode`.
    [[nodiscard]] Index other_extent(int mode) const {
        return size() / extent(mode);
    }

    [[nodiscard]] std::string to_string() const {
        return std::to_string(i1) + "x" + std::to_string(i2) + "x" +
               std::to_string(i3);
    }

    friend constexpr bool operator==(const Shape &, const Shape &) = default;
};

namespace detail {

inline void check_mode(int mode) {
    if (mode < 1 || mode > 3)
        throw UsageError("mode index must be 1, 2 or 3, got " +
                         std::to_string(mode));
}

inline void check_positive(const Shape &dims) {
    if (dims.i1 == 0 || dims.i2 == 0 || dims.i3 == 0)
        throw UsageError("tensor extents must be positive, got " +
                         dims.to_string());
}

inline void check_same_shape(const Shape &a, const Shape &b, const char *what) {
    if (a != b)
        throw UsageError(std::string(what) + ": shape mismatch " +
                         a.to_string() + " vs " + b.to_string());
}

[[nodiscard]] inline bool all_finite(std::span<const double> values) noexcept {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
}

} // namespace detail

/// Dense order-3 tensor of doubles, row-major: entry (i, j, k) lives at
/// `(i * I2 + j) * I3 + k`. Indices on the accessors are 0-based; mode
/// numbers in the free functions are 1-based. Every entry is finite.
class Tensor3 {
  public:
    Tensor3() = default;

    explicit Tensor3(Shape dims, double fill = 0.0)
        : dims_(dims), values_(dims.size(), fill) {
        detail::check_positive(dims_);
        if (!std::isfinite(fill))
            throw UsageError("Tensor3: non-finite fill value");
    }

    Tensor3(Shape dims, std::vector<double> values)
        : dims_(dims), values_(std::move(values)) {
        detail::check_positive(dims_);
        if (values_.size() != dims_.size())
            throw UsageError("Tensor3: " + std::to_string(values_.size()) +
                             " values for shape " + dims_.to_string());
        if (!detail::all_finite(values_))
            throw UsageError("Tensor3: non-finite entry; missing values "
                             "belong in a Mask, not in the tensor");
    }

    [[nodiscard]] const Shape &dims() const noexcept { return dims_; }
    [[nodiscard]] Index size() const noexcept { return values_.size(); }

    [[nodiscard]] Index offset(Index i, Index j, Index k) const noexcept {
        return (i * dims_.i2 + j) * dims_.i3 + k;
    }

    [[nodiscard]] double operator()(Index i, Index j, Index k) const noexcept {
        return values_[offset(i, j, k)];
    }
    [[nodiscard]] double operator[](Index flat) const noexcept {
        return values_[flat];
    }

    [[nodiscard]] std::span<const double> values() const noexcept {
        return values_;
    }

    /// Moves the storage out, leaving the tensor empty.
    [[nodiscard]] std::vector<double> release() && {
        dims_ = {};
        return std::move(values_);
    }

    friend bool operator==(const Tensor3 &, const Tensor3 &) = default;

  private:
    Shape dims_;
    std::vector<double> values_;
};

/// Observation pattern Ω: true where an entry was observed.
class Mask {
  public:
    Mask() = default;

    explicit Mask(Shape dims, bool observed = false)
        : dims_(dims), observed_(dims.size(), observed ? 1 : 0) {
        detail::check_positive(dims_);
    }

    Mask(Shape dims, std::vector<std::uint8_t> observed)
        : dims_(dims), observed_(std::move(observed)) {
        detail::check_positive(dims_);
        if (observed_.size() != dims_.size())
            throw UsageError("Mask: flag count does not match shape " +
                             dims_.to_string());
        for (auto &flag : observed_)
            flag = flag ? 1 : 0;
    }

    static Mask full(Shape dims) { return Mask(dims, true); }
    static Mask empty(Shape dims) { return Mask(dims, false); }

    [[nodiscard]] const Shape &dims() const noexcept { return dims_; }
    [[nodiscard]] Index size() const noexcept { return observed_.size(); }

    [[nodiscard]] bool operator()(Index i, Index j, Index k) const noexcept {
        return observed_[(i * dims_.i2 + j) * dims_.i3 + k] != 0;
    }
    [[nodiscard]] bool operator[](Index flat) const noexcept {
        return observed_[flat] != 0;
    }

    void set(Index flat, bool observed) noexcept {
        observed_[flat] = observed ? 1 : 0;
    }

    [[nodiscard]] Index count_observed() const noexcept {
        return static_cast<Index>(
            std::count(observed_.begin(), observed_.end(), std::uint8_t{1}));
    }
    [[nodiscard]] Index count_missing() const noexcept {
        return size() - count_observed();
    }

    /// Ω^c.
    [[nodiscard]] Mask complement() const {
        Mask out = *this;
        for (auto &flag : out.observed_)
            flag = flag ? 0 : 1;
        return out;
    }

    /// The mask as a 0/1 weight tensor.
    [[nodiscard]] Tensor3 as_weights() const {
        std::vector<double> w(observed_.begin(), observed_.end());
        return Tensor3(dims_, std::move(w));
    }

    friend bool operator==(const Mask &, const Mask &) = default;

  private:
    Shape dims_;
    std::vector<std::uint8_t> observed_;
};

using Factors = std::array<Matrix, 3>;

/// 0-based column of element (i1, i2, i3) in the mode-`mode` unfolding.
/// The first non-`mode` index varies fastest, the second strides by the
/// first's extent.
[[nodiscard]] inline Index unfold_column(const Shape &dims, int mode, Index i1,
                                         Index i2, Index i3) {
    switch (mode) {
    case 1: return i2 + i3 * dims.i2;
    case 2: return i1 + i3 * dims.i1;
    case 3: return i1 + i2 * dims.i1;
    default: detail::check_mode(mode); return 0;
    }
}

/// Mode-n matricization X_(n): I_n rows, product-of-other-extents columns.
[[nodiscard]] inline Matrix unfold(const Tensor3 &t, int mode) {
    detail::check_mode(mode);
    const Shape &d = t.dims();
    Matrix out(static_cast<Eigen::Index>(d.extent(mode)),
               static_cast<Eigen::Index>(d.other_extent(mode)));
    for (Index i = 0; i < d.i1; ++i)
        for (Index j = 0; j < d.i2; ++j)
            for (Index k = 0; k < d.i3; ++k) {
                const Index row = mode == 1 ? i : mode == 2 ? j : k;
                out(static_cast<Eigen::Index>(row),
                    static_cast<Eigen::Index>(unfold_column(d, mode, i, j, k))) =
                    t(i, j, k);
            }
    return out;
}

/// Inverse of `unfold`.
[[nodiscard]] inline Tensor3 fold(const Matrix &m, int mode, const Shape &dims) {
    detail::check_mode(mode);
    detail::check_positive(dims);
    if (static_cast<Index>(m.rows()) != dims.extent(mode) ||
        static_cast<Index>(m.cols()) != dims.other_extent(mode))
        throw UsageError("fold: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " +
                         std::to_string(dims.extent(mode)) + "x" +
                         std::to_string(dims.other_extent(mode)) +
                         " for mode " + std::to_string(mode) + " of " +
                         dims.to_string());
    std::vector<double> values(dims.size());
    for (Index i = 0; i < dims.i1; ++i)
        for (Index j = 0; j < dims.i2; ++j)
            for (Index k = 0; k < dims.i3; ++k) {
                const Index row = mode == 1 ? i : mode == 2 ? j : k;
                values[(i * dims.i2 + j) * dims.i3 + k] =
                    m(static_cast<Eigen::Index>(row),
                      static_cast<Eigen::Index>(unfold_column(dims, mode, i, j, k)));
            }
    return Tensor3(dims, std::move(values));
}

/// Column-wise Kronecker product: column r of the result is
/// kron(a.col(r), b.col(r)), so b's row index varies fastest.
[[nodiscard]] inline Matrix khatri_rao(const Matrix &a, const Matrix &b) {
    if (a.cols() != b.cols())
        throw UsageError("khatri_rao: column counts differ (" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()) + ")");
    Matrix out(a.rows() * b.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.cols(); ++r)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.col(r).segment(i * b.rows(), b.rows()) = a(i, r) * b.col(r);
    return out;
}

namespace detail {

inline void check_factors(const Factors &f) {
    const auto rank = f[0].cols();
    if (f[1].cols() != rank || f[2].cols() != rank)
        throw UsageError("factor matrices disagree on rank: " +
                         std::to_string(f[0].cols()) + ", " +
                         std::to_string(f[1].cols()) + ", " +
                         std::to_string(f[2].cols()));
    if (rank < 1)
        throw UsageError("factor matrices need at least one column");
}

} // namespace detail

/// Sum of R rank-one outer products U1(:,r) o U2(:,r) o U3(:,r).
[[nodiscard]] inline Tensor3 cp_reconstruct(const Factors &f) {
    detail::check_factors(f);
    const Shape dims{static_cast<Index>(f[0].rows()),
                     static_cast<Index>(f[1].rows()),
                     static_cast<Index>(f[2].rows())};
    detail::check_positive(dims);
    // Rows of U3 x (U1 (.) U2)^T, computed as one GEMM; row (i*I2 + j) of the
    // Khatri-Rao product pairs with the row-major layout directly.
    const Matrix left = khatri_rao(f[0], f[1]);
    const Matrix full = left * f[2].transpose();
    std::vector<double> values(dims.size());
    for (Index ij = 0; ij < dims.i1 * dims.i2; ++ij)
        for (Index k = 0; k < dims.i3; ++k)
            values[ij * dims.i3 + k] = full(static_cast<Eigen::Index>(ij),
                                            static_cast<Eigen::Index>(k));
    return Tensor3(dims, std::move(values));
}

[[nodiscard]] inline Tensor3 hadamard(const Tensor3 &a, const Tensor3 &b) {
    detail::check_same_shape(a.dims(), b.dims(), "hadamard");
    std::vector<double> values(a.size());
    for (Index n = 0; n < a.size(); ++n)
        values[n] = a[n] * b[n];
    return Tensor3(a.dims(), std::move(values));
}

[[nodiscard]] inline double fro_norm(const Tensor3 &t) {
    double sum = 0.0;
    for (double v : t.values())
        sum += v * v;
    return std::sqrt(sum);
}

/// Frobenius norm of a - b without materializing the difference.
[[nodiscard]] inline double fro_distance(const Tensor3 &a, const Tensor3 &b) {
    detail::check_same_shape(a.dims(), b.dims(), "fro_distance");
    double sum = 0.0;
    for (Index n = 0; n < a.size(); ++n) {
        const double d = a[n] - b[n];
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// P_Ω(t) when `keep_observed`, else P_Ω^c(t).
[[nodiscard]] inline Tensor3 project(const Tensor3 &t, const Mask &mask,
                                     bool keep_observed) {
    detail::check_same_shape(t.dims(), mask.dims(), "project");
    std::vector<double> values(t.size(), 0.0);
    for (Index n = 0; n < t.size(); ++n)
        if (mask[n] == keep_observed)
            values[n] = t[n];
    return Tensor3(t.dims(), std::move(values));
}

/// Elementwise a + b.
[[nodiscard]] inline Tensor3 add(const Tensor3 &a, const Tensor3 &b) {
    detail::check_same_shape(a.dims(), b.dims(), "add");
    std::vector<double> values(a.size());
    for (Index n = 0; n < a.size(); ++n)
        values[n] = a[n] + b[n];
    return Tensor3(a.dims(), std::move(values));
}

/// Singular values above `rel_tol * sigma_max`.
[[nodiscard]] inline Index numerical_rank(const Matrix &m, double rel_tol = 1e-8) {
    if (m.size() == 0)
        return 0;
    Eigen::BDCSVD<Matrix> svd(m);
    const auto &s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0)
        return 0;
    Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0))
            ++rank;
    return rank;
}

} // namespace lrtc
