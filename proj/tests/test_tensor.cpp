#include "oracles.hpp"

#include <lrtc/tensor.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace lrtc {
namespace {

Tensor3 iota_tensor(const Shape &dims) {
    std::vector<double> v(dims.size());
    std::iota(v.begin(), v.end(), 1.0);
    return Tensor3(dims, std::move(v));
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

TEST(Tensor3Test, RejectsNaN) {
    std::vector<double> v(8, 1.0);
    v[3] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(Tensor3(Shape{2, 2, 2}, v), UsageError);
}

TEST(Tensor3Test, RejectsLengthMismatchAndZeroExtent) {
    EXPECT_THROW(Tensor3(Shape{2, 2, 2}, std::vector<double>(7, 0.0)), UsageError);
    EXPECT_THROW(Tensor3(Shape{0, 2, 2}), UsageError);
}

TEST(Tensor3Test, RowMajorLayout) {
    const Tensor3 t = iota_tensor({2, 3, 4});
    EXPECT_EQ(t(0, 0, 1), 2.0);
    EXPECT_EQ(t(0, 1, 0), 5.0);
    EXPECT_EQ(t(1, 0, 0), 13.0);
}

TEST(MaskTest, ComplementPartitionsPositions) {
    std::mt19937_64 rng(1);
    const Mask m = oracle::random_mask({3, 4, 5}, 0.6, rng);
    const Mask c = m.complement();
    for (Index n = 0; n < m.size(); ++n)
        EXPECT_NE(m[n], c[n]);
    EXPECT_EQ(m.count_observed() + c.count_observed(), m.size());
}

// ---------------------------------------------------------------------------
// unfold / fold
// ---------------------------------------------------------------------------

TEST(UnfoldTest, FirstElementMapsToOrigin) {
    const Tensor3 t = iota_tensor({2, 3, 4});
    const Matrix m  = unfold(t, 1);
    EXPECT_EQ(unfold_column({2, 3, 4}, 1, 0, 0, 0), 0u);
    EXPECT_EQ(m(0, 0), t(0, 0, 0));
}

TEST(UnfoldTest, ColumnIndexExample) {
    // (1,2,3) in 1-based indices, dims (2,3,4), mode 1 -> column 8.
    EXPECT_EQ(oracle::unfold_column_1based({2, 3, 4}, 1, {1, 2, 3}), 8u);
    EXPECT_EQ(unfold_column({2, 3, 4}, 1, 0, 1, 2) + 1, 8u);
    const Tensor3 t = iota_tensor({2, 3, 4});
    EXPECT_EQ(unfold(t, 1)(0, 7), t(0, 1, 2));
}

TEST(UnfoldTest, AllOnesUnfoldsToAllOnes) {
    const Tensor3 ones(Shape{2, 2, 2}, 1.0);
    for (int n = 1; n <= 3; ++n) {
        const Matrix m = unfold(ones, n);
        EXPECT_EQ(m.rows(), 2);
        EXPECT_EQ(m.cols(), 4);
        EXPECT_TRUE((m.array() == 1.0).all());
    }
}

TEST(UnfoldTest, ShapesPerMode) {
    const Tensor3 t = iota_tensor({2, 3, 4});
    EXPECT_EQ(unfold(t, 1).rows(), 2);
    EXPECT_EQ(unfold(t, 1).cols(), 12);
    EXPECT_EQ(unfold(t, 2).rows(), 3);
    EXPECT_EQ(unfold(t, 2).cols(), 8);
    EXPECT_EQ(unfold(t, 3).rows(), 4);
    EXPECT_EQ(unfold(t, 3).cols(), 6);
}

TEST(UnfoldTest, InvalidModeIsUsageError) {
    const Tensor3 t(Shape{2, 2, 2});
    EXPECT_THROW((void)unfold(t, 0), UsageError);
    EXPECT_THROW((void)unfold(t, 4), UsageError);
    EXPECT_THROW((void)fold(Matrix::Zero(2, 4), 5, {2, 2, 2}), UsageError);
}

TEST(UnfoldTest, IndexMapMatchesEnumerationUpTo555) {
    for (Index a = 1; a <= 5; ++a)
        for (Index b = 1; b <= 5; ++b)
            for (Index c = 1; c <= 5; ++c) {
                const Shape dims{a, b, c};
                const Tensor3 t = iota_tensor(dims);
                for (int n = 1; n <= 3; ++n) {
                    const Matrix m = unfold(t, n);
                    for (Index i = 1; i <= a; ++i)
                        for (Index j = 1; j <= b; ++j)
                            for (Index k = 1; k <= c; ++k) {
                                const Index col = oracle::unfold_column_1based(
                                    {a, b, c}, n, {i, j, k});
                                const Index row = n == 1 ? i : n == 2 ? j : k;
                                ASSERT_EQ(m(Eigen::Index(row - 1), Eigen::Index(col - 1)),
                                          t(i - 1, j - 1, k - 1))
                                    << dims.to_string() << " mode " << n;
                            }
                }
            }
}

TEST(FoldTest, AllOnesMatrixFoldsToAllOnes) {
    const Tensor3 t = fold(Matrix::Ones(2, 4), 1, {2, 2, 2});
    for (double v : t.values())
        EXPECT_EQ(v, 1.0);
}

TEST(FoldTest, Mode2RoundTripOnIota357) {
    const Tensor3 t = iota_tensor({3, 5, 7});
    const Matrix m  = unfold(t, 2);
    // Index-map oracle: every matrix entry sits where the enumeration says.
    for (Index i = 1; i <= 3; ++i)
        for (Index j = 1; j <= 5; ++j)
            for (Index k = 1; k <= 7; ++k)
                EXPECT_EQ(m(Eigen::Index(j - 1),
                            Eigen::Index(oracle::unfold_column_1based({3, 5, 7}, 2, {i, j, k}) - 1)),
                          static_cast<double>((i - 1) * 35 + (j - 1) * 7 + k));
    EXPECT_EQ(fold(m, 2, t.dims()), t);
}

TEST(FoldTest, RoundTripRandomShapesAllModes) {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<Index> extent(1, 9);
    for (int trial = 0; trial < 100; ++trial) {
        const Shape dims{extent(rng), extent(rng), extent(rng)};
        const Tensor3 t = oracle::random_tensor(dims, rng);
        for (int n = 1; n <= 3; ++n)
            ASSERT_EQ(fold(unfold(t, n), n, dims), t) << dims.to_string() << " mode " << n;
    }
}

TEST(FoldTest, DimensionMismatchIsUsageError) {
    EXPECT_THROW((void)fold(Matrix::Zero(3, 4), 1, {2, 2, 2}), UsageError);
    EXPECT_THROW((void)fold(Matrix::Zero(2, 5), 1, {2, 2, 2}), UsageError);
}

// ---------------------------------------------------------------------------
// Khatri-Rao, CP reconstruction
// ---------------------------------------------------------------------------

TEST(KhatriRaoTest, SingleColumnExample) {
    Matrix a(2, 1), b(2, 1);
    a << 1, 2;
    b << 3, 4;
    const Matrix kr = khatri_rao(a, b);
    ASSERT_EQ(kr.rows(), 4);
    Matrix expected(4, 1);
    expected << 3, 4, 6, 8;
    EXPECT_EQ(kr, expected);
}

TEST(KhatriRaoTest, ColumnsAreKroneckerProducts) {
    std::mt19937_64 rng(3);
    const Matrix a  = oracle::random_matrix(4, 3, rng);
    const Matrix b  = oracle::random_matrix(5, 3, rng);
    const Matrix kr = khatri_rao(a, b);
    ASSERT_EQ(kr.rows(), 20);
    ASSERT_EQ(kr.cols(), 3);
    for (Eigen::Index r = 0; r < 3; ++r)
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < 5; ++j)
                EXPECT_EQ(kr(i * 5 + j, r), a(i, r) * b(j, r));
}

TEST(KhatriRaoTest, RowOfOnesIsIdentity) {
    std::mt19937_64 rng(4);
    const Matrix b = oracle::random_matrix(6, 3, rng);
    EXPECT_EQ(khatri_rao(Matrix::Ones(1, 3), b), b);
}

TEST(KhatriRaoTest, ColumnMismatchIsUsageError) {
    EXPECT_THROW((void)khatri_rao(Matrix::Ones(2, 2), Matrix::Ones(2, 3)), UsageError);
}

TEST(CpReconstructTest, OnesFactorsGiveOnes) {
    const Tensor3 t = cp_reconstruct({Matrix::Ones(2, 1), Matrix::Ones(3, 1), Matrix::Ones(4, 1)});
    for (double v : t.values())
        EXPECT_EQ(v, 1.0);
}

TEST(CpReconstructTest, RankOneExample) {
    Matrix u1(2, 1), u2 = Matrix::Ones(3, 1), u3 = Matrix::Ones(1, 1);
    u1 << 1, 2;
    const Tensor3 t = cp_reconstruct({u1, u2, u3});
    ASSERT_EQ(t.dims(), (Shape{2, 3, 1}));
    for (Index j = 0; j < 3; ++j) {
        EXPECT_EQ(t(0, j, 0), 1.0);
        EXPECT_EQ(t(1, j, 0), 2.0);
    }
}

TEST(CpReconstructTest, MatchesLoopOracleAndMatricizedIdentity) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Factors f = oracle::random_factors({4, 6, 5}, 1 + trial % 5, rng);
        const Tensor3 t = cp_reconstruct(f);
        const auto ref  = oracle::cp_entries(f);
        for (Index n = 0; n < t.size(); ++n)
            EXPECT_NEAR(t[n], ref[n], 1e-12 * (1.0 + std::abs(ref[n])));
        const Matrix x1   = unfold(t, 1);
        const Matrix path = f[0] * khatri_rao(f[2], f[1]).transpose();
        EXPECT_LE((x1 - path).norm(), 1e-12 * path.norm());
    }
}

TEST(CpReconstructTest, MismatchedRankIsUsageError) {
    EXPECT_THROW((void)cp_reconstruct({Matrix::Ones(2, 2), Matrix::Ones(2, 2), Matrix::Ones(2, 3)}),
                 UsageError);
}

TEST(CpReconstructTest, UnfoldingRankBoundedByR) {
    std::mt19937_64 rng(6);
    for (int R = 1; R <= 5; ++R)
        for (int trial = 0; trial < 4; ++trial) {
            const Factors f = oracle::random_factors({7, 8, 9}, R, rng);
            const Tensor3 t = cp_reconstruct(f);
            for (int n = 1; n <= 3; ++n)
                EXPECT_LE(oracle::jacobi_rank(unfold(t, n)), Index(R));
        }
}

// ---------------------------------------------------------------------------
// Elementwise operations and projections
// ---------------------------------------------------------------------------

TEST(HadamardTest, OnesAndZeros) {
    std::mt19937_64 rng(7);
    const Tensor3 a = oracle::random_tensor({3, 4, 2}, rng);
    EXPECT_EQ(hadamard(a, Tensor3(a.dims(), 1.0)), a);
    EXPECT_EQ(hadamard(a, Tensor3(a.dims(), 0.0)), Tensor3(a.dims(), 0.0));
}

TEST(HadamardTest, MaskWeightsMatchProjection) {
    std::mt19937_64 rng(8);
    const Tensor3 t = oracle::random_tensor({3, 4, 5}, rng);
    const Mask m    = oracle::random_mask(t.dims(), 0.5, rng);
    EXPECT_EQ(hadamard(m.as_weights(), t), project(t, m, true));
}

TEST(HadamardTest, ShapeMismatchIsUsageError) {
    EXPECT_THROW((void)hadamard(Tensor3(Shape{2, 2, 2}), Tensor3(Shape{2, 2, 3})), UsageError);
}

TEST(FroNormTest, Examples) {
    EXPECT_EQ(fro_norm(Tensor3(Shape{2, 3, 4})), 0.0);
    std::vector<double> v(8, 0.0);
    v[5] = 3.0;
    EXPECT_EQ(fro_norm(Tensor3(Shape{2, 2, 2}, v)), 3.0);
    EXPECT_DOUBLE_EQ(fro_norm(Tensor3(Shape{2, 3, 4}, 1.0)), std::sqrt(24.0));
}

TEST(ProjectTest, FullAndEmptyMasks) {
    std::mt19937_64 rng(9);
    const Tensor3 t = oracle::random_tensor({2, 3, 4}, rng);
    EXPECT_EQ(project(t, Mask::full(t.dims()), true), t);
    EXPECT_EQ(project(t, Mask::empty(t.dims()), true), Tensor3(t.dims()));
}

TEST(ProjectTest, ObservedPlusUnobservedIsIdentity) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor3 t = oracle::random_tensor({4, 3, 5}, rng);
        const Mask m    = oracle::random_mask(t.dims(), 0.3 + 0.02 * trial, rng);
        EXPECT_EQ(add(project(t, m, true), project(t, m, false)), t);
    }
}

TEST(ProjectTest, ShapeMismatchIsUsageError) {
    EXPECT_THROW((void)project(Tensor3(Shape{2, 2, 2}), Mask::full({2, 2, 3}), true), UsageError);
}

} // namespace
} // namespace lrtc
