#include "oracles.hpp"

#include <lrtc/bench.hpp>
#include <lrtc/metrics.hpp>

#include <gtest/gtest.h>

#include <sstream>

namespace lrtc {
namespace {

TensorDataset dataset(Tensor3 t, Mask m) {
    const Shape d = t.dims();
    return {std::move(t), std::move(m), detail::default_labels(d, Layout::multi_user_single_measurement),
            Layout::multi_user_single_measurement};
}

TensorDataset small_synth(std::uint64_t seed) {
    SynthSpec spec;
    spec.dims = {8, 10, 6};
    spec.rank = 2;
    return synth_load_tensor(spec, seed).dataset;
}

// ===========================================================================
// rse
// ===========================================================================

TEST(RseTest, Examples) {
    std::mt19937_64 rng(1);
    const Shape dims{4, 5, 3};
    const Tensor3 truth = oracle::random_tensor(dims, rng);
    const Mask mask     = oracle::random_mask(dims, 0.5, rng);
    EXPECT_EQ(rse(truth, truth, mask), 0.0);

    std::vector<double> doubled(truth.values().begin(), truth.values().end());
    for (Index n = 0; n < doubled.size(); ++n)
        if (!mask[n])
            doubled[n] *= 2.0;
    EXPECT_NEAR(rse(Tensor3(dims, doubled), truth, mask), 100.0, 1e-12);
}

TEST(RseTest, MatchesOracle) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Shape dims{3 + Index(trial % 4), 4, 5};
        const Tensor3 truth = oracle::random_tensor(dims, rng);
        const Tensor3 est   = oracle::random_tensor(dims, rng);
        const Mask mask     = oracle::random_mask(dims, 0.6, rng);
        if (mask.count_missing() == 0)
            continue;
        EXPECT_NEAR(rse(est, truth, mask), oracle::missing_rse(est, truth, mask), 1e-12);
    }
}

TEST(RseTest, ScaleInvariant) {
    std::mt19937_64 rng(3);
    const Shape dims{4, 4, 4};
    const Tensor3 truth = oracle::random_tensor(dims, rng);
    const Tensor3 est   = oracle::random_tensor(dims, rng);
    const Mask mask     = oracle::random_mask(dims, 0.5, rng);
    std::vector<double> a(truth.values().begin(), truth.values().end());
    std::vector<double> b(est.values().begin(), est.values().end());
    for (auto &v : a)
        v *= 37.0;
    for (auto &v : b)
        v *= 37.0;
    EXPECT_NEAR(rse(Tensor3(dims, b), Tensor3(dims, a), mask), rse(est, truth, mask), 1e-10);
}

TEST(RseTest, WholeTensorScope) {
    const Shape dims{1, 2, 1};
    const Tensor3 truth(dims, std::vector<double>{3.0, 4.0});
    const Tensor3 est(dims, std::vector<double>{3.0, 0.0});
    Mask mask = Mask::full(dims);
    mask.set(1, false);
    EXPECT_DOUBLE_EQ(rse(est, truth, mask, RseScope::whole_tensor), 80.0);
    EXPECT_DOUBLE_EQ(rse(est, truth, mask), 100.0);
    EXPECT_EQ(parse_rse_scope("whole"), RseScope::whole_tensor);
    EXPECT_THROW((void)parse_rse_scope("x"), UsageError);
}

TEST(RseTest, ZeroDenominator) {
    const Shape dims{2, 2, 2};
    EXPECT_THROW((void)rse(Tensor3(dims), Tensor3(dims, 1.0), Mask::full(dims)), MetricError);
    EXPECT_THROW((void)rse(Tensor3(dims), Tensor3(dims), Mask::empty(dims)), MetricError);
}

// ===========================================================================
// Baselines
// ===========================================================================

TEST(BaselineTest, ConstantTensorRecoveredExactly) {
    std::mt19937_64 rng(4);
    const Shape dims{3, 6, 2};
    const Tensor3 truth(dims, 4.25);
    Mask mask = oracle::random_mask(dims, 0.6, rng);
    for (Index i = 0; i < dims.i1; ++i)
        for (Index k = 0; k < dims.i3; ++k)
            mask.set((i * dims.i2) * dims.i3 + k, true);  // one observed slot per series
    const auto ds = dataset(project(truth, mask, true), mask);
    EXPECT_EQ(rse(baseline_mean_fill(ds), truth, mask), 0.0);
    EXPECT_EQ(rse(baseline_linear_interp(ds), truth, mask), 0.0);
}

TEST(BaselineTest, LinearRampInteriorGap) {
    const Shape dims{1, 6, 1};
    const Tensor3 truth(dims, std::vector<double>{1, 3, 5, 7, 9, 11});
    Mask mask = Mask::full(dims);
    mask.set(2, false);
    mask.set(3, false);
    const Tensor3 out = baseline_linear_interp(dataset(truth, mask));
    EXPECT_EQ(out, truth);
}

TEST(BaselineTest, InterpEdgesTakeNearest) {
    const Shape dims{1, 5, 1};
    const Tensor3 t(dims, std::vector<double>{0, 2, 0, 4, 0});
    Mask mask = Mask::empty(dims);
    mask.set(1, true);
    mask.set(3, true);
    const Tensor3 out = baseline_linear_interp(dataset(t, mask));
    EXPECT_EQ(out, Tensor3(dims, std::vector<double>{2, 2, 3, 4, 4}));
}

TEST(BaselineTest, MeanFillTwoValueSeries) {
    // Observed {0, 10}, missing {0, 10}: fill 5, error sqrt(50 / 100).
    const Shape dims{1, 4, 1};
    const Tensor3 truth(dims, std::vector<double>{0, 10, 0, 10});
    Mask mask = Mask::full(dims);
    mask.set(2, false);
    mask.set(3, false);
    const Tensor3 out = baseline_mean_fill(dataset(truth, mask));
    EXPECT_NEAR(rse(out, truth, mask), 70.71067811865476, 1e-12);
}

TEST(BaselineTest, EmptySeriesIsDataError) {
    const Shape dims{2, 3, 1};
    Mask mask = Mask::full(dims);
    for (Index j = 0; j < 3; ++j)
        mask.set(3 + j, false);
    const auto ds = dataset(Tensor3(dims, 1.0), mask);
    EXPECT_THROW((void)baseline_linear_interp(ds), DataError);
    EXPECT_NO_THROW((void)baseline_mean_fill(ds));
    EXPECT_THROW((void)baseline_mean_fill(dataset(Tensor3(dims, 1.0), Mask::empty(dims))),
                 DataError);
}

// ===========================================================================
// impute
// ===========================================================================

TEST(ImputeTest, ObservedEntriesRestored) {
    SynthSpec spec;
    spec.dims   = {6, 12, 4};
    spec.layout = Layout::single_user_multi_measurement;
    const auto truth  = synth_load_tensor(spec, 5).dataset;
    const auto masked = simulate_missing(truth, 0.2, 6);
    for (Method m : {Method::cpd_lrtc, Method::halrtc, Method::mean, Method::interp}) {
        const auto r = impute(masked, m, ImputeOptions{});
        ASSERT_TRUE(r.prefill);
        for (Index n = 0; n < truth.tensor.size(); ++n)
            if (masked.mask[n]) {
                EXPECT_EQ(r.report.completed[n], masked.tensor[n]) << to_string(m);
            }
    }
}

TEST(ImputeTest, MethodNames) {
    for (Method m : {Method::cpd_lrtc, Method::halrtc, Method::mean, Method::interp})
        EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_THROW((void)parse_method("svd"), UsageError);
}

// ===========================================================================
// run_benchmark
// ===========================================================================

TEST(BenchTest, RateZeroRejected) {
    const auto ds = small_synth(7);
    const std::vector<double> rates{0.0};
    const std::vector<Method> methods{Method::cpd_lrtc};
    EXPECT_THROW((void)run_benchmark(ds, rates, methods, BenchConfig{}, 1), UsageError);
}

TEST(BenchTest, MethodsShareMask) {
    const auto ds = small_synth(8);
    const std::vector<double> rates{0.4};
    const std::vector<Method> methods{Method::mean, Method::interp};
    const auto rows = run_benchmark(ds, rates, methods, BenchConfig{}, 2);
    ASSERT_EQ(rows.size(), 2u);
    const auto masked = simulate_missing(ds, 0.4, mask_seed(2, 0.4));
    EXPECT_DOUBLE_EQ(rows[0].rse_percent,
                     rse(baseline_mean_fill(masked), ds.tensor, masked.mask));
    EXPECT_DOUBLE_EQ(rows[1].rse_percent,
                     rse(baseline_linear_interp(masked), ds.tensor, masked.mask));
}

TEST(BenchTest, DeterministicAndMethodIndependent) {
    const auto ds = small_synth(9);
    const std::vector<double> rates{0.2, 0.5};
    const std::vector<Method> both{Method::cpd_lrtc, Method::halrtc};
    const std::vector<Method> only{Method::cpd_lrtc};
    const auto a = run_benchmark(ds, rates, both, BenchConfig{}, 3);
    const auto b = run_benchmark(ds, rates, both, BenchConfig{}, 3);
    const auto c = run_benchmark(ds, rates, only, BenchConfig{}, 3);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].rse_percent, b[i].rse_percent);
        EXPECT_EQ(a[i].iterations, b[i].iterations);
    }
    EXPECT_EQ(c[0].rse_percent, a[0].rse_percent);
    EXPECT_EQ(c[1].rse_percent, a[2].rse_percent);
}

TEST(BenchTest, CsvAndTable) {
    std::vector<BenchResult> rows{{"cpd_lrtc", 0.1, 1.5, 0.25, 12, true, ""},
                                  {"halrtc", 0.1, 2.5, 1.0, 30, true, ""}};
    std::ostringstream csv;
    write_bench_csv(rows, csv);
    EXPECT_EQ(csv.str(),
              "method,missing_rate,rse_percent,time_s,iterations\n"
              "cpd_lrtc,0.1,1.5,0.250000,12\n"
              "halrtc,0.1,2.5,1.000000,30\n");
    const std::string table = format_bench_table(rows, RseScope::missing_only);
    EXPECT_NE(table.find("cpd_lrtc"), std::string::npos);
    EXPECT_NE(table.find("1.50"), std::string::npos);
    EXPECT_NE(table.find("missing entries only"), std::string::npos);
}

} // namespace
} // namespace lrtc
